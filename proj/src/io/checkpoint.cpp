#include "ttekit/io/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "ttekit/error.hpp"
#include "ttekit/io/tensor_file.hpp"

namespace ttekit {

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json meta = ckpt.metadata;
  meta["format"] = "ckpt-v1";
  const std::string body = meta.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("checkpoint: cannot open for write: " + path);
  auto put_u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
  put_u32(static_cast<std::uint32_t>(body.size()));
  os.write(body.data(), static_cast<std::streamsize>(body.size()));
  put_u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    put_u32(static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor_stream(os, tensor);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("checkpoint: cannot open: " + path);
  auto get_u32 = [&](const char* what) {
    std::uint32_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) {
      throw InputError(std::string("checkpoint: truncated ") + what + " in " + path);
    }
    return v;
  };
  Checkpoint ckpt;
  std::string body(get_u32("metadata length"), '\0');
  if (!is.read(body.data(), static_cast<std::streamsize>(body.size()))) {
    throw InputError("checkpoint: truncated metadata in " + path);
  }
  try {
    ckpt.metadata = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("checkpoint: bad metadata in " + path + ": " + e.what());
  }
  if (ckpt.metadata.value("format", "") != "ckpt-v1") {
    throw InputError("checkpoint: unsupported format in " + path);
  }
  const std::uint32_t count = get_u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(get_u32("tensor name length"), '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(name.size()))) {
      throw InputError("checkpoint: truncated tensor name in " + path);
    }
    ckpt.tensors.emplace_back(std::move(name), read_tensor_stream(is, path));
  }
  return ckpt;
}

}  // namespace ttekit
