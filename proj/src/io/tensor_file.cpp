#include "ttekit/io/tensor_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ttekit/error.hpp"

static_assert(std::endian::native == std::endian::little, "TTE1 io assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace ttekit {

void write_tensor_stream(std::ostream& os, const MatF& m) {
  os.write("TTE1", 4);
  std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  os.write(reinterpret_cast<const char*>(dims), 8);
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * 4));
}

MatF read_tensor_stream(std::istream& is, const std::string& what) {
  char magic[4];
  std::uint32_t dims[2];
  if (!is.read(magic, 4) || std::memcmp(magic, "TTE1", 4) != 0) {
    throw InputError("tensor: bad magic in " + what);
  }
  if (!is.read(reinterpret_cast<char*>(dims), 8)) throw InputError("tensor: truncated header in " + what);
  MatF m(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
  if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * 4))) {
    throw InputError("tensor: truncated data in " + what);
  }
  return m;
}

void write_tensor(const std::string& path, const MatF& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("tensor: cannot open for write: " + path);
  write_tensor_stream(os, m);
  if (!os) throw std::runtime_error("tensor: write failed: " + path);
}

MatF read_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("tensor: cannot open: " + path);
  return read_tensor_stream(is, path);
}

}  // namespace ttekit
