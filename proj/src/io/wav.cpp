#include "ttekit/io/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ttekit/error.hpp"

namespace ttekit {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  os.write(b, 4);
}

void put_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
  os.write(b, 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t get_u16(const unsigned char* p) { return std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8; }

}  // namespace

void write_wav(const std::string& path, const Waveform& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("wav: cannot open for write: " + path);
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_bytes = n * 2;
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<std::uint32_t>(w.sample_rate_hz));
  put_u32(os, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (float s : w.samples) {
    float c = s < -1.0f ? -1.0f : (s > 1.0f ? 1.0f : s);
    auto q = static_cast<std::int16_t>(std::lrintf(c * 32767.0f));
    put_u16(os, static_cast<std::uint16_t>(q));
  }
  if (!os) throw std::runtime_error("wav: write failed: " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("wav: cannot open: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw InputError("wav: not a RIFF/WAVE file: " + path);
  }
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const char* tag = reinterpret_cast<const char*>(buf.data() + pos);
    std::uint32_t len = get_u32(buf.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + len > buf.size()) throw InputError("wav: truncated chunk in " + path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (len < 16) throw InputError("wav: short fmt chunk in " + path);
      if (get_u16(buf.data() + body) != 1) throw InputError("wav: only PCM supported: " + path);
      if (get_u16(buf.data() + body + 2) != 1) throw InputError("wav: only mono supported: " + path);
      w.sample_rate_hz = static_cast<int>(get_u32(buf.data() + body + 4));
      if (get_u16(buf.data() + body + 14) != 16) throw InputError("wav: only 16-bit supported: " + path);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw InputError("wav: data chunk before fmt in " + path);
      w.samples.resize(len / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        auto q = static_cast<std::int16_t>(get_u16(buf.data() + body + i * 2));
        w.samples[i] = static_cast<float>(q) / 32768.0f;
      }
      return w;
    }
    pos = body + len + (len & 1);
  }
  throw InputError("wav: no data chunk in " + path);
}

}  // namespace ttekit
