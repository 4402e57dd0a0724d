#pragma once

// 16-bit little-endian mono PCM in a RIFF container.

#include <string>
#include <vector>

namespace ttekit {

struct Waveform {
  std::vector<float> samples;  // amplitudes in [-1, 1]
  int sample_rate_hz = 16000;
};

void write_wav(const std::string& path, const Waveform& w);
Waveform read_wav(const std::string& path);

}  // namespace ttekit
