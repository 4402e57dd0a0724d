#pragma once

// Log Mel-filterbank features: Hann window, magnitude spectrum, triangular
// mel filters, natural log with a fixed floor.

#include "ttekit/io/wav.hpp"
#include "ttekit/mat.hpp"

namespace ttekit {

struct FrameConfig {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  int num_mels = 20;
  double mel_low_hz = 20.0;

  bool operator==(const FrameConfig&) const = default;
};

constexpr double kLogFloor = 1e-10;

struct AcousticFeatureSequence {
  MatF frames;  // T x D
  double frame_shift_ms = 10.0;
  double frame_length_ms = 25.0;
};

// Frame count for n samples; requires n >= frame length.
int logmel_num_frames(std::size_t n, int sample_rate_hz, const FrameConfig& cfg);

AcousticFeatureSequence logmel(const Waveform& w, const FrameConfig& cfg);

// Unit-peak triangular filterbank over FFT bin frequencies; exposed so tests
// can probe filter geometry. Row k holds filter k's weight per bin.
MatF mel_filterbank(int num_mels, int num_bins, double bin_hz, double low_hz, double high_hz);

}  // namespace ttekit
