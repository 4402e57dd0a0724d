#include "ttekit/corpus/logmel.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "ttekit/error.hpp"

namespace ttekit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        auto u = a[i + k];
        auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

MatF mel_filterbank(int num_mels, int num_bins, double bin_hz, double low_hz, double high_hz) {
  MatF fb(num_mels, num_bins);
  double mel_lo = hz_to_mel(low_hz);
  double mel_hi = hz_to_mel(high_hz);
  std::vector<double> edges(num_mels + 2);
  for (int i = 0; i < num_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (num_mels + 1));
  }
  for (int k = 0; k < num_mels; ++k) {
    double l = edges[k], c = edges[k + 1], r = edges[k + 2];
    for (int b = 0; b < num_bins; ++b) {
      double f = b * bin_hz;
      double w = 0.0;
      if (f > l && f < c) w = (f - l) / (c - l);
      else if (f == c) w = 1.0;
      else if (f > c && f < r) w = (r - f) / (r - c);
      fb(k, b) = static_cast<float>(w);
    }
  }
  return fb;
}

int logmel_num_frames(std::size_t n, int sample_rate_hz, const FrameConfig& cfg) {
  const auto frame_len = static_cast<std::size_t>(std::llround(cfg.frame_length_ms * sample_rate_hz / 1000.0));
  const auto shift = static_cast<std::size_t>(std::llround(cfg.frame_shift_ms * sample_rate_hz / 1000.0));
  if (n < frame_len) throw InputError("logmel: waveform shorter than one frame");
  return static_cast<int>(1 + (n - frame_len) / shift);
}

AcousticFeatureSequence logmel(const Waveform& w, const FrameConfig& cfg) {
  const int rate = w.sample_rate_hz;
  const auto frame_len = static_cast<std::size_t>(std::llround(cfg.frame_length_ms * rate / 1000.0));
  const auto shift = static_cast<std::size_t>(std::llround(cfg.frame_shift_ms * rate / 1000.0));
  const int num_frames = logmel_num_frames(w.samples.size(), rate, cfg);
  const std::size_t nfft = next_pow2(frame_len);
  const int num_bins = static_cast<int>(nfft / 2 + 1);
  const double bin_hz = static_cast<double>(rate) / static_cast<double>(nfft);

  std::vector<double> window(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(frame_len - 1));
  }
  MatF fb = mel_filterbank(cfg.num_mels, num_bins, bin_hz, cfg.mel_low_hz, rate / 2.0);

  AcousticFeatureSequence out;
  out.frames = MatF(num_frames, cfg.num_mels);
  out.frame_shift_ms = cfg.frame_shift_ms;
  out.frame_length_ms = cfg.frame_length_ms;

  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> mag(num_bins);
  for (int t = 0; t < num_frames; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * shift;
    for (std::size_t i = 0; i < nfft; ++i) {
      double s = i < frame_len ? static_cast<double>(w.samples[off + i]) * window[i] : 0.0;
      buf[i] = {s, 0.0};
    }
    fft(buf);
    for (int b = 0; b < num_bins; ++b) mag[b] = std::abs(buf[b]);
    for (int k = 0; k < cfg.num_mels; ++k) {
      double e = 0.0;
      const float* fk = fb.row(k);
      for (int b = 0; b < num_bins; ++b) e += fk[b] * mag[b];
      out.frames(t, k) = static_cast<float>(std::log(std::max(e, kLogFloor)));
    }
  }
  return out;
}

}  // namespace ttekit
