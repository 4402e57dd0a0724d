#include "ttekit/corpus/synth.hpp"

#include <cmath>

#include "ttekit/error.hpp"
#include "ttekit/rng.hpp"

namespace ttekit {

namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// 15 tone groups: 13 letter pairs, space, apostrophe.
constexpr int kNumGroups = 15;

int char_group(char c) {
  if (c >= 'a' && c <= 'z') return (c - 'a') / 2;
  if (c == ' ') return 13;
  return 14;  // apostrophe
}

// Signed unit offset selecting the pair member; singles sit on the center.
double pair_member(char c) {
  if (c >= 'a' && c <= 'z') return ((c - 'a') % 2 == 0) ? -1.0 : 1.0;
  return 0.0;
}

double unit_jitter(int position) {
  Rng r(0x5eedu + static_cast<std::uint64_t>(position) * 0x9e3779b97f4a7c15ULL);
  return r.uniform() * 2.0 - 1.0;
}

}  // namespace

double synth_char_freq(char c, int position, const SynthConfig& cfg) {
  double mel_lo = hz_to_mel(cfg.min_freq_hz);
  double mel_hi = hz_to_mel(cfg.max_freq_hz);
  int g = char_group(c);
  double center = mel_to_hz(mel_lo + (mel_hi - mel_lo) * g / (kNumGroups - 1));
  double f = center * (1.0 + cfg.pair_offset * pair_member(c));
  return f * (1.0 + cfg.jitter * unit_jitter(position));
}

Waveform synth_utterance(const std::string& text, const SynthConfig& cfg, const Vocab& vocab) {
  if (text.empty()) throw InputError("synth: empty text");
  for (char c : text) {
    if (vocab.char_id(c) < 0) throw InputError(std::string("synth: unknown character '") + c + "'");
  }
  const int rate = cfg.sample_rate_hz;
  const auto seg_len = static_cast<std::size_t>(std::llround(cfg.char_duration_ms * rate / 1000.0));
  const auto ramp_len = static_cast<std::size_t>(std::llround(cfg.edge_ramp_ms * rate / 1000.0));

  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(seg_len * text.size());

  std::size_t at = 0;
  for (std::size_t p = 0; p < text.size(); ++p) {
    char c = text[p];
    double f = synth_char_freq(c, static_cast<int>(p), cfg);
    double amp = cfg.amplitude;
    double h_amp = cfg.harmonic_amplitude;
    if (c == ' ') {
      amp *= 0.15;  // word boundaries stay audible but quiet
      h_amp = 0.0;
    }
    double omega = 2.0 * kPi * f / rate;
    for (std::size_t k = 0; k < seg_len; ++k) {
      double s = amp * std::sin(omega * static_cast<double>(k)) +
                 h_amp * std::sin(2.0 * omega * static_cast<double>(k));
      if (ramp_len > 0) {
        if (k < ramp_len) s *= 0.5 * (1.0 - std::cos(kPi * static_cast<double>(k) / ramp_len));
        if (seg_len - 1 - k < ramp_len) {
          s *= 0.5 * (1.0 - std::cos(kPi * static_cast<double>(seg_len - 1 - k) / ramp_len));
        }
      }
      std::size_t idx = at + k;
      Rng nr(0x0015eULL ^ (static_cast<std::uint64_t>(idx) * 0xbf58476d1ce4e5b9ULL));
      s += cfg.noise_amplitude * (nr.uniform() * 2.0 - 1.0);
      if (s > 1.0) s = 1.0;
      if (s < -1.0) s = -1.0;
      w.samples[idx] = static_cast<float>(s);
    }
    at += seg_len;
  }
  return w;
}

}  // namespace ttekit
