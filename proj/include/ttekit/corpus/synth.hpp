#pragma once

// Deterministic synthetic speech: each character becomes a fixed-duration
// tone segment with a character-specific base frequency. Characters are
// grouped into near-frequency pairs so that a recognizer must lean on the
// decoder's character history to tell pair members apart; a deterministic
// per-position jitter blurs the pairs further.

#include <string>

#include "ttekit/corpus/vocab.hpp"
#include "ttekit/io/wav.hpp"

namespace ttekit {

struct SynthConfig {
  int sample_rate_hz = 16000;
  double char_duration_ms = 40.0;
  double amplitude = 0.30;
  double harmonic_amplitude = 0.10;
  double noise_amplitude = 0.004;  // deterministic comfort noise; keeps the log-mel floor sane
  double pair_offset = 0.012;      // relative split between the two characters of a pair
  double jitter = 0.010;           // relative per-position frequency wobble
  double edge_ramp_ms = 2.0;
  double min_freq_hz = 250.0;
  double max_freq_hz = 3300.0;
};

// Base frequency of a character at a given text position (jitter included).
double synth_char_freq(char c, int position, const SynthConfig& cfg);

Waveform synth_utterance(const std::string& text, const SynthConfig& cfg, const Vocab& vocab);

}  // namespace ttekit
