#pragma once

// Batch assembly with paired/unpaired routing. Tensors are preloaded once;
// each epoch is a deterministic shuffle, partition, in-batch sort by input
// length, and zero-padding with an explicit mask.

#include <cstdint>
#include <string>
#include <vector>

#include "ttekit/corpus/logmel.hpp"
#include "ttekit/corpus/manifest.hpp"
#include "ttekit/corpus/synth.hpp"
#include "ttekit/corpus/vocab.hpp"
#include "ttekit/mat.hpp"

namespace ttekit {

enum class InputSource { features, stored_states, mixed };
enum class InputKind { features, states };

struct Batch {
  std::vector<std::string> ids;
  std::vector<InputKind> kinds;
  std::vector<MatF> inputs;        // each padded to the batch's max length with 0.0 rows
  std::vector<int> input_lengths;  // true row counts
  MatF input_mask;                 // B x T_max, 1 for real frames, 0 for padding
  std::vector<std::vector<int>> tokens;  // text with trailing <eos>, padded with <eos>
  std::vector<int> token_lengths;        // true token counts including the final <eos>
};

class BatchLoader {
 public:
  BatchLoader(const Manifest& manifest, const Vocab& vocab, const FrameConfig& frame_cfg,
              InputSource source, int batch_size);

  // Deterministic batch stream for one epoch.
  std::vector<Batch> epoch(std::uint64_t seed) const;

  int utterance_count() const { return static_cast<int>(tensors_.size()); }
  const MatF& tensor(int i) const { return tensors_[i]; }
  const std::vector<int>& utterance_tokens(int i) const { return tokens_[i]; }
  const std::string& utterance_id(int i) const { return ids_[i]; }
  InputKind kind(int i) const { return kinds_[i]; }

 private:
  std::vector<std::string> ids_;
  std::vector<InputKind> kinds_;
  std::vector<MatF> tensors_;
  std::vector<std::vector<int>> tokens_;
  int batch_size_;
  int eos_id_;
};

// One epoch of batches straight from a manifest.
std::vector<Batch> make_batches(const Manifest& manifest, const Vocab& vocab, const FrameConfig& frame_cfg,
                                int batch_size, InputSource source, std::uint64_t seed);

}  // namespace ttekit
