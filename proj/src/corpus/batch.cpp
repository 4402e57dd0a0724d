#include "ttekit/corpus/batch.hpp"

#include <algorithm>
#include <numeric>

#include "ttekit/error.hpp"
#include "ttekit/io/tensor_file.hpp"
#include "ttekit/rng.hpp"

namespace ttekit {

namespace {

InputKind route(const ManifestEntry& e, InputSource source) {
  switch (source) {
    case InputSource::features:
      if (!e.audio_path) throw InputError("batch: entry \"" + e.id + "\" has no audio in features mode");
      return InputKind::features;
    case InputSource::stored_states:
      if (!e.states_path) throw InputError("batch: entry \"" + e.id + "\" has no states in stored_states mode");
      return InputKind::states;
    case InputSource::mixed:
      if (e.kind == EntryKind::paired) {
        if (!e.audio_path) throw InputError("batch: paired entry \"" + e.id + "\" has no audio");
        return InputKind::features;
      }
      if (e.kind == EntryKind::generated) return InputKind::states;  // validated below
      if (e.audio_path) return InputKind::features;
      if (e.states_path) return InputKind::states;
      throw InputError("batch: entry \"" + e.id + "\" resolves to neither audio nor states in mixed mode");
  }
  throw InputError("batch: bad input source");
}

}  // namespace

BatchLoader::BatchLoader(const Manifest& manifest, const Vocab& vocab, const FrameConfig& frame_cfg,
                         InputSource source, int batch_size)
    : batch_size_(batch_size), eos_id_(vocab.eos()) {
  if (batch_size < 1) throw InputError("batch: batch_size must be >= 1");
  manifest.validate();
  for (const auto& e : manifest.entries) {
    InputKind k = route(e, source);
    MatF tensor;
    if (k == InputKind::features) {
      tensor = logmel(read_wav(manifest.resolve(*e.audio_path)), frame_cfg).frames;
    } else {
      if (!e.states_path) throw InputError("batch: entry \"" + e.id + "\" has no states path");
      tensor = read_tensor(manifest.resolve(*e.states_path));
    }
    auto toks = vocab.encode(e.text);
    toks.push_back(vocab.eos());
    ids_.push_back(e.id);
    kinds_.push_back(k);
    tensors_.push_back(std::move(tensor));
    tokens_.push_back(std::move(toks));
  }
}

std::vector<Batch> BatchLoader::epoch(std::uint64_t seed) const {
  std::vector<int> order(tensors_.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t at = 0; at < order.size(); at += batch_size_) {
    std::size_t end = std::min(order.size(), at + batch_size_);
    std::vector<int> members(order.begin() + at, order.begin() + end);
    // Longest input first; stable tie-break keeps the shuffled order.
    std::stable_sort(members.begin(), members.end(),
                     [&](int a, int b) { return tensors_[a].rows() > tensors_[b].rows(); });

    Batch b;
    int t_max = 0, l_max = 0;
    for (int i : members) {
      t_max = std::max(t_max, tensors_[i].rows());
      l_max = std::max(l_max, static_cast<int>(tokens_[i].size()));
    }
    b.input_mask = MatF(static_cast<int>(members.size()), t_max);
    for (std::size_t row = 0; row < members.size(); ++row) {
      int i = members[row];
      const MatF& src = tensors_[i];
      MatF padded(t_max, src.cols());
      std::copy(src.data(), src.data() + src.size(), padded.data());
      b.ids.push_back(ids_[i]);
      b.kinds.push_back(kinds_[i]);
      b.inputs.push_back(std::move(padded));
      b.input_lengths.push_back(src.rows());
      for (int t = 0; t < src.rows(); ++t) b.input_mask(static_cast<int>(row), t) = 1.0f;
      auto toks = tokens_[i];
      b.token_lengths.push_back(static_cast<int>(toks.size()));
      toks.resize(l_max, eos_id_);
      b.tokens.push_back(std::move(toks));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<Batch> make_batches(const Manifest& manifest, const Vocab& vocab, const FrameConfig& frame_cfg,
                                int batch_size, InputSource source, std::uint64_t seed) {
  return BatchLoader(manifest, vocab, frame_cfg, source, batch_size).epoch(seed);
}

}  // namespace ttekit
