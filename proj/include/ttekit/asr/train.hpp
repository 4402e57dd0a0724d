#pragma once

// AdaDelta training loop with global-norm clipping, epsilon decay on
// validation plateau, and best-validation checkpointing.

#include <json.hpp>

#include "ttekit/asr/model.hpp"
#include "ttekit/corpus/batch.hpp"

namespace ttekit::asr {

struct AsrTrainConfig {
  int epochs = 20;
  int batch_size = 8;
  double lr = 1.0;
  double grad_clip = 5.0;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-8;
  double eps_decay = 1e-2;  // applied when validation loss fails to improve
  InputSource source = InputSource::features;
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static AsrTrainConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
  int epoch;
  double train_loss;
  double valid_loss;
  double optimizer_eps;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  double best_valid = 0.0;

  nlohmann::json to_json() const;
};

// Mean per-token NLL over a manifest in eval mode.
double asr_dataset_loss(AsrModel<float>& model, const BatchLoader& loader, int sos_id);

// Trains in place; the model ends at the best-validation parameters.
TrainLog train_asr(AsrModel<float>& model, const Manifest& train, const Manifest& valid, const Vocab& vocab,
                   const FrameConfig& frame_cfg, const AsrTrainConfig& cfg);

// Eval-mode encoder states for every entry; tensors land in out_dir as
// <id>.tte1 and the returned manifest points at them (audio rebased).
Manifest extract_states(AsrModel<float>& model, const Manifest& manifest, const Vocab& vocab,
                        const FrameConfig& frame_cfg, const std::string& out_dir, int jobs = 1);

}  // namespace ttekit::asr
