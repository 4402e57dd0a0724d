#include "ttekit/asr/train.hpp"

#include <filesystem>
#include <thread>

#include "ttekit/io/tensor_file.hpp"
#include "ttekit/nn/optim.hpp"

namespace fs = std::filesystem;

namespace ttekit::asr {

nlohmann::json AsrTrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr", lr},
          {"grad_clip", grad_clip},
          {"adadelta_rho", adadelta_rho},
          {"adadelta_eps", adadelta_eps},
          {"eps_decay", eps_decay},
          {"seed", seed}};
}

AsrTrainConfig AsrTrainConfig::from_json(const nlohmann::json& j) {
  AsrTrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.adadelta_rho = j.value("adadelta_rho", c.adadelta_rho);
  c.adadelta_eps = j.value("adadelta_eps", c.adadelta_eps);
  c.eps_decay = j.value("eps_decay", c.eps_decay);
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json TrainLog::to_json() const {
  nlohmann::json out;
  out["best_epoch"] = best_epoch;
  out["best_valid"] = best_valid;
  out["epochs"] = nlohmann::json::array();
  for (const auto& e : epochs) {
    out["epochs"].push_back({{"epoch", e.epoch},
                             {"train_loss", e.train_loss},
                             {"valid_loss", e.valid_loss},
                             {"optimizer_eps", e.optimizer_eps}});
  }
  return out;
}

double asr_dataset_loss(AsrModel<float>& model, const BatchLoader& loader, int sos_id) {
  double total = 0.0;
  long tokens = 0;
  for (const Batch& batch : loader.epoch(0)) {
    nn::Graph<float> g(/*recording=*/false);
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
      auto nll = model.utterance_nll(g, model.batch_item_states(g, batch, i), batch.tokens[i],
                                     batch.token_lengths[i], sos_id);
      total += g.value(nll)(0, 0);
      tokens += batch.token_lengths[i];
    }
  }
  if (tokens == 0) throw InputError("asr: empty dataset");
  return total / static_cast<double>(tokens);
}

TrainLog train_asr(AsrModel<float>& model, const Manifest& train, const Manifest& valid, const Vocab& vocab,
                   const FrameConfig& frame_cfg, const AsrTrainConfig& cfg) {
  if (train.entries.empty()) throw InputError("asr: empty training manifest");
  BatchLoader train_loader(train, vocab, frame_cfg, cfg.source, cfg.batch_size);
  BatchLoader valid_loader(valid, vocab, frame_cfg, cfg.source, cfg.batch_size);

  nn::Adadelta<float> opt(model.params(), cfg.adadelta_rho, cfg.adadelta_eps);
  TrainLog log;
  std::vector<MatF> best_values;
  const int sos = vocab.sos();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double train_total = 0.0;
    long train_tokens = 0;
    for (const Batch& batch : train_loader.epoch(Rng::mix(cfg.seed, epoch))) {
      nn::Graph<float> g;
      auto loss = model.batch_loss(g, batch, sos);
      g.backward(loss.mean_nll);
      train_total += static_cast<double>(g.value(loss.mean_nll)(0, 0)) * loss.tokens;
      train_tokens += loss.tokens;
      nn::clip_global_norm(model.params(), cfg.grad_clip);
      opt.step(cfg.lr);
      model.params().zero_grads();
    }
    const double train_loss = train_total / static_cast<double>(train_tokens);
    const double valid_loss = asr_dataset_loss(model, valid_loader, sos);
    log.epochs.push_back({epoch, train_loss, valid_loss, opt.eps()});

    if (log.best_epoch < 0 || valid_loss < log.best_valid) {
      log.best_valid = valid_loss;
      log.best_epoch = epoch;
      best_values.clear();
      for (const auto& p : model.params().all()) best_values.push_back(p->value);
    } else {
      opt.scale_eps(cfg.eps_decay);
    }
  }

  if (!best_values.empty()) {
    auto& ps = model.params().all();
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value = best_values[i];
  }
  return log;
}

Manifest extract_states(AsrModel<float>& model, const Manifest& manifest, const Vocab& vocab,
                        const FrameConfig& frame_cfg, const std::string& out_dir, int jobs) {
  (void)vocab;
  fs::create_directories(out_dir);
  Manifest out;
  out.base_dir = out_dir;
  out.entries = manifest.entries;

  std::vector<std::string> errors(manifest.entries.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < manifest.entries.size(); i += step) {
      const auto& e = manifest.entries[i];
      try {
        if (!e.audio_path) throw InputError("extract: entry \"" + e.id + "\" has no audio");
        auto feats = logmel(read_wav(manifest.resolve(*e.audio_path)), frame_cfg);
        nn::Graph<float> g(/*recording=*/false);
        auto states = model.encode(g, feats.frames);
        write_tensor((fs::path(out_dir) / (e.id + ".tte1")).string(), g.value(states));
      } catch (const std::exception& ex) {
        errors[i] = std::string("extract: ") + e.id + ": " + ex.what();
      }
    }
  };
  if (jobs <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work, static_cast<std::size_t>(j), jobs);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw std::runtime_error(err);
  }

  for (auto& e : out.entries) {
    e.states_path = e.id + ".tte1";
    if (e.audio_path) {
      e.audio_path = fs::proximate(manifest.resolve(*e.audio_path), out_dir).string();
    }
  }
  return out;
}

}  // namespace ttekit::asr
