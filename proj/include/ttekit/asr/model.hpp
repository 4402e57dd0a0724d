#pragma once

// Attention-based encoder-decoder ASR model: BLSTMP encoder with x4
// subsampling, location-aware attention fed by the previous step's weights,
// single-layer LSTM decoder, linear output layer over the vocabulary.

#include <json.hpp>

#include "ttekit/corpus/batch.hpp"
#include "ttekit/nn/modules.hpp"

namespace ttekit::asr {

struct AsrConfig {
  int feat_dim = 20;
  int enc_layers = 2;
  int enc_units = 64;
  int enc_proj = 64;  // encoder state dim H, the TTE target dim
  std::vector<int> subsample_layers = {0, 1};
  int dec_units = 64;
  int embed_dim = 32;
  int attn_dim = 64;
  int attn_filters = 10;
  int attn_width = 15;
  int vocab_size = 31;

  static AsrConfig desk() { return {}; }

  // Mirrors the reference experiment's encoder/decoder/attention sizes.
  static AsrConfig paper_scale() {
    AsrConfig c;
    c.feat_dim = 80;
    c.enc_layers = 8;
    c.enc_units = 320;
    c.enc_proj = 320;
    c.subsample_layers = {1, 2};  // second and third layers from the bottom
    c.dec_units = 320;
    c.embed_dim = 320;
    c.attn_dim = 300;
    c.attn_filters = 10;
    c.attn_width = 101;  // odd width closest to the reference size 100
    return c;
  }

  nlohmann::json to_json() const;
  static AsrConfig from_json(const nlohmann::json& j);
};

// Parameter groups addressable by freeze specs.
enum class AsrGroup { encoder, attention, decoder, output };
AsrGroup asr_group_from_string(const std::string& name);

template <typename T>
class AsrModel {
 public:
  AsrModel(const AsrConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    Rng rng(Rng::mix(seed, 0xa572));
    encoder_ = nn::Blstmp<T>(params_, "encoder", cfg.enc_layers, cfg.enc_units, cfg.enc_proj,
                             cfg.feat_dim, cfg.subsample_layers, rng);
    attention_ = nn::LocationAttention<T>(params_, "attention", cfg.attn_dim, cfg.dec_units, cfg.enc_proj,
                                          cfg.attn_filters, cfg.attn_width, nn::AttentionMode::previous, rng);
    embed_ = nn::Embedding<T>(params_, "decoder.embed", cfg.vocab_size, cfg.embed_dim, rng);
    decoder_ = nn::LstmCell<T>(params_, "decoder.lstm", cfg.dec_units, cfg.enc_proj + cfg.embed_dim, rng);
    output_ = nn::Linear<T>(params_, "output", cfg.vocab_size, cfg.dec_units, rng);
  }

  const AsrConfig& config() const { return cfg_; }
  nn::ParameterSet<T>& params() { return params_; }
  const nn::ParameterSet<T>& params() const { return params_; }

  // Encoder: T x D features -> T' x H states in (-1, 1).
  nn::Expr<T> encode(nn::Graph<T>& g, const Mat<T>& feats) const {
    if (feats.cols() != cfg_.feat_dim) throw InputError("asr: feature dimension mismatch");
    if (feats.rows() < 1) throw InputError("asr: empty feature sequence");
    return encoder_.apply(g, g.constant(feats));
  }

  int subsampled_length(int t) const {
    return nn::Blstmp<T>::output_length(t, static_cast<int>(cfg_.subsample_layers.size()));
  }

  struct DecoderState {
    nn::Expr<T> enc_states;
    nn::Expr<T> enc_proj;
    Mat<T> mask;
    nn::LstmState<T> lstm;
    nn::AttentionContext<T> att;
    nn::Expr<T> last_weights;  // set after the first step
  };

  DecoderState begin(nn::Graph<T>& g, nn::Expr<T> enc_states) const {
    const int t = g.value(enc_states).rows();
    if (t < 1) throw InputError("asr: empty encoder state sequence");
    DecoderState s;
    s.enc_states = enc_states;
    s.enc_proj = attention_.prepare(g, enc_states);
    s.mask = Mat<T>(t, 1);
    s.mask.fill(T{1});
    s.lstm = decoder_.initial_state(g);
    s.att = attention_.initial_context(g, t);
    return s;
  }

  // One teacher-forced / search step: returns the pre-softmax logits.
  nn::Expr<T> step(nn::Graph<T>& g, DecoderState& s, int prev_char) const {
    auto att = attention_.apply(g, s.lstm.h, s.enc_states, s.enc_proj, s.att, s.mask);
    s.att = att.ctx;
    s.last_weights = att.weights;
    nn::Expr<T> x = concat_rows(att.context, embed_.lookup(g, prev_char));
    s.lstm = decoder_.step(g, x, s.lstm, 0.0, false, nullptr);
    return output_.apply(g, s.lstm.h);
  }

  // Sum of per-token NLL for one utterance under teacher forcing.
  // `targets` is the text plus a final <eos>; `len` its true length.
  nn::Expr<T> utterance_nll(nn::Graph<T>& g, nn::Expr<T> enc_states, const std::vector<int>& targets,
                            int len, int sos_id) const {
    if (len < 1) throw InputError("asr: empty target");
    DecoderState s = begin(g, enc_states);
    nn::Expr<T> total;
    for (int l = 0; l < len; ++l) {
      const int prev = l == 0 ? sos_id : targets[l - 1];
      nn::Expr<T> nll = cross_entropy(step(g, s, prev), targets[l]);
      total = l == 0 ? nll : add(total, nll);
    }
    return total;
  }

  // Routed input: padded tensors are cut to their true length; states bypass
  // the encoder (Fig. 3 routing).
  nn::Expr<T> batch_item_states(nn::Graph<T>& g, const Batch& batch, std::size_t i) const {
    Mat<T> input;
    if constexpr (std::is_same_v<T, float>) {
      input = batch.inputs[i].top_rows(batch.input_lengths[i]);
    } else {
      input = batch.inputs[i].top_rows(batch.input_lengths[i]).template cast<T>();
    }
    if (batch.kinds[i] == InputKind::features) return encode(g, input);
    if (input.cols() != cfg_.enc_proj) throw InputError("asr: stored state dimension mismatch");
    return g.constant(std::move(input));
  }

  struct BatchLoss {
    nn::Expr<T> mean_nll;  // scalar graph node
    int tokens = 0;
  };

  // Mean NLL per non-padded target token over the batch.
  BatchLoss batch_loss(nn::Graph<T>& g, const Batch& batch, int sos_id) const {
    nn::Expr<T> total;
    int tokens = 0;
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
      nn::Expr<T> nll =
          utterance_nll(g, batch_item_states(g, batch, i), batch.tokens[i], batch.token_lengths[i], sos_id);
      total = i == 0 ? nll : add(total, nll);
      tokens += batch.token_lengths[i];
    }
    return {scale(total, 1.0 / tokens), tokens};
  }

  // Freeze spec over the four named groups; unknown names are rejected.
  void set_trainable(const std::vector<std::pair<std::string, bool>>& spec) {
    for (const auto& [group, flag] : spec) {
      asr_group_from_string(group);  // validates
      params_.set_trainable_prefix(group + ".", flag);
    }
  }

 private:
  AsrConfig cfg_;
  nn::ParameterSet<T> params_;
  nn::Blstmp<T> encoder_;
  nn::LocationAttention<T> attention_;
  nn::Embedding<T> embed_;
  nn::LstmCell<T> decoder_;
  nn::Linear<T> output_;
};

}  // namespace ttekit::asr
