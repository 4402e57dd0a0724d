#include "ttekit/asr/model.hpp"

namespace ttekit::asr {

nlohmann::json AsrConfig::to_json() const {
  return {
      {"feat_dim", feat_dim},       {"enc_layers", enc_layers},
      {"enc_units", enc_units},     {"enc_proj", enc_proj},
      {"subsample_layers", subsample_layers},
      {"dec_units", dec_units},     {"embed_dim", embed_dim},
      {"attn_dim", attn_dim},       {"attn_filters", attn_filters},
      {"attn_width", attn_width},   {"vocab_size", vocab_size},
  };
}

AsrConfig AsrConfig::from_json(const nlohmann::json& j) {
  AsrConfig c;
  if (j.contains("preset")) {
    const std::string p = j.at("preset").get<std::string>();
    if (p == "desk") c = desk();
    else if (p == "paper_scale") c = paper_scale();
    else throw InputError("asr config: unknown preset " + p);
  }
  c.feat_dim = j.value("feat_dim", c.feat_dim);
  c.enc_layers = j.value("enc_layers", c.enc_layers);
  c.enc_units = j.value("enc_units", c.enc_units);
  c.enc_proj = j.value("enc_proj", c.enc_proj);
  if (j.contains("subsample_layers")) c.subsample_layers = j.at("subsample_layers").get<std::vector<int>>();
  c.dec_units = j.value("dec_units", c.dec_units);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.attn_dim = j.value("attn_dim", c.attn_dim);
  c.attn_filters = j.value("attn_filters", c.attn_filters);
  c.attn_width = j.value("attn_width", c.attn_width);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  return c;
}

AsrGroup asr_group_from_string(const std::string& name) {
  if (name == "encoder") return AsrGroup::encoder;
  if (name == "attention") return AsrGroup::attention;
  if (name == "decoder") return AsrGroup::decoder;
  if (name == "output") return AsrGroup::output;
  throw InputError("asr: unknown parameter group \"" + name + "\"");
}

}  // namespace ttekit::asr
