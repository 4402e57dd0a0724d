#pragma once

// ckpt-v1 container: uint32 metadata length + JSON metadata, then uint32
// tensor count and per tensor a length-prefixed name with a TTE1 block.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ttekit/mat.hpp"
#include "ttekit/nn/modules.hpp"

namespace ttekit {

struct Checkpoint {
  nlohmann::json metadata;  // carries "format": "ckpt-v1"
  std::vector<std::pair<std::string, MatF>> tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

template <typename T>
void collect_tensors(Checkpoint& ckpt, const nn::ParameterSet<T>& params) {
  for (const auto& p : params.all()) {
    if constexpr (std::is_same_v<T, float>) {
      ckpt.tensors.emplace_back(p->name, p->value);
    } else {
      ckpt.tensors.emplace_back(p->name, p->value.template cast<float>());
    }
  }
}

template <typename T>
void restore_tensors(const Checkpoint& ckpt, nn::ParameterSet<T>& params) {
  for (const auto& [name, tensor] : ckpt.tensors) {
    nn::Parameter<T>* p = params.find(name);
    if (!p) throw InputError("checkpoint: unknown tensor " + name);
    if (p->value.rows() != tensor.rows() || p->value.cols() != tensor.cols()) {
      throw InputError("checkpoint: shape mismatch for " + name);
    }
    if constexpr (std::is_same_v<T, float>) {
      p->value = tensor;
    } else {
      p->value = tensor.template cast<T>();
    }
  }
}

}  // namespace ttekit
