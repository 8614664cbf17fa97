#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hollow/nn/params.hpp"
#include "hollow/rng.hpp"

namespace hollow::nn {

enum class Activation { Tanh, Elu, Swish };

Activation activation_from_string(const std::string& s);
const char* activation_name(Activation a);

inline ad::NodeRef apply_activation(Activation a, ad::NodeRef x) {
  switch (a) {
    case Activation::Tanh: return ad::tanh(x);
    case Activation::Elu: return ad::elu(x);
    case Activation::Swish: return ad::swish(x);
  }
  throw ConfigError("unknown activation");
}

struct MlpConfig {
  std::uint32_t in = 1;
  std::uint32_t out = 1;
  std::vector<std::uint32_t> hidden;
  Activation act = Activation::Tanh;
  bool zero_init_last = false;
};

// Plain fully connected network. apply() accepts a vector (in) or a batch
// matrix (B,in) whose rows share the weights.
struct Mlp {
  MlpConfig cfg;
  std::vector<int> w_idx, b_idx;

  static Mlp create(ParamSet& ps, const std::string& prefix, MlpConfig cfg,
                    Rng& rng);

  ad::NodeRef apply(const Bound& bound, ad::NodeRef x) const;
};

}  // namespace hollow::nn
