#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hollow/nn/mlp.hpp"
#include "hollow/nn/params.hpp"
#include "hollow/rng.hpp"

namespace hollow::nn {

enum class MaskOrdering { Increasing, Decreasing };

// MADE-style strict autoregressive masks. Output block i (per_dim_outputs
// rows) connects only to inputs strictly before dimension i in the ordering
// (after it, for Decreasing). The trailing extra_inputs columns of the first
// layer are mask-exempt (fully connected) — used for conditioning variables
// like time, which are not differentiated dimension-wise.
//
// hidden_sizes may be empty (single masked linear layer). A hidden layer
// narrower than d with d > 1 cannot cover the degree range and is an error.
std::vector<Tensor> build_masks(std::uint32_t d,
                                const std::vector<std::uint32_t>& hidden_sizes,
                                std::uint32_t per_dim_outputs,
                                MaskOrdering ordering,
                                std::uint32_t extra_inputs = 0);

// Fully connected network with multiplicative binary weight masks; the
// effective weight is W ⊙ M, so masked entries contribute exactly zero to
// both outputs and gradients. Maps (d + extra) -> d * per_dim_outputs.
struct MaskedMlp {
  std::uint32_t d = 0;
  std::uint32_t per_dim_outputs = 1;
  std::uint32_t extra_inputs = 0;
  Activation act = Activation::Tanh;
  std::vector<Tensor> masks;
  std::vector<int> w_idx, b_idx;

  static MaskedMlp create(ParamSet& ps, const std::string& prefix,
                          std::uint32_t d,
                          const std::vector<std::uint32_t>& hidden_sizes,
                          std::uint32_t per_dim_outputs, MaskOrdering ordering,
                          std::uint32_t extra_inputs, Activation act, Rng& rng);

  // x: vector of length d + extra_inputs. Returns d * per_dim_outputs.
  ad::NodeRef apply(ad::Tape& tape, const Bound& bound, ad::NodeRef x) const;
};

}  // namespace hollow::nn
