#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hollow/nn/masked.hpp"
#include "hollow/nn/mlp.hpp"
#include "hollow/nn/params.hpp"
#include "hollow/rng.hpp"

namespace hollow::nn {

struct HollowNetConfig {
  std::uint32_t d = 2;
  std::uint32_t d_h = 8;  // per-dimension hidden size, must be even
  std::vector<std::uint32_t> conditioner_hidden = {32};
  std::vector<std::uint32_t> transformer_hidden = {32, 32};
  Activation act = Activation::Tanh;
  bool time_input = false;      // append t to conditioner and transformer
  bool zero_init_output = false;  // final transformer layer starts at zero
  std::uint64_t seed = 0;
};

// Network whose Jacobian splits into a diagonal part (through the
// per-dimension transformer) and a hollow part (through the conditioner):
//   h_i = c_i(x_{-i})      two opposed masked nets, d_h/2 features each
//   f_i = tau(x_i, h_i)    one transformer, weights shared across dimensions
// Detaching h before the transformer makes the Jacobian of the result exactly
// diagonal, so one all-ones vjp per order yields the dimension-wise
// derivatives; hooks registered at the detach reconnect the severed edge for
// parameter gradients.
class HollowNet {
 public:
  static HollowNet create(HollowNetConfig cfg);

  const HollowNetConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  struct Eval {
    ad::NodeRef x;       // input node used
    ad::NodeRef h;       // conditioner output (d, d_h)
    ad::NodeRef h_used;  // h, or its detached copy when spliced
    ad::NodeRef f;       // output (d)
  };

  // Conditioner output h with h_i independent of x_i. (d, d_h)
  ad::NodeRef conditioner(ad::Tape& tape, const Bound& bound, ad::NodeRef x,
                          std::optional<ad::NodeRef> t = {}) const;

  // Transformer applied rowwise to [x_i, h_i (, t)]. (d)
  ad::NodeRef transformer(ad::Tape& tape, const Bound& bound, ad::NodeRef x,
                          ad::NodeRef h,
                          std::optional<ad::NodeRef> t = {}) const;

  // f(x) with the full live graph.
  Eval forward(ad::Tape& tape, const Bound& bound, ad::NodeRef x,
               std::optional<ad::NodeRef> t = {}) const;

  // f(x) evaluated through a detached h (same values; Jacobian wrt x is
  // diagonal in the backward graph). The detach is reconnectable, so
  // vjp_with_reconnect recovers exact parameter gradients.
  Eval forward_spliced(ad::Tape& tape, const Bound& bound, ad::NodeRef x,
                       std::optional<ad::NodeRef> t = {}) const;

  // Dimension-wise k-th derivatives (d^k f_i / d x_i^k)_i as a live node,
  // using exactly k reverse sweeps regardless of d. x must be a
  // requires-grad node.
  ad::NodeRef dim_derivative(ad::Tape& tape, const Bound& bound, ad::NodeRef x,
                             int k, std::optional<ad::NodeRef> t = {}) const;

  // Same, reusing an existing spliced evaluation (shares the forward pass).
  ad::NodeRef dim_derivative_from(ad::Tape& tape, const Eval& spliced, int k) const;

  // Sum of first-order dimension-wise derivatives: one sweep.
  ad::NodeRef divergence(ad::Tape& tape, const Bound& bound, ad::NodeRef x,
                         std::optional<ad::NodeRef> t = {}) const;

 private:
  HollowNetConfig cfg_;
  ParamSet params_;
  MaskedMlp fwd_net_, bwd_net_;
  Mlp transformer_;
};

}  // namespace hollow::nn
