#include "hollow/nn/hollownet.hpp"

namespace hollow::nn {

using ad::NodeRef;
using ad::Tape;

HollowNet HollowNet::create(HollowNetConfig cfg) {
  if (cfg.d < 1) throw ConfigError("hollownet: d must be >= 1");
  if (cfg.d_h % 2 != 0)
    throw ConfigError("hollownet: d_h must be even (two conditioner halves), got " +
                      std::to_string(cfg.d_h));
  HollowNet net;
  net.cfg_ = cfg;
  Rng rng(cfg.seed);
  Rng r_fwd = rng.spawn(1), r_bwd = rng.spawn(2), r_tau = rng.spawn(3);
  const std::uint32_t half = cfg.d_h / 2;
  const std::uint32_t extra = cfg.time_input ? 1 : 0;
  net.fwd_net_ = MaskedMlp::create(net.params_, "cond.fwd", cfg.d,
                                   cfg.conditioner_hidden, half,
                                   MaskOrdering::Increasing, extra, cfg.act, r_fwd);
  net.bwd_net_ = MaskedMlp::create(net.params_, "cond.bwd", cfg.d,
                                   cfg.conditioner_hidden, half,
                                   MaskOrdering::Decreasing, extra, cfg.act, r_bwd);
  MlpConfig tau;
  tau.in = 1 + cfg.d_h + extra;
  tau.out = 1;
  tau.hidden = cfg.transformer_hidden;
  tau.act = cfg.act;
  tau.zero_init_last = cfg.zero_init_output;
  net.transformer_ = Mlp::create(net.params_, "tau", tau, r_tau);
  return net;
}

NodeRef HollowNet::conditioner(Tape& tape, const Bound& bound, NodeRef x,
                               std::optional<NodeRef> t) const {
  if (x.shape() != Shape::vec(cfg_.d))
    throw ShapeError("hollownet: input shape " + x.shape().str() +
                     ", expected " + Shape::vec(cfg_.d).str());
  if (cfg_.time_input != t.has_value())
    throw ConfigError("hollownet: time input mismatch with configuration");
  NodeRef in = x;
  if (t) in = ad::concat(x, ad::reshape(*t, Shape::vec(1)), 0);
  const std::uint32_t half = cfg_.d_h / 2;
  NodeRef fwd = fwd_net_.apply(tape, bound, in);
  NodeRef bwd = bwd_net_.apply(tape, bound, in);
  // block layout (d*half) row-major is exactly (d, half)
  NodeRef fwd_m = ad::reshape(fwd, Shape::mat(cfg_.d, half));
  NodeRef bwd_m = ad::reshape(bwd, Shape::mat(cfg_.d, half));
  return ad::concat(fwd_m, bwd_m, 1);
}

NodeRef HollowNet::transformer(Tape& tape, const Bound& bound, NodeRef x,
                               NodeRef h, std::optional<NodeRef> t) const {
  NodeRef x_col = ad::reshape(x, Shape::mat(cfg_.d, 1));
  NodeRef in = t ? ad::concat(x_col, h,
                              ad::broadcast_to(*t, Shape::mat(cfg_.d, 1)), 1)
                 : ad::concat(x_col, h, 1);
  NodeRef out = transformer_.apply(bound, in);  // (d, 1)
  (void)tape;
  return ad::reshape(out, Shape::vec(cfg_.d));
}

HollowNet::Eval HollowNet::forward(Tape& tape, const Bound& bound, NodeRef x,
                                   std::optional<NodeRef> t) const {
  NodeRef h = conditioner(tape, bound, x, t);
  return Eval{x, h, h, transformer(tape, bound, x, h, t)};
}

HollowNet::Eval HollowNet::forward_spliced(Tape& tape, const Bound& bound,
                                           NodeRef x,
                                           std::optional<NodeRef> t) const {
  NodeRef h = conditioner(tape, bound, x, t);
  NodeRef h_hat = tape.detach(h, /*reconnectable=*/true);
  return Eval{x, h, h_hat, transformer(tape, bound, x, h_hat, t)};
}

NodeRef HollowNet::dim_derivative_from(Tape& tape, const Eval& spliced,
                                       int k) const {
  if (k < 1) throw ConfigError("dim_derivative: k must be >= 1");
  NodeRef g = spliced.f;
  for (int i = 0; i < k; ++i) {
    NodeRef ones = tape.ones(g.shape());
    g = ad::vjp(g, ones).of(spliced.x);
  }
  return g;
}

NodeRef HollowNet::dim_derivative(Tape& tape, const Bound& bound, NodeRef x,
                                  int k, std::optional<NodeRef> t) const {
  Eval ev = forward_spliced(tape, bound, x, t);
  return dim_derivative_from(tape, ev, k);
}

NodeRef HollowNet::divergence(Tape& tape, const Bound& bound, NodeRef x,
                              std::optional<NodeRef> t) const {
  return ad::sum(dim_derivative(tape, bound, x, 1, t));
}

}  // namespace hollow::nn
