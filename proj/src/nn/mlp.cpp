#include "hollow/nn/mlp.hpp"

#include <cmath>

namespace hollow::nn {

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "elu") return Activation::Elu;
  if (s == "swish") return Activation::Swish;
  throw ConfigError("unknown activation '" + s + "' (tanh|elu|swish)");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Elu: return "elu";
    case Activation::Swish: return "swish";
  }
  return "?";
}

namespace {
Tensor uniform_fan_in(std::uint32_t out, std::uint32_t in, Rng& rng) {
  Tensor w(Shape::mat(out, in));
  const double bound = 1.0 / std::sqrt(double(in));
  for (double& v : w.v) v = rng.uniform(-bound, bound);
  return w;
}
}  // namespace

Mlp Mlp::create(ParamSet& ps, const std::string& prefix, MlpConfig cfg,
                Rng& rng) {
  Mlp net;
  net.cfg = cfg;
  std::vector<std::uint32_t> widths;
  widths.push_back(cfg.in);
  for (auto h : cfg.hidden) widths.push_back(h);
  widths.push_back(cfg.out);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = (l + 2 == widths.size());
    Tensor w = (last && cfg.zero_init_last)
                   ? Tensor::zeros(Shape::mat(widths[l + 1], widths[l]))
                   : uniform_fan_in(widths[l + 1], widths[l], rng);
    net.w_idx.push_back(ps.add(prefix + ".w" + std::to_string(l), std::move(w)));
    net.b_idx.push_back(ps.add(prefix + ".b" + std::to_string(l),
                               Tensor::zeros(Shape::vec(widths[l + 1]))));
  }
  return net;
}

ad::NodeRef Mlp::apply(const Bound& bound, ad::NodeRef x) const {
  const bool batched = x.shape().rank == 2;
  ad::NodeRef h = x;
  for (std::size_t l = 0; l < w_idx.size(); ++l) {
    ad::NodeRef w = bound[w_idx[l]];
    ad::NodeRef b = bound[b_idx[l]];
    h = batched ? ad::matmul(h, w, false, true) + b : ad::matmul(w, h) + b;
    if (l + 1 < w_idx.size()) h = apply_activation(cfg.act, h);
  }
  return h;
}

}  // namespace hollow::nn
