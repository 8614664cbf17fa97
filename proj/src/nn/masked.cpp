#include "hollow/nn/masked.hpp"

#include <cmath>

namespace hollow::nn {

namespace {

// 1-based autoregressive degree of input/output dimension i under the
// ordering.
std::uint32_t degree(std::uint32_t i, std::uint32_t d, MaskOrdering ord) {
  return ord == MaskOrdering::Increasing ? i + 1 : d - i;
}

}  // namespace

std::vector<Tensor> build_masks(std::uint32_t d,
                                const std::vector<std::uint32_t>& hidden_sizes,
                                std::uint32_t per_dim_outputs,
                                MaskOrdering ordering,
                                std::uint32_t extra_inputs) {
  if (d < 1) throw ConfigError("build_masks: d must be >= 1");
  for (auto h : hidden_sizes)
    if (d > 1 && h < d)
      throw ConfigError("build_masks: hidden layer of width " +
                        std::to_string(h) + " is narrower than d=" +
                        std::to_string(d) + "; cannot assign degrees");

  // hidden unit degrees cycle over 1..d-1 (0 when d == 1: sees no input)
  auto hidden_degree = [&](std::uint32_t u) -> std::uint32_t {
    return d >= 2 ? 1 + (u % (d - 1)) : 0;
  };

  std::vector<Tensor> masks;
  if (hidden_sizes.empty()) {
    // direct masked linear: strict ordering between inputs and outputs
    Tensor m(Shape::mat(d * per_dim_outputs, d + extra_inputs));
    for (std::uint32_t i = 0; i < d; ++i)
      for (std::uint32_t j = 0; j < per_dim_outputs; ++j) {
        for (std::uint32_t c = 0; c < d; ++c)
          m.at(i * per_dim_outputs + j, c) =
              degree(c, d, ordering) < degree(i, d, ordering) ? 1.0 : 0.0;
        for (std::uint32_t e = 0; e < extra_inputs; ++e)
          m.at(i * per_dim_outputs + j, d + e) = 1.0;
      }
    masks.push_back(std::move(m));
    return masks;
  }

  // first layer: hidden u sees inputs with degree <= deg(u); extras exempt
  {
    Tensor m(Shape::mat(hidden_sizes[0], d + extra_inputs));
    for (std::uint32_t u = 0; u < hidden_sizes[0]; ++u) {
      for (std::uint32_t c = 0; c < d; ++c)
        m.at(u, c) = degree(c, d, ordering) <= hidden_degree(u) ? 1.0 : 0.0;
      for (std::uint32_t e = 0; e < extra_inputs; ++e) m.at(u, d + e) = 1.0;
    }
    masks.push_back(std::move(m));
  }
  // hidden-to-hidden: non-decreasing degrees
  for (std::size_t l = 1; l < hidden_sizes.size(); ++l) {
    Tensor m(Shape::mat(hidden_sizes[l], hidden_sizes[l - 1]));
    for (std::uint32_t u2 = 0; u2 < hidden_sizes[l]; ++u2)
      for (std::uint32_t u1 = 0; u1 < hidden_sizes[l - 1]; ++u1)
        m.at(u2, u1) = hidden_degree(u1) <= hidden_degree(u2) ? 1.0 : 0.0;
    masks.push_back(std::move(m));
  }
  // output block i sees hidden units with degree strictly below deg(i)
  {
    Tensor m(Shape::mat(d * per_dim_outputs, hidden_sizes.back()));
    for (std::uint32_t i = 0; i < d; ++i)
      for (std::uint32_t j = 0; j < per_dim_outputs; ++j)
        for (std::uint32_t u = 0; u < hidden_sizes.back(); ++u)
          m.at(i * per_dim_outputs + j, u) =
              hidden_degree(u) < degree(i, d, ordering) ? 1.0 : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

MaskedMlp MaskedMlp::create(ParamSet& ps, const std::string& prefix,
                            std::uint32_t d,
                            const std::vector<std::uint32_t>& hidden_sizes,
                            std::uint32_t per_dim_outputs,
                            MaskOrdering ordering, std::uint32_t extra_inputs,
                            Activation act, Rng& rng) {
  MaskedMlp net;
  net.d = d;
  net.per_dim_outputs = per_dim_outputs;
  net.extra_inputs = extra_inputs;
  net.act = act;
  net.masks = build_masks(d, hidden_sizes, per_dim_outputs, ordering, extra_inputs);
  for (std::size_t l = 0; l < net.masks.size(); ++l) {
    const Shape ws = net.masks[l].shape;
    Tensor w(ws);
    const double bound = 1.0 / std::sqrt(double(ws.d1));
    for (double& v : w.v) v = rng.uniform(-bound, bound);
    net.w_idx.push_back(ps.add(prefix + ".w" + std::to_string(l), std::move(w)));
    net.b_idx.push_back(ps.add(prefix + ".b" + std::to_string(l),
                               Tensor::zeros(Shape::vec(ws.d0))));
  }
  return net;
}

ad::NodeRef MaskedMlp::apply(ad::Tape& tape, const Bound& bound,
                             ad::NodeRef x) const {
  if (x.shape() != Shape::vec(d + extra_inputs))
    throw ShapeError("masked net input: expected " +
                     Shape::vec(d + extra_inputs).str() + ", got " +
                     x.shape().str());
  ad::NodeRef h = x;
  for (std::size_t l = 0; l < w_idx.size(); ++l) {
    ad::NodeRef w_eff = bound[w_idx[l]] * tape.constant(masks[l]);
    h = ad::matmul(w_eff, h) + bound[b_idx[l]];
    if (l + 1 < w_idx.size()) h = apply_activation(act, h);
  }
  return h;
}

}  // namespace hollow::nn
