#pragma once

#include <string>
#include <vector>

#include "hollow/ad/ops.hpp"
#include "hollow/ad/tape.hpp"
#include "hollow/tensor.hpp"

namespace hollow::nn {

// Named parameter storage. Models hold index lists into one of these; the
// tensors themselves are mutated only by the optimizer, never during an
// evaluation, so a ParamSet can be shared read-only across worker tapes.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor> values;

  int add(std::string name, Tensor value) {
    names.push_back(std::move(name));
    values.push_back(std::move(value));
    return static_cast<int>(values.size()) - 1;
  }
  std::size_t size() const { return values.size(); }
  std::size_t total_elems() const {
    std::size_t n = 0;
    for (const auto& t : values) n += t.numel();
    return n;
  }
};

// Leaf nodes for one tape evaluation, aligned with ParamSet order.
struct Bound {
  std::vector<ad::NodeRef> nodes;
  ad::NodeRef operator[](std::size_t i) const { return nodes[i]; }
};

inline Bound bind(ad::Tape& tape, const ParamSet& params,
                  bool requires_grad = true) {
  Bound b;
  b.nodes.reserve(params.size());
  for (const auto& t : params.values) b.nodes.push_back(tape.leaf(t, requires_grad));
  return b;
}

// Parameter adjoints aligned with the ParamSet (zeros where no gradient
// reached the leaf).
inline std::vector<Tensor> extract_grads(const ad::VjpResult& res,
                                         const Bound& bound,
                                         const ParamSet& params) {
  std::vector<Tensor> g;
  g.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (auto a = res.maybe(bound.nodes[i]))
      g.push_back(a->value());
    else
      g.push_back(Tensor::zeros(params.values[i].shape));
  }
  return g;
}

inline void grad_axpy(std::vector<Tensor>& acc, const std::vector<Tensor>& g,
                      double alpha) {
  for (std::size_t i = 0; i < acc.size(); ++i)
    for (std::size_t j = 0; j < acc[i].numel(); ++j)
      acc[i].v[j] += alpha * g[i].v[j];
}

inline std::vector<Tensor> zero_grads(const ParamSet& params) {
  std::vector<Tensor> g;
  g.reserve(params.size());
  for (const auto& t : params.values) g.push_back(Tensor::zeros(t.shape));
  return g;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const ParamSet& params, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& t : params.values) {
      m_.push_back(Tensor::zeros(t.shape));
      v_.push_back(Tensor::zeros(t.shape));
    }
  }

  void step(ParamSet& params, const std::vector<Tensor>& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (std::size_t j = 0; j < params.values[i].numel(); ++j) {
        const double g = grad[i].v[j];
        double& m = m_[i].v[j];
        double& v = v_[i].v[j];
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        params.values[i].v[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  long t_ = 0;
};

}  // namespace hollow::nn
