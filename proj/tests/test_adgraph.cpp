#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hollow/ad/ops.hpp"
#include "hollow/ad/tape.hpp"
#include "hollow/rng.hpp"
#include "oracles.hpp"

using namespace hollow;
using namespace hollow::ad;
using oracles::Vec;

namespace {

// small random 3-layer MLP built from raw tape ops
struct RawMlp {
  Tensor w1, b1, w2, b2, w3, b3;

  static RawMlp make(std::uint32_t in, std::uint32_t h, std::uint32_t out,
                     Rng& rng) {
    auto mk = [&](std::uint32_t r, std::uint32_t c) {
      Tensor t(Shape::mat(r, c));
      for (double& v : t.v) v = rng.uniform(-0.8, 0.8);
      return t;
    };
    auto mkb = [&](std::uint32_t r) {
      Tensor t(Shape::vec(r));
      for (double& v : t.v) v = rng.uniform(-0.3, 0.3);
      return t;
    };
    return RawMlp{mk(h, in), mkb(h), mk(h, h), mkb(h), mk(out, h), mkb(out)};
  }

  NodeRef apply(Tape& t, NodeRef x) const {
    NodeRef a1 = tanh(matmul(t.constant(w1), x) + t.constant(b1));
    NodeRef a2 = tanh(matmul(t.constant(w2), a1) + t.constant(b2));
    return matmul(t.constant(w3), a2) + t.constant(b3);
  }

  Vec eval_plain(const Vec& x) const {
    // loop-based reference evaluation, no tape involved
    auto lin = [](const Tensor& w, const Tensor& b, const Vec& v) {
      Vec out(w.shape.d0, 0.0);
      for (std::uint32_t i = 0; i < w.shape.d0; ++i) {
        for (std::uint32_t j = 0; j < w.shape.d1; ++j)
          out[i] += w.at(i, j) * v[j];
        out[i] += b.v[i];
      }
      return out;
    };
    Vec a1 = lin(w1, b1, x);
    for (double& v : a1) v = std::tanh(v);
    Vec a2 = lin(w2, b2, a1);
    for (double& v : a2) v = std::tanh(v);
    return lin(w3, b3, a2);
  }
};

}  // namespace

TEST_CASE("record: elementwise and reductions") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1, 2}));
  NodeRef y = t.leaf(Tensor::vec({3, 4}));
  NodeRef s = x + y;
  CHECK(s.value().v == std::vector<double>{4, 6});

  NodeRef z = t.leaf(Tensor::vec({1, 2, 3}));
  CHECK(sum(z).scalar() == 6.0);
}

TEST_CASE("record: matmul against naive triple-loop oracle") {
  Rng rng(5);
  Tensor a(Shape::mat(2, 3));
  for (double& v : a.v) v = rng.normal();
  Vec x = {rng.normal(), rng.normal(), rng.normal()};

  Tape t;
  NodeRef av = t.leaf(a);
  NodeRef xv = t.leaf(Tensor::vec(Vec(x)));
  NodeRef y = matmul(av, xv);

  std::vector<Vec> arows = {{a.at(0, 0), a.at(0, 1), a.at(0, 2)},
                            {a.at(1, 0), a.at(1, 1), a.at(1, 2)}};
  std::vector<Vec> xcol = {{x[0]}, {x[1]}, {x[2]}};
  auto want = oracles::naive_matmul(arows, xcol);
  CHECK(y.value().v[0] == doctest::Approx(want[0][0]).epsilon(1e-14));
  CHECK(y.value().v[1] == doctest::Approx(want[1][0]).epsilon(1e-14));
}

TEST_CASE("record: shape mismatch names both shapes") {
  Tape t;
  NodeRef a = t.leaf(Tensor::vec({1, 2}));
  NodeRef b = t.leaf(Tensor::vec({1, 2, 3}));
  CHECK_THROWS_WITH_AS(a + b, doctest::Contains("(2)"), ShapeError);
  CHECK_THROWS_AS(t.record(Op::Leaf, {a}), Error);  // non-recordable primitive
}

TEST_CASE("vjp: sum gives ones") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1, 2, 3, 4, 5}));
  NodeRef y = sum(x);
  VjpResult r = vjp(y, t.ones(Shape::scalar()));
  CHECK(r.of(x).value().v == std::vector<double>(5, 1.0));
}

TEST_CASE("vjp: elementwise square") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({2, 3}));
  NodeRef y = x * x;
  VjpResult r = vjp(y, t.ones(y.shape()));
  CHECK(r.of(x).value().v == std::vector<double>{4, 6});
}

TEST_CASE("vjp: random MLP matches finite differences") {
  Rng rng(11);
  RawMlp mlp = RawMlp::make(4, 8, 3, rng);
  Vec x0 = {0.3, -0.7, 1.1, 0.2};

  Tape t;
  NodeRef x = t.leaf(Tensor::vec(Vec(x0)));
  NodeRef f = mlp.apply(t, x);
  NodeRef loss = sum(f);
  Vec g = vjp(loss, t.ones(Shape::scalar())).of(x).value().v;

  Vec g_fd = oracles::fd_gradient(
      [&](const Vec& v) {
        Vec y = mlp.eval_plain(v);
        double s = 0;
        for (double q : y) s += q;
        return s;
      },
      x0, 1e-5);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(oracles::rel_err(g[i], g_fd[i]) < 1e-5);
}

TEST_CASE("vjp: cotangent shape mismatch is an error") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1, 2}));
  NodeRef y = x * x;
  CHECK_THROWS_AS(vjp(y, t.ones(Shape::vec(3))), ShapeError);
}

TEST_CASE("detach: severed edge yields zero adjoint") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1, 2, 3}));
  NodeRef y = t.detach(x);
  NodeRef loss = sum(y);
  VjpResult r = vjp(loss, t.ones(Shape::scalar()));
  CHECK(!r.has(x));
  CHECK(r.of(x).value().v == std::vector<double>(3, 0.0));
  CHECK(t.detached_edges().size() == 1);
}

TEST_CASE("detach: only the live edge contributes") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1, 2, 3}));
  NodeRef z = x + t.detach(x);
  VjpResult r = vjp(sum(z), t.ones(Shape::scalar()));
  CHECK(r.of(x).value().v == std::vector<double>(3, 1.0));
}

TEST_CASE("vjp_with_reconnect: no detached edges -> identical to vjp") {
  Rng rng(21);
  RawMlp mlp = RawMlp::make(3, 6, 3, rng);
  Vec x0 = {0.1, 0.5, -0.4};

  Tape t;
  NodeRef x = t.leaf(Tensor::vec(Vec(x0)));
  NodeRef loss = sum(mlp.apply(t, x));
  Vec a = vjp(loss, t.ones(Shape::scalar())).of(x).value().v;
  Vec b = vjp_with_reconnect(loss, t.ones(Shape::scalar())).of(x).value().v;
  CHECK(a == b);
}

TEST_CASE("vjp_with_reconnect: routed gradient equals unspliced graph exactly") {
  Rng rng(31);
  RawMlp inner = RawMlp::make(3, 6, 4, rng);
  RawMlp outer = RawMlp::make(7, 6, 1, rng);
  Vec x0 = {0.2, -0.3, 0.8};

  auto build_loss = [&](Tape& t, NodeRef x, bool spliced) {
    NodeRef h = inner.apply(t, x);
    NodeRef h_used = spliced ? t.detach(h, /*reconnectable=*/true) : h;
    NodeRef cat = concat(x, h_used, 0);
    return sum(outer.apply(t, cat));
  };

  Tape ta;
  NodeRef xa = ta.leaf(Tensor::vec(Vec(x0)));
  NodeRef la = build_loss(ta, xa, false);
  Vec ga = vjp(la, ta.ones(Shape::scalar())).of(xa).value().v;

  Tape tb;
  NodeRef xb = tb.leaf(Tensor::vec(Vec(x0)));
  NodeRef lb = build_loss(tb, xb, true);
  Vec gb = vjp_with_reconnect(lb, tb.ones(Shape::scalar())).of(xb).value().v;

  CHECK(oracles::max_abs_diff(ga, gb) < 1e-12);

  // plain vjp through the spliced graph must NOT equal the true gradient
  Tape tc;
  NodeRef xc = tc.leaf(Tensor::vec(Vec(x0)));
  NodeRef lc = build_loss(tc, xc, true);
  Vec gc = vjp(lc, tc.ones(Shape::scalar())).of(xc).value().v;
  CHECK(oracles::max_abs_diff(ga, gc) > 1e-6);
}

TEST_CASE("vjp_with_reconnect: missing hook on active path is an error") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1.0, 2.0}));
  NodeRef y = t.detach(x, /*reconnectable=*/false);
  NodeRef loss = sum(y * y);
  CHECK_THROWS_AS(vjp_with_reconnect(loss, t.ones(Shape::scalar())), Error);
}

TEST_CASE("grad_of_grad: cubic and sine") {
  Tape t;
  NodeRef x = t.leaf(Tensor::scalar(2.0));
  NodeRef y = x * square(x);  // x^3
  NodeRef g1 = grad(y, x);
  CHECK(g1.scalar() == doctest::Approx(12.0).epsilon(1e-14));
  NodeRef g2 = grad(g1, x);
  CHECK(g2.scalar() == doctest::Approx(12.0).epsilon(1e-14));  // 6x at 2

  Tape t2;
  NodeRef z = t2.leaf(Tensor::scalar(0.0));
  NodeRef s = sin(z);
  NodeRef d2 = grad(grad(s, z), z);  // -sin(0) = 0
  CHECK(d2.scalar() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("grad_of_grad: all unary primitives have second-derivative support") {
  // every backward rule is itself recorded, so two sweeps must run and match
  // finite differences of the analytic first derivative
  auto check2 = [&](auto opfn, double x0, double want_d2) {
    Tape t;
    NodeRef x = t.leaf(Tensor::scalar(x0));
    NodeRef y = opfn(x);
    NodeRef d2 = grad(grad(y, x), x);
    CHECK(d2.scalar() == doctest::Approx(want_d2).epsilon(1e-9));
  };
  const double x0 = 0.37;
  const double s = 1.0 / (1.0 + std::exp(-x0));
  check2([](NodeRef v) { return tanh(v); }, x0,
         -2.0 * std::tanh(x0) * (1 - std::tanh(x0) * std::tanh(x0)));
  check2([](NodeRef v) { return exp(v); }, x0, std::exp(x0));
  check2([](NodeRef v) { return log(v); }, x0, -1.0 / (x0 * x0));
  check2([](NodeRef v) { return square(v); }, x0, 2.0);
  check2([](NodeRef v) { return reciprocal(v); }, x0, 2.0 / (x0 * x0 * x0));
  check2([](NodeRef v) { return sin(v); }, x0, -std::sin(x0));
  check2([](NodeRef v) { return cos(v); }, x0, -std::cos(x0));
  check2([](NodeRef v) { return softplus(v); }, x0, s * (1 - s));
  check2([](NodeRef v) { return swish(v); }, x0,
         s * (1 - s) * (2.0 + x0 * (1 - 2.0 * s)));
  check2([](NodeRef v) { return elu(v); }, -0.6, std::exp(-0.6));
  check2([](NodeRef v) { return elu(v); }, 0.6, 0.0);
}

TEST_CASE("property: vjp is linear in the cotangent") {
  Rng rng(77);
  RawMlp mlp = RawMlp::make(4, 7, 4, rng);
  Vec x0 = {0.4, -0.2, 0.9, -1.3};
  const double alpha = 1.7, beta = -0.6;

  Tensor v1t(Shape::vec(4)), v2t(Shape::vec(4));
  for (double& v : v1t.v) v = rng.normal();
  for (double& v : v2t.v) v = rng.normal();

  auto run = [&](const Tensor& ct) {
    Tape t;
    NodeRef x = t.leaf(Tensor::vec(Vec(x0)));
    NodeRef f = mlp.apply(t, x);
    return vjp(f, t.constant(ct)).of(x).value().v;
  };

  Tensor mix(Shape::vec(4));
  for (int i = 0; i < 4; ++i) mix.v[i] = alpha * v1t.v[i] + beta * v2t.v[i];
  Vec g_mix = run(mix);
  Vec g1 = run(v1t), g2 = run(v2t);
  for (int i = 0; i < 4; ++i) {
    const double lin = alpha * g1[i] + beta * g2[i];
    CHECK(std::abs(g_mix[i] - lin) < 1e-12);
  }
}

TEST_CASE("property: one-hot vjps assemble the Jacobian, matching FD") {
  Rng rng(99);
  RawMlp mlp = RawMlp::make(3, 9, 3, rng);
  Vec x0 = {0.25, -0.55, 0.75};

  auto jac = oracles::brute_force_jacobian(
      [&](Tape& t, NodeRef x) { return mlp.apply(t, x); }, x0);
  auto jac_fd = oracles::fd_jacobian(
      [&](const Vec& v) { return mlp.eval_plain(v); }, x0, 1e-5);
  for (std::size_t i = 0; i < jac.size(); ++i)
    for (std::size_t j = 0; j < jac[i].size(); ++j)
      CHECK(oracles::rel_err(jac[i][j], jac_fd[i][j], 1e-6) < 1e-5);
}

TEST_CASE("property: tape determinism (bit-identical reruns)") {
  auto run = [] {
    Rng rng(123);
    RawMlp mlp = RawMlp::make(5, 11, 5, rng);
    Vec x0(5);
    for (double& v : x0) v = rng.normal();
    Tape t;
    NodeRef x = t.leaf(Tensor::vec(Vec(x0)));
    NodeRef f = mlp.apply(t, x);
    NodeRef loss = sum(square(f));
    Vec g = vjp(loss, t.ones(Shape::scalar())).of(x).value().v;
    Vec out = f.value().v;
    out.insert(out.end(), g.begin(), g.end());
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("sweep counter counts reverse sweeps") {
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1, 2, 3}));
  NodeRef y = square(x);
  CHECK(t.reverse_sweeps() == 0);
  auto r = vjp(sum(y), t.ones(Shape::scalar()));
  CHECK(t.reverse_sweeps() == 1);
  vjp(sum(r.of(x)), t.ones(Shape::scalar()));
  CHECK(t.reverse_sweeps() == 2);
}

TEST_CASE("dimension-wise recursion on a diagonal map: x^2 -> 2x, 2, 0") {
  // f_i(x) = x_i^2 has a diagonal Jacobian by construction, the same backward
  // structure a spliced network produces
  Tape t;
  NodeRef x = t.leaf(Tensor::vec({1.5, -2.0, 0.5}));
  NodeRef f = square(x);
  NodeRef d1 = vjp(f, t.ones(f.shape())).of(x);
  CHECK(d1.value().v == std::vector<double>{3.0, -4.0, 1.0});
  NodeRef d2 = vjp(d1, t.ones(d1.shape())).of(x);
  CHECK(d2.value().v == std::vector<double>(3, 2.0));
  NodeRef d3 = vjp(d2, t.ones(d2.shape())).of(x);
  CHECK(d3.value().v == std::vector<double>(3, 0.0));
}
