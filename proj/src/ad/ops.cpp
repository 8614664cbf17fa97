#include "hollow/ad/ops.hpp"

#include <cmath>

namespace hollow::ad {

namespace {
Tape& tape_of(NodeRef a) { return *a.tape; }
}  // namespace

NodeRef operator+(NodeRef a, NodeRef b) { return tape_of(a).record(Op::Add, {a, b}); }
NodeRef operator-(NodeRef a, NodeRef b) { return tape_of(a).record(Op::Sub, {a, b}); }
NodeRef operator*(NodeRef a, NodeRef b) { return tape_of(a).record(Op::Mul, {a, b}); }

NodeRef operator+(NodeRef a, double b) { return a + tape_of(a).constant(b); }
NodeRef operator-(NodeRef a, double b) { return a - tape_of(a).constant(b); }
NodeRef operator*(NodeRef a, double b) { return a * tape_of(a).constant(b); }
NodeRef operator+(double a, NodeRef b) { return tape_of(b).constant(a) + b; }
NodeRef operator-(double a, NodeRef b) { return tape_of(b).constant(a) - b; }
NodeRef operator*(double a, NodeRef b) { return tape_of(b).constant(a) * b; }

NodeRef neg(NodeRef a) { return -1.0 * a; }

NodeRef matmul(NodeRef a, NodeRef b, bool trans_a, bool trans_b) {
  return tape_of(a).record(Op::Matmul, {a, b},
                           {.i0 = trans_a ? 1 : 0, .i1 = trans_b ? 1 : 0});
}

NodeRef concat(NodeRef a, NodeRef b, int axis) {
  return tape_of(a).record(Op::Concat, {a, b}, {.i0 = axis});
}
NodeRef concat(NodeRef a, NodeRef b, NodeRef c, int axis) {
  return tape_of(a).record(Op::Concat, {a, b, c}, {.i0 = axis});
}

NodeRef slice(NodeRef x, int axis, std::uint32_t begin, std::uint32_t end) {
  return tape_of(x).record(Op::Slice, {x},
                           {.i0 = axis,
                            .i1 = static_cast<std::int32_t>(begin),
                            .i2 = static_cast<std::int32_t>(end)});
}

NodeRef sum(NodeRef x) { return tape_of(x).record(Op::Sum, {x}, {.i0 = -1}); }
NodeRef sum_axis(NodeRef x, int axis) {
  return tape_of(x).record(Op::Sum, {x}, {.i0 = axis});
}
NodeRef mean(NodeRef x) {
  return sum(x) * (1.0 / static_cast<double>(x.shape().numel()));
}

NodeRef broadcast_to(NodeRef scalar, Shape target) {
  return tape_of(scalar).record(Op::Broadcast, {scalar}, {.i0 = 0, .shape = target});
}
NodeRef broadcast_rows(NodeRef row, std::uint32_t m) {
  Shape target = Shape::mat(m, row.shape().d0);
  return tape_of(row).record(Op::Broadcast, {row}, {.i0 = 1, .shape = target});
}
NodeRef broadcast_cols(NodeRef col, std::uint32_t n) {
  Shape target = Shape::mat(col.shape().d0, n);
  return tape_of(col).record(Op::Broadcast, {col}, {.i0 = 2, .shape = target});
}
NodeRef reshape(NodeRef x, Shape target) {
  return tape_of(x).record(Op::Reshape, {x}, {.shape = target});
}

NodeRef tanh(NodeRef x) { return tape_of(x).record(Op::Tanh, {x}); }
NodeRef elu(NodeRef x) { return tape_of(x).record(Op::Elu, {x}); }
NodeRef swish(NodeRef x) { return tape_of(x).record(Op::Swish, {x}); }
NodeRef sin(NodeRef x) { return tape_of(x).record(Op::Sin, {x}); }
NodeRef cos(NodeRef x) { return tape_of(x).record(Op::Cos, {x}); }
NodeRef exp(NodeRef x) { return tape_of(x).record(Op::Exp, {x}); }
NodeRef log(NodeRef x) { return tape_of(x).record(Op::Log, {x}); }
NodeRef softplus(NodeRef x) { return tape_of(x).record(Op::Softplus, {x}); }
NodeRef softmax(NodeRef x) { return tape_of(x).record(Op::Softmax, {x}); }
NodeRef reciprocal(NodeRef x) { return tape_of(x).record(Op::Reciprocal, {x}); }
NodeRef square(NodeRef x) { return tape_of(x).record(Op::Square, {x}); }

NodeRef dot(NodeRef a, NodeRef b) { return sum(a * b); }

NodeRef absval(NodeRef x) {
  const Tensor& xv = x.value();
  Tensor sign(xv.shape);
  for (std::size_t i = 0; i < xv.numel(); ++i)
    sign.v[i] = xv.v[i] > 0 ? 1.0 : (xv.v[i] < 0 ? -1.0 : 0.0);
  return x * tape_of(x).constant(std::move(sign));
}

NodeRef sigmoid(NodeRef x) { return reciprocal(exp(neg(x)) + 1.0); }

}  // namespace hollow::ad
