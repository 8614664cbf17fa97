#pragma once

#include "hollow/ad/tape.hpp"

namespace hollow::ad {

// Elementwise binary ops. Broadcasting: equal shapes, scalar with array, or
// row vector (n) with matrix (m,n); anything else is a shape error.
NodeRef operator+(NodeRef a, NodeRef b);
NodeRef operator-(NodeRef a, NodeRef b);
NodeRef operator*(NodeRef a, NodeRef b);
NodeRef operator+(NodeRef a, double b);
NodeRef operator-(NodeRef a, double b);
NodeRef operator*(NodeRef a, double b);
NodeRef operator+(double a, NodeRef b);
NodeRef operator-(double a, NodeRef b);
NodeRef operator*(double a, NodeRef b);
NodeRef neg(NodeRef a);

// (m,n)x(n,p), or (m,n)x(n) with a vector second operand. Transpose flags
// apply to rank-2 operands only.
NodeRef matmul(NodeRef a, NodeRef b, bool trans_a = false,
               bool trans_b = false);

NodeRef concat(NodeRef a, NodeRef b, int axis = 0);
NodeRef concat(NodeRef a, NodeRef b, NodeRef c, int axis = 0);
NodeRef slice(NodeRef x, int axis, std::uint32_t begin, std::uint32_t end);

NodeRef sum(NodeRef x);                 // all elements -> scalar
NodeRef sum_axis(NodeRef x, int axis);  // 0: over rows -> (n), 1: over cols -> (m)
NodeRef mean(NodeRef x);

NodeRef broadcast_to(NodeRef scalar, Shape target);
NodeRef broadcast_rows(NodeRef row, std::uint32_t m);  // (n) -> (m,n)
NodeRef broadcast_cols(NodeRef col, std::uint32_t n);  // (m) -> (m,n)
NodeRef reshape(NodeRef x, Shape target);

NodeRef tanh(NodeRef x);
NodeRef elu(NodeRef x);
NodeRef swish(NodeRef x);
NodeRef sin(NodeRef x);
NodeRef cos(NodeRef x);
NodeRef exp(NodeRef x);
NodeRef log(NodeRef x);
NodeRef softplus(NodeRef x);
NodeRef softmax(NodeRef x);  // vector only
NodeRef reciprocal(NodeRef x);
NodeRef square(NodeRef x);

NodeRef dot(NodeRef a, NodeRef b);  // sum(a*b)

// |x| as x * sign(x) with sign held constant; the derivative is sign(x)
// almost everywhere, which is what subgradient training needs.
NodeRef absval(NodeRef x);

// Sigmoid as reciprocal(1 + exp(-x)).
NodeRef sigmoid(NodeRef x);

}  // namespace hollow::ad
