#include "hollow/ad/tape.hpp"

#include <algorithm>
#include <cmath>

#include "hollow/ad/ops.hpp"

namespace hollow::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Constant: return "constant";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Matmul: return "matmul";
    case Op::Concat: return "concat";
    case Op::Slice: return "slice";
    case Op::Sum: return "sum";
    case Op::Broadcast: return "broadcast";
    case Op::Reshape: return "reshape";
    case Op::Tanh: return "tanh";
    case Op::Elu: return "elu";
    case Op::Swish: return "swish";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Softplus: return "softplus";
    case Op::Softmax: return "softmax";
    case Op::Reciprocal: return "reciprocal";
    case Op::Square: return "square";
    case Op::Detach: return "detach";
  }
  return "?";
}

const Tensor& NodeRef::value() const { return tape->node(id).value; }
Shape NodeRef::shape() const { return tape->node(id).value.shape; }
double NodeRef::scalar() const {
  const Tensor& t = value();
  if (t.numel() != 1)
    throw ShapeError("scalar() on node of shape " + t.shape.str());
  return t.v[0];
}

namespace {

[[noreturn]] void shape_fail(const char* what, Shape a, Shape b) {
  throw ShapeError(std::string(what) + ": shape mismatch " + a.str() +
                   " vs " + b.str());
}

enum class BcKind { None, ScalarLeft, ScalarRight, RowLeft, RowRight };

// Resolve the broadcast pattern for an elementwise binary op.
BcKind binary_kind(const char* what, Shape a, Shape b, Shape* out) {
  if (a == b) {
    *out = a;
    return BcKind::None;
  }
  if (a.numel() == 1 && a.rank == 0) {
    *out = b;
    return BcKind::ScalarLeft;
  }
  if (b.numel() == 1 && b.rank == 0) {
    *out = a;
    return BcKind::ScalarRight;
  }
  if (a.rank == 1 && b.rank == 2 && a.d0 == b.d1) {
    *out = b;
    return BcKind::RowLeft;
  }
  if (b.rank == 1 && a.rank == 2 && b.d0 == a.d1) {
    *out = a;
    return BcKind::RowRight;
  }
  shape_fail(what, a, b);
}

template <class F>
Tensor binary_eval(const char* what, const Tensor& a, const Tensor& b, F f) {
  Shape out_shape;
  BcKind kind = binary_kind(what, a.shape, b.shape, &out_shape);
  Tensor out(out_shape);
  const std::size_t n = out.numel();
  switch (kind) {
    case BcKind::None:
      for (std::size_t i = 0; i < n; ++i) out.v[i] = f(a.v[i], b.v[i]);
      break;
    case BcKind::ScalarLeft:
      for (std::size_t i = 0; i < n; ++i) out.v[i] = f(a.v[0], b.v[i]);
      break;
    case BcKind::ScalarRight:
      for (std::size_t i = 0; i < n; ++i) out.v[i] = f(a.v[i], b.v[0]);
      break;
    case BcKind::RowLeft: {
      const std::size_t cols = out_shape.d1;
      for (std::size_t i = 0; i < n; ++i) out.v[i] = f(a.v[i % cols], b.v[i]);
      break;
    }
    case BcKind::RowRight: {
      const std::size_t cols = out_shape.d1;
      for (std::size_t i = 0; i < n; ++i) out.v[i] = f(a.v[i], b.v[i % cols]);
      break;
    }
  }
  return out;
}

template <class F>
Tensor unary_eval(const Tensor& x, F f) {
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) out.v[i] = f(x.v[i]);
  return out;
}

Shape matmul_shape(const Tensor& a, const Tensor& b, bool ta, bool tb) {
  if (a.shape.rank != 2)
    throw ShapeError("matmul: first operand must be rank 2, got " +
                     a.shape.str());
  const std::uint32_t am = ta ? a.shape.d1 : a.shape.d0;
  const std::uint32_t an = ta ? a.shape.d0 : a.shape.d1;
  if (b.shape.rank == 1) {
    if (tb) throw ShapeError("matmul: trans_b on a vector operand");
    if (b.shape.d0 != an) shape_fail("matmul", a.shape, b.shape);
    return Shape::vec(am);
  }
  if (b.shape.rank != 2) shape_fail("matmul", a.shape, b.shape);
  const std::uint32_t bn = tb ? b.shape.d1 : b.shape.d0;
  const std::uint32_t bp = tb ? b.shape.d0 : b.shape.d1;
  if (bn != an) shape_fail("matmul", a.shape, b.shape);
  return Shape::mat(am, bp);
}

Tensor matmul_eval(const Tensor& a, const Tensor& b, bool ta, bool tb) {
  Shape out_shape = matmul_shape(a, b, ta, tb);
  Tensor out(out_shape);
  const std::size_t m = ta ? a.shape.d1 : a.shape.d0;
  const std::size_t n = ta ? a.shape.d0 : a.shape.d1;
  auto A = [&](std::size_t i, std::size_t k) {
    return ta ? a.v[k * a.shape.d1 + i] : a.v[i * a.shape.d1 + k];
  };
  if (b.shape.rank == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += A(i, k) * b.v[k];
      out.v[i] = acc;
    }
    return out;
  }
  const std::size_t p = out_shape.d1;
  auto B = [&](std::size_t k, std::size_t j) {
    return tb ? b.v[j * b.shape.d1 + k] : b.v[k * b.shape.d1 + j];
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += A(i, k) * B(k, j);
      out.v[i * p + j] = acc;
    }
  return out;
}

Tensor concat_eval(const std::vector<const Tensor*>& parts, int axis) {
  const Tensor& first = *parts[0];
  if (first.shape.rank == 1) {
    if (axis != 0) throw ShapeError("concat: vector concat requires axis 0");
    std::uint32_t total = 0;
    for (auto* p : parts) {
      if (p->shape.rank != 1)
        shape_fail("concat", first.shape, p->shape);
      total += p->shape.d0;
    }
    Tensor out(Shape::vec(total));
    std::size_t off = 0;
    for (auto* p : parts) {
      std::copy(p->v.begin(), p->v.end(), out.v.begin() + off);
      off += p->numel();
    }
    return out;
  }
  if (first.shape.rank != 2)
    throw ShapeError("concat: rank must be 1 or 2, got " + first.shape.str());
  if (axis == 0) {
    std::uint32_t rows = 0;
    for (auto* p : parts) {
      if (p->shape.rank != 2 || p->shape.d1 != first.shape.d1)
        shape_fail("concat", first.shape, p->shape);
      rows += p->shape.d0;
    }
    Tensor out(Shape::mat(rows, first.shape.d1));
    std::size_t off = 0;
    for (auto* p : parts) {
      std::copy(p->v.begin(), p->v.end(), out.v.begin() + off);
      off += p->numel();
    }
    return out;
  }
  if (axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  std::uint32_t cols = 0;
  for (auto* p : parts) {
    if (p->shape.rank != 2 || p->shape.d0 != first.shape.d0)
      shape_fail("concat", first.shape, p->shape);
    cols += p->shape.d1;
  }
  Tensor out(Shape::mat(first.shape.d0, cols));
  for (std::uint32_t i = 0; i < first.shape.d0; ++i) {
    std::size_t off = 0;
    for (auto* p : parts) {
      for (std::uint32_t j = 0; j < p->shape.d1; ++j)
        out.at(i, off + j) = p->at(i, j);
      off += p->shape.d1;
    }
  }
  return out;
}

Tensor slice_eval(const Tensor& x, int axis, std::uint32_t b, std::uint32_t e) {
  if (b >= e) throw ShapeError("slice: empty or inverted range");
  if (x.shape.rank == 1) {
    if (axis != 0 || e > x.shape.d0)
      throw ShapeError("slice: range [" + std::to_string(b) + "," +
                       std::to_string(e) + ") out of bounds for " +
                       x.shape.str());
    Tensor out(Shape::vec(e - b));
    std::copy(x.v.begin() + b, x.v.begin() + e, out.v.begin());
    return out;
  }
  if (x.shape.rank != 2) throw ShapeError("slice: rank must be 1 or 2");
  if (axis == 0) {
    if (e > x.shape.d0) throw ShapeError("slice: row range out of bounds");
    Tensor out(Shape::mat(e - b, x.shape.d1));
    std::copy(x.v.begin() + std::size_t(b) * x.shape.d1,
              x.v.begin() + std::size_t(e) * x.shape.d1, out.v.begin());
    return out;
  }
  if (axis != 1) throw ShapeError("slice: axis must be 0 or 1");
  if (e > x.shape.d1) throw ShapeError("slice: col range out of bounds");
  Tensor out(Shape::mat(x.shape.d0, e - b));
  for (std::uint32_t i = 0; i < x.shape.d0; ++i)
    for (std::uint32_t j = b; j < e; ++j) out.at(i, j - b) = x.at(i, j);
  return out;
}

Tensor sum_eval(const Tensor& x, int axis) {
  if (axis < 0) {
    double acc = 0.0;
    for (double v : x.v) acc += v;
    return Tensor::scalar(acc);
  }
  if (x.shape.rank != 2)
    throw ShapeError("sum: axis reduction requires rank 2, got " +
                     x.shape.str());
  if (axis == 0) {
    Tensor out(Shape::vec(x.shape.d1));
    for (std::uint32_t i = 0; i < x.shape.d0; ++i)
      for (std::uint32_t j = 0; j < x.shape.d1; ++j) out.v[j] += x.at(i, j);
    return out;
  }
  if (axis != 1) throw ShapeError("sum: axis must be 0 or 1");
  Tensor out(Shape::vec(x.shape.d0));
  for (std::uint32_t i = 0; i < x.shape.d0; ++i)
    for (std::uint32_t j = 0; j < x.shape.d1; ++j) out.v[i] += x.at(i, j);
  return out;
}

Tensor broadcast_eval(const Tensor& x, int mode, Shape target) {
  Tensor out(target);
  if (mode == 0) {
    if (x.numel() != 1) throw ShapeError("broadcast: source must be scalar");
    std::fill(out.v.begin(), out.v.end(), x.v[0]);
    return out;
  }
  if (mode == 1) {
    if (x.shape.rank != 1 || target.rank != 2 || x.shape.d0 != target.d1)
      shape_fail("broadcast rows", x.shape, target);
    for (std::uint32_t i = 0; i < target.d0; ++i)
      for (std::uint32_t j = 0; j < target.d1; ++j) out.at(i, j) = x.v[j];
    return out;
  }
  if (mode != 2) throw ShapeError("broadcast: unknown mode");
  if (x.shape.rank != 1 || target.rank != 2 || x.shape.d0 != target.d0)
    shape_fail("broadcast cols", x.shape, target);
  for (std::uint32_t i = 0; i < target.d0; ++i)
    for (std::uint32_t j = 0; j < target.d1; ++j) out.at(i, j) = x.v[i];
  return out;
}

Tensor softmax_eval(const Tensor& x) {
  if (x.shape.rank != 1)
    throw ShapeError("softmax: vector input required, got " + x.shape.str());
  Tensor out(x.shape);
  double mx = x.v[0];
  for (double v : x.v) mx = std::max(mx, v);
  double z = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    out.v[i] = std::exp(x.v[i] - mx);
    z += out.v[i];
  }
  for (double& v : out.v) v /= z;
  return out;
}

double softplus_scalar(double x) {
  // max(x,0) + log1p(exp(-|x|)), stable at both tails
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

NodeRef Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeRef{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeRef Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.requires_grad = requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeRef Tape::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.requires_grad = false;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeRef Tape::constant(double value) { return constant(Tensor::scalar(value)); }

NodeRef Tape::detach(NodeRef src, bool reconnectable) {
  if (src.tape != this) throw Error("detach: node from a different tape");
  Node n;
  n.op = Op::Detach;
  // keep requires_grad so sweeps reach the severed edge; routing is decided
  // by the sweep mode
  n.requires_grad = nodes_[src.id].requires_grad;
  n.n_parents = 1;
  n.parents[0] = src.id;
  n.value = nodes_[src.id].value;
  NodeRef out = push(std::move(n));
  if (reconnectable) hooks_[out.id] = src.id;
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Tape::detached_edges()
    const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op == Op::Detach) out.emplace_back(i, nodes_[i].parents[0]);
  return out;
}

NodeRef Tape::record(Op op, std::initializer_list<NodeRef> parents,
                     Attrs attrs) {
  Node n;
  n.op = op;
  n.attrs = attrs;
  n.n_parents = static_cast<std::uint8_t>(parents.size());
  if (parents.size() > 3) throw Error("record: too many parents");
  std::size_t idx = 0;
  for (NodeRef p : parents) {
    if (p.tape != this) throw Error("record: node from a different tape");
    n.parents[idx++] = p.id;
    n.requires_grad = n.requires_grad || nodes_[p.id].requires_grad;
  }

  auto P = [&](int i) -> const Tensor& { return nodes_[n.parents[i]].value; };
  switch (op) {
    case Op::Add:
      n.value = binary_eval("add", P(0), P(1), [](double a, double b) { return a + b; });
      break;
    case Op::Sub:
      n.value = binary_eval("sub", P(0), P(1), [](double a, double b) { return a - b; });
      break;
    case Op::Mul:
      n.value = binary_eval("mul", P(0), P(1), [](double a, double b) { return a * b; });
      break;
    case Op::Matmul:
      n.value = matmul_eval(P(0), P(1), attrs.i0 != 0, attrs.i1 != 0);
      break;
    case Op::Concat: {
      std::vector<const Tensor*> parts;
      for (std::uint8_t i = 0; i < n.n_parents; ++i) parts.push_back(&P(i));
      n.value = concat_eval(parts, attrs.i0);
      break;
    }
    case Op::Slice:
      n.value = slice_eval(P(0), attrs.i0, attrs.i1, attrs.i2);
      break;
    case Op::Sum:
      n.value = sum_eval(P(0), attrs.i0);
      break;
    case Op::Broadcast:
      n.value = broadcast_eval(P(0), attrs.i0, attrs.shape);
      break;
    case Op::Reshape:
      if (P(0).numel() != attrs.shape.numel())
        shape_fail("reshape", P(0).shape, attrs.shape);
      n.value = Tensor(attrs.shape, P(0).v);
      break;
    case Op::Tanh:
      n.value = unary_eval(P(0), [](double x) { return std::tanh(x); });
      break;
    case Op::Elu:
      n.value = unary_eval(P(0), [](double x) { return x > 0 ? x : std::expm1(x); });
      break;
    case Op::Swish:
      n.value = unary_eval(P(0), [](double x) { return x / (1.0 + std::exp(-x)); });
      break;
    case Op::Sin:
      n.value = unary_eval(P(0), [](double x) { return std::sin(x); });
      break;
    case Op::Cos:
      n.value = unary_eval(P(0), [](double x) { return std::cos(x); });
      break;
    case Op::Exp:
      n.value = unary_eval(P(0), [](double x) { return std::exp(x); });
      break;
    case Op::Log:
      n.value = unary_eval(P(0), [](double x) { return std::log(x); });
      break;
    case Op::Softplus:
      n.value = unary_eval(P(0), softplus_scalar);
      break;
    case Op::Softmax:
      n.value = softmax_eval(P(0));
      break;
    case Op::Reciprocal:
      n.value = unary_eval(P(0), [](double x) { return 1.0 / x; });
      break;
    case Op::Square:
      n.value = unary_eval(P(0), [](double x) { return x * x; });
      break;
    default:
      throw Error(std::string("record: unknown or non-recordable primitive '") +
                  op_name(op) + "'");
  }
  return push(std::move(n));
}

// ---------------------------------------------------------------------------
// Reverse sweep
// ---------------------------------------------------------------------------

namespace {

// Reduce an output-shaped adjoint back to a (possibly broadcast) operand
// shape, emitting Sum nodes as needed.
NodeRef reduce_to_shape(NodeRef adj, Shape target) {
  Shape s = adj.shape();
  if (s == target) return adj;
  Tape& t = *adj.tape;
  if (target.numel() == 1 && target.rank == 0)
    return t.record(Op::Sum, {adj}, {.i0 = -1});
  if (target.rank == 1 && s.rank == 2 && target.d0 == s.d1)
    return t.record(Op::Sum, {adj}, {.i0 = 0});
  shape_fail("adjoint reduction", s, target);
}

class Sweep {
 public:
  Sweep(Tape& tape, NodeRef output, NodeRef cotangent, bool reconnect)
      : tape_(tape), reconnect_(reconnect) {
    if (output.tape != &tape || cotangent.tape != &tape)
      throw Error("vjp: nodes from a different tape");
    if (cotangent.shape() != output.shape())
      shape_fail("vjp cotangent", cotangent.shape(), output.shape());
    adj_.assign(tape.size(), -1);
    adj_[output.id] = cotangent.id;
    run(output.id);
  }

  std::vector<std::int64_t> take() { return std::move(adj_); }

 private:
  NodeRef ref(std::uint32_t id) { return NodeRef{&tape_, id}; }
  NodeRef adj_ref(std::uint32_t id) {
    return NodeRef{&tape_, static_cast<std::uint32_t>(adj_[id])};
  }

  void accumulate(std::uint32_t id, NodeRef a) {
    if (!tape_.node(id).requires_grad) return;
    if (adj_[id] < 0)
      adj_[id] = a.id;
    else
      adj_[id] = (adj_ref(id) + a).id;
  }

  void run(std::uint32_t from) {
    // Nodes appended during the sweep get ids > from, so this downward scan
    // never revisits them.
    for (std::int64_t id = from; id >= 0; --id) {
      if (adj_[id] < 0) continue;
      const Node& node = tape_.node(static_cast<std::uint32_t>(id));
      if (!node.requires_grad) continue;
      if (node.op == Op::Leaf || node.op == Op::Constant) continue;
      backward(static_cast<std::uint32_t>(id), node);
    }
  }

  void backward(std::uint32_t id, const Node& node) {
    NodeRef adj = adj_ref(id);
    const std::uint32_t p0 = node.parents[0];
    const std::uint32_t p1 = node.n_parents > 1 ? node.parents[1] : 0;
    NodeRef x = ref(p0);
    switch (node.op) {
      case Op::Add:
        accumulate(p0, reduce_to_shape(adj, x.shape()));
        accumulate(p1, reduce_to_shape(adj, ref(p1).shape()));
        break;
      case Op::Sub:
        accumulate(p0, reduce_to_shape(adj, x.shape()));
        accumulate(p1, reduce_to_shape(neg(adj), ref(p1).shape()));
        break;
      case Op::Mul: {
        NodeRef b = ref(p1);
        if (tape_.node(p0).requires_grad)
          accumulate(p0, reduce_to_shape(adj * b, x.shape()));
        if (tape_.node(p1).requires_grad)
          accumulate(p1, reduce_to_shape(adj * x, b.shape()));
        break;
      }
      case Op::Matmul:
        backward_matmul(node, adj);
        break;
      case Op::Concat: {
        const int axis = node.attrs.i0;
        std::uint32_t off = 0;
        for (std::uint8_t i = 0; i < node.n_parents; ++i) {
          const std::uint32_t pid = node.parents[i];
          Shape ps = tape_.node(pid).value.shape;
          const std::uint32_t len = axis == 0 ? ps.d0 : ps.d1;
          if (tape_.node(pid).requires_grad)
            accumulate(pid, tape_.record(Op::Slice, {adj},
                                         {.i0 = axis,
                                          .i1 = static_cast<std::int32_t>(off),
                                          .i2 = static_cast<std::int32_t>(off + len)}));
          off += len;
        }
        break;
      }
      case Op::Slice: {
        // scatter back: zero-pad around the adjoint along the sliced axis
        Shape ps = x.shape();
        const int axis = node.attrs.i0;
        const std::uint32_t b = node.attrs.i1, e = node.attrs.i2;
        const std::uint32_t total = axis == 0 ? ps.d0 : (ps.rank == 1 ? ps.d0 : ps.d1);
        auto piece_shape = [&](std::uint32_t len) {
          if (ps.rank == 1) return Shape::vec(len);
          return axis == 0 ? Shape::mat(len, ps.d1) : Shape::mat(ps.d0, len);
        };
        NodeRef scattered = adj;
        if (b > 0 && e < total) {
          scattered = tape_.record(
              Op::Concat,
              {tape_.zeros(piece_shape(b)), adj, tape_.zeros(piece_shape(total - e))},
              {.i0 = axis});
        } else if (b > 0) {
          scattered = tape_.record(Op::Concat, {tape_.zeros(piece_shape(b)), adj},
                                   {.i0 = axis});
        } else if (e < total) {
          scattered = tape_.record(Op::Concat, {adj, tape_.zeros(piece_shape(total - e))},
                                   {.i0 = axis});
        }
        accumulate(p0, scattered);
        break;
      }
      case Op::Sum: {
        Shape ps = x.shape();
        const int axis = node.attrs.i0;
        if (axis < 0) {
          if (ps.rank == 0)
            accumulate(p0, adj);
          else
            accumulate(p0, tape_.record(Op::Broadcast, {adj}, {.i0 = 0, .shape = ps}));
        } else if (axis == 0) {
          accumulate(p0, tape_.record(Op::Broadcast, {adj}, {.i0 = 1, .shape = ps}));
        } else {
          accumulate(p0, tape_.record(Op::Broadcast, {adj}, {.i0 = 2, .shape = ps}));
        }
        break;
      }
      case Op::Broadcast: {
        const int mode = node.attrs.i0;
        if (mode == 0)
          accumulate(p0, tape_.record(Op::Sum, {adj}, {.i0 = -1}));
        else if (mode == 1)
          accumulate(p0, tape_.record(Op::Sum, {adj}, {.i0 = 0}));
        else
          accumulate(p0, tape_.record(Op::Sum, {adj}, {.i0 = 1}));
        break;
      }
      case Op::Reshape:
        accumulate(p0, tape_.record(Op::Reshape, {adj}, {.shape = x.shape()}));
        break;
      case Op::Tanh: {
        NodeRef y = ref(id);
        accumulate(p0, adj * (1.0 - square(y)));
        break;
      }
      case Op::Elu: {
        // d/dx = 1 for x>0, exp(x) = y+1 for x<=0; the mask is constant
        NodeRef y = ref(id);
        const Tensor& xv = x.value();
        Tensor mask(xv.shape);
        for (std::size_t i = 0; i < xv.numel(); ++i)
          mask.v[i] = xv.v[i] > 0 ? 1.0 : 0.0;
        Tensor inv_mask(xv.shape);
        for (std::size_t i = 0; i < xv.numel(); ++i)
          inv_mask.v[i] = 1.0 - mask.v[i];
        NodeRef m = tape_.constant(std::move(mask));
        NodeRef im = tape_.constant(std::move(inv_mask));
        accumulate(p0, adj * (m + im * (y + 1.0)));
        break;
      }
      case Op::Swish: {
        NodeRef s = sigmoid(x);
        accumulate(p0, adj * (s + x * (s * (1.0 - s))));
        break;
      }
      case Op::Sin:
        accumulate(p0, adj * cos(x));
        break;
      case Op::Cos:
        accumulate(p0, adj * neg(sin(x)));
        break;
      case Op::Exp:
        accumulate(p0, adj * ref(id));
        break;
      case Op::Log:
        accumulate(p0, adj * reciprocal(x));
        break;
      case Op::Softplus:
        accumulate(p0, adj * sigmoid(x));
        break;
      case Op::Softmax: {
        NodeRef y = ref(id);
        NodeRef inner = sum(adj * y);
        accumulate(p0, y * (adj - inner));
        break;
      }
      case Op::Reciprocal: {
        NodeRef y = ref(id);
        accumulate(p0, adj * neg(square(y)));
        break;
      }
      case Op::Square:
        accumulate(p0, adj * (2.0 * x));
        break;
      case Op::Detach:
        if (reconnect_) {
          if (!tape_.has_hook(id))
            throw Error(
                "vjp_with_reconnect: severed edge on the active path has no "
                "reconnect hook (node " + std::to_string(id) + ")");
          accumulate(p0, adj);  // route cotangent into the true source
        }
        // plain vjp: severed edge contributes exactly zero upstream
        break;
      default:
        throw Error(std::string("vjp: primitive '") + op_name(node.op) +
                    "' has no backward rule");
    }
  }

  void backward_matmul(const Node& node, NodeRef adj) {
    const std::uint32_t pa = node.parents[0], pb = node.parents[1];
    const bool ta = node.attrs.i0 != 0, tb = node.attrs.i1 != 0;
    NodeRef a = ref(pa), b = ref(pb);
    const bool b_vec = b.shape().rank == 1;
    if (tape_.node(pa).requires_grad) {
      NodeRef ga;
      if (b_vec) {
        // outer(adj, b) laid out to match a's storage
        const std::uint32_t m = adj.shape().d0, n = b.shape().d0;
        NodeRef adj_col = reshape(adj, Shape::mat(m, 1));
        NodeRef b_row = reshape(b, Shape::mat(1, n));
        ga = ta ? tape_.record(Op::Matmul,
                               {reshape(b, Shape::mat(n, 1)), reshape(adj, Shape::mat(1, m))},
                               {})
                : tape_.record(Op::Matmul, {adj_col, b_row}, {});
      } else {
        ga = ta ? tape_.record(Op::Matmul, {b, adj},
                               {.i0 = tb ? 1 : 0, .i1 = 1})
                : tape_.record(Op::Matmul, {adj, b},
                               {.i0 = 0, .i1 = tb ? 0 : 1});
      }
      accumulate(pa, ga);
    }
    if (tape_.node(pb).requires_grad) {
      NodeRef gb;
      if (b_vec) {
        gb = tape_.record(Op::Matmul, {a, adj}, {.i0 = ta ? 0 : 1, .i1 = 0});
      } else {
        gb = tb ? tape_.record(Op::Matmul, {adj, a},
                               {.i0 = 1, .i1 = ta ? 1 : 0})
                : tape_.record(Op::Matmul, {a, adj},
                               {.i0 = ta ? 0 : 1, .i1 = 0});
      }
      accumulate(pb, gb);
    }
  }

  Tape& tape_;
  bool reconnect_;
  std::vector<std::int64_t> adj_;
};

VjpResult run_sweep(NodeRef output, NodeRef cotangent, bool reconnect) {
  Tape& tape = *output.tape;
  Sweep sweep(tape, output, cotangent, reconnect);
  VjpResult res;
  res.tape = &tape;
  res.adj = sweep.take();
  return res;
}

}  // namespace

NodeRef VjpResult::of(NodeRef x) const {
  if (auto a = maybe(x)) return *a;
  return tape->zeros(x.shape());
}

VjpResult vjp(NodeRef output, NodeRef cotangent) {
  VjpResult r = run_sweep(output, cotangent, false);
  ++output.tape->sweeps_;
  return r;
}

VjpResult vjp_with_reconnect(NodeRef output, NodeRef cotangent) {
  VjpResult r = run_sweep(output, cotangent, true);
  ++output.tape->sweeps_;
  return r;
}

NodeRef grad(NodeRef scalar_output, NodeRef wrt) {
  if (scalar_output.shape().numel() != 1)
    throw ShapeError("grad: output must be scalar, got " +
                     scalar_output.shape().str());
  NodeRef ct = scalar_output.tape->ones(scalar_output.shape());
  return vjp(scalar_output, ct).of(wrt);
}

}  // namespace hollow::ad
