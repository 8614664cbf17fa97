#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hollow/tensor.hpp"

namespace hollow::ad {

// Forward primitives. The backward pass is itself recorded with these ops,
// so adjoints are ordinary differentiable nodes (higher orders come from
// sweeping again).
enum class Op : std::uint8_t {
  Leaf,
  Constant,
  Add,
  Sub,
  Mul,
  Matmul,
  Concat,
  Slice,
  Sum,
  Broadcast,
  Reshape,
  Tanh,
  Elu,
  Swish,
  Sin,
  Cos,
  Exp,
  Log,
  Softplus,
  Softmax,
  Reciprocal,
  Square,
  Detach,
};

const char* op_name(Op op);

// Op-specific small attributes.
//   Matmul:    i0 = trans_a, i1 = trans_b
//   Concat:    i0 = axis
//   Slice:     i0 = axis, i1 = begin, i2 = end (exclusive)
//   Sum:       i0 = axis (-1 = all, 0 = over rows, 1 = over cols)
//   Broadcast: i0 = mode (0 scalar->shape, 1 row->matrix, 2 col->matrix),
//              target shape in `shape`
//   Reshape:   target shape in `shape`
struct Attrs {
  std::int32_t i0 = 0, i1 = 0, i2 = 0;
  Shape shape;
};

struct Node {
  Op op = Op::Constant;
  bool requires_grad = false;
  std::uint8_t n_parents = 0;
  std::array<std::uint32_t, 3> parents{};
  Attrs attrs;
  Tensor value;
};

class Tape;
struct NodeRef;
struct VjpResult;
VjpResult vjp(NodeRef output, NodeRef cotangent);
VjpResult vjp_with_reconnect(NodeRef output, NodeRef cotangent);

// Lightweight handle to a tape node.
struct NodeRef {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  bool valid() const { return tape != nullptr; }
  const Tensor& value() const;
  Shape shape() const;
  double scalar() const;  // numel()==1 convenience
};

// Append-only computation tape. Node ids are topologically ordered by
// construction: parents strictly precede children. One tape per evaluation;
// tapes are single-threaded.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  NodeRef leaf(Tensor value, bool requires_grad = true);
  NodeRef constant(Tensor value);
  NodeRef constant(double value);
  NodeRef zeros(Shape s) { return constant(Tensor::zeros(s)); }
  NodeRef ones(Shape s) { return constant(Tensor::ones(s)); }

  // Records a primitive, computing its value eagerly.
  NodeRef record(Op op, std::initializer_list<NodeRef> parents,
                 Attrs attrs = {});

  // Same value, severed backward edge. When `reconnectable`, a hook is
  // registered so vjp_with_reconnect can route the cotangent back into the
  // source subgraph; otherwise the edge stays dead even under reconnect.
  NodeRef detach(NodeRef src, bool reconnectable = false);

  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  long reverse_sweeps() const { return sweeps_; }

  bool has_hook(std::uint32_t detach_id) const {
    return hooks_.count(detach_id) > 0;
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> detached_edges() const;

 private:
  friend VjpResult vjp(NodeRef, NodeRef);
  friend VjpResult vjp_with_reconnect(NodeRef, NodeRef);

  NodeRef push(Node n);

  std::vector<Node> nodes_;
  std::unordered_map<std::uint32_t, std::uint32_t> hooks_;
  long sweeps_ = 0;
};

// Result of one reverse sweep: node id -> adjoint node id (or none).
// Adjoints are live tape nodes, so they can be swept again.
struct VjpResult {
  Tape* tape = nullptr;
  std::vector<std::int64_t> adj;  // -1 when no adjoint reached the node

  bool has(NodeRef x) const {
    return x.id < adj.size() && adj[x.id] >= 0;
  }
  std::optional<NodeRef> maybe(NodeRef x) const {
    if (!has(x)) return std::nullopt;
    return NodeRef{tape, static_cast<std::uint32_t>(adj[x.id])};
  }
  // Adjoint of x, or a fresh zero constant of x's shape when none reached it.
  NodeRef of(NodeRef x) const;
};

// vjp: one reverse sweep from `output` seeded with `cotangent`. Detached
// edges contribute nothing. Increments the tape's sweep counter by one.
//
// vjp_with_reconnect: like vjp, but cotangents arriving at a detached node
// are routed into its source through the hook registered at detach time (the
// corrected backward pass). A severed edge on the active path without a hook
// is an error.

// Adjoint of `wrt` for a scalar output with unit cotangent; the returned node
// is differentiable, so nesting this gives higher-order derivatives.
NodeRef grad(NodeRef scalar_output, NodeRef wrt);

}  // namespace hollow::ad
