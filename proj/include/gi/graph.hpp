// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Tape-based reverse-mode differentiation. Nodes are appended in evaluation
// order, so the tape is already topologically sorted and backward is a single
// reverse sweep.

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "gi/tensor.hpp"

namespace gi::ad {

class Graph;

/// Handle to a node on a Graph. Cheap to copy; valid as long as the graph.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Backward closure: receives the graph and the index of its own node, reads
/// that node's gradient and accumulates into the parents that require it.
using BackwardFn = std::function<void(Graph&, std::size_t)>;

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return input(std::move(value), false); }

  /// Leaf bound to a parameter: on backward its gradient is added into
  /// `p.grad`. Frozen parameters enter as constants.
  Var param(Parameter& p);
  /// Parameter value as a constant (no gradient), e.g. D inside the G step.
  Var param_constant(const Parameter& p);

  /// Appends an op node. `backward` is dropped when no parent needs a gradient.
  Var record(std::string_view op, Tensor value, std::initializer_list<Var> parents,
             BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. Throws
  /// ContractViolation unless `loss` holds exactly one element.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::string_view op(std::size_t id) const { return nodes_[id].op; }
  const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_[id].parents; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient accumulated at a node (zero tensor when nothing flowed in).
  const Tensor& grad(Var v);
  /// Mutable gradient buffer, allocated on first use.
  Tensor& grad_buffer(std::size_t id);

  /// Number of backward closures executed by the last backward().
  std::size_t last_backward_visits() const { return visits_; }

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    std::vector<std::size_t> parents;
    Parameter* param = nullptr;
  };

  std::deque<Node> nodes_;
  std::size_t visits_ = 0;
};

}  // namespace gi::ad
