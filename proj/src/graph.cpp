// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/graph.hpp"

#include "gi/errors.hpp"

namespace gi::ad {

const Tensor& Var::value() const { return graph_->value(id_); }
bool Var::requires_grad() const { return graph_->requires_grad(id_); }

Var Graph::input(Tensor value, bool requires_grad) {
  Node& n = nodes_.emplace_back();
  n.op = requires_grad ? "input" : "constant";
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  if (p.frozen) return param_constant(p);
  Node& n = nodes_.emplace_back();
  n.op = "param";
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
  return Var(this, nodes_.size() - 1);
}

Var Graph::param_constant(const Parameter& p) {
  Node& n = nodes_.emplace_back();
  n.op = "constant";
  n.value = p.value;
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(std::string_view op, Tensor value, std::initializer_list<Var> parents,
                  BackwardFn backward) {
  Node& n = nodes_.emplace_back();
  n.op = op;
  n.value = std::move(value);
  for (const Var& p : parents) {
    if (p.graph_ != this) throw ContractViolation("op '" + std::string(op) + "' mixes graphs");
    n.parents.push_back(p.id_);
    n.requires_grad = n.requires_grad || nodes_[p.id_].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

const Tensor& Graph::grad(Var v) { return grad_buffer(v.id_); }

void Graph::backward(Var loss) {
  if (loss.graph_ != this) throw ContractViolation("loss belongs to another graph");
  if (loss.value().size() != 1)
    throw ContractViolation("backward needs a scalar loss, got shape " + to_string(loss.shape()));
  visits_ = 0;
  grad_buffer(loss.id_)[0] += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.shape() != n.value.shape()) continue;
    if (n.param != nullptr) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
      ++visits_;
    } else if (n.backward) {
      n.backward(*this, i);
      ++visits_;
    }
  }
}

}  // namespace gi::ad
