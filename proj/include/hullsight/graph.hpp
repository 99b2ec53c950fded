#pragma once

// Static computation graph with reverse-mode differentiation.
//
// Nodes are appended in construction order, which is a topological order by
// construction: an op can only reference nodes that already exist. forward()
// keeps every node value for the following backward() call.

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hullsight/tensor.hpp"

namespace hullsight {

template <typename S>
class Op {
 public:
  virtual ~Op() = default;
  virtual std::string_view kind() const = 0;
  virtual Tensor<S> forward(std::span<const Tensor<S>* const> in) const = 0;
  // Writes d(loss)/d(in[i]) into grads[i] for every i with wanted[i].
  virtual void backward(std::span<const Tensor<S>* const> in, const Tensor<S>& out, const Tensor<S>& g_out,
                        std::span<const bool> wanted, std::span<Tensor<S>> grads) const = 0;
};

struct NodeRef {
  std::size_t index = 0;
};

template <typename S>
using TensorMap = std::map<std::string, Tensor<S>, std::less<>>;

// Parameters in manifest order.
template <typename S>
using ParameterList = std::vector<std::pair<std::string, Tensor<S>>>;

template <typename S>
class Graph {
 public:
  enum class Kind { input, parameter, constant, op };

  Graph() = default;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  NodeRef input(std::string name, Shape shape) {
    Node& n = push(std::move(name), Kind::input);
    n.declared = shape;
    return {nodes_.size() - 1};
  }

  NodeRef parameter(std::string name, Tensor<S> init) {
    Node& n = push(std::move(name), Kind::parameter);
    n.declared = init.shape();
    n.value = std::move(init);
    n.requires_grad = true;
    parameters_.push_back(nodes_.size() - 1);
    return {nodes_.size() - 1};
  }

  NodeRef constant(std::string name, Tensor<S> value) {
    Node& n = push(std::move(name), Kind::constant);
    n.declared = value.shape();
    n.value = std::move(value);
    return {nodes_.size() - 1};
  }

  NodeRef apply(std::string name, std::unique_ptr<Op<S>> op, std::vector<NodeRef> inputs) {
    std::vector<std::size_t> idx;
    bool needs_grad = false;
    for (NodeRef r : inputs) {
      if (r.index >= nodes_.size()) throw ValueError("node '" + name + "' references a node that does not exist");
      idx.push_back(r.index);
      needs_grad = needs_grad || nodes_[r.index].requires_grad;
    }
    Node& n = push(std::move(name), Kind::op);
    n.op = std::move(op);
    n.inputs = std::move(idx);
    n.requires_grad = needs_grad;
    return {nodes_.size() - 1};
  }

  void mark_output(std::string name, NodeRef node) {
    if (node.index >= nodes_.size()) throw ValueError("output '" + name + "' references a missing node");
    outputs_[std::move(name)] = node.index;
  }

  TensorMap<S> forward(const TensorMap<S>& inputs) {
    forwarded_ = false;
    std::vector<const Tensor<S>*> args;
    for (Node& n : nodes_) {
      switch (n.kind) {
        case Kind::input: {
          auto it = inputs.find(n.name);
          if (it == inputs.end()) throw ValueError("missing graph input '" + n.name + "'");
          if (it->second.shape() != n.declared) throw ShapeError(n.name, n.declared, it->second.shape(), "input");
          n.value = it->second;
          break;
        }
        case Kind::parameter:
        case Kind::constant:
          break;
        case Kind::op: {
          args.clear();
          for (std::size_t i : n.inputs) args.push_back(&nodes_[i].value);
          try {
            n.value = n.op->forward(args);
          } catch (const ShapeError& e) {
            throw e.with_node(n.name);
          }
          break;
        }
      }
    }
    forwarded_ = true;
    TensorMap<S> out;
    for (const auto& [name, idx] : outputs_) out.emplace(name, nodes_[idx].value);
    return out;
  }

  // Gradients of `output` (seeded with `seed`) for every parameter, keyed by
  // parameter name. Parameters the output does not depend on get zeros.
  TensorMap<S> backward(std::string_view output, const Tensor<S>& seed) {
    if (!forwarded_) throw StateError("backward called before forward");
    auto it = outputs_.find(output);
    if (it == outputs_.end()) throw ValueError("unknown graph output '" + std::string(output) + "'");
    const std::size_t root = it->second;
    if (seed.shape() != nodes_[root].value.shape()) {
      throw ShapeError(nodes_[root].name, nodes_[root].value.shape(), seed.shape(), "output gradient");
    }
    std::vector<Tensor<S>> grads(nodes_.size());
    std::vector<bool> has(nodes_.size(), false);
    grads[root] = seed;
    has[root] = true;
    std::vector<const Tensor<S>*> args;
    std::vector<Tensor<S>> in_grads;
    for (std::size_t k = root + 1; k-- > 0;) {
      Node& n = nodes_[k];
      if (!has[k] || n.kind != Kind::op || !n.requires_grad) continue;
      args.clear();
      for (std::size_t i : n.inputs) args.push_back(&nodes_[i].value);
      std::unique_ptr<bool[]> wanted(new bool[n.inputs.size()]);
      for (std::size_t i = 0; i < n.inputs.size(); ++i) wanted[i] = nodes_[n.inputs[i]].requires_grad;
      in_grads.assign(n.inputs.size(), Tensor<S>());
      try {
        n.op->backward(args, n.value, grads[k], std::span<const bool>(wanted.get(), n.inputs.size()), in_grads);
      } catch (const ShapeError& e) {
        throw e.with_node(n.name);
      }
      for (std::size_t i = 0; i < n.inputs.size(); ++i) {
        if (!wanted[i]) continue;
        const std::size_t src = n.inputs[i];
        if (has[src]) {
          grads[src].array() += in_grads[i].array();
        } else {
          grads[src] = std::move(in_grads[i]);
          has[src] = true;
        }
      }
      if (k != root) grads[k] = Tensor<S>();
    }
    TensorMap<S> out;
    for (std::size_t p : parameters_) {
      out.emplace(nodes_[p].name, has[p] ? std::move(grads[p]) : Tensor<S>(nodes_[p].value.shape()));
    }
    return out;
  }

  const Tensor<S>& value(NodeRef r) const { return nodes_.at(r.index).value; }
  const std::string& name(NodeRef r) const { return nodes_.at(r.index).name; }
  std::size_t size() const { return nodes_.size(); }
  bool has_forward() const { return forwarded_; }

  ParameterList<S> parameters() const {
    ParameterList<S> out;
    for (std::size_t p : parameters_) out.emplace_back(nodes_[p].name, nodes_[p].value);
    return out;
  }

  const Tensor<S>& parameter(std::string_view name) const { return nodes_[find_parameter(name)].value; }

  void set_parameter(std::string_view name, Tensor<S> value) {
    Node& n = nodes_[find_parameter(name)];
    if (value.shape() != n.declared) throw ShapeError(n.name, n.declared, value.shape(), "parameter update");
    n.value = std::move(value);
    forwarded_ = false;
  }

  void set_parameters(const ParameterList<S>& params) {
    for (const auto& [name, value] : params) set_parameter(name, value);
  }

 private:
  struct Node {
    std::string name;
    Kind kind = Kind::op;
    std::unique_ptr<Op<S>> op;
    std::vector<std::size_t> inputs;
    Shape declared{};
    Tensor<S> value;
    bool requires_grad = false;
  };

  Node& push(std::string name, Kind kind) {
    if (name.empty()) throw ValueError("graph nodes need a name");
    if (names_.count(name)) throw ValueError("duplicate graph node name '" + name + "'");
    names_.emplace(name, nodes_.size());
    Node& n = nodes_.emplace_back();
    n.name = std::move(name);
    n.kind = kind;
    forwarded_ = false;
    return n;
  }

  std::size_t find_parameter(std::string_view name) const {
    auto it = names_.find(name);
    if (it == names_.end() || nodes_[it->second].kind != Kind::parameter) {
      throw ValueError("unknown parameter '" + std::string(name) + "'");
    }
    return it->second;
  }

  std::vector<Node> nodes_;
  std::vector<std::size_t> parameters_;
  std::map<std::string, std::size_t, std::less<>> names_;
  std::map<std::string, std::size_t, std::less<>> outputs_;
  bool forwarded_ = false;
};

}  // namespace hullsight
