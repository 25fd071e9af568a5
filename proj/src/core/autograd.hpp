#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "rfcvnn/tensor.hpp"

namespace rfcvnn::detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  mutable std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  bool consumed = false;
  std::string_view op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad() const {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
  Node& parent(std::size_t i) const { return *parents[i]; }
  bool parent_needs_grad(std::size_t i) const { return parents[i]->requires_grad; }
};

/// Creates the result node of an op. History is kept only when at least one
/// input requires gradients; otherwise the closure is dropped immediately.
Tensor make_result(std::string_view op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, std::function<void(Node&)> backward);

inline Node& node_of(const Tensor& t) { return *t.node(); }

}  // namespace rfcvnn::detail
