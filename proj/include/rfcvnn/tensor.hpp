#pragma once

// Dense row-major real tensor with reverse-mode differentiation.
//
// A Tensor is a cheap handle; copies share storage. Operations on tensors that
// require gradients record themselves as nodes of a computation graph, which
// backward() replays once in reverse topological order and then releases.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rfcvnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string to_string(const Shape& shape);

/// Incompatible shapes or ranks.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Misuse of the computation graph (double backward, missing seed, ...).
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN or infinity where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }
  std::size_t size() const;

  std::span<const double> values() const;
  /// Writable view of the values. Intended for leaves (parameter updates,
  /// perturbation); mutating a recorded intermediate invalidates its graph.
  std::span<double> mutable_values();
  double item() const;

  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool is_leaf() const;
  std::string_view op_name() const;

  /// Seeds d(self)/d(self) = 1. Only valid on a single-element tensor.
  void backward();
  /// Seeds with an explicit upstream gradient of the same size.
  void backward(std::span<const double> seed);

  /// Value copy with no history.
  Tensor detach() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Reverse-order schedule of the ops reachable from a root tensor. The root
/// must require gradients (GraphError otherwise).
///
/// Capturing does not modify the graph. Replaying runs every recorded op's
/// backward exactly once and consumes the graph: its intermediate nodes drop
/// their closures and a later backward through them raises GraphError.
class ComputationGraph {
 public:
  static ComputationGraph capture(const Tensor& root);

  std::size_t op_count() const { return order_.size(); }
  /// Op names in the order replay() visits them (root first).
  std::vector<std::string_view> op_names() const;
  void replay(std::span<const double> seed);

 private:
  std::shared_ptr<detail::Node> root_;
  std::vector<std::shared_ptr<detail::Node>> order_;  // reverse topological
};

}  // namespace rfcvnn
