#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "core/autograd.hpp"

namespace rfcvnn {

using detail::Node;

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
  for (std::size_t e : shape)
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
}

std::shared_ptr<Node> new_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  validate_shape(shape);
  if (shape_size(shape) != values.size())
    throw ShapeError("shape " + to_string(shape) + " needs " + std::to_string(shape_size(shape)) +
                     " values, got " + std::to_string(values.size()));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  node->grad.assign(node->value.size(), 0.0);
  return node;
}

const Node& checked(const std::shared_ptr<Node>& n) {
  if (!n) throw GraphError("use of an undefined tensor");
  return *n;
}

}  // namespace

Tensor::Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  validate_shape(shape);
  std::vector<double> v(shape_size(shape), value);
  return Tensor(new_leaf(std::move(shape), std::move(v), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return checked(node_).shape; }
std::size_t Tensor::size() const { return checked(node_).value.size(); }
std::span<const double> Tensor::values() const { return checked(node_).value; }
std::span<double> Tensor::mutable_values() {
  checked(node_);
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() needs a single-element tensor, got " + to_string(shape()));
  return node_->value[0];
}

std::span<const double> Tensor::grad() const { return checked(node_).ensure_grad(); }
std::span<double> Tensor::mutable_grad() { return checked(node_).ensure_grad(); }

void Tensor::zero_grad() {
  auto& g = checked(node_).ensure_grad();
  std::fill(g.begin(), g.end(), 0.0);
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }

void Tensor::set_requires_grad(bool on) {
  if (!is_leaf()) throw GraphError("requires_grad can only be toggled on leaf tensors");
  node_->requires_grad = on;
}

bool Tensor::is_leaf() const { return checked(node_).leaf; }
std::string_view Tensor::op_name() const { return checked(node_).op; }

void Tensor::backward() {
  if (size() != 1)
    throw GraphError("backward() without a seed needs a scalar output, got shape " + to_string(shape()));
  const double one = 1.0;
  backward(std::span<const double>(&one, 1));
}

void Tensor::backward(std::span<const double> seed) {
  ComputationGraph::capture(*this).replay(seed);
}

Tensor Tensor::detach() const {
  const Node& n = checked(node_);
  return Tensor(new_leaf(n.shape, n.value, false));
}

ComputationGraph ComputationGraph::capture(const Tensor& root) {
  if (!root.defined()) throw GraphError("backward on an undefined tensor");
  const auto& rp = root.node_ptr();
  if (rp->consumed)
    throw GraphError("computation graph already consumed by an earlier backward; recompute the forward pass");
  if (!rp->requires_grad) throw GraphError("backward on a tensor that does not require gradients");

  ComputationGraph g;
  g.root_ = rp;
  // Iterative post-order DFS gives a topological order with parents first.
  std::vector<std::shared_ptr<Node>> topo;
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  stack.emplace_back(rp, 0);
  seen.insert(rp.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      auto parent = node->parents[next++];
      if (parent->requires_grad && !parent->leaf && seen.insert(parent.get()).second) {
        if (parent->consumed)
          throw GraphError("computation graph already consumed by an earlier backward");
        stack.emplace_back(std::move(parent), 0);
      }
      continue;
    }
    if (!node->leaf) topo.push_back(node);
    stack.pop_back();
  }
  g.order_.assign(topo.rbegin(), topo.rend());
  return g;
}

std::vector<std::string_view> ComputationGraph::op_names() const {
  std::vector<std::string_view> names;
  names.reserve(order_.size());
  for (const auto& n : order_) names.push_back(n->op);
  return names;
}

void ComputationGraph::replay(std::span<const double> seed) {
  if (!root_) throw GraphError("replay of an empty graph");
  if (root_->consumed) throw GraphError("computation graph already consumed");
  if (seed.size() != root_->value.size())
    throw GraphError("seed gradient has " + std::to_string(seed.size()) + " entries, output has " +
                     std::to_string(root_->value.size()));
  auto& g = root_->ensure_grad();
  for (std::size_t i = 0; i < seed.size(); ++i) g[i] += seed[i];

  for (const auto& node : order_) {
    node->ensure_grad();
    for (const auto& p : node->parents)
      if (p->requires_grad) p->ensure_grad();
    if (node->backward) node->backward(*node);
  }
  for (const auto& node : order_) {
    node->backward = nullptr;
    node->parents.clear();
    node->consumed = true;
  }
  order_.clear();
}

namespace detail {

Tensor make_result(std::string_view op, Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->op = op;
  node->leaf = false;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (auto& in : inputs) node->parents.push_back(in.node_ptr());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

}  // namespace detail
}  // namespace rfcvnn
