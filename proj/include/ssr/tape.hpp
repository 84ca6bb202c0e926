#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal reverse-mode automatic differentiation over dense double arrays.
// A Tape owns an append-only list of nodes; operations append nodes and
// capture local-derivative closures. A tape is confined to one thread; the
// only internal parallelism is the matmul kernels, which are deterministic.
namespace ssr::autodiff {

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct NonScalarRoot : std::runtime_error {
  explicit NonScalarRoot(const std::string& what) : std::runtime_error(what) {}
};

struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Array() = default;
  Array(std::vector<std::size_t> s, std::vector<double> d);

  static Array zeros(std::vector<std::size_t> shape);
  static Array scalar(double v);
  static Array vec(std::vector<double> v);
  static Array matrix(std::size_t rows, std::size_t cols, std::vector<double> d);

  std::size_t size() const { return data.size(); }
  bool is_scalar() const { return data.size() == 1; }
  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }
};

struct Value {
  std::size_t id = static_cast<std::size_t>(-1);
};

class Tape {
 public:
  // Leaf node. Gradients are accumulated for every node; the caller decides
  // which leaves it reads back as parameters.
  Value input(Array v);

  const Array& value(Value v) const { return nodes_[v.id].value; }
  const Array& grad(Value v) const { return nodes_[v.id].grad; }

  // Elementwise / structural ops
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value add_scalar(Value a, double c);
  Value scalar_mul(Value a, double c);
  Value relu(Value a);
  Value hinge(Value a);  // max(0, x); subgradient at 0 is 0
  Value square(Value a);
  Value add_constant(Value a, const Array& c);
  Value mul_constant(Value a, const Array& c);

  // Linear algebra
  Value matmul(Value a, Value b);      // [n,k] x [k,m]
  Value matmul_nt(Value a, Value b);   // [n,d] x [m,d]^T -> [n,m]
  Value dot(Value a, Value b);         // vectors -> scalar
  Value l2_normalize(Value a);         // vector; zero vector below eps stays zero
  Value mean_over_axis(Value a, std::size_t axis);  // matrix -> vector
  Value sum_all(Value a);
  Value mean_all(Value a);

  // Matrix utilities used by the loss unit / encoder
  Value diagonal(Value a);                   // square matrix -> vector
  Value sub_colvec(Value a, Value v);        // out[i][j] = a[i][j] - v[i]
  Value add_rowvec(Value a, Value v);        // out[i][j] = a[i][j] + v[j]
  Value stack_rows(std::span<const Value> rows);  // d-vectors -> [n,d]
  Value set_row(Value mat, std::size_t row, Value v);
  Value add_row_range(Value mat, std::size_t begin, std::size_t count, Value v);

  // Reverse accumulation from a scalar root. A second call on the same tape
  // throws; build a fresh tape per pass.
  void backward(Value root);

  std::size_t num_nodes() const { return nodes_.size(); }

  static constexpr double kNormEps = 1e-12;

 private:
  struct Node {
    Array value;
    Array grad;
    std::function<void(Tape&, std::size_t)> back;  // reads grad of self
  };

  Value emit(Array value, std::function<void(Tape&, std::size_t)> back);
  Array& grad_mut(std::size_t id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Central finite differences of f at params compared against an analytic
// gradient. Returns max over coordinates of
// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
double finite_diff_check(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& params,
    const std::vector<double>& analytic_grad,
    double step);

}  // namespace ssr::autodiff
