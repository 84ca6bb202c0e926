#include "ssr/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssr/kernels.hpp"

namespace ssr::autodiff {

namespace {
std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeMismatch(what);
}
}  // namespace

Array::Array(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_size(shape))
    throw ShapeMismatch("Array: data length does not match shape");
}

Array Array::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_size(shape);
  return Array(std::move(shape), std::vector<double>(n, 0.0));
}

Array Array::scalar(double v) { return Array({}, {v}); }

Array Array::vec(std::vector<double> v) {
  std::size_t n = v.size();
  return Array({n}, std::move(v));
}

Array Array::matrix(std::size_t rows, std::size_t cols, std::vector<double> d) {
  return Array({rows, cols}, std::move(d));
}

Value Tape::emit(Array value, std::function<void(Tape&, std::size_t)> back) {
  Node node;
  node.grad = Array::zeros(value.shape);
  node.value = std::move(value);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return Value{nodes_.size() - 1};
}

Value Tape::input(Array v) { return emit(std::move(v), nullptr); }

Value Tape::add(Value a, Value b) {
  const Array& va = value(a);
  const Array& vb = value(b);
  require(va.shape == vb.shape, "add: shape mismatch");
  Array out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += vb.data[i];
  return emit(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    Array& gb = t.grad_mut(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] += g.data[i];
    }
  });
}

Value Tape::sub(Value a, Value b) {
  const Array& va = value(a);
  const Array& vb = value(b);
  require(va.shape == vb.shape, "sub: shape mismatch");
  Array out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= vb.data[i];
  return emit(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    Array& gb = t.grad_mut(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] -= g.data[i];
    }
  });
}

Value Tape::add_scalar(Value a, double c) {
  Array out = value(a);
  for (double& x : out.data) x += c;
  return emit(std::move(out), [a](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
  });
}

Value Tape::scalar_mul(Value a, double c) {
  Array out = value(a);
  for (double& x : out.data) x *= c;
  return emit(std::move(out), [a, c](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
  });
}

Value Tape::relu(Value a) {
  Array out = value(a);
  for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  return emit(std::move(out), [a](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    const Array& va = t.value(a);
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (va.data[i] > 0.0) ga.data[i] += g.data[i];
  });
}

Value Tape::hinge(Value a) { return relu(a); }

Value Tape::square(Value a) {
  Array out = value(a);
  for (double& x : out.data) x *= x;
  return emit(std::move(out), [a](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    const Array& va = t.value(a);
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data[i] += 2.0 * va.data[i] * g.data[i];
  });
}

Value Tape::add_constant(Value a, const Array& c) {
  const Array& va = value(a);
  require(va.shape == c.shape, "add_constant: shape mismatch");
  Array out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += c.data[i];
  return emit(std::move(out), [a](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
  });
}

Value Tape::mul_constant(Value a, const Array& c) {
  const Array& va = value(a);
  require(va.shape == c.shape, "mul_constant: shape mismatch");
  Array out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= c.data[i];
  Array mask = c;
  return emit(std::move(out), [a, mask](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data[i] += mask.data[i] * g.data[i];
  });
}

Value Tape::matmul(Value a, Value b) {
  const Array& va = value(a);
  const Array& vb = value(b);
  require(va.shape.size() == 2 && vb.shape.size() == 2 &&
              va.shape[1] == vb.shape[0],
          "matmul: incompatible shapes");
  std::size_t n = va.shape[0], k = va.shape[1], m = vb.shape[1];
  Array out = Array::zeros({n, m});
  kernels::matmul(va.data.data(), vb.data.data(), out.data.data(), n, k, m);
  return emit(std::move(out), [a, b, n, k, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    const Array& va = t.value(a);
    const Array& vb = t.value(b);
    // dA = g * B^T, dB = A^T * g
    Array da = Array::zeros({n, k});
    Array db = Array::zeros({k, m});
    kernels::matmul_nt(g.data.data(), vb.data.data(), da.data.data(), n, m, k);
    kernels::matmul_tn(va.data.data(), g.data.data(), db.data.data(), n, k, m);
    Array& ga = t.grad_mut(a.id);
    Array& gb = t.grad_mut(b.id);
    for (std::size_t i = 0; i < da.size(); ++i) ga.data[i] += da.data[i];
    for (std::size_t i = 0; i < db.size(); ++i) gb.data[i] += db.data[i];
  });
}

Value Tape::matmul_nt(Value a, Value b) {
  const Array& va = value(a);
  const Array& vb = value(b);
  require(va.shape.size() == 2 && vb.shape.size() == 2 &&
              va.shape[1] == vb.shape[1],
          "matmul_nt: incompatible shapes");
  std::size_t n = va.shape[0], d = va.shape[1], m = vb.shape[0];
  Array out = Array::zeros({n, m});
  kernels::matmul_nt(va.data.data(), vb.data.data(), out.data.data(), n, d, m);
  return emit(std::move(out), [a, b, n, d, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;  // [n,m]
    const Array& va = t.value(a);
    const Array& vb = t.value(b);
    // dA = g * B, dB = g^T * A
    Array da = Array::zeros({n, d});
    Array db = Array::zeros({m, d});
    kernels::matmul(g.data.data(), vb.data.data(), da.data.data(), n, m, d);
    kernels::matmul_tn(g.data.data(), va.data.data(), db.data.data(), n, m, d);
    Array& ga = t.grad_mut(a.id);
    Array& gb = t.grad_mut(b.id);
    for (std::size_t i = 0; i < da.size(); ++i) ga.data[i] += da.data[i];
    for (std::size_t i = 0; i < db.size(); ++i) gb.data[i] += db.data[i];
  });
}

Value Tape::dot(Value a, Value b) {
  const Array& va = value(a);
  const Array& vb = value(b);
  require(va.shape.size() == 1 && va.shape == vb.shape, "dot: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) acc += va.data[i] * vb.data[i];
  return emit(Array::scalar(acc), [a, b](Tape& t, std::size_t self) {
    double g = t.nodes_[self].grad.data[0];
    const Array& va = t.value(a);
    const Array& vb = t.value(b);
    Array& ga = t.grad_mut(a.id);
    Array& gb = t.grad_mut(b.id);
    for (std::size_t i = 0; i < va.size(); ++i) {
      ga.data[i] += g * vb.data[i];
      gb.data[i] += g * va.data[i];
    }
  });
}

Value Tape::l2_normalize(Value a) {
  const Array& va = value(a);
  require(va.shape.size() == 1, "l2_normalize: expects a vector");
  double norm = 0.0;
  for (double x : va.data) norm += x * x;
  norm = std::sqrt(norm);
  Array out = va;
  if (norm < kNormEps) {
    std::fill(out.data.begin(), out.data.end(), 0.0);
    // degenerate input: output and subgradient are zero
    return emit(std::move(out), [](Tape&, std::size_t) {});
  }
  for (double& x : out.data) x /= norm;
  return emit(std::move(out), [a, norm](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    const Array& y = t.nodes_[self].value;
    Array& ga = t.grad_mut(a.id);
    double ydotg = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) ydotg += y.data[i] * g.data[i];
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data[i] += (g.data[i] - y.data[i] * ydotg) / norm;
  });
}

Value Tape::mean_over_axis(Value a, std::size_t axis) {
  const Array& va = value(a);
  require(va.shape.size() == 2 && axis <= 1, "mean_over_axis: expects matrix");
  std::size_t n = va.shape[0], m = va.shape[1];
  if (axis == 0) {
    Array out = Array::zeros({m});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) out.data[j] += va.at(i, j);
    for (double& x : out.data) x /= static_cast<double>(n);
    return emit(std::move(out), [a, n, m](Tape& t, std::size_t self) {
      const Array& g = t.nodes_[self].grad;
      Array& ga = t.grad_mut(a.id);
      double inv = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
          ga.data[i * m + j] += g.data[j] * inv;
    });
  }
  Array out = Array::zeros({n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.data[i] += va.at(i, j);
  for (double& x : out.data) x /= static_cast<double>(m);
  return emit(std::move(out), [a, n, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    double inv = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        ga.data[i * m + j] += g.data[i] * inv;
  });
}

Value Tape::sum_all(Value a) {
  const Array& va = value(a);
  double acc = std::accumulate(va.data.begin(), va.data.end(), 0.0);
  return emit(Array::scalar(acc), [a](Tape& t, std::size_t self) {
    double g = t.nodes_[self].grad.data[0];
    Array& ga = t.grad_mut(a.id);
    for (double& x : ga.data) x += g;
  });
}

Value Tape::mean_all(Value a) {
  return scalar_mul(sum_all(a), 1.0 / static_cast<double>(value(a).size()));
}

Value Tape::diagonal(Value a) {
  const Array& va = value(a);
  require(va.shape.size() == 2 && va.shape[0] == va.shape[1],
          "diagonal: expects square matrix");
  std::size_t n = va.shape[0];
  Array out = Array::zeros({n});
  for (std::size_t i = 0; i < n; ++i) out.data[i] = va.at(i, i);
  return emit(std::move(out), [a, n](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    for (std::size_t i = 0; i < n; ++i) ga.data[i * n + i] += g.data[i];
  });
}

Value Tape::sub_colvec(Value a, Value v) {
  const Array& va = value(a);
  const Array& vv = value(v);
  require(va.shape.size() == 2 && vv.shape.size() == 1 &&
              va.shape[0] == vv.shape[0],
          "sub_colvec: shape mismatch");
  std::size_t n = va.shape[0], m = va.shape[1];
  Array out = va;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) -= vv.data[i];
  return emit(std::move(out), [a, v, n, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    Array& gv = t.grad_mut(v.id);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        ga.data[i * m + j] += g.data[i * m + j];
        gv.data[i] -= g.data[i * m + j];
      }
  });
}

Value Tape::add_rowvec(Value a, Value v) {
  const Array& va = value(a);
  const Array& vv = value(v);
  require(va.shape.size() == 2 && vv.shape.size() == 1 &&
              va.shape[1] == vv.shape[0],
          "add_rowvec: shape mismatch");
  std::size_t n = va.shape[0], m = va.shape[1];
  Array out = va;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) += vv.data[j];
  return emit(std::move(out), [a, v, n, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& ga = t.grad_mut(a.id);
    Array& gv = t.grad_mut(v.id);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        ga.data[i * m + j] += g.data[i * m + j];
        gv.data[j] += g.data[i * m + j];
      }
  });
}

Value Tape::stack_rows(std::span<const Value> rows) {
  require(!rows.empty(), "stack_rows: empty input");
  std::size_t d = value(rows[0]).size();
  for (Value r : rows)
    require(value(r).shape.size() == 1 && value(r).size() == d,
            "stack_rows: rows must be equal-length vectors");
  std::size_t n = rows.size();
  Array out = Array::zeros({n, d});
  for (std::size_t i = 0; i < n; ++i)
    std::copy(value(rows[i]).data.begin(), value(rows[i]).data.end(),
              out.data.begin() + i * d);
  std::vector<Value> parents(rows.begin(), rows.end());
  return emit(std::move(out), [parents, d](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      Array& gr = t.grad_mut(parents[i].id);
      for (std::size_t j = 0; j < d; ++j) gr.data[j] += g.data[i * d + j];
    }
  });
}

Value Tape::set_row(Value mat, std::size_t row, Value v) {
  const Array& vm = value(mat);
  const Array& vv = value(v);
  require(vm.shape.size() == 2 && vv.shape.size() == 1 &&
              row < vm.shape[0] && vv.shape[0] == vm.shape[1],
          "set_row: shape mismatch");
  std::size_t m = vm.shape[1];
  Array out = vm;
  std::copy(vv.data.begin(), vv.data.end(), out.data.begin() + row * m);
  return emit(std::move(out), [mat, v, row, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& gm = t.grad_mut(mat.id);
    Array& gv = t.grad_mut(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i / m == row) continue;
      gm.data[i] += g.data[i];
    }
    for (std::size_t j = 0; j < m; ++j) gv.data[j] += g.data[row * m + j];
  });
}

Value Tape::add_row_range(Value mat, std::size_t begin, std::size_t count,
                          Value v) {
  const Array& vm = value(mat);
  const Array& vv = value(v);
  require(vm.shape.size() == 2 && vv.shape.size() == 1 &&
              begin + count <= vm.shape[0] && vv.shape[0] == vm.shape[1],
          "add_row_range: shape mismatch");
  std::size_t m = vm.shape[1];
  Array out = vm;
  for (std::size_t i = begin; i < begin + count; ++i)
    for (std::size_t j = 0; j < m; ++j) out.at(i, j) += vv.data[j];
  return emit(std::move(out),
              [mat, v, begin, count, m](Tape& t, std::size_t self) {
    const Array& g = t.nodes_[self].grad;
    Array& gm = t.grad_mut(mat.id);
    Array& gv = t.grad_mut(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gm.data[i] += g.data[i];
    for (std::size_t i = begin; i < begin + count; ++i)
      for (std::size_t j = 0; j < m; ++j) gv.data[j] += g.data[i * m + j];
  });
}

void Tape::backward(Value root) {
  if (backward_done_)
    throw std::logic_error("backward: already called on this tape");
  if (!value(root).is_scalar())
    throw NonScalarRoot("backward: root must be scalar");
  backward_done_ = true;
  nodes_[root.id].grad.data[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this, i);
  }
}

double finite_diff_check(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& params,
    const std::vector<double>& analytic_grad,
    double step) {
  double max_err = 0.0;
  std::vector<double> p = params;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double orig = p[i];
    p[i] = orig + step;
    double fp = f(p);
    p[i] = orig - step;
    double fm = f(p);
    p[i] = orig;
    double numeric = (fp - fm) / (2.0 * step);
    double analytic = analytic_grad[i];
    double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    max_err = std::max(max_err, std::abs(analytic - numeric) / denom);
  }
  return max_err;
}

}  // namespace ssr::autodiff
