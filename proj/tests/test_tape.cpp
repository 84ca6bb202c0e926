#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "doctest.h"
#include "ssr/tape.hpp"
#include "test_util.hpp"

using namespace ssr;
using autodiff::Array;
using autodiff::Tape;
using autodiff::Value;

namespace {

using Builder = std::function<Value(Tape&, std::span<const Value>)>;

// Finite-difference check of a scalar graph over several input arrays,
// flattened into one parameter vector. Returns finite_diff_check's max
// relative error.
double fd_error(const std::vector<Array>& inputs, const Builder& build,
                double step = 1e-4) {
  std::vector<double> flat;
  for (const Array& a : inputs)
    flat.insert(flat.end(), a.data.begin(), a.data.end());

  auto eval = [&](const std::vector<double>& p, std::vector<double>* grad_out) {
    Tape tape;
    std::vector<Value> vals;
    std::size_t off = 0;
    for (const Array& proto : inputs) {
      Array a = proto;
      std::copy(p.begin() + off, p.begin() + off + a.size(), a.data.begin());
      off += a.size();
      vals.push_back(tape.input(std::move(a)));
    }
    Value root = build(tape, vals);
    if (grad_out) {
      tape.backward(root);
      grad_out->clear();
      for (Value v : vals) {
        const auto& g = tape.grad(v).data;
        grad_out->insert(grad_out->end(), g.begin(), g.end());
      }
    }
    return tape.value(root).data[0];
  };

  std::vector<double> analytic;
  eval(flat, &analytic);
  auto f = [&](const std::vector<double>& p) { return eval(p, nullptr); };
  return autodiff::finite_diff_check(f, flat, analytic, step);
}

}  // namespace

TEST_CASE("dot of a unit vector with itself is 1 with gradient 2u") {
  Tape tape;
  Value u = tape.input(Array::vec({0.6, 0.8}));
  Value d = tape.dot(u, u);
  CHECK(tape.value(d).data[0] == doctest::Approx(1.0).epsilon(1e-12));
  tape.backward(d);
  CHECK(tape.grad(u).data[0] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(tape.grad(u).data[1] == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("hinge is piecewise with zero subgradient when inactive") {
  {
    Tape tape;
    Value x = tape.input(Array::scalar(-0.5));
    Value h = tape.hinge(x);
    CHECK(tape.value(h).data[0] == 0.0);
    tape.backward(h);
    CHECK(tape.grad(x).data[0] == 0.0);
  }
  {
    Tape tape;
    Value x = tape.input(Array::scalar(0.5));
    Value h = tape.hinge(x);
    CHECK(tape.value(h).data[0] == 0.5);
    tape.backward(h);
    CHECK(tape.grad(x).data[0] == 1.0);
  }
}

TEST_CASE("l2_normalize((3,4)) -> (0.6, 0.8)") {
  Tape tape;
  Value v = tape.input(Array::vec({3.0, 4.0}));
  Value n = tape.l2_normalize(v);
  CHECK(tape.value(n).data[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(tape.value(n).data[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("l2_normalize of a (near-)zero vector stays zero with zero gradient") {
  Tape tape;
  Value v = tape.input(Array::vec({0.0, 1e-13}));
  Value n = tape.l2_normalize(v);
  CHECK(tape.value(n).data[0] == 0.0);
  CHECK(tape.value(n).data[1] == 0.0);
  tape.backward(tape.sum_all(n));
  CHECK(tape.grad(v).data[0] == 0.0);
  CHECK(tape.grad(v).data[1] == 0.0);
}

TEST_CASE("grad of dot(x,x) at (1,2) is (2,4)") {
  Tape tape;
  Value x = tape.input(Array::vec({1.0, 2.0}));
  tape.backward(tape.dot(x, x));
  CHECK(tape.grad(x).data[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(tape.grad(x).data[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("inactive hinge composition has zero gradient") {
  Tape tape;
  Value x = tape.input(Array::vec({0.1, 0.2}));
  Value c = tape.input(Array::vec({1.0, 1.0}));
  Value h = tape.hinge(tape.add_scalar(tape.dot(x, c), -1.0));
  CHECK(tape.value(h).data[0] == 0.0);
  tape.backward(h);
  for (double g : tape.grad(x).data) CHECK(g == 0.0);
}

TEST_CASE("elementwise and structural op forwards") {
  Tape tape;
  Value a = tape.input(Array::matrix(2, 2, {1.0, -2.0, 3.0, -4.0}));
  Value b = tape.input(Array::matrix(2, 2, {0.5, 0.5, 0.5, 0.5}));

  CHECK(tape.value(tape.add(a, b)).data == std::vector<double>{1.5, -1.5, 3.5, -3.5});
  CHECK(tape.value(tape.sub(a, b)).data == std::vector<double>{0.5, -2.5, 2.5, -4.5});
  CHECK(tape.value(tape.scalar_mul(a, 2.0)).data ==
        std::vector<double>{2.0, -4.0, 6.0, -8.0});
  CHECK(tape.value(tape.add_scalar(a, 1.0)).data ==
        std::vector<double>{2.0, -1.0, 4.0, -3.0});
  CHECK(tape.value(tape.relu(a)).data == std::vector<double>{1.0, 0.0, 3.0, 0.0});
  CHECK(tape.value(tape.square(a)).data == std::vector<double>{1.0, 4.0, 9.0, 16.0});
  CHECK(tape.value(tape.diagonal(a)).data == std::vector<double>{1.0, -4.0});
  CHECK(tape.value(tape.mean_all(a)).data[0] == doctest::Approx(-0.5));
  CHECK(tape.value(tape.sum_all(a)).data[0] == doctest::Approx(-2.0));

  Array mask = Array::matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
  CHECK(tape.value(tape.mul_constant(a, mask)).data ==
        std::vector<double>{1.0, 0.0, 0.0, -4.0});
  CHECK(tape.value(tape.add_constant(a, mask)).data ==
        std::vector<double>{2.0, -2.0, 3.0, -3.0});

  Value v = tape.input(Array::vec({10.0, 20.0}));
  CHECK(tape.value(tape.sub_colvec(a, v)).data ==
        std::vector<double>{-9.0, -12.0, -17.0, -24.0});
  CHECK(tape.value(tape.add_rowvec(a, v)).data ==
        std::vector<double>{11.0, 18.0, 13.0, 16.0});

  CHECK(tape.value(tape.mean_over_axis(a, 0)).data == std::vector<double>{2.0, -3.0});
  CHECK(tape.value(tape.mean_over_axis(a, 1)).data == std::vector<double>{-0.5, -0.5});
}

TEST_CASE("matmul and matmul_nt forward values") {
  Tape tape;
  Value a = tape.input(Array::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  Value b = tape.input(Array::matrix(3, 2, {7, 8, 9, 10, 11, 12}));
  CHECK(tape.value(tape.matmul(a, b)).data ==
        std::vector<double>{58, 64, 139, 154});

  Value c = tape.input(Array::matrix(2, 3, {7, 9, 11, 8, 10, 12}));
  CHECK(tape.value(tape.matmul_nt(a, c)).data ==
        std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("stack_rows / set_row / add_row_range") {
  Tape tape;
  Value r0 = tape.input(Array::vec({1.0, 2.0}));
  Value r1 = tape.input(Array::vec({3.0, 4.0}));
  std::vector<Value> rows{r0, r1};
  Value m = tape.stack_rows(rows);
  CHECK(tape.value(m).shape == std::vector<std::size_t>{2, 2});
  CHECK(tape.value(m).data == std::vector<double>{1.0, 2.0, 3.0, 4.0});

  Value sub = tape.input(Array::vec({9.0, 9.0}));
  Value m2 = tape.set_row(m, 1, sub);
  CHECK(tape.value(m2).data == std::vector<double>{1.0, 2.0, 9.0, 9.0});

  Value tag = tape.input(Array::vec({0.5, -0.5}));
  Value m3 = tape.add_row_range(m2, 0, 1, tag);
  CHECK(tape.value(m3).data == std::vector<double>{1.5, 1.5, 9.0, 9.0});
}

TEST_CASE("shape mismatches and non-scalar roots throw") {
  Tape tape;
  Value a = tape.input(Array::vec({1.0, 2.0}));
  Value b = tape.input(Array::vec({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(tape.add(a, b), autodiff::ShapeMismatch);
  CHECK_THROWS_AS(tape.dot(a, b), autodiff::ShapeMismatch);
  CHECK_THROWS_AS(tape.backward(a), autodiff::NonScalarRoot);
}

TEST_CASE("a second backward on the same tape throws") {
  Tape tape;
  Value x = tape.input(Array::vec({1.0, 2.0}));
  Value root = tape.dot(x, x);
  tape.backward(root);
  CHECK_THROWS_AS(tape.backward(root), std::logic_error);
}

TEST_CASE("finite_diff_check: constant function reports zero error") {
  auto f = [](const std::vector<double>&) { return 42.0; };
  std::vector<double> params{1.0, -2.0, 0.5};
  std::vector<double> grad{0.0, 0.0, 0.0};
  CHECK(autodiff::finite_diff_check(f, params, grad, 1e-4) == 0.0);
}

TEST_CASE("finite_diff_check: dot(x,x) against analytic 2x") {
  auto g = testutil::rng(5);
  auto params = testutil::random_vec(g, 6);
  auto f = [](const std::vector<double>& p) {
    double acc = 0.0;
    for (double x : p) acc += x * x;
    return acc;
  };
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) grad[i] = 2.0 * params[i];
  CHECK(autodiff::finite_diff_check(f, params, grad, 1e-4) < 1e-9);
}

TEST_CASE("per-op gradients match finite differences") {
  auto g = testutil::rng(77);
  // positive, away from 0: keeps relu/hinge locally smooth for the FD probe
  Array v6 = testutil::random_array(g, {6}, 0.2, 1.0);
  Array m23 = testutil::random_array(g, {2, 3}, 0.2, 1.0);
  Array m32 = testutil::random_array(g, {3, 2}, 0.2, 1.0);
  Array m23b = testutil::random_array(g, {2, 3}, 0.2, 1.0);
  Array v2 = testutil::random_array(g, {2}, 0.2, 1.0);
  Array v3 = testutil::random_array(g, {3}, 0.2, 1.0);
  Array m22 = testutil::random_array(g, {2, 2}, 0.2, 1.0);

  auto one = [](const Builder& b) { return b; };
  CHECK(fd_error({v6}, one([](Tape& t, std::span<const Value> x) {
          return t.sum_all(t.relu(x[0]));
        })) < 1e-6);
  CHECK(fd_error({v6}, one([](Tape& t, std::span<const Value> x) {
          return t.sum_all(t.hinge(x[0]));
        })) < 1e-6);
  CHECK(fd_error({v6}, one([](Tape& t, std::span<const Value> x) {
          return t.mean_all(t.square(x[0]));
        })) < 1e-6);
  CHECK(fd_error({v6}, one([](Tape& t, std::span<const Value> x) {
          Value dir = t.input(Array::vec({0.3, -0.7, 0.2, 0.9, -0.1, 0.4}));
          return t.dot(t.l2_normalize(x[0]), dir);
        })) < 1e-6);
  CHECK(fd_error({m23, m32}, one([](Tape& t, std::span<const Value> x) {
          return t.mean_all(t.square(t.matmul(x[0], x[1])));
        })) < 1e-6);
  CHECK(fd_error({m23, m23b}, one([](Tape& t, std::span<const Value> x) {
          return t.mean_all(t.square(t.matmul_nt(x[0], x[1])));
        })) < 1e-6);
  CHECK(fd_error({m23, v2, v3}, one([](Tape& t, std::span<const Value> x) {
          Value a = t.sub_colvec(x[0], x[1]);
          Value b = t.add_rowvec(a, x[2]);
          return t.mean_all(t.square(b));
        })) < 1e-6);
  CHECK(fd_error({m22}, one([](Tape& t, std::span<const Value> x) {
          Value d = t.diagonal(x[0]);
          return t.dot(d, d);
        })) < 1e-6);
  CHECK(fd_error({m23}, one([](Tape& t, std::span<const Value> x) {
          Value m0 = t.mean_over_axis(x[0], 0);
          Value m1 = t.mean_over_axis(x[0], 1);
          return t.add(t.dot(m0, m0), t.dot(m1, m1));
        })) < 1e-6);
  CHECK(fd_error({v2, v2, v2}, one([](Tape& t, std::span<const Value> x) {
          std::vector<Value> rows{x[0], x[1]};
          Value m = t.stack_rows(rows);
          Value m2 = t.set_row(m, 0, x[2]);
          Value m3 = t.add_row_range(m2, 0, 2, x[0]);
          return t.mean_all(t.square(m3));
        })) < 1e-6);
}

TEST_CASE("random 3-layer composition matches finite differences < 1e-5") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    auto g = testutil::rng(seed);
    Array x = testutil::random_array(g, {1, 4}, 0.2, 1.0);
    Array w1 = testutil::random_array(g, {4, 3});
    Array w2 = testutil::random_array(g, {3, 3});
    Array u = testutil::random_array(g, {3});
    double err =
        fd_error({x, w1, w2, u}, [](Tape& t, std::span<const Value> in) {
          Value h1 = t.relu(t.matmul(in[0], in[1]));
          Value h2 = t.matmul(h1, in[2]);
          Value v = t.l2_normalize(t.mean_over_axis(h2, 0));
          return t.hinge(t.add_scalar(t.dot(v, in[3]), 0.1));
        });
    CHECK(err < 1e-5);
  }
}

TEST_CASE("gradients accumulate across reused values") {
  Tape tape;
  Value x = tape.input(Array::vec({2.0, 3.0}));
  Value y = tape.add(x, x);  // y = 2x
  tape.backward(tape.dot(y, y));  // d/dx 4(x.x) = 8x
  CHECK(tape.grad(x).data[0] == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(tape.grad(x).data[1] == doctest::Approx(24.0).epsilon(1e-12));
}
