#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ssr/tape.hpp"

namespace ssr::testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline autodiff::Array random_array(std::mt19937_64& g,
                                    std::vector<std::size_t> shape,
                                    double lo = -1.0, double hi = 1.0) {
  autodiff::Array a = autodiff::Array::zeros(std::move(shape));
  for (double& x : a.data) x = uniform(g, lo, hi);
  return a;
}

inline std::vector<double> random_vec(std::mt19937_64& g, std::size_t n,
                                      double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(g, lo, hi);
  return v;
}

}  // namespace ssr::testutil
