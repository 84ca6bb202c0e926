#include "ssr/kernels.hpp"

#include <cstdint>

namespace ssr::kernels {

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += a[i * k + t] * b[t * m + j];
      c[i * m + j] = acc;
    }
  }
}

void matmul(const double* a, const double* b, double* c,
            std::size_t n, std::size_t k, std::size_t m) {
  const std::int64_t rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += a[i * k + t] * b[t * m + j];
      c[i * m + j] = acc;
    }
  }
}

void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t n, std::size_t d, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) acc += a[i * d + t] * b[j * d + t];
      c[i * m + j] = acc;
    }
  }
}

void matmul_nt(const double* a, const double* b, double* c,
               std::size_t n, std::size_t d, std::size_t m) {
  const std::int64_t rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) acc += a[i * d + t] * b[j * d + t];
      c[i * m + j] = acc;
    }
  }
}

void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += a[t * k + i] * b[t * m + j];
      c[i * m + j] = acc;
    }
  }
}

void matmul_tn(const double* a, const double* b, double* c,
               std::size_t n, std::size_t k, std::size_t m) {
  const std::int64_t rows = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += a[t * k + i] * b[t * m + j];
      c[i * m + j] = acc;
    }
  }
}

void dot_scan_serial(const double* query, const double* base,
                     std::size_t count, std::size_t dim, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    double acc = 0.0;
    const double* v = base + i * dim;
    for (std::size_t t = 0; t < dim; ++t) acc += query[t] * v[t];
    out[i] = acc;
  }
}

void dot_scan(const double* query, const double* base,
              std::size_t count, std::size_t dim, double* out) {
  const std::int64_t items = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < items; ++i) {
    double acc = 0.0;
    const double* v = base + i * dim;
    for (std::size_t t = 0; t < dim; ++t) acc += query[t] * v[t];
    out[i] = acc;
  }
}

}  // namespace ssr::kernels
