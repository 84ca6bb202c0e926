#pragma once

#include <cstddef>

// Dense inner-loop kernels. Each kernel has an OpenMP-parallel variant and a
// serial reference. Parallel variants split work across independent output
// elements only, so results are bit-identical to the serial reference
// regardless of thread count.
namespace ssr::kernels {

// c[n x m] = a[n x k] * b[k x m]
void matmul(const double* a, const double* b, double* c,
            std::size_t n, std::size_t k, std::size_t m);
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t n, std::size_t k, std::size_t m);

// c[n x m] = a[n x d] * b[m x d]^T
void matmul_nt(const double* a, const double* b, double* c,
               std::size_t n, std::size_t d, std::size_t m);
void matmul_nt_serial(const double* a, const double* b, double* c,
                      std::size_t n, std::size_t d, std::size_t m);

// c[k x m] = a[n x k]^T * b[n x m]
void matmul_tn(const double* a, const double* b, double* c,
               std::size_t n, std::size_t k, std::size_t m);
void matmul_tn_serial(const double* a, const double* b, double* c,
                      std::size_t n, std::size_t k, std::size_t m);

// out[i] = dot(query, base + i*dim) for i in [0, count)
void dot_scan(const double* query, const double* base,
              std::size_t count, std::size_t dim, double* out);
void dot_scan_serial(const double* query, const double* base,
                     std::size_t count, std::size_t dim, double* out);

}  // namespace ssr::kernels
