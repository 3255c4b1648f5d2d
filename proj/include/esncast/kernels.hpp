#pragma once

#include <cstddef>

// Numeric inner loops used by the reservoir iteration, ridge estimation and
// metric computation. Every kernel has a scalar reference implementation plus
// SIMD variants (AVX2 on x86-64, NEON on aarch64) selected once at startup;
// tests assert scalar/SIMD equivalence. Force a variant with the environment
// variable ESNCAST_KERNELS=scalar|avx2|neon or via force_impl().

namespace esncast::kernels {

enum class Impl { Scalar, Avx2, Neon };

struct FnTable {
    double (*dot)(const double*, const double*, size_t);
    void (*axpy)(double, const double*, double*, size_t);
    void (*matvec)(const double*, size_t, size_t, const double*, double*);
    void (*rank1_update)(double*, const double*, size_t);
    double (*sq_err_sum)(const double*, const double*, size_t);
    void (*scale_add)(double*, double, const double*, double, const double*, size_t);
};

Impl active();
const char* name(Impl impl);
bool available(Impl impl);
void force_impl(Impl impl);  // throws ConfigError if unavailable
const FnTable& table(Impl impl);

/// dot(a, b) = sum_i a[i] * b[i]
double dot(const double* a, const double* b, size_t n);

/// y += a * x
void axpy(double a, const double* x, double* y, size_t n);

/// y = A x, A row-major (rows x cols)
void matvec(const double* A, size_t rows, size_t cols, const double* x, double* y);

/// G += x x', G row-major (n x n)
void rank1_update(double* G, const double* x, size_t n);

/// sum_i (a[i] - b[i])^2
double sq_err_sum(const double* a, const double* b, size_t n);

/// out[i] = c1 * u[i] + c2 * v[i]
void scale_add(double* out, double c1, const double* u, double c2, const double* v, size_t n);

}  // namespace esncast::kernels
