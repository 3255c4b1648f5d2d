#include "esncast/kernels.hpp"

// Reference kernels. Plain loops, no manual unrolling: these define the
// semantics the SIMD variants are tested against.

namespace esncast::kernels {
namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec_scalar(const double* A, size_t rows, size_t cols, const double* x, double* y) {
    for (size_t r = 0; r < rows; ++r) y[r] = dot_scalar(A + r * cols, x, cols);
}

void rank1_update_scalar(double* G, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        double* row = G + i * n;
        for (size_t j = 0; j < n; ++j) row[j] += xi * x[j];
    }
}

double sq_err_sum_scalar(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void scale_add_scalar(double* out, double c1, const double* u, double c2, const double* v,
                      size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = c1 * u[i] + c2 * v[i];
}

}  // namespace

const FnTable* scalar_table() {
    static const FnTable t{dot_scalar,        axpy_scalar,       matvec_scalar,
                           rank1_update_scalar, sq_err_sum_scalar, scale_add_scalar};
    return &t;
}

}  // namespace esncast::kernels
