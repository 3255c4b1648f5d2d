#include "esncast/kernels.hpp"

// NEON variants, 2 doubles per lane. aarch64 baseline includes NEON with
// float64x2, so no extra compile flags are needed.

#if defined(__aarch64__)

#include <arm_neon.h>

namespace esncast::kernels {
namespace {

double dot_neon(const double* a, const double* b, size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double acc = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_neon(double a, const double* x, double* y, size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t yv = vld1q_f64(y + i);
        yv = vfmaq_f64(yv, av, vld1q_f64(x + i));
        vst1q_f64(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_neon(const double* A, size_t rows, size_t cols, const double* x, double* y) {
    for (size_t r = 0; r < rows; ++r) y[r] = dot_neon(A + r * cols, x, cols);
}

void rank1_update_neon(double* G, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        axpy_neon(x[i], x, G + i * n, n);
    }
}

double sq_err_sum_neon(const double* a, const double* b, size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void scale_add_neon(double* out, double c1, const double* u, double c2, const double* v,
                    size_t n) {
    const float64x2_t c1v = vdupq_n_f64(c1);
    const float64x2_t c2v = vdupq_n_f64(c2);
    size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t r = vmulq_f64(c2v, vld1q_f64(v + i));
        r = vfmaq_f64(r, c1v, vld1q_f64(u + i));
        vst1q_f64(out + i, r);
    }
    for (; i < n; ++i) out[i] = c1 * u[i] + c2 * v[i];
}

}  // namespace

const FnTable* neon_table() {
    static const FnTable t{dot_neon,        axpy_neon,       matvec_neon,
                           rank1_update_neon, sq_err_sum_neon, scale_add_neon};
    return &t;
}

}  // namespace esncast::kernels

#else

namespace esncast::kernels {
const FnTable* neon_table() { return nullptr; }
}  // namespace esncast::kernels

#endif
