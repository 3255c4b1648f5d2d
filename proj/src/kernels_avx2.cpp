#include "esncast/kernels.hpp"

// AVX2+FMA variants, 4 doubles per lane. This TU is built with -mavx2 -mfma
// on x86-64; runtime dispatch never calls into it on older CPUs.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace esncast::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_avx2(const double* A, size_t rows, size_t cols, const double* x, double* y) {
    for (size_t r = 0; r < rows; ++r) y[r] = dot_avx2(A + r * cols, x, cols);
}

void rank1_update_avx2(double* G, const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        axpy_avx2(x[i], x, G + i * n, n);
    }
}

double sq_err_sum_avx2(const double* a, const double* b, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void scale_add_avx2(double* out, double c1, const double* u, double c2, const double* v,
                    size_t n) {
    const __m256d c1v = _mm256_set1_pd(c1);
    const __m256d c2v = _mm256_set1_pd(c2);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(c2v, _mm256_loadu_pd(v + i));
        r = _mm256_fmadd_pd(c1v, _mm256_loadu_pd(u + i), r);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = c1 * u[i] + c2 * v[i];
}

}  // namespace

const FnTable* avx2_table() {
    static const FnTable t{dot_avx2,        axpy_avx2,       matvec_avx2,
                           rank1_update_avx2, sq_err_sum_avx2, scale_add_avx2};
    return &t;
}

}  // namespace esncast::kernels

#else

namespace esncast::kernels {
const FnTable* avx2_table() { return nullptr; }
}  // namespace esncast::kernels

#endif
