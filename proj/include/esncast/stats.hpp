#pragma once

#include <cstddef>
#include <vector>

namespace esncast::stats {

double mean(const double* x, size_t n);

/// Sample variance, divide by n-1. Returns 0 for n < 2.
double sample_variance(const double* x, size_t n);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

/// Pointwise quantile by nearest-rank on an ascending-sorted vector:
/// q(p) = s[ceil(p*n) - 1], clamped to [0, n-1].
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace esncast::stats
