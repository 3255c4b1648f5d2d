#pragma once

#include <cstdint>
#include <vector>

#include "esncast/panel.hpp"

namespace esncast {

/// Generative model for desk-scale test panels: per-step return of stock i is
///   r[t,i] = a[i] + sum_j B[i,j] F[j,t] + dU[t,i]
/// with i.i.d. Gaussian factors F and U an Ornstein-Uhlenbeck residual,
/// discretized exactly:
///   U[t] = m + e^(-kappa) (U[t-1] - m) + sigma sqrt((1 - e^(-2 kappa)) / (2 kappa)) xi.
struct SyntheticMarketSpec {
    int N = 0;                       // stocks
    int J = 0;                       // factors
    int T = 0;                       // grid rows, a multiple of Grid::kRowsPerDay
    std::vector<double> a;           // N per-step drifts
    std::vector<double> B;           // N x J loadings, row-major
    std::vector<double> factor_vol;  // J per-step vols
    std::vector<double> kappa;       // N mean-reversion rates, > 0
    std::vector<double> m;           // N OU means
    std::vector<double> sigma;       // N OU vols, > 0
    double missing_rate = 0.0;       // i.i.d. bar-missing probability
    uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

/// Simulates the panel on a weekday calendar starting at `start`. The OU
/// residual is burned in for 10/min(kappa) steps from U0 = m so it starts
/// near stationarity. Bitwise reproducible from the seed; draw order is
/// factors, then OU shocks, then missing marks, row by row.
ReturnPanel simulate_panel(const SyntheticMarketSpec& spec, Date start);

/// Exact-discretization OU path of length T from U0 = m (no burn-in).
/// Shared by the generator and estimator-recovery tests.
std::vector<double> simulate_ou_path(double kappa, double m, double sigma, int T, uint64_t seed);

}  // namespace esncast
