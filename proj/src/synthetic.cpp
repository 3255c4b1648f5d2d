#include "esncast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "esncast/common.hpp"
#include "esncast/rng.hpp"

namespace esncast {

void SyntheticMarketSpec::validate() const {
    if (N <= 0) throw ConfigError("synthetic: N must be positive");
    if (J < 0) throw ConfigError("synthetic: J must be non-negative");
    if (T <= 0 || T % Grid::kRowsPerDay != 0) {
        throw ConfigError("synthetic: T must be a positive multiple of " +
                          std::to_string(Grid::kRowsPerDay));
    }
    auto check_n = [this](const std::vector<double>& v, const char* name) {
        if (static_cast<int>(v.size()) != N) {
            throw ConfigError(std::string("synthetic: ") + name + " must have N entries");
        }
    };
    check_n(a, "a");
    check_n(kappa, "kappa");
    check_n(m, "m");
    check_n(sigma, "sigma");
    if (static_cast<int>(factor_vol.size()) != J) {
        throw ConfigError("synthetic: factor_vol must have J entries");
    }
    if (static_cast<int>(B.size()) != N * J) {
        throw ConfigError("synthetic: B must be N x J");
    }
    for (int i = 0; i < N; ++i) {
        if (!(kappa[static_cast<size_t>(i)] > 0)) throw ConfigError("synthetic: kappa > 0 required");
        if (!(sigma[static_cast<size_t>(i)] > 0)) throw ConfigError("synthetic: sigma > 0 required");
    }
    for (int j = 0; j < J; ++j) {
        if (!(factor_vol[static_cast<size_t>(j)] > 0)) {
            throw ConfigError("synthetic: factor_vol > 0 required");
        }
    }
    if (missing_rate < 0 || missing_rate >= 1) {
        throw ConfigError("synthetic: missing_rate must be in [0, 1)");
    }
}

ReturnPanel simulate_panel(const SyntheticMarketSpec& spec, Date start) {
    spec.validate();
    const int N = spec.N;
    const int J = spec.J;

    ReturnPanel panel;
    panel.cal = make_weekday_calendar(start, spec.T / Grid::kRowsPerDay);
    panel.tickers.resize(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "SYN%04d", i);
        panel.tickers[static_cast<size_t>(i)] = buf;
    }
    panel.resize_full_missing();

    Rng rng(spec.seed);

    std::vector<double> phi(static_cast<size_t>(N));      // e^(-kappa)
    std::vector<double> shock(static_cast<size_t>(N));    // sigma sqrt((1-e^(-2k))/(2k))
    for (int i = 0; i < N; ++i) {
        const double k = spec.kappa[static_cast<size_t>(i)];
        phi[static_cast<size_t>(i)] = std::exp(-k);
        shock[static_cast<size_t>(i)] =
            spec.sigma[static_cast<size_t>(i)] * std::sqrt((1.0 - std::exp(-2.0 * k)) / (2.0 * k));
    }

    std::vector<double> U = spec.m;
    double kappa_min = spec.kappa[0];
    for (double k : spec.kappa) kappa_min = std::min(kappa_min, k);
    const int burn_in = static_cast<int>(std::ceil(10.0 / kappa_min));
    for (int t = 0; t < burn_in; ++t) {
        for (int i = 0; i < N; ++i) {
            U[static_cast<size_t>(i)] =
                spec.m[static_cast<size_t>(i)] +
                phi[static_cast<size_t>(i)] * (U[static_cast<size_t>(i)] - spec.m[static_cast<size_t>(i)]) +
                shock[static_cast<size_t>(i)] * rng.normal();
        }
    }

    std::vector<double> F(static_cast<size_t>(std::max(J, 1)));
    for (int t = 0; t < spec.T; ++t) {
        for (int j = 0; j < J; ++j) {
            F[static_cast<size_t>(j)] = spec.factor_vol[static_cast<size_t>(j)] * rng.normal();
        }
        for (int i = 0; i < N; ++i) {
            const double u_prev = U[static_cast<size_t>(i)];
            U[static_cast<size_t>(i)] =
                spec.m[static_cast<size_t>(i)] +
                phi[static_cast<size_t>(i)] * (u_prev - spec.m[static_cast<size_t>(i)]) +
                shock[static_cast<size_t>(i)] * rng.normal();
            double r = spec.a[static_cast<size_t>(i)] + (U[static_cast<size_t>(i)] - u_prev);
            for (int j = 0; j < J; ++j) {
                r += spec.B[static_cast<size_t>(i) * J + j] * F[static_cast<size_t>(j)];
            }
            panel.ret[panel.idx(t, i)] = r;
            panel.ret_missing[panel.idx(t, i)] = 0;
            panel.price_missing[panel.idx(t, i)] = 0;
        }
        if (spec.missing_rate > 0) {
            for (int i = 0; i < N; ++i) {
                if (rng.uniform() < spec.missing_rate) {
                    panel.ret[panel.idx(t, i)] = 0.0;
                    panel.ret_missing[panel.idx(t, i)] = 1;
                    panel.price_missing[panel.idx(t, i)] = 1;
                }
            }
        }
    }
    return panel;
}

std::vector<double> simulate_ou_path(double kappa, double m, double sigma, int T, uint64_t seed) {
    if (!(kappa > 0) || !(sigma > 0) || T <= 0) {
        throw ConfigError("simulate_ou_path: kappa > 0, sigma > 0, T > 0 required");
    }
    Rng rng(seed);
    const double phi = std::exp(-kappa);
    const double shock = sigma * std::sqrt((1.0 - std::exp(-2.0 * kappa)) / (2.0 * kappa));
    std::vector<double> u(static_cast<size_t>(T));
    double cur = m;
    for (int t = 0; t < T; ++t) {
        cur = m + phi * (cur - m) + shock * rng.normal();
        u[static_cast<size_t>(t)] = cur;
    }
    return u;
}

}  // namespace esncast
