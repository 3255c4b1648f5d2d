#include "esncast/reservoir.hpp"

#include <cmath>

#include "esncast/kernels.hpp"
#include "esncast/linalg.hpp"
#include "esncast/rng.hpp"

namespace esncast {

void ReservoirSpec::validate() const {
    if (K < 1) throw ConfigError("reservoir: K must be >= 1");
    if (D < 1) throw ConfigError("reservoir: D must be >= 1");
    if (alpha < 0 || alpha > 1) throw ConfigError("reservoir: alpha must be in [0,1]");
    if (rho < 0 || rho > 1) throw ConfigError("reservoir: rho must be in [0,1]");
    if (!(gamma > 0)) throw ConfigError("reservoir: gamma must be > 0");
    if (zeta < 0) throw ConfigError("reservoir: zeta must be >= 0");
    if (!(a_sparsity > 0) || a_sparsity > 1) {
        throw ConfigError("reservoir: a_sparsity must be in (0,1]");
    }
    if (!(c_sparsity > 0) || c_sparsity > 1) {
        throw ConfigError("reservoir: c_sparsity must be in (0,1]");
    }
}

ReservoirWeights normalize_weights(const Matrix& a_star, const Matrix& c_star) {
    if (a_star.rows != a_star.cols) throw ConfigError("normalize_weights: A* must be square");
    if (c_star.rows != a_star.rows) throw ConfigError("normalize_weights: C* row mismatch");

    const double radius = spectral_radius(a_star);
    if (!(radius > 1e-12)) throw DataError("normalize_weights: A* has zero spectral radius");
    double cmax = 0.0;
    for (double v : c_star.v) cmax = std::max(cmax, std::abs(v));
    if (!(cmax > 0.0)) throw DataError("normalize_weights: C* is all-zero");

    ReservoirWeights w;
    w.K = a_star.rows;
    w.D = c_star.cols;
    w.A_bar = a_star;
    for (double& v : w.A_bar.v) v /= radius;
    w.C_bar = c_star;
    for (double& v : w.C_bar.v) v /= cmax;
    w.b_bar.assign(static_cast<size_t>(w.K), 0.0);
    return w;
}

ReservoirWeights sample_weights(const ReservoirSpec& spec) {
    spec.validate();
    constexpr int kMaxAttempts = 8;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(attempt == 0 ? spec.seed : mix_seed(spec.seed, static_cast<uint64_t>(attempt)));
        Matrix a_star(spec.K, spec.K);
        for (double& v : a_star.v) {
            const double u = rng.uniform();
            const double g = rng.normal();  // drawn unconditionally: fixed stream layout
            v = u < spec.a_sparsity ? g : 0.0;
        }
        Matrix c_star(spec.K, spec.D);
        for (double& v : c_star.v) {
            const double u = rng.uniform();
            const double x = rng.uniform(-1.0, 1.0);
            v = u < spec.c_sparsity ? x : 0.0;
        }
        try {
            return normalize_weights(a_star, c_star);
        } catch (const DataError&) {
            continue;  // degenerate draw, resample with sub-seed
        }
    }
    throw DataError("sample_weights: degenerate draws for 8 consecutive sub-seeds");
}

void update_state(ReservoirState& state, const ReservoirWeights& w, const ReservoirSpec& spec,
                  const double* z, int64_t when) {
    const int K = w.K;
    if (static_cast<int>(state.x.size()) != K) {
        throw InternalError("update_state: state dimension mismatch");
    }
    if (z != nullptr) {
        for (int d = 0; d < w.D; ++d) {
            if (!std::isfinite(z[d])) {
                throw DataError("update_state: non-finite input not marked missing");
            }
        }
    }

    std::vector<double> rec(static_cast<size_t>(K));
    std::vector<double> inp(static_cast<size_t>(K), 0.0);
    kernels::matvec(w.A_bar.data(), static_cast<size_t>(K), static_cast<size_t>(K),
                    state.x.data(), rec.data());
    if (z != nullptr) {
        kernels::matvec(w.C_bar.data(), static_cast<size_t>(K), static_cast<size_t>(w.D), z,
                        inp.data());
    }
    std::vector<double> u(static_cast<size_t>(K));
    kernels::scale_add(u.data(), spec.rho, rec.data(), spec.gamma, inp.data(),
                       static_cast<size_t>(K));
    if (spec.activation == Activation::Tanh) {
        for (double& v : u) v = std::tanh(v);
    }
    kernels::scale_add(state.x.data(), spec.alpha, state.x.data(), 1.0 - spec.alpha, u.data(),
                       static_cast<size_t>(K));

    state.last_update = when;
    state.decayed_steps = z == nullptr ? state.decayed_steps + 1 : 0;
}

StateSequence run_state_sequence(const ReservoirWeights& w, const ReservoirSpec& spec,
                                 const double* inputs, const uint8_t* input_missing, int T,
                                 std::span<const double> x0) {
    StateSequence seq;
    seq.K = w.K;
    seq.x.assign(static_cast<size_t>(T) * w.K, 0.0);
    seq.valid.assign(static_cast<size_t>(T), 0);

    ReservoirState state(w.K);
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != w.K) {
            throw ConfigError("run_state_sequence: X0 dimension mismatch");
        }
        std::copy(x0.begin(), x0.end(), state.x.begin());
    }
    for (int t = 0; t < T; ++t) {
        const bool missing = input_missing != nullptr && input_missing[t] != 0;
        update_state(state, w, spec, missing ? nullptr : inputs + static_cast<size_t>(t) * w.D, t);
        std::copy(state.x.begin(), state.x.end(),
                  seq.x.begin() + static_cast<size_t>(t) * w.K);
        seq.valid[static_cast<size_t>(t)] = missing ? 0 : 1;
    }
    return seq;
}

}  // namespace esncast
