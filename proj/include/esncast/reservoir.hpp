#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esncast/common.hpp"

namespace esncast {

enum class Activation { Tanh, Identity };  // Identity exists for linear-reduction tests

/// Fixed random state-equation parameters. Only the linear readout is ever
/// trained; these are sampled once per run and shared across the whole
/// cross-section.
struct ReservoirSpec {
    int K = 100;               // state dimension
    int D = 6;                 // input dimension (signal count)
    double alpha = 0.0;        // leak rate in [0,1]
    double rho = 0.0;          // spectral radius in [0,1]
    double gamma = 0.005;      // input scaling > 0
    double zeta = 0.0;         // bias scaling (bias is the zero vector)
    double a_sparsity = 0.15;  // fraction of nonzero entries of A*
    double c_sparsity = 0.95;  // fraction of nonzero entries of C*
    Activation activation = Activation::Tanh;
    uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

/// Normalized weights: A_bar has unit spectral radius, C_bar unit entrywise
/// max-abs norm, and the bias is exactly zero.
struct ReservoirWeights {
    int K = 0;
    int D = 0;
    Matrix A_bar;  // K x K
    Matrix C_bar;  // K x D
    std::vector<double> b_bar;  // K zeros
};

/// Draws A* (sparse Gaussian) and C* (sparse uniform on [-1,1]) and
/// normalizes. A degenerate draw (zero spectral radius or all-zero C*) is
/// resampled with an incremented sub-seed, up to 8 attempts.
ReservoirWeights sample_weights(const ReservoirSpec& spec);

/// Normalization step alone, exposed so tests can push hand-built raw
/// matrices through the same path.
ReservoirWeights normalize_weights(const Matrix& a_star, const Matrix& c_star);

struct ReservoirState {
    std::vector<double> x;
    int64_t last_update = -1;   // slot index of the latest update
    int decayed_steps = 0;      // consecutive missing-input updates

    explicit ReservoirState(int K) : x(static_cast<size_t>(K), 0.0) {}
};

/// One state-equation step:
///   X_new = alpha X + (1 - alpha) phi(rho A_bar X + gamma C_bar z_eff)
/// where the recurrent term applies A_bar to the previous state. A missing
/// input decays the state with z_eff = 0 and bumps decayed_steps.
void update_state(ReservoirState& state, const ReservoirWeights& w, const ReservoirSpec& spec,
                  const double* z /* nullptr = missing */, int64_t when = -1);

struct StateSequence {
    int K = 0;
    std::vector<double> x;        // T x K
    std::vector<uint8_t> valid;   // decayed states are not used for training
    const double* row(int t) const { return x.data() + static_cast<size_t>(t) * K; }
};

/// Iterates the state over an input sequence (T x D with a missing mask),
/// X0 = 0 at the start. States whose contemporaneous input was missing are
/// flagged invalid.
StateSequence run_state_sequence(const ReservoirWeights& w, const ReservoirSpec& spec,
                                 const double* inputs, const uint8_t* input_missing, int T,
                                 std::span<const double> x0 = {});

}  // namespace esncast
