#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esncast/common.hpp"
#include "esncast/panel.hpp"

namespace esncast {

struct SignalConfig {
    int factors = 15;          // J market factors extracted by PCA
    int pca_window_days = 5;   // rolling estimation window, refreshed daily
    int ou_window = 195;       // AR(1) sample length (discretized-residual points)
    std::vector<int> windows = {10, 20, 30, 60, 100, 150};
};

/// Per-stock z-scores of returns over an estimation window; stocks with
/// fewer than two observations or zero variance are dropped from factor
/// estimation.
struct StandardizedWindow {
    Matrix L;                       // rows x N, zero where unobserved/excluded
    std::vector<double> mean;       // per stock, over observed rows
    std::vector<double> stddev;     // sample convention (T-1)
    std::vector<uint8_t> retained;  // per stock
    std::vector<int> obs_count;
    int n_retained = 0;
};

StandardizedWindow standardize_returns(const ReturnPanel& filled, int row_begin, int row_end);

/// PCA eigenportfolios of the return correlation matrix. Eigenvector signs
/// are fixed so each column sums to a non-negative value (tie: first nonzero
/// coordinate positive). Q scales eigenvectors by inverse per-stock vol.
struct EigenportfolioSet {
    int J = 0;
    std::vector<double> eigenvalues;               // all retained, descending
    Matrix weights;                                // N x J (Q; zero rows when excluded)
    Matrix factor_returns;                         // window rows x J
    std::vector<double> explained_variance_ratio;  // top J, share of total trace
    std::vector<uint8_t> retained;                 // N
};

EigenportfolioSet extract_factors(const StandardizedWindow& win, const ReturnPanel& filled,
                                  int row_begin, int row_end, int J);

/// Per-stock OLS of returns on [1, F] over the window.
struct FactorRegression {
    std::vector<double> drift_a;    // intercepts
    Matrix loadings;                // N x J
    Matrix residuals;               // window rows x N (0 where not fitted)
    std::vector<uint8_t> fitted;    // per stock
    std::vector<uint8_t> flagged;   // pseudo-inverse fallback used
};

FactorRegression factor_regression(const ReturnPanel& filled, const EigenportfolioSet& ep,
                                   int row_begin, int row_end);

/// AR(1)-implied OU parameters of the discretized residual process
///   U_P[t] = sum_{s=t-P..t} resid[s]
/// fitted over all consecutive U_P pairs in the given residual span:
///   U_P[t+1] = c0 + cu U_P[t] + eta,
///   kappa = -log(cu), m = c0 / (1 - cu), sigma_eq = sqrt(Var(eta) / (2 kappa)).
/// The estimate is only usable when 0 < cu < 1; otherwise `valid` is false
/// and the signal goes missing rather than being clamped.
struct OuEstimate {
    int P = 0;
    double c0 = 0.0;
    double cu = 0.0;
    double kappa = 0.0;
    double m = 0.0;
    double sigma_eq = 0.0;
    double drift_a = 0.0;
    double u_last = 0.0;  // U_P at the final span row
    bool valid = false;
};

OuEstimate ou_estimate(std::span<const double> residuals, int P, double drift_a = 0.0);

/// Modified z-score: (u - m)/sigma_eq - a/(kappa sigma_eq). Empty when the
/// estimate is invalid.
std::optional<double> modified_z_score(const OuEstimate& est, double u_current);

/// Time x stock x window panel of modified z-scores on the prediction grid.
struct SignalPanel {
    TradingCalendar cal;
    std::vector<std::string> tickers;
    std::vector<int> windows;
    std::vector<double> z;         // slots x N x D
    std::vector<uint8_t> missing;  // slots x N

    int D() const { return static_cast<int>(windows.size()); }
    int n_slots() const { return cal.slots(); }
    int N() const { return static_cast<int>(tickers.size()); }
    size_t zidx(int slot, int i, int d) const {
        return (static_cast<size_t>(slot) * tickers.size() + i) * windows.size() + d;
    }
    size_t midx(int slot, int i) const { return static_cast<size_t>(slot) * tickers.size() + i; }
    const double* vec(int slot, int i) const { return z.data() + zidx(slot, i, 0); }
    bool is_missing(int slot, int i) const { return missing[midx(slot, i)] != 0; }
};

struct SignalDiagnostics {
    long emitted = 0;
    long missing_price = 0;     // no bar at the slot
    long missing_history = 0;   // not enough residual history / no day model
    long invalid_ou = 0;        // some window's AR(1) fit was unusable
    long excluded_stock_days = 0;
};

/// Full two-step construction: rolling PCA + loadings refreshed each morning
/// on the previous `pca_window_days` days, residuals accumulated causally,
/// six OU fits per stock per slot. A stock emits at a slot only when its bar
/// is present and every window's estimate is valid; otherwise the whole
/// signal vector is missing.
SignalPanel build_signal_panel(const ReturnPanel& raw, const SignalConfig& cfg,
                               SignalDiagnostics* diag = nullptr, int jobs = 1);

// SignalPanel serialization (columnar text + versioned binary cache).
void write_signals_csv(const SignalPanel& sp, const std::string& path);
void write_signals_bin(const SignalPanel& sp, const std::string& path);
SignalPanel read_signals_bin(const std::string& path);

}  // namespace esncast
