#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esncast/forecast.hpp"
#include "esncast/panel.hpp"
#include "esncast/reservoir.hpp"
#include "esncast/signals.hpp"
#include "esncast/training.hpp"

namespace esncast {

/// Per-event cross-sectional mean squared forecast error and its running
/// average. One event per prediction timestamp; events with no matched
/// stock are skipped. The terminal cuMSFE equals the plain mean of the
/// MSFE series.
struct MsfeResult {
    std::vector<int> slots;
    std::vector<double> msfe;
    std::vector<double> cumsfe;
    double total = 0.0;  // terminal cuMSFE
};

MsfeResult msfe_series(const ForecastSet& fs, Horizon h, const TargetProvider& targets);

/// Pooled R^2 over all matched prediction events. Zero benchmark:
/// 1 - sum (r - rhat)^2 / sum r^2; the mean-benchmark variant centers
/// realizations at their pooled mean. Empty when the denominator vanishes.
std::optional<double> pooled_r2(const ForecastSet& fs, Horizon h, const TargetProvider& targets,
                                bool zero_benchmark = true);

/// Diebold-Mariano test of equal predictive accuracy on two aligned loss
/// series. Long-run variance via Bartlett kernel with h_overlap - 1 lags,
/// Harvey-Leybourne-Newbold small-sample correction, two-sided p from a
/// t distribution with T - 1 degrees of freedom.
struct DmResult {
    enum class Note { Ok, EqualByConstruction, SignOnlyDominance };
    double statistic = 0.0;
    double p_value = 1.0;
    Note note = Note::Ok;
};

DmResult diebold_mariano(std::span<const double> loss_a, std::span<const double> loss_b,
                         int h_overlap);

/// Model confidence set by the elimination procedure with the range
/// statistic over pairwise mean loss differentials and a stationary block
/// bootstrap (expected block length ceil(T^(1/3))). Models with cumulative
/// MCS p-value >= alpha form the surviving set.
struct McsResult {
    std::vector<double> p_values;       // per model, monotonized
    std::vector<uint8_t> included;      // p >= alpha
    std::vector<int> elimination_order; // worst first; survivors appended last
    double alpha = 0.05;
    int bootstrap = 0;
    int block_length = 0;
};

McsResult model_confidence_set(const std::vector<std::vector<double>>& losses, double alpha,
                               int bootstrap, uint64_t seed, int jobs = 1);

/// Re-runs the ESN with n_models fresh weight draws (seed+1..seed+n) on
/// fixed hyperparameters and reports pointwise order-statistic bands of the
/// cuMSFE relative to a reference model, on the common event grid.
struct RobustnessBands {
    std::vector<int> slots;
    Matrix curves;  // n_models x n_events, relative cuMSFE
    std::vector<double> p5, p25, median, p75, p95;
};

RobustnessBands robustness_study(const ReservoirSpec& base_spec, int n_models,
                                 const SignalPanel& signals, const TargetProvider& targets,
                                 const TradingCalendar& cal, const HorizonConfig& hcfg,
                                 const MsfeResult& reference, int jobs = 1);

}  // namespace esncast
