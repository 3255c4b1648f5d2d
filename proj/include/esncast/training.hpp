#pragma once

#include <optional>
#include <string>
#include <vector>

#include "esncast/forecast.hpp"
#include "esncast/panel.hpp"
#include "esncast/reservoir.hpp"
#include "esncast/signals.hpp"

namespace esncast {

/// Per-horizon windowing. Durations are grid steps of the 10-minute
/// prediction schedule; one trading day is 39 steps. The buffer keeps every
/// training target realized by prediction time (tau >= h).
struct HorizonConfig {
    Horizon horizon = Horizon::Min10;
    int window_steps = 3;   // M_t
    int buffer_steps = 1;   // tau_h
    int cv_window_days = 5;
    double cv_split = 0.7;

    void validate() const;
};

/// Window size / buffer defaults per horizon: M in {30min, 30min, 1hr, 1hr,
/// 1day}, tau in {10min, 30min, 1hr, 2hr, 1day}.
HorizonConfig default_horizon_config(Horizon h);

/// 21 log-spaced penalty scales on [1e-8, 1e2].
std::vector<double> default_lambda_grid();

struct ReadoutCoefficients {
    double mu = 0.0;
    std::vector<double> theta;
    int fitted_at_slot = -1;
    Horizon horizon = Horizon::Min10;
    double lambda = 0.0;
    bool min_norm_flagged = false;
};

double predict(const ReadoutCoefficients& coeffs, const double* x);

struct TrainingBatch {
    int dim = 0;
    Matrix X;  // rows x dim
    std::vector<double> y;
    std::vector<std::pair<int, int>> keys;  // (slot, stock)
    int rows() const { return X.rows; }
};

/// Readonly view over a (slots x stocks x dim) design panel with validity.
struct DesignView {
    const double* data = nullptr;
    const uint8_t* valid = nullptr;  // 1 = usable for training/prediction
    int n_slots = 0;
    int n_stocks = 0;
    int dim = 0;

    const double* row(int slot, int stock) const {
        return data + (static_cast<size_t>(slot) * n_stocks + stock) * dim;
    }
    bool is_valid(int slot, int stock) const {
        return valid[static_cast<size_t>(slot) * n_stocks + stock] != 0;
    }
};

/// View over a signal panel; validity_scratch receives the inverted missing
/// mask and must outlive the view.
DesignView design_of(const SignalPanel& sp, std::vector<uint8_t>& validity_scratch);

/// Training slots for a fit at slot t, ascending. The window holds the M
/// most recent schedule-feasible slots at or before t - tau - 1, where a
/// slot is feasible when its horizon fits inside the session (late-day
/// slots carry no 30min/60min/2hr targets, so raw slot ranges would starve
/// mid-morning fits and break the per-day prediction counts). EOD windows
/// end at the prior day's close.
std::vector<int> training_slots(int t_slot, const HorizonConfig& cfg, int washout_slots,
                                int window_steps_override = -1);

enum class SkipReason { InsufficientHistory, EmptyBatch, TooFewRows, NoPenalty };
const char* skip_reason_name(SkipReason r);

struct BatchResult {
    TrainingBatch batch;
    std::optional<SkipReason> skip;
};

/// Pools design rows and h-horizon targets over the training window across
/// the full cross-section; rows with a missing design vector or target drop
/// out. Windows reaching before the (post-washout) sample start skip.
BatchResult assemble_batch(const DesignView& design, const TargetProvider& targets, int t_slot,
                           const HorizonConfig& cfg, int washout_slots,
                           int window_steps_override = -1);

/// Centered second moments of a batch; the ridge system is solved from these
/// so cross-validation can reuse one accumulation across the penalty grid.
struct RidgeMoments {
    int dim = 0;
    long n = 0;
    std::vector<double> xbar;
    double ybar = 0.0;
    Matrix gram;              // sum (x - xbar)(x - xbar)'
    std::vector<double> cxy;  // sum (x - xbar)(y - ybar)
};

RidgeMoments accumulate_moments(const TrainingBatch& batch);

struct RidgeSolution {
    double mu = 0.0;
    std::vector<double> theta;
    bool min_norm_flagged = false;
};

/// Minimizes (1/n) sum (y - mu - theta' x)^2 + theta' diag(lambda_diag) theta.
/// The intercept is never penalized. A singular unpenalized system falls back
/// to the minimum-norm solution, flagged.
RidgeSolution solve_ridge(const RidgeMoments& m, const std::vector<double>& lambda_diag);

ReadoutCoefficients ridge_fit(const TrainingBatch& batch, const std::vector<double>& lambda_diag);

/// Daily penalty selection: chronological 70/30 split of the trailing
/// cv_window_days of pooled rows, lambda from the grid by validation MSE,
/// anisotropic scaling by per-coordinate design second moments.
struct PenaltyState {
    bool present = false;
    double lambda = 0.0;
    std::vector<double> diag;
    bool reused = false;  // previous day's penalty carried over
};

PenaltyState cross_validate_penalty(const DesignView& design, const TargetProvider& targets,
                                    int day, const HorizonConfig& cfg,
                                    const std::vector<double>& grid, int washout_slots);

struct RunDiagnostics {
    struct Skip {
        int slot;
        SkipReason reason;
    };
    struct FitAudit {
        int t_slot;
        int s_first;
        int s_last;
        int rows;
        int max_realization_row;  // latest row any training target consumes
        int t_row;                // row of the forecast slot
    };
    std::vector<Skip> skips;
    std::vector<FitAudit> audits;
    long fits = 0;
    long penalty_reuses = 0;
};

struct RunnerConfig {
    HorizonConfig hcfg;
    bool use_cv = true;
    double fixed_lambda = 0.0;
    int min_rows = 1;
    int washout_slots = 0;
    int window_steps_override = -1;  // baseline forces M = 1
    std::vector<double> lambda_grid = default_lambda_grid();
};

/// Walk-forward engine shared by all three models: per day an optional CV
/// refresh, per slot assemble-fit-predict. Emits a prediction for every
/// stock with a valid design vector at t whenever a model could be fitted.
ForecastSet run_windowed(const DesignView& design, const TargetProvider& targets,
                         const TradingCalendar& cal, const RunnerConfig& cfg,
                         const std::string& model_id, RunDiagnostics* diag = nullptr);

/// Cross-sectional OLS on the single slice s = t - tau - 1, no penalty.
/// Slices thinner than dim + 1 rows are skipped.
ForecastSet run_baseline(const SignalPanel& signals, const TargetProvider& targets,
                         const TradingCalendar& cal, const HorizonConfig& hcfg,
                         RunDiagnostics* diag = nullptr);

/// Windowed ridge on raw signals with the daily CV penalty.
ForecastSet run_benchmark(const SignalPanel& signals, const TargetProvider& targets,
                          const TradingCalendar& cal, const HorizonConfig& hcfg,
                          RunDiagnostics* diag = nullptr,
                          const std::vector<double>& grid = default_lambda_grid());

/// One trading day of states is washed out before training.
inline constexpr int kEsnWashoutSlots = Grid::kSlotsPerDay;

/// Per-stock state panel over the prediction grid (shared weights).
struct StatePanel {
    int K = 0;
    int n_slots = 0;
    int n_stocks = 0;
    std::vector<double> x;        // slots x stocks x K
    std::vector<uint8_t> valid;   // slots x stocks
    DesignView view() const { return {x.data(), valid.data(), n_slots, n_stocks, K}; }
};

StatePanel build_state_panel(const SignalPanel& signals, const ReservoirWeights& w,
                             const ReservoirSpec& spec, int washout_slots = kEsnWashoutSlots,
                             int jobs = 1);

/// Windowed ridge on ESN states with the daily CV penalty. Weights are
/// sampled from spec.seed unless an explicit set is injected (tests use this
/// for the degenerate linear reduction).
ForecastSet run_esn(const SignalPanel& signals, const TargetProvider& targets,
                    const TradingCalendar& cal, const HorizonConfig& hcfg,
                    const ReservoirSpec& spec, const ReservoirWeights* weights = nullptr,
                    RunDiagnostics* diag = nullptr, int jobs = 1,
                    const std::vector<double>& grid = default_lambda_grid());

}  // namespace esncast
