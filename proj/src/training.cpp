#include "esncast/training.hpp"

#include <algorithm>
#include <cmath>

#include "esncast/kernels.hpp"
#include "esncast/linalg.hpp"

namespace esncast {

void HorizonConfig::validate() const {
    if (window_steps < 1) throw ConfigError("training: window_steps must be >= 1");
    if (buffer_steps < 0) throw ConfigError("training: buffer_steps must be >= 0");
    if (cv_window_days < 1) throw ConfigError("training: cv_window_days must be >= 1");
    if (!(cv_split > 0.0) || !(cv_split < 1.0)) {
        throw ConfigError("training: cv_split must be in (0,1)");
    }
    if (horizon != Horizon::Eod) {
        const int h = horizon_steps(horizon, 0);
        if (buffer_steps < h) {
            throw ConfigError(std::string("training: buffer for ") + horizon_name(horizon) +
                              " must be >= the horizon (information leakage)");
        }
    }
}

HorizonConfig default_horizon_config(Horizon h) {
    HorizonConfig cfg;
    cfg.horizon = h;
    switch (h) {
        case Horizon::Min10: cfg.window_steps = 3; cfg.buffer_steps = 1; break;
        case Horizon::Min30: cfg.window_steps = 3; cfg.buffer_steps = 3; break;
        case Horizon::Min60: cfg.window_steps = 6; cfg.buffer_steps = 6; break;
        case Horizon::Hour2: cfg.window_steps = 6; cfg.buffer_steps = 12; break;
        case Horizon::Eod:
            cfg.window_steps = Grid::kSlotsPerDay;
            cfg.buffer_steps = Grid::kSlotsPerDay;
            break;
    }
    return cfg;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid(21);
    for (int k = 0; k < 21; ++k) {
        grid[static_cast<size_t>(k)] = std::pow(10.0, -8.0 + 0.5 * k);
    }
    return grid;
}

double predict(const ReadoutCoefficients& coeffs, const double* x) {
    return coeffs.mu + kernels::dot(coeffs.theta.data(), x, coeffs.theta.size());
}

DesignView design_of(const SignalPanel& sp, std::vector<uint8_t>& validity_scratch) {
    validity_scratch.resize(sp.missing.size());
    for (size_t k = 0; k < sp.missing.size(); ++k) {
        validity_scratch[k] = sp.missing[k] != 0 ? 0 : 1;
    }
    DesignView v;
    v.data = sp.z.data();
    v.valid = validity_scratch.data();
    v.n_slots = sp.n_slots();
    v.n_stocks = sp.N();
    v.dim = sp.D();
    return v;
}

std::vector<int> training_slots(int t_slot, const HorizonConfig& cfg, int washout_slots,
                                int window_steps_override) {
    const int M = window_steps_override > 0 ? window_steps_override : cfg.window_steps;
    std::vector<int> slots;
    slots.reserve(static_cast<size_t>(M));
    int s;
    if (cfg.horizon == Horizon::Eod) {
        // "1 day" buffer: the window ends at the prior trading day's close.
        s = TradingCalendar::day_of_slot(t_slot) * Grid::kSlotsPerDay - 1;
    } else {
        s = t_slot - cfg.buffer_steps - 1;
    }
    while (s >= washout_slots && static_cast<int>(slots.size()) < M) {
        const int j = TradingCalendar::slot_in_day(s);
        if (j + horizon_steps(cfg.horizon, j) <= Grid::kSlotsPerDay) slots.push_back(s);
        --s;
    }
    std::reverse(slots.begin(), slots.end());
    return slots;
}

const char* skip_reason_name(SkipReason r) {
    switch (r) {
        case SkipReason::InsufficientHistory: return "insufficient_history";
        case SkipReason::EmptyBatch: return "empty_batch";
        case SkipReason::TooFewRows: return "too_few_rows";
        case SkipReason::NoPenalty: return "no_penalty";
    }
    return "?";
}

BatchResult assemble_batch(const DesignView& design, const TargetProvider& targets, int t_slot,
                           const HorizonConfig& cfg, int washout_slots,
                           int window_steps_override) {
    BatchResult res;
    const int M = window_steps_override > 0 ? window_steps_override : cfg.window_steps;
    const std::vector<int> slots = training_slots(t_slot, cfg, washout_slots,
                                                  window_steps_override);
    if (static_cast<int>(slots.size()) < M) {
        res.skip = SkipReason::InsufficientHistory;
        return res;
    }

    TrainingBatch& b = res.batch;
    b.dim = design.dim;
    std::vector<double> xs;
    for (int s : slots) {
        for (int i = 0; i < design.n_stocks; ++i) {
            if (!design.is_valid(s, i)) continue;
            const auto y = targets.target(s, i, cfg.horizon);
            if (!y) continue;
            xs.insert(xs.end(), design.row(s, i), design.row(s, i) + design.dim);
            b.y.push_back(*y);
            b.keys.emplace_back(s, i);
        }
    }
    b.X.rows = static_cast<int>(b.y.size());
    b.X.cols = design.dim;
    b.X.v = std::move(xs);
    if (b.rows() == 0) res.skip = SkipReason::EmptyBatch;
    return res;
}

RidgeMoments accumulate_moments(const TrainingBatch& batch) {
    RidgeMoments m;
    m.dim = batch.dim;
    m.n = batch.rows();
    m.xbar.assign(static_cast<size_t>(m.dim), 0.0);
    m.gram = Matrix(m.dim, m.dim);
    m.cxy.assign(static_cast<size_t>(m.dim), 0.0);
    if (m.n == 0) return m;

    for (int r = 0; r < batch.rows(); ++r) {
        kernels::axpy(1.0, batch.X.row_ptr(r), m.xbar.data(), static_cast<size_t>(m.dim));
        m.ybar += batch.y[static_cast<size_t>(r)];
    }
    const double inv_n = 1.0 / static_cast<double>(m.n);
    for (double& v : m.xbar) v *= inv_n;
    m.ybar *= inv_n;

    std::vector<double> xc(static_cast<size_t>(m.dim));
    for (int r = 0; r < batch.rows(); ++r) {
        kernels::scale_add(xc.data(), 1.0, batch.X.row_ptr(r), -1.0, m.xbar.data(),
                           static_cast<size_t>(m.dim));
        kernels::rank1_update(m.gram.data(), xc.data(), static_cast<size_t>(m.dim));
        kernels::axpy(batch.y[static_cast<size_t>(r)] - m.ybar, xc.data(), m.cxy.data(),
                      static_cast<size_t>(m.dim));
    }
    return m;
}

RidgeSolution solve_ridge(const RidgeMoments& m, const std::vector<double>& lambda_diag) {
    if (static_cast<int>(lambda_diag.size()) != m.dim) {
        throw InternalError("solve_ridge: penalty dimension mismatch");
    }
    if (m.n == 0) throw InternalError("solve_ridge: empty moments");

    const double inv_n = 1.0 / static_cast<double>(m.n);
    Matrix A(m.dim, m.dim);
    for (int i = 0; i < m.dim; ++i) {
        for (int j = 0; j < m.dim; ++j) A.at(i, j) = m.gram.at(i, j) * inv_n;
        A.at(i, i) += lambda_diag[static_cast<size_t>(i)];
    }
    std::vector<double> rhs(static_cast<size_t>(m.dim));
    for (int i = 0; i < m.dim; ++i) rhs[static_cast<size_t>(i)] = m.cxy[static_cast<size_t>(i)] * inv_n;

    RidgeSolution sol;
    Matrix Awork = A;
    std::vector<double> x = rhs;
    if (cholesky_solve_inplace(Awork, x)) {
        sol.theta = std::move(x);
    } else {
        sol.theta = pinv_solve(A, rhs);
        sol.min_norm_flagged = true;
    }
    sol.mu = m.ybar - kernels::dot(sol.theta.data(), m.xbar.data(), sol.theta.size());
    return sol;
}

ReadoutCoefficients ridge_fit(const TrainingBatch& batch, const std::vector<double>& lambda_diag) {
    if (batch.rows() == 0) throw DataError("ridge_fit: empty batch");
    const RidgeMoments m = accumulate_moments(batch);
    RidgeSolution sol = solve_ridge(m, lambda_diag);
    ReadoutCoefficients coeffs;
    coeffs.mu = sol.mu;
    coeffs.theta = std::move(sol.theta);
    coeffs.min_norm_flagged = sol.min_norm_flagged;
    double scale = 0.0;
    for (double l : lambda_diag) scale = std::max(scale, l);
    coeffs.lambda = scale;
    return coeffs;
}

PenaltyState cross_validate_penalty(const DesignView& design, const TargetProvider& targets,
                                    int day, const HorizonConfig& cfg,
                                    const std::vector<double>& grid, int washout_slots) {
    PenaltyState out;
    const int first_day = day - cfg.cv_window_days;
    if (first_day < 0) return out;
    const int s_begin = std::max(first_day * Grid::kSlotsPerDay, washout_slots);
    const int s_end = day * Grid::kSlotsPerDay;
    const int n_slots = s_end - s_begin;
    if (n_slots < 2) return out;

    // Chronological split: the first 70% of slots train, the rest validate.
    const int train_slots = static_cast<int>(std::llround(cfg.cv_split * n_slots));
    const int boundary = s_begin + std::clamp(train_slots, 1, n_slots - 1);

    TrainingBatch train, val;
    train.dim = val.dim = design.dim;
    std::vector<double> xt, xv;
    for (int s = s_begin; s < s_end; ++s) {
        for (int i = 0; i < design.n_stocks; ++i) {
            if (!design.is_valid(s, i)) continue;
            const auto y = targets.target(s, i, cfg.horizon);
            if (!y) continue;
            if (s < boundary) {
                xt.insert(xt.end(), design.row(s, i), design.row(s, i) + design.dim);
                train.y.push_back(*y);
            } else {
                xv.insert(xv.end(), design.row(s, i), design.row(s, i) + design.dim);
                val.y.push_back(*y);
            }
        }
    }
    train.X = Matrix();
    train.X.rows = static_cast<int>(train.y.size());
    train.X.cols = design.dim;
    train.X.v = std::move(xt);
    val.X.rows = static_cast<int>(val.y.size());
    val.X.cols = design.dim;
    val.X.v = std::move(xv);
    if (train.rows() == 0 || val.rows() == 0) return out;  // caller reuses yesterday's penalty

    // Anisotropic scaling: per-coordinate second moment on the train split.
    std::vector<double> v(static_cast<size_t>(design.dim), 0.0);
    for (int r = 0; r < train.rows(); ++r) {
        const double* x = train.X.row_ptr(r);
        for (int k = 0; k < design.dim; ++k) v[static_cast<size_t>(k)] += x[k] * x[k];
    }
    for (double& vk : v) {
        vk /= static_cast<double>(train.rows());
        if (!(vk > 0.0)) vk = 1.0;  // dead coordinate, keep the system SPD
    }

    const RidgeMoments m = accumulate_moments(train);
    double best_mse = 0.0;
    double best_lambda = 0.0;
    bool first = true;
    std::vector<double> diag(static_cast<size_t>(design.dim));
    for (double lambda : grid) {
        for (int k = 0; k < design.dim; ++k) diag[static_cast<size_t>(k)] = lambda * v[static_cast<size_t>(k)];
        const RidgeSolution sol = solve_ridge(m, diag);
        double se = 0.0;
        for (int r = 0; r < val.rows(); ++r) {
            const double pred =
                sol.mu + kernels::dot(sol.theta.data(), val.X.row_ptr(r), sol.theta.size());
            const double d = val.y[static_cast<size_t>(r)] - pred;
            se += d * d;
        }
        const double mse = se / val.rows();
        if (first || mse < best_mse) {
            best_mse = mse;
            best_lambda = lambda;
            first = false;
        }
    }

    out.present = true;
    out.lambda = best_lambda;
    out.diag.resize(static_cast<size_t>(design.dim));
    for (int k = 0; k < design.dim; ++k) {
        out.diag[static_cast<size_t>(k)] = best_lambda * v[static_cast<size_t>(k)];
    }
    return out;
}

ForecastSet run_windowed(const DesignView& design, const TargetProvider& targets,
                         const TradingCalendar& cal, const RunnerConfig& cfg,
                         const std::string& model_id, RunDiagnostics* diag) {
    cfg.hcfg.validate();
    ForecastSet out;
    out.model = model_id;
    const Horizon h = cfg.hcfg.horizon;
    const int n_days = cal.n_days();

    PenaltyState pen;
    if (!cfg.use_cv) {
        pen.present = true;
        pen.lambda = cfg.fixed_lambda;
        pen.diag.assign(static_cast<size_t>(design.dim), cfg.fixed_lambda);
    }

    // Identical consecutive windows (EOD within a day) reuse the solved fit.
    int cached_first = -1, cached_last = -1, cached_count = -1;
    RidgeSolution cached_sol;
    bool cached = false;

    for (int d = 0; d < n_days; ++d) {
        if (cfg.use_cv) {
            PenaltyState fresh = cross_validate_penalty(design, targets, d, cfg.hcfg,
                                                        cfg.lambda_grid, cfg.washout_slots);
            if (fresh.present) {
                pen = fresh;
            } else if (pen.present) {
                pen.reused = true;
                if (diag != nullptr) ++diag->penalty_reuses;
            }
            cached = false;  // penalty may have changed
        }
        for (int j = 0; j < Grid::kSlotsPerDay; ++j) {
            const int t = cal.slot_index(d, j);
            if (h != Horizon::Eod && j + horizon_steps(h, j) > Grid::kSlotsPerDay) {
                continue;  // horizon leaves the session: not a prediction time
            }
            if (!pen.present) {
                if (diag != nullptr) diag->skips.push_back({t, SkipReason::NoPenalty});
                continue;
            }
            BatchResult br =
                assemble_batch(design, targets, t, cfg.hcfg, cfg.washout_slots,
                               cfg.window_steps_override);
            if (!br.skip && br.batch.rows() < cfg.min_rows) br.skip = SkipReason::TooFewRows;
            if (br.skip) {
                if (diag != nullptr) diag->skips.push_back({t, *br.skip});
                continue;
            }

            const int w_first = br.batch.keys.front().first;
            const int w_last = br.batch.keys.back().first;
            const int w_count = br.batch.rows();
            if (!(cached && w_first == cached_first && w_last == cached_last &&
                  w_count == cached_count)) {
                const RidgeMoments m = accumulate_moments(br.batch);
                cached_sol = solve_ridge(m, pen.diag);
                cached_first = w_first;
                cached_last = w_last;
                cached_count = w_count;
                cached = true;
                if (diag != nullptr) {
                    ++diag->fits;
                    RunDiagnostics::FitAudit audit;
                    audit.t_slot = t;
                    audit.s_first = br.batch.keys.front().first;
                    audit.s_last = br.batch.keys.back().first;
                    audit.rows = br.batch.rows();
                    audit.t_row = TradingCalendar::row_of_slot(t);
                    int max_real = -1;
                    for (const auto& [s, i] : br.batch.keys) {
                        max_real = std::max(max_real, TargetProvider::realization_row(s, h));
                    }
                    audit.max_realization_row = max_real;
                    diag->audits.push_back(audit);
                }
            } else if (diag != nullptr) {
                // Reused fit still predicts at a new slot; audit the reuse too.
                RunDiagnostics::FitAudit audit = diag->audits.back();
                audit.t_slot = t;
                audit.t_row = TradingCalendar::row_of_slot(t);
                diag->audits.push_back(audit);
            }

            for (int i = 0; i < design.n_stocks; ++i) {
                if (!design.is_valid(t, i)) continue;
                ForecastRecord rec;
                rec.h = h;
                rec.slot = t;
                rec.stock = i;
                rec.prediction = cached_sol.mu + kernels::dot(cached_sol.theta.data(),
                                                              design.row(t, i),
                                                              cached_sol.theta.size());
                rec.lambda = pen.lambda;
                out.recs.push_back(rec);
            }
        }
    }
    return out;
}

ForecastSet run_baseline(const SignalPanel& signals, const TargetProvider& targets,
                         const TradingCalendar& cal, const HorizonConfig& hcfg,
                         RunDiagnostics* diag) {
    std::vector<uint8_t> validity;
    DesignView design = design_of(signals, validity);

    RunnerConfig cfg;
    cfg.hcfg = hcfg;
    cfg.use_cv = false;
    cfg.fixed_lambda = 0.0;
    cfg.window_steps_override = 1;
    cfg.min_rows = design.dim + 1;
    return run_windowed(design, targets, cal, cfg, "baseline", diag);
}

ForecastSet run_benchmark(const SignalPanel& signals, const TargetProvider& targets,
                          const TradingCalendar& cal, const HorizonConfig& hcfg,
                          RunDiagnostics* diag, const std::vector<double>& grid) {
    std::vector<uint8_t> validity;
    DesignView design = design_of(signals, validity);

    RunnerConfig cfg;
    cfg.hcfg = hcfg;
    cfg.use_cv = true;
    cfg.lambda_grid = grid;
    return run_windowed(design, targets, cal, cfg, "benchmark", diag);
}

StatePanel build_state_panel(const SignalPanel& signals, const ReservoirWeights& w,
                             const ReservoirSpec& spec, int washout_slots, int jobs) {
    StatePanel panel;
    panel.K = w.K;
    panel.n_slots = signals.n_slots();
    panel.n_stocks = signals.N();
    panel.x.assign(static_cast<size_t>(panel.n_slots) * panel.n_stocks * panel.K, 0.0);
    panel.valid.assign(static_cast<size_t>(panel.n_slots) * panel.n_stocks, 0);

    const int n = panel.n_stocks;
    parallel_for(n, jobs, [&](int i) {
        // Gather the stock's input sequence, then one continuous state pass.
        const int T = panel.n_slots;
        std::vector<double> inputs(static_cast<size_t>(T) * spec.D);
        std::vector<uint8_t> miss(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t) {
            miss[static_cast<size_t>(t)] = signals.is_missing(t, i) ? 1 : 0;
            if (!miss[static_cast<size_t>(t)]) {
                const double* z = signals.vec(t, i);
                std::copy(z, z + spec.D, inputs.begin() + static_cast<size_t>(t) * spec.D);
            }
        }
        StateSequence seq = run_state_sequence(w, spec, inputs.data(), miss.data(), T);
        for (int t = 0; t < T; ++t) {
            std::copy(seq.row(t), seq.row(t) + panel.K,
                      panel.x.begin() + (static_cast<size_t>(t) * n + i) * panel.K);
            panel.valid[static_cast<size_t>(t) * n + i] =
                t >= washout_slots ? seq.valid[static_cast<size_t>(t)] : 0;
        }
    });
    return panel;
}

ForecastSet run_esn(const SignalPanel& signals, const TargetProvider& targets,
                    const TradingCalendar& cal, const HorizonConfig& hcfg,
                    const ReservoirSpec& spec, const ReservoirWeights* weights,
                    RunDiagnostics* diag, int jobs, const std::vector<double>& grid) {
    spec.validate();
    if (spec.D != signals.D()) throw ConfigError("run_esn: reservoir D must match signal count");
    ReservoirWeights sampled;
    if (weights == nullptr) {
        sampled = sample_weights(spec);
        weights = &sampled;
    }
    const StatePanel states = build_state_panel(signals, *weights, spec, kEsnWashoutSlots, jobs);

    RunnerConfig cfg;
    cfg.hcfg = hcfg;
    cfg.use_cv = true;
    cfg.lambda_grid = grid;
    cfg.washout_slots = kEsnWashoutSlots;
    return run_windowed(states.view(), targets, cal, cfg, "esn", diag);
}

}  // namespace esncast
