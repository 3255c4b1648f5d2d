// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier end-to-end checks share one pipeline run.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "esncast/evaluation.hpp"
#include "esncast/linalg.hpp"
#include "esncast/pipeline.hpp"
#include "esncast/rng.hpp"
#include "esncast/stats.hpp"
#include "esncast/synthetic.hpp"
#include "esncast/tuning.hpp"

using namespace esncast;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Shared context: the end-to-end run (criteria 12-14) and a mid-size panel
// reused by the linear-reduction checks (criteria 2-3, 8-9).
struct Context {
    std::string root;

    ReturnPanel small_panel;
    SignalPanel small_signals;

    json e2e_config;
    std::string e2e_dir;
    double e2e_seconds = 0.0;
};

json end_to_end_config(const std::string& out_dir) {
    json j;
    j["seed"] = 2013;
    j["out_dir"] = out_dir;
    j["jobs"] = 2;
    j["data"]["source"] = "synthetic";
    j["data"]["synthetic"] = {{"stocks", 50},       {"days", 60},      {"factors", 5},
                              {"kappa", 0.5},       {"ou_vol", 0.01},  {"factor_vol", 0.001},
                              {"loading_scale", 1.0}};
    j["horizons"] = {"10min"};
    j["models"] = {"baseline", "benchmark", "esn"};
    // At N = 50 the default 30-minute window leaves a 100-dim readout with
    // 150 rows per fit; a 2-hour window restores a workable row count.
    j["training"]["10min"] = {{"window_steps", 12}};
    j["evaluation"] = {{"mcs_bootstrap", 2000}};
    return j;
}

SyntheticMarketSpec reduction_panel_spec() {
    SyntheticMarketSpec s;
    s.N = 20;
    s.J = 3;
    s.T = 20 * Grid::kRowsPerDay;
    s.a.assign(20, 0.0);
    s.kappa.assign(20, 0.5);
    s.m.assign(20, 0.0);
    s.sigma.assign(20, 0.01);
    s.factor_vol.assign(3, 0.002);
    s.seed = 71;
    Rng rng(12);
    s.B.resize(60);
    for (double& b : s.B) b = 1.0 + 0.3 * rng.normal();
    return s;
}

// ---- criteria ----------------------------------------------------------

void criterion_1_ridge_oracle(Context&) {
    const auto t0 = Clock::now();
    Rng rng(1001);
    const int n = 50, d = 10;
    for (int batch_no = 0; batch_no < 100; ++batch_no) {
        TrainingBatch batch;
        batch.dim = d;
        batch.X = Matrix(n, d);
        batch.y.resize(n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < d; ++c) batch.X.at(r, c) = rng.normal();
            batch.y[static_cast<size_t>(r)] = rng.normal();
            batch.keys.emplace_back(0, r);
        }
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd Y(n);
        for (int r = 0; r < n; ++r) {
            Y(r) = batch.y[static_cast<size_t>(r)];
            for (int c = 0; c < d; ++c) X(r, c) = batch.X.at(r, c);
        }
        const Eigen::RowVectorXd xbar = X.colwise().mean();
        const double ybar = Y.mean();
        const Eigen::MatrixXd Xc = X.rowwise() - xbar;
        const Eigen::VectorXd Yc = Y.array() - ybar;

        for (double lambda : {1e-8, 1e-4, 1e-2, 1.0, 1e2}) {
            const ReadoutCoefficients mine = ridge_fit(batch, std::vector<double>(d, lambda));
            Eigen::MatrixXd lhs = (Xc.transpose() * Xc) / n;
            lhs.diagonal().array() += lambda;
            const Eigen::VectorXd theta = lhs.ldlt().solve(Xc.transpose() * Yc / n);
            for (int c = 0; c < d; ++c) {
                const double err = std::abs(mine.theta[static_cast<size_t>(c)] - theta(c));
                require(err <= 1e-8 * (1.0 + std::abs(theta(c))),
                        "coefficient mismatch " + std::to_string(err));
            }
        }
    }
    require(seconds_since(t0) < 5.0, "ridge oracle exceeded 5 s");
}

void criterion_2_linear_reduction(Context& ctx) {
    const auto t0 = Clock::now();
    ctx.small_panel = simulate_panel(reduction_panel_spec(), make_date(2013, 1, 2));
    SignalConfig scfg;
    scfg.factors = 3;
    ctx.small_signals = build_signal_panel(ctx.small_panel, scfg, nullptr, 2);
    const TargetProvider targets(ctx.small_panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);

    const ForecastSet bench =
        run_benchmark(ctx.small_signals, targets, ctx.small_panel.cal, hcfg);

    ReservoirSpec rs;
    rs.K = 6;
    rs.D = 6;
    rs.alpha = 0.0;
    rs.rho = 0.0;
    rs.gamma = 1.0;
    rs.a_sparsity = 1.0;
    rs.c_sparsity = 1.0;
    rs.activation = Activation::Identity;
    ReservoirWeights w;
    w.K = 6;
    w.D = 6;
    w.A_bar = Matrix(6, 6);
    w.C_bar = Matrix(6, 6);
    for (int i = 0; i < 6; ++i) w.C_bar.at(i, i) = 1.0;
    w.b_bar.assign(6, 0.0);
    const ForecastSet esn =
        run_esn(ctx.small_signals, targets, ctx.small_panel.cal, hcfg, rs, &w, nullptr, 2);

    require(!bench.recs.empty(), "benchmark emitted no forecasts");
    require(bench.recs.size() == esn.recs.size(), "forecast sets differ in size");
    for (size_t k = 0; k < bench.recs.size(); ++k) {
        require(bench.recs[k].slot == esn.recs[k].slot &&
                    bench.recs[k].stock == esn.recs[k].stock,
                "forecast keys diverge");
        require(std::abs(bench.recs[k].prediction - esn.recs[k].prediction) <= 1e-10,
                "prediction gap above 1e-10");
    }
    require(seconds_since(t0) < 30.0, "linear reduction exceeded 30 s");
}

void criterion_3_baseline_identity(Context& ctx) {
    const TargetProvider targets(ctx.small_panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);
    const ForecastSet base = run_baseline(ctx.small_signals, targets, ctx.small_panel.cal, hcfg);

    std::vector<uint8_t> validity;
    const DesignView design = design_of(ctx.small_signals, validity);
    RunnerConfig forced;
    forced.hcfg = hcfg;
    forced.use_cv = false;
    forced.fixed_lambda = 0.0;
    forced.window_steps_override = 1;
    forced.min_rows = design.dim + 1;
    const ForecastSet bench =
        run_windowed(design, targets, ctx.small_panel.cal, forced, "benchmark");

    require(!base.recs.empty(), "baseline emitted no forecasts");
    require(base.recs.size() == bench.recs.size(), "forecast sets differ in size");
    for (size_t k = 0; k < base.recs.size(); ++k) {
        require(std::abs(base.recs[k].prediction - bench.recs[k].prediction) <= 1e-12,
                "baseline/benchmark gap above 1e-12");
    }
}

void criterion_4_decay_bound(Context&) {
    Rng meta(4004);
    for (int trial = 0; trial < 50; ++trial) {
        ReservoirSpec s;
        s.K = 40;
        s.D = 6;
        s.alpha = meta.uniform();
        s.rho = meta.uniform();
        s.gamma = 0.5 + meta.uniform();
        s.a_sparsity = 0.1 + 0.9 * meta.uniform();
        s.c_sparsity = 0.1 + 0.9 * meta.uniform();
        s.seed = meta.next_u64();
        const ReservoirWeights w = sample_weights(s);
        const double s_max = max_singular_value(w.A_bar);
        const double rate = s.alpha + (1.0 - s.alpha) * s.rho * s_max;

        ReservoirState state(s.K);
        Rng rng(meta.next_u64());
        double norm = 0.0;
        for (double& v : state.x) {
            v = rng.normal();
            norm += v * v;
        }
        double bound = std::sqrt(norm);
        for (int n = 1; n <= 100; ++n) {
            update_state(state, w, s, nullptr);
            bound *= rate;
            double cur = 0.0;
            for (double v : state.x) cur += v * v;
            require(std::sqrt(cur) <= bound * (1.0 + 1e-12) + 1e-300,
                    "decay bound violated at step " + std::to_string(n));
        }
    }
}

void criterion_5_washout(Context&) {
    Rng meta(5005);
    int tested = 0;
    while (tested < 20) {
        ReservoirSpec s;
        s.K = 40;
        s.D = 6;
        s.alpha = 0.5 * meta.uniform();
        s.rho = 0.7 * meta.uniform();
        s.gamma = 0.5 + meta.uniform();
        s.a_sparsity = 0.1 + 0.9 * meta.uniform();
        s.c_sparsity = 0.1 + 0.9 * meta.uniform();
        s.seed = meta.next_u64();
        const ReservoirWeights w = sample_weights(s);
        const double s_max = max_singular_value(w.A_bar);
        if (s.alpha + (1.0 - s.alpha) * s.rho * s_max >= 1.0) continue;
        ++tested;

        const int T = 200;
        std::vector<double> inputs(static_cast<size_t>(T) * 6);
        Rng rng(meta.next_u64());
        for (double& v : inputs) v = rng.normal();
        std::vector<double> x0a(40, 0.0), x0b(40);
        for (double& v : x0b) v = 2.0 * rng.normal();
        const StateSequence a = run_state_sequence(w, s, inputs.data(), nullptr, T, x0a);
        const StateSequence b = run_state_sequence(w, s, inputs.data(), nullptr, T, x0b);
        double gap = 0.0;
        for (int k = 0; k < 40; ++k) {
            const double d = a.row(T - 1)[k] - b.row(T - 1)[k];
            gap += d * d;
        }
        require(std::sqrt(gap) < 1e-10, "trajectories failed to contract below 1e-10");
    }
}

void criterion_6_ou_recovery(Context&) {
    const auto t0 = Clock::now();
    const double m_true = 1.0, sigma_true = 0.2;
    uint64_t seed = 606;
    for (double kappa : {0.05, 0.2, 1.0}) {
        const std::vector<double> u = simulate_ou_path(kappa, m_true, sigma_true, 100000, seed++);
        const OuEstimate est = ou_estimate(u, 0, 0.0);
        require(est.valid, "estimate unusable");
        require(std::abs(est.kappa - kappa) <= 0.10 * kappa, "kappa off by more than 10%");
        require(std::abs(est.m - m_true) <= 0.10 * m_true, "m off by more than 10%");
        // sigma target: the population value of sqrt(Var(eta)/(2 kappa))
        // under the exact discretization.
        const double var_eta =
            sigma_true * sigma_true * (1.0 - std::exp(-2.0 * kappa)) / (2.0 * kappa);
        const double sigma_target = std::sqrt(var_eta / (2.0 * kappa));
        require(std::abs(est.sigma_eq - sigma_target) <= 0.10 * sigma_target,
                "sigma off by more than 10%");
    }
    require(seconds_since(t0) < 10.0, "OU recovery exceeded 10 s");
}

void criterion_7_pca_sanity(Context&) {
    // Full-rank window with J = N: residuals vanish.
    {
        const int n = 8;
        SyntheticMarketSpec s;
        s.N = n;
        s.J = 0;
        s.T = 2 * Grid::kRowsPerDay;
        s.a.assign(n, 0.0);
        s.kappa.assign(n, 0.5);
        s.m.assign(n, 0.0);
        s.sigma.assign(n, 0.01);
        s.seed = 17;
        const ReturnPanel p = simulate_panel(s, make_date(2013, 1, 2));
        const StandardizedWindow win = standardize_returns(p, 0, p.T());
        const EigenportfolioSet ep = extract_factors(win, p, 0, p.T(), n);
        const FactorRegression reg = factor_regression(p, ep, 0, p.T());
        for (int i = 0; i < n; ++i) {
            for (int t = 0; t < p.T(); ++t) {
                require(std::abs(reg.residuals.at(t, i)) <= 1e-8,
                        "residual above 1e-8 with J = N");
            }
        }
    }
    // Fifteen true factors, J = 15: top factors explain > 90%.
    {
        const int n = 40, jt = 15;
        SyntheticMarketSpec s;
        s.N = n;
        s.J = jt;
        s.T = 5 * Grid::kRowsPerDay;
        s.a.assign(n, 0.0);
        s.kappa.assign(n, 0.5);
        s.m.assign(n, 0.0);
        s.sigma.assign(n, 0.005);
        s.factor_vol.assign(jt, 0.02);
        s.seed = 23;
        Rng rng(29);
        s.B.resize(static_cast<size_t>(n) * jt);
        for (double& b : s.B) b = rng.normal();
        const ReturnPanel p = simulate_panel(s, make_date(2013, 1, 2));
        const StandardizedWindow win = standardize_returns(p, 0, p.T());
        const EigenportfolioSet ep = extract_factors(win, p, 0, p.T(), jt);
        double evr = 0.0;
        for (double v : ep.explained_variance_ratio) evr += v;
        require(evr > 0.9, "15 factors explain only " + std::to_string(evr));
    }
}

void criterion_8_schedule_counts(Context& ctx) {
    const int expected[] = {39, 37, 34, 28, 39};
    const Horizon hs[] = {Horizon::Min10, Horizon::Min30, Horizon::Min60, Horizon::Hour2,
                          Horizon::Eod};
    // Realized-target counts per day on the synthetic panel.
    const ReturnPanel& p = ctx.small_panel;
    for (int day = 1; day < p.cal.n_days(); ++day) {
        for (int k = 0; k < 5; ++k) {
            int count = 0;
            for (int j = 0; j < Grid::kSlotsPerDay; ++j) {
                if (realized_horizon_return(p, p.cal.slot_index(day, j), 0, hs[k])) ++count;
            }
            require(count == expected[k],
                    std::string(horizon_name(hs[k])) + ": " + std::to_string(count) +
                        " targets on day " + std::to_string(day));
        }
    }
    // Emitted prediction times per day from the walk-forward runner.
    const TargetProvider targets(p);
    const int day = 18;  // past warmup and the CV ramp
    for (int k = 0; k < 5; ++k) {
        const ForecastSet fs =
            run_benchmark(ctx.small_signals, targets, p.cal, default_horizon_config(hs[k]));
        std::set<int> slots;
        for (const auto& rec : fs.recs) {
            if (TradingCalendar::day_of_slot(rec.slot) == day) slots.insert(rec.slot);
        }
        require(static_cast<int>(slots.size()) == expected[k],
                std::string(horizon_name(hs[k])) + ": " + std::to_string(slots.size()) +
                    " prediction times on day " + std::to_string(day));
    }
}

void criterion_9_no_lookahead(Context& ctx) {
    const TargetProvider targets(ctx.small_panel);
    long checked = 0;
    for (Horizon h :
         {Horizon::Min10, Horizon::Min30, Horizon::Min60, Horizon::Hour2, Horizon::Eod}) {
        RunDiagnostics diag;
        const ForecastSet fs = run_benchmark(ctx.small_signals, targets, ctx.small_panel.cal,
                                             default_horizon_config(h), &diag);
        (void)fs;
        require(!diag.audits.empty(), "no fits audited");
        for (const auto& a : diag.audits) {
            require(a.max_realization_row <= a.t_row,
                    "training row realized after the forecast time");
            ++checked;
        }
    }
    require(checked > 500, "audit coverage unexpectedly thin");
}

void criterion_10_dm_size(Context&) {
    const auto t0 = Clock::now();
    const int trials = 1000;
    const int T = 10000;
    int rejections = 0;
    std::vector<double> a(static_cast<size_t>(T));
    const std::vector<double> zero(static_cast<size_t>(T), 0.0);
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(static_cast<uint64_t>(trial) + 424242);
        for (double& v : a) v = rng.normal();
        if (diebold_mariano(a, zero, 1).p_value < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / trials;
    require(rate >= 0.035 && rate <= 0.065,
            "rejection rate " + std::to_string(rate) + " outside [3.5%, 6.5%]");
    require(seconds_since(t0) < 60.0, "DM size study exceeded 60 s");
}

void criterion_11_mcs(Context&) {
    const int T = 500, B = 2000;
    int eliminated = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(9000 + seed);
        std::vector<double> base(static_cast<size_t>(T));
        for (double& v : base) {
            const double e = rng.normal();
            v = e * e;
        }
        const double sd = std::sqrt(stats::sample_variance(base.data(), base.size()));
        std::vector<double> shifted = base;
        for (double& v : shifted) v += 0.1 * sd;
        const McsResult mcs = model_confidence_set({base, shifted}, 0.05, B, seed);
        if (mcs.included[1] == 0) ++eliminated;
    }
    require(eliminated >= 20,
            "shifted model eliminated in only " + std::to_string(eliminated) + "/20 runs");

    Rng rng(31337);
    std::vector<double> same(static_cast<size_t>(T));
    for (double& v : same) v = std::abs(rng.normal());
    const McsResult eq = model_confidence_set({same, same, same}, 0.05, B, 7);
    for (size_t k = 0; k < 3; ++k) {
        require(eq.included[k] == 1 && eq.p_values[k] == 1.0,
                "identical-loss model not retained with p-value 1");
    }
}

void criterion_12_end_to_end(Context& ctx) {
    const auto t0 = Clock::now();
    ctx.e2e_dir = ctx.root + "/e2e_a";
    ctx.e2e_config = end_to_end_config(ctx.e2e_dir);
    const RunConfig cfg = run_config_from_json(ctx.e2e_config);
    cmd_simulate(cfg);
    cmd_backtest(cfg);
    cmd_evaluate(cfg);
    ctx.e2e_seconds = seconds_since(t0);

    const ReturnPanel panel = read_panel_bin(panel_bin_path(ctx.e2e_dir));
    const TargetProvider targets(panel);
    for (const std::string model : {"benchmark", "esn"}) {
        const ForecastSet fs = read_forecasts_csv(
            forecasts_path(ctx.e2e_dir, model, Horizon::Min10), panel.cal, panel.tickers);
        const MsfeResult msfe = msfe_series(fs, Horizon::Min10, targets);

        ForecastSet zero = fs;
        for (auto& rec : zero.recs) rec.prediction = 0.0;
        const MsfeResult zero_msfe = msfe_series(zero, Horizon::Min10, targets);
        require(msfe.total < zero_msfe.total,
                model + " MSFE " + std::to_string(msfe.total) + " not below zero-forecast " +
                    std::to_string(zero_msfe.total));
    }
    require(ctx.e2e_seconds < 300.0, "pipeline took " + std::to_string(ctx.e2e_seconds) + " s");
}

void criterion_13_determinism(Context& ctx) {
    const std::string dir_b = ctx.root + "/e2e_b";
    json cfg_json = ctx.e2e_config;
    cfg_json["out_dir"] = dir_b;
    const RunConfig cfg = run_config_from_json(cfg_json);
    cmd_simulate(cfg);
    cmd_backtest(cfg);
    cmd_evaluate(cfg);

    for (const std::string name :
         {"forecasts_baseline_10min.csv", "forecasts_benchmark_10min.csv",
          "forecasts_esn_10min.csv", "report.json", "msfe.csv", "r2.csv", "dm.csv", "mcs.csv",
          "plot_10min.csv"}) {
        const std::string a = read_file(ctx.e2e_dir + "/" + name);
        require(!a.empty(), name + " missing or empty");
        require(a == read_file(dir_b + "/" + name), name + " differs between reruns");
    }
}

void criterion_14_robustness(Context& ctx) {
    const ReturnPanel panel = read_panel_bin(panel_bin_path(ctx.e2e_dir));
    const SignalPanel signals = read_signals_bin(signals_bin_path(ctx.e2e_dir));
    const TargetProvider targets(panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);

    const ForecastSet base = read_forecasts_csv(
        forecasts_path(ctx.e2e_dir, "baseline", Horizon::Min10), panel.cal, panel.tickers);
    const MsfeResult ref = msfe_series(base, Horizon::Min10, targets);

    ReservoirSpec spec = default_reservoir_spec(Horizon::Min10);
    spec.seed = 2013;
    const RobustnessBands bands =
        robustness_study(spec, 20, signals, targets, panel.cal, hcfg, ref, 2);
    require(!bands.slots.empty(), "empty robustness event grid");
    for (size_t e = 0; e < bands.slots.size(); ++e) {
        require(bands.p5[e] <= bands.p25[e] && bands.p25[e] <= bands.median[e] &&
                    bands.median[e] <= bands.p75[e] && bands.p75[e] <= bands.p95[e],
                "quantile bands not nested at event " + std::to_string(e));
    }
}

}  // namespace

int main() {
    Context ctx;
    ctx.root = (fs::temp_directory_path() / "esncast_acceptance").string();
    fs::remove_all(ctx.root);
    fs::create_directories(ctx.root);

    struct Criterion {
        int id;
        const char* description;
        std::function<void(Context&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "ridge matches the independent normal-equations oracle", criterion_1_ridge_oracle},
        {2, "degenerate ESN reproduces the benchmark forecasts", criterion_2_linear_reduction},
        {3, "baseline equals benchmark with M=1 and no penalty", criterion_3_baseline_identity},
        {4, "zero-input reservoir decay obeys the contraction bound", criterion_4_decay_bound},
        {5, "echo-state washout forgets the initial state", criterion_5_washout},
        {6, "AR(1) estimation recovers OU parameters within 10%", criterion_6_ou_recovery},
        {7, "PCA reconstructs full-rank panels and captures 15 factors", criterion_7_pca_sanity},
        {8, "per-day prediction counts are 39/37/34/28/39", criterion_8_schedule_counts},
        {9, "no training row is realized after its forecast time", criterion_9_no_lookahead},
        {10, "Diebold-Mariano size is within [3.5%, 6.5%] under the null", criterion_10_dm_size},
        {11, "MCS eliminates a dominated model and keeps equals", criterion_11_mcs},
        {12, "synthetic end-to-end run beats the zero forecast", criterion_12_end_to_end},
        {13, "reruns produce byte-identical forecasts and reports", criterion_13_determinism},
        {14, "robustness bands are valid nested quantiles", criterion_14_robustness},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        std::string error;
        try {
            c.fn(ctx);
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (error.empty()) {
            std::printf("PASS criterion %2d: %s (%.1f s)\n", c.id, c.description,
                        seconds_since(t0));
        } else {
            ++failures;
            std::printf("FAIL criterion %2d: %s — %s\n", c.id, c.description, error.c_str());
        }
        std::fflush(stdout);
    }

    fs::remove_all(ctx.root);
    if (failures > 0) {
        std::printf("%d of %zu criteria failed\n", failures, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
