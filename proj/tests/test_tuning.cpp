#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "esncast/evaluation.hpp"
#include "esncast/synthetic.hpp"
#include "esncast/tuning.hpp"
#include "helpers.hpp"

using namespace esncast;
using namespace testutil;

namespace {

struct TuneFixture {
    ReturnPanel panel;
    SignalPanel signals;

    TuneFixture() {
        SyntheticMarketSpec s;
        s.N = 6;
        s.J = 1;
        s.T = 16 * Grid::kRowsPerDay;
        s.a.assign(6, 0.0);
        s.kappa.assign(6, 0.6);
        s.m.assign(6, 0.0);
        s.sigma.assign(6, 0.01);
        s.factor_vol.assign(1, 0.002);
        s.B.assign(6, 1.0);
        s.seed = 91;
        panel = simulate_panel(s, make_date(2013, 1, 2));
        SignalConfig scfg;
        scfg.factors = 1;
        scfg.ou_window = 50;
        signals = build_signal_panel(panel, scfg, nullptr, 2);
    }
};

SearchSpace small_space(int budget, uint64_t seed) {
    SearchSpace space = SearchSpace::defaults();
    space.state_dim = 12;  // small reservoir keeps trials quick
    space.budget = budget;
    space.seed = seed;
    return space;
}

}  // namespace

TEST_CASE("the search honors its budget and is deterministic in the seed") {
    TuneFixture fx;
    const TargetProvider targets(fx.panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);

    const SearchSpace space = small_space(4, 7);
    TuneResult a = tune(space, fx.signals, targets, fx.panel.cal, hcfg, 1, 2);
    CHECK(a.trials.size() == 4);

    TuneResult b = tune(space, fx.signals, targets, fx.panel.cal, hcfg, 1, 1);
    REQUIRE(b.trials.size() == a.trials.size());
    for (size_t k = 0; k < a.trials.size(); ++k) {
        CHECK(a.trials[k].spec.alpha == b.trials[k].spec.alpha);
        CHECK(a.trials[k].spec.rho == b.trials[k].spec.rho);
        CHECK(a.trials[k].spec.gamma == b.trials[k].spec.gamma);
        CHECK(a.trials[k].spec.a_sparsity == b.trials[k].spec.a_sparsity);
        CHECK(a.trials[k].spec.c_sparsity == b.trials[k].spec.c_sparsity);
        CHECK(a.trials[k].objective == b.trials[k].objective);
    }
    CHECK(a.best_trial == b.best_trial);

    // Sampled parameters land on the configured grids.
    for (const Trial& t : a.trials) {
        bool on_gamma_grid = false;
        for (double g : space.gamma_grid) on_gamma_grid |= t.spec.gamma == g;
        CHECK(on_gamma_grid);
        CHECK(t.spec.K == 12);
        CHECK(t.spec.seed == 1);  // weights fixed across trials
    }
}

TEST_CASE("the winner is the trial with the lowest objective and reproduces it") {
    TuneFixture fx;
    const TargetProvider targets(fx.panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);

    TuneResult res = tune(small_space(5, 3), fx.signals, targets, fx.panel.cal, hcfg, 2, 2);
    for (const Trial& t : res.trials) {
        if (!t.failed) CHECK(res.best_objective <= t.objective);
    }

    // Independent re-run of the winning spec hits the logged objective.
    const ForecastSet fs =
        run_esn(fx.signals, targets, fx.panel.cal, hcfg, res.best, nullptr, nullptr, 2);
    const double objective = msfe_series(fs, Horizon::Min10, targets).total;
    CHECK(objective == doctest::Approx(res.best_objective).epsilon(1e-12));
}

TEST_CASE("tuning records the pre-sample bounds for leakage audits") {
    TuneFixture fx;
    const TargetProvider targets(fx.panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);
    TuneResult res = tune(small_space(1, 5), fx.signals, targets, fx.panel.cal, hcfg, 3, 1);
    CHECK(res.trials.size() == 1);
    CHECK(res.data_begin < res.data_end);
    CHECK(res.data_end ==
          fx.panel.cal.timestamp_of_row(fx.panel.cal.rows() - 1));
}

TEST_CASE("a budget of zero or empty grids is a config error") {
    TuneFixture fx;
    const TargetProvider targets(fx.panel);
    const HorizonConfig hcfg = default_horizon_config(Horizon::Min10);
    SearchSpace bad = small_space(0, 1);
    CHECK_THROWS_AS(tune(bad, fx.signals, targets, fx.panel.cal, hcfg, 1, 1), ConfigError);
    SearchSpace empty = small_space(1, 1);
    empty.alpha_grid.clear();
    CHECK_THROWS_AS(tune(empty, fx.signals, targets, fx.panel.cal, hcfg, 1, 1), ConfigError);
}
