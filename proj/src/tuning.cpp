#include "esncast/tuning.hpp"

#include <chrono>
#include <cmath>

#include "esncast/rng.hpp"

namespace esncast {

SearchSpace SearchSpace::defaults() {
    SearchSpace s;
    for (int k = 0; k <= 10; ++k) s.alpha_grid.push_back(0.1 * k);
    for (int k = 0; k <= 10; ++k) s.rho_grid.push_back(0.1 * k);
    for (int k = 1; k <= 10; ++k) s.gamma_grid.push_back(0.005 * k);
    for (int k = 1; k <= 19; ++k) s.a_sparsity_grid.push_back(0.05 * k);
    for (int k = 1; k <= 19; ++k) s.c_sparsity_grid.push_back(0.05 * k);
    return s;
}

void SearchSpace::validate() const {
    if (budget < 1) throw ConfigError("tuning: budget must be >= 1");
    if (alpha_grid.empty() || rho_grid.empty() || gamma_grid.empty() ||
        a_sparsity_grid.empty() || c_sparsity_grid.empty()) {
        throw ConfigError("tuning: empty parameter grid");
    }
    if (state_dim < 1) throw ConfigError("tuning: state_dim must be >= 1");
}

TuneResult tune(const SearchSpace& space, const SignalPanel& signals,
                const TargetProvider& targets, const TradingCalendar& cal,
                const HorizonConfig& hcfg, uint64_t weights_seed, int jobs) {
    space.validate();

    TuneResult result;
    result.data_begin = cal.timestamp_of_row(0);
    result.data_end = cal.timestamp_of_row(cal.rows() - 1);
    result.trials.resize(static_cast<size_t>(space.budget));

    // Trial parameters come from one deterministic stream, drawn up front so
    // the sequence never depends on execution interleaving.
    Rng rng(space.seed);
    for (int k = 0; k < space.budget; ++k) {
        Trial& trial = result.trials[static_cast<size_t>(k)];
        trial.index = k;
        ReservoirSpec spec;
        spec.K = space.state_dim;
        spec.D = signals.D();
        spec.alpha = space.alpha_grid[rng.uniform_index(space.alpha_grid.size())];
        spec.rho = space.rho_grid[rng.uniform_index(space.rho_grid.size())];
        spec.gamma = space.gamma_grid[rng.uniform_index(space.gamma_grid.size())];
        spec.a_sparsity = space.a_sparsity_grid[rng.uniform_index(space.a_sparsity_grid.size())];
        spec.c_sparsity = space.c_sparsity_grid[rng.uniform_index(space.c_sparsity_grid.size())];
        spec.seed = weights_seed;  // same A*, C* draw across trials
        trial.spec = spec;
    }

    parallel_for(space.budget, jobs, [&](int k) {
        Trial& trial = result.trials[static_cast<size_t>(k)];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const ForecastSet fs = run_esn(signals, targets, cal, hcfg, trial.spec);
            trial.objective = msfe_series(fs, hcfg.horizon, targets).total;
        } catch (const std::exception& e) {
            trial.failed = true;
            trial.error = e.what();
        }
        trial.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    for (const Trial& trial : result.trials) {
        if (trial.failed) continue;
        if (result.best_trial < 0 || trial.objective < result.best_objective) {
            result.best_objective = trial.objective;
            result.best_trial = trial.index;
            result.best = trial.spec;
        }
    }
    if (result.best_trial < 0) {
        std::string msg = "tune: all trials failed;";
        for (const Trial& trial : result.trials) {
            msg += " [" + std::to_string(trial.index) + "] " + trial.error + ";";
        }
        throw DataError(msg);
    }
    return result;
}

}  // namespace esncast
