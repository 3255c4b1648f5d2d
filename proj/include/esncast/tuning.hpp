#pragma once

#include <string>
#include <vector>

#include "esncast/evaluation.hpp"
#include "esncast/reservoir.hpp"
#include "esncast/training.hpp"

namespace esncast {

/// Hyperparameter grids for the random search. Defaults put every Table-style
/// spec value on a grid point: leak and spectral radius on 0.1 steps over
/// [0,1], input scaling on 0.005 steps, sparsities on 0.05 steps over
/// (0, 0.95].
struct SearchSpace {
    std::vector<double> alpha_grid;
    std::vector<double> rho_grid;
    std::vector<double> gamma_grid;
    std::vector<double> a_sparsity_grid;
    std::vector<double> c_sparsity_grid;
    int state_dim = 100;
    int budget = 50;
    uint64_t seed = 0;

    static SearchSpace defaults();
    void validate() const;
};

struct Trial {
    int index = 0;
    ReservoirSpec spec;
    double objective = 0.0;  // total cuMSFE on the pre-sample
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct TuneResult {
    ReservoirSpec best;
    double best_objective = 0.0;
    int best_trial = -1;
    std::vector<Trial> trials;
    Timestamp data_begin;  // pre-sample bounds, recorded for leakage audits
    Timestamp data_end;
};

/// Uniform random search over the grids, deterministic in the seed. Every
/// trial runs the full ESN + cuMSFE pipeline on the pre-sample panels;
/// reservoir weights are drawn from `weights_seed` for all trials so only
/// hyperparameters vary. Ties break toward the earlier trial. Throws
/// DataError with per-trial diagnostics if every trial fails.
TuneResult tune(const SearchSpace& space, const SignalPanel& signals,
                const TargetProvider& targets, const TradingCalendar& cal,
                const HorizonConfig& hcfg, uint64_t weights_seed, int jobs = 1);

}  // namespace esncast
