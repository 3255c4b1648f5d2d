#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "esncast/panel.hpp"
#include "esncast/reservoir.hpp"
#include "esncast/signals.hpp"
#include "esncast/synthetic.hpp"
#include "esncast/training.hpp"

namespace esncast {

inline constexpr const char* kVersion = "0.1.0";

/// Horizon-specific ESN defaults (state dim 100 everywhere; leak, sparsity,
/// spectral radius and input scaling per horizon).
ReservoirSpec default_reservoir_spec(Horizon h);

struct DataConfig {
    std::string source = "synthetic";  // "synthetic" | "csv"
    std::string path;                  // csv file or directory
    int max_row_errors = 100;
    bool overnight_returns = false;
    Date synthetic_start = 0;
    SyntheticMarketSpec synthetic;  // resolved to full vectors at load time
};

struct EvalConfig {
    int mcs_bootstrap = 10000;
    double mcs_alpha = 0.05;
    int robustness_models = 0;  // 0 disables the study
    std::vector<Horizon> robustness_horizons;
};

struct TuneConfig {
    int budget = 20;
    int presample_days = 0;  // 0: first half of the panel
    int state_dim = 100;
    std::vector<Horizon> horizons;  // empty: the run's horizon list
};

struct RunConfig {
    uint64_t seed = 42;
    std::string out_dir = "out";
    int jobs = 1;
    DataConfig data;
    SignalConfig signals;
    std::vector<Horizon> horizons;
    std::vector<std::string> models;
    std::map<Horizon, HorizonConfig> training;
    std::map<Horizon, ReservoirSpec> reservoir;
    EvalConfig evaluation;
    TuneConfig tuning;

    void validate() const;
};

struct ConfigOverrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<std::vector<std::string>> horizons;
    std::optional<std::vector<std::string>> models;
};

RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides = {});
RunConfig run_config_from_json(const nlohmann::json& j, const ConfigOverrides& overrides = {});

/// Full resolved configuration (defaults merged in) as canonical JSON; this
/// is what manifests embed and what the config hash covers.
nlohmann::json resolved_json(const RunConfig& cfg);

/// FNV-1a 64 over the canonical dump, as 16 hex chars.
std::string config_hash(const RunConfig& cfg);

}  // namespace esncast
