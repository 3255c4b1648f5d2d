#include "esncast/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "esncast/rng.hpp"

namespace esncast {

using nlohmann::json;

ReservoirSpec default_reservoir_spec(Horizon h) {
    ReservoirSpec s;
    s.K = 100;
    s.D = 6;
    switch (h) {
        case Horizon::Min10:
            s.alpha = 0.9; s.a_sparsity = 0.15; s.rho = 0.4; s.c_sparsity = 0.95; s.gamma = 0.005;
            break;
        case Horizon::Min30:
            s.alpha = 0.2; s.a_sparsity = 0.15; s.rho = 0.6; s.c_sparsity = 0.55; s.gamma = 0.005;
            break;
        case Horizon::Min60:
            s.alpha = 0.0; s.a_sparsity = 0.15; s.rho = 0.6; s.c_sparsity = 0.75; s.gamma = 0.005;
            break;
        case Horizon::Hour2:
            s.alpha = 0.0; s.a_sparsity = 0.65; s.rho = 0.6; s.c_sparsity = 0.85; s.gamma = 0.005;
            break;
        case Horizon::Eod:
            s.alpha = 0.0; s.a_sparsity = 0.35; s.rho = 0.0; s.c_sparsity = 0.25; s.gamma = 0.015;
            break;
    }
    return s;
}

namespace {

const std::vector<Horizon> kAllHorizons = {Horizon::Min10, Horizon::Min30, Horizon::Min60,
                                           Horizon::Hour2, Horizon::Eod};

std::vector<double> broadcast(const json& j, const char* key, double fallback, int n) {
    std::vector<double> out(static_cast<size_t>(n), fallback);
    if (!j.contains(key)) return out;
    const json& v = j.at(key);
    if (v.is_number()) {
        std::fill(out.begin(), out.end(), v.get<double>());
    } else if (v.is_array()) {
        if (static_cast<int>(v.size()) != n) {
            throw ConfigError(std::string("config: '") + key + "' must be scalar or length " +
                              std::to_string(n));
        }
        for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = v[static_cast<size_t>(i)].get<double>();
    } else {
        throw ConfigError(std::string("config: '") + key + "' must be a number or array");
    }
    return out;
}

std::vector<Horizon> parse_horizons(const json& v) {
    std::vector<Horizon> out;
    for (const auto& s : v) out.push_back(horizon_from_name(s.get<std::string>()));
    return out;
}

SyntheticMarketSpec build_synthetic(const json& j, uint64_t run_seed, Date* start_out) {
    const int n = j.value("stocks", 20);
    const int days = j.value("days", 30);
    const int factors = j.value("factors", 0);
    SyntheticMarketSpec spec;
    spec.N = n;
    spec.J = factors;
    spec.T = days * Grid::kRowsPerDay;
    spec.seed = j.value("seed", run_seed);
    spec.missing_rate = j.value("missing_rate", 0.0);
    spec.a = broadcast(j, "drift", 0.0, n);
    spec.kappa = broadcast(j, "kappa", 0.5, n);
    spec.m = broadcast(j, "ou_mean", 0.0, n);
    spec.sigma = broadcast(j, "ou_vol", 0.01, n);
    spec.factor_vol = broadcast(j, "factor_vol", 0.001, factors);
    if (j.contains("loadings")) {
        const json& rows = j.at("loadings");
        if (static_cast<int>(rows.size()) != n) throw ConfigError("config: loadings must be N x J");
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != factors) {
                throw ConfigError("config: loadings must be N x J");
            }
            for (const auto& x : row) spec.B.push_back(x.get<double>());
        }
    } else {
        // Loadings drawn once from a derived stream: N(0, loading_scale^2).
        const double scale = j.value("loading_scale", 1.0);
        Rng rng(mix_seed(spec.seed, 0x10adu));
        spec.B.resize(static_cast<size_t>(n) * factors);
        for (double& v : spec.B) v = scale * rng.normal();
    }
    *start_out = parse_date_iso(j.value("start_date", std::string("2013-01-02")));
    spec.validate();
    return spec;
}

HorizonConfig parse_horizon_config(Horizon h, const json* j) {
    HorizonConfig cfg = default_horizon_config(h);
    if (j != nullptr) {
        cfg.window_steps = j->value("window_steps", cfg.window_steps);
        cfg.buffer_steps = j->value("buffer_steps", cfg.buffer_steps);
        cfg.cv_window_days = j->value("cv_window_days", cfg.cv_window_days);
        cfg.cv_split = j->value("cv_split", cfg.cv_split);
    }
    cfg.validate();
    return cfg;
}

ReservoirSpec parse_reservoir_spec(Horizon h, const json* j, uint64_t run_seed, int d) {
    ReservoirSpec spec = default_reservoir_spec(h);
    spec.D = d;
    spec.seed = run_seed;
    if (j != nullptr) {
        spec.K = j->value("state_dim", spec.K);
        spec.alpha = j->value("leak_rate", spec.alpha);
        spec.rho = j->value("spectral_radius", spec.rho);
        spec.gamma = j->value("input_scaling", spec.gamma);
        spec.zeta = j->value("bias_scaling", spec.zeta);
        spec.a_sparsity = j->value("a_sparsity", spec.a_sparsity);
        spec.c_sparsity = j->value("c_sparsity", spec.c_sparsity);
        spec.seed = j->value("seed", spec.seed);
        if (j->contains("activation")) {
            const std::string a = j->at("activation").get<std::string>();
            if (a == "tanh") {
                spec.activation = Activation::Tanh;
            } else if (a == "identity") {
                spec.activation = Activation::Identity;
            } else {
                throw ConfigError("config: unknown activation '" + a + "'");
            }
        }
    }
    spec.validate();
    return spec;
}

}  // namespace

void RunConfig::validate() const {
    if (horizons.empty()) throw ConfigError("config: horizon list is empty");
    if (models.empty()) throw ConfigError("config: model list is empty");
    for (const auto& m : models) {
        if (m != "baseline" && m != "benchmark" && m != "esn") {
            throw ConfigError("config: unknown model '" + m + "'");
        }
    }
    for (Horizon h : horizons) {
        if (!training.count(h)) throw ConfigError("config: missing training config for horizon");
        if (std::find(models.begin(), models.end(), "esn") != models.end() &&
            !reservoir.count(h)) {
            throw ConfigError("config: missing reservoir spec for horizon");
        }
    }
    if (signals.factors < 1) throw ConfigError("config: signals.factors must be >= 1");
    if (signals.pca_window_days < 1) throw ConfigError("config: signals.pca_window_days >= 1");
    if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

RunConfig run_config_from_json(const json& j, const ConfigOverrides& overrides) {
    RunConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    if (overrides.seed) cfg.seed = *overrides.seed;
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    cfg.jobs = j.value("jobs", cfg.jobs);
    if (overrides.jobs) cfg.jobs = *overrides.jobs;

    if (j.contains("data")) {
        const json& d = j.at("data");
        cfg.data.source = d.value("source", cfg.data.source);
        cfg.data.path = d.value("path", cfg.data.path);
        cfg.data.max_row_errors = d.value("max_row_errors", cfg.data.max_row_errors);
        cfg.data.overnight_returns = d.value("overnight_returns", cfg.data.overnight_returns);
        if (cfg.data.source == "synthetic") {
            cfg.data.synthetic = build_synthetic(d.value("synthetic", json::object()), cfg.seed,
                                                 &cfg.data.synthetic_start);
        } else if (cfg.data.source != "csv") {
            throw ConfigError("config: data.source must be 'synthetic' or 'csv'");
        }
    } else {
        cfg.data.synthetic =
            build_synthetic(json::object(), cfg.seed, &cfg.data.synthetic_start);
    }

    if (j.contains("signals")) {
        const json& s = j.at("signals");
        cfg.signals.factors = s.value("factors", cfg.signals.factors);
        cfg.signals.pca_window_days = s.value("pca_window_days", cfg.signals.pca_window_days);
        cfg.signals.ou_window = s.value("ou_window", cfg.signals.ou_window);
        if (s.contains("windows")) {
            cfg.signals.windows.clear();
            for (const auto& w : s.at("windows")) cfg.signals.windows.push_back(w.get<int>());
        }
    }

    cfg.horizons = j.contains("horizons") ? parse_horizons(j.at("horizons")) : kAllHorizons;
    if (overrides.horizons) {
        cfg.horizons.clear();
        for (const auto& s : *overrides.horizons) cfg.horizons.push_back(horizon_from_name(s));
    }
    cfg.models = {"baseline", "benchmark", "esn"};
    if (j.contains("models")) {
        cfg.models.clear();
        for (const auto& m : j.at("models")) cfg.models.push_back(m.get<std::string>());
    }
    if (overrides.models) cfg.models = *overrides.models;

    const int d = static_cast<int>(cfg.signals.windows.size());
    for (Horizon h : kAllHorizons) {
        const json* tj = nullptr;
        const json* rj = nullptr;
        if (j.contains("training") && j.at("training").contains(horizon_name(h))) {
            tj = &j.at("training").at(horizon_name(h));
        }
        if (j.contains("reservoir") && j.at("reservoir").contains(horizon_name(h))) {
            rj = &j.at("reservoir").at(horizon_name(h));
        }
        HorizonConfig hc = parse_horizon_config(h, tj);
        hc.horizon = h;
        cfg.training[h] = hc;
        cfg.reservoir[h] = parse_reservoir_spec(h, rj, cfg.seed, d);
    }

    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        cfg.evaluation.mcs_bootstrap = e.value("mcs_bootstrap", cfg.evaluation.mcs_bootstrap);
        cfg.evaluation.mcs_alpha = e.value("mcs_alpha", cfg.evaluation.mcs_alpha);
        cfg.evaluation.robustness_models =
            e.value("robustness_models", cfg.evaluation.robustness_models);
        if (e.contains("robustness_horizons")) {
            cfg.evaluation.robustness_horizons = parse_horizons(e.at("robustness_horizons"));
        }
    }
    if (cfg.evaluation.robustness_horizons.empty()) {
        cfg.evaluation.robustness_horizons = {Horizon::Min10};
    }

    if (j.contains("tuning")) {
        const json& t = j.at("tuning");
        cfg.tuning.budget = t.value("budget", cfg.tuning.budget);
        cfg.tuning.presample_days = t.value("presample_days", cfg.tuning.presample_days);
        cfg.tuning.state_dim = t.value("state_dim", cfg.tuning.state_dim);
        if (t.contains("horizons")) cfg.tuning.horizons = parse_horizons(t.at("horizons"));
    }
    if (cfg.tuning.horizons.empty()) cfg.tuning.horizons = cfg.horizons;

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return run_config_from_json(j, overrides);
}

json resolved_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["jobs"] = cfg.jobs;
    j["data"]["source"] = cfg.data.source;
    j["data"]["path"] = cfg.data.path;
    j["data"]["max_row_errors"] = cfg.data.max_row_errors;
    j["data"]["overnight_returns"] = cfg.data.overnight_returns;
    if (cfg.data.source == "synthetic") {
        const auto& s = cfg.data.synthetic;
        json sj;
        sj["stocks"] = s.N;
        sj["factors"] = s.J;
        sj["days"] = s.T / Grid::kRowsPerDay;
        sj["start_date"] = format_date(cfg.data.synthetic_start);
        sj["seed"] = s.seed;
        sj["missing_rate"] = s.missing_rate;
        sj["drift"] = s.a;
        sj["kappa"] = s.kappa;
        sj["ou_mean"] = s.m;
        sj["ou_vol"] = s.sigma;
        sj["factor_vol"] = s.factor_vol;
        sj["loadings_fnv"] = [&s]() {  // full matrix would bloat the manifest
            uint64_t h = 1469598103934665603ULL;
            for (double v : s.B) {
                uint64_t bits;
                std::memcpy(&bits, &v, sizeof bits);
                for (int k = 0; k < 8; ++k) {
                    h ^= (bits >> (8 * k)) & 0xff;
                    h *= 1099511628211ULL;
                }
            }
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
            return std::string(buf);
        }();
        j["data"]["synthetic"] = sj;
    }
    j["signals"]["factors"] = cfg.signals.factors;
    j["signals"]["pca_window_days"] = cfg.signals.pca_window_days;
    j["signals"]["ou_window"] = cfg.signals.ou_window;
    j["signals"]["windows"] = cfg.signals.windows;

    json hs = json::array();
    for (Horizon h : cfg.horizons) hs.push_back(horizon_name(h));
    j["horizons"] = hs;
    j["models"] = cfg.models;

    for (const auto& [h, tc] : cfg.training) {
        json tj;
        tj["window_steps"] = tc.window_steps;
        tj["buffer_steps"] = tc.buffer_steps;
        tj["cv_window_days"] = tc.cv_window_days;
        tj["cv_split"] = tc.cv_split;
        j["training"][horizon_name(h)] = tj;
    }
    for (const auto& [h, rs] : cfg.reservoir) {
        json rj;
        rj["state_dim"] = rs.K;
        rj["leak_rate"] = rs.alpha;
        rj["spectral_radius"] = rs.rho;
        rj["input_scaling"] = rs.gamma;
        rj["bias_scaling"] = rs.zeta;
        rj["a_sparsity"] = rs.a_sparsity;
        rj["c_sparsity"] = rs.c_sparsity;
        rj["activation"] = rs.activation == Activation::Tanh ? "tanh" : "identity";
        rj["seed"] = rs.seed;
        j["reservoir"][horizon_name(h)] = rj;
    }

    j["evaluation"]["mcs_bootstrap"] = cfg.evaluation.mcs_bootstrap;
    j["evaluation"]["mcs_alpha"] = cfg.evaluation.mcs_alpha;
    j["evaluation"]["robustness_models"] = cfg.evaluation.robustness_models;
    json rh = json::array();
    for (Horizon h : cfg.evaluation.robustness_horizons) rh.push_back(horizon_name(h));
    j["evaluation"]["robustness_horizons"] = rh;

    j["tuning"]["budget"] = cfg.tuning.budget;
    j["tuning"]["presample_days"] = cfg.tuning.presample_days;
    j["tuning"]["state_dim"] = cfg.tuning.state_dim;
    json th = json::array();
    for (Horizon h : cfg.tuning.horizons) th.push_back(horizon_name(h));
    j["tuning"]["horizons"] = th;
    return j;
}

std::string config_hash(const RunConfig& cfg) {
    // The hash identifies the experiment; where results land and how many
    // worker threads ran are not part of it.
    json j = resolved_json(cfg);
    j.erase("out_dir");
    j.erase("jobs");
    const std::string dump = j.dump();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace esncast
