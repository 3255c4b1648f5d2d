// esncast — multi-horizon intraday return forecasting with echo state
// networks: synthetic or ingested 10-minute bar panels, eigenportfolio/OU
// signal construction, walk-forward ridge readouts, and a statistical
// evaluation harness.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esncast/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        const size_t pos = s.find(',', start);
        if (pos == std::string::npos) {
            if (start < s.size()) out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Environment overrides for top-level config keys; flags take precedence.
void apply_env(esncast::ConfigOverrides& ov) {
    if (const char* v = std::getenv("ESNCAST_SEED"); v && !ov.seed) {
        ov.seed = std::strtoull(v, nullptr, 10);
    }
    if (const char* v = std::getenv("ESNCAST_OUT"); v && !ov.out_dir) ov.out_dir = v;
    if (const char* v = std::getenv("ESNCAST_JOBS"); v && !ov.jobs) ov.jobs = std::atoi(v);
    if (const char* v = std::getenv("ESNCAST_HORIZONS"); v && !ov.horizons) {
        ov.horizons = split_list(v);
    }
    if (const char* v = std::getenv("ESNCAST_MODELS"); v && !ov.models) {
        ov.models = split_list(v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"esncast — intraday multi-horizon return forecasting engine"};
    app.require_subcommand(1);

    std::string config_path;
    esncast::ConfigOverrides ov;
    std::string horizons_csv, models_csv, out_dir;
    long long seed = -1;
    int jobs = 0;

    app.add_option("-c,--config", config_path, "run configuration file (JSON)")->required();
    app.add_option("--seed", seed, "override the global seed");
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--horizons", horizons_csv, "comma-separated horizon list");
    app.add_option("--models", models_csv, "comma-separated model list");
    app.add_option("--jobs", jobs, "worker threads for parallel sections");

    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic return panel");
    auto* c_ing = app.add_subcommand("ingest", "parse OHLC bars into a return panel");
    auto* c_sig = app.add_subcommand("signals", "build the signal panel from a return panel");
    auto* c_bt = app.add_subcommand("backtest", "run the configured models over the panel");
    auto* c_ev = app.add_subcommand("evaluate", "score forecasts and run DM/MCS tests");
    auto* c_tu = app.add_subcommand("tune", "random search over reservoir hyperparameters");
    auto* c_rep = app.add_subcommand("report", "print a text summary of the evaluation");

    CLI11_PARSE(app, argc, argv);

    if (seed >= 0) ov.seed = static_cast<uint64_t>(seed);
    if (!out_dir.empty()) ov.out_dir = out_dir;
    if (jobs > 0) ov.jobs = jobs;
    if (!horizons_csv.empty()) ov.horizons = split_list(horizons_csv);
    if (!models_csv.empty()) ov.models = split_list(models_csv);
    apply_env(ov);

    try {
        const esncast::RunConfig cfg = esncast::load_run_config(config_path, ov);
        if (c_sim->parsed()) esncast::cmd_simulate(cfg);
        if (c_ing->parsed()) esncast::cmd_ingest(cfg);
        if (c_sig->parsed()) esncast::cmd_signals(cfg);
        if (c_bt->parsed()) esncast::cmd_backtest(cfg);
        if (c_ev->parsed()) esncast::cmd_evaluate(cfg);
        if (c_tu->parsed()) esncast::cmd_tune(cfg);
        if (c_rep->parsed()) esncast::cmd_report(cfg, std::cout);
        return 0;
    } catch (const esncast::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const esncast::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}
