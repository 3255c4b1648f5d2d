#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "esncast/pipeline.hpp"
#include "helpers.hpp"

using namespace esncast;
using namespace testutil;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config(const std::string& out_dir) {
    json j;
    j["seed"] = 11;
    j["out_dir"] = out_dir;
    j["jobs"] = 2;
    j["data"]["source"] = "synthetic";
    j["data"]["synthetic"] = {{"stocks", 8},    {"days", 16},      {"factors", 2},
                              {"kappa", 0.6},   {"ou_vol", 0.01},  {"factor_vol", 0.002},
                              {"loading_scale", 1.0}};
    j["signals"] = {{"factors", 2}, {"pca_window_days", 5}, {"ou_window", 50}};
    j["horizons"] = {"10min", "eod"};
    j["models"] = {"baseline", "benchmark", "esn"};
    j["reservoir"]["10min"] = {{"state_dim", 16}};
    j["reservoir"]["eod"] = {{"state_dim", 16}};
    j["evaluation"] = {{"mcs_bootstrap", 300}};
    return j;
}

}  // namespace

TEST_CASE("simulate writes panel files plus a manifest recording the seed") {
    TempDir tmp("sim");
    const std::string out = tmp.path() + "/fresh/sub";  // created on demand
    RunConfig cfg = run_config_from_json(small_config(out));
    cmd_simulate(cfg);
    CHECK(fs::exists(panel_bin_path(out)));
    CHECK(fs::exists(panel_csv_path(out)));

    json manifest;
    std::istringstream in(read_file(out + "/manifest_simulate.json"));
    in >> manifest;
    CHECK(manifest.at("seed").get<uint64_t>() == 11);
    CHECK(manifest.at("subcommand") == "simulate");
    CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
    CHECK(manifest.at("outputs").size() == 2);

    // Rerunning the same config reproduces the files byte for byte.
    const std::string before_bin = read_file(panel_bin_path(out));
    const std::string before_csv = read_file(panel_csv_path(out));
    cmd_simulate(cfg);
    CHECK(read_file(panel_bin_path(out)) == before_bin);
    CHECK(read_file(panel_csv_path(out)) == before_csv);
}

TEST_CASE("manifests embed resolved defaults for unset reservoir keys") {
    TempDir tmp("defaults");
    json j = small_config(tmp.path() + "/out");
    j.erase("reservoir");  // fall back to the per-horizon defaults
    RunConfig cfg = run_config_from_json(j);
    cmd_simulate(cfg);
    json manifest;
    std::istringstream in(read_file(tmp.path() + "/out/manifest_simulate.json"));
    in >> manifest;
    const json& r10 = manifest.at("resolved_config").at("reservoir").at("10min");
    CHECK(r10.at("state_dim") == 100);
    CHECK(r10.at("leak_rate") == 0.9);
    CHECK(r10.at("a_sparsity") == 0.15);
    CHECK(r10.at("spectral_radius") == 0.4);
    CHECK(r10.at("c_sparsity") == 0.95);
    CHECK(r10.at("input_scaling") == 0.005);
    const json& reod = manifest.at("resolved_config").at("reservoir").at("eod");
    CHECK(reod.at("leak_rate") == 0.0);
    CHECK(reod.at("spectral_radius") == 0.0);
    CHECK(reod.at("input_scaling") == 0.015);
    CHECK(reod.at("a_sparsity") == 0.35);
    CHECK(reod.at("c_sparsity") == 0.25);
}

TEST_CASE("backtest emits one forecast file per model and horizon") {
    TempDir tmp("bt");
    const std::string out = tmp.path() + "/out";
    RunConfig cfg = run_config_from_json(small_config(out));
    cmd_simulate(cfg);
    cmd_backtest(cfg);
    for (const std::string& model : {"baseline", "benchmark", "esn"}) {
        CHECK(fs::exists(forecasts_path(out, model, Horizon::Min10)));
        CHECK(fs::exists(forecasts_path(out, model, Horizon::Eod)));
    }
    CHECK(fs::exists(signals_bin_path(out)));

    // Restricting the model list produces exactly one set per horizon.
    TempDir tmp2("bt2");
    json j2 = small_config(tmp2.path() + "/out");
    j2["models"] = {"baseline"};
    RunConfig cfg2 = run_config_from_json(j2);
    cmd_simulate(cfg2);
    cmd_backtest(cfg2);
    CHECK(fs::exists(forecasts_path(tmp2.path() + "/out", "baseline", Horizon::Min10)));
    CHECK_FALSE(fs::exists(forecasts_path(tmp2.path() + "/out", "benchmark", Horizon::Min10)));
}

TEST_CASE("backtest without panels names the expected files") {
    TempDir tmp("nopanel");
    RunConfig cfg = run_config_from_json(small_config(tmp.path() + "/out"));
    try {
        cmd_backtest(cfg);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("panel.bin") != std::string::npos);
        CHECK(msg.find("panel.csv") != std::string::npos);
    }
}

TEST_CASE("evaluate writes the report with formatted reductions and DM/MCS sections") {
    TempDir tmp("eval");
    const std::string out = tmp.path() + "/out";
    RunConfig cfg = run_config_from_json(small_config(out));
    cmd_simulate(cfg);
    cmd_backtest(cfg);
    cmd_evaluate(cfg);

    json report;
    std::istringstream in(read_file(report_json_path(out)));
    in >> report;

    // Baseline relative reduction against itself is exactly zero.
    const json& base10 = report.at("results").at("10min").at("baseline");
    CHECK(base10.at("reduction_vs_reference_pct").get<double>() == 0.0);
    const std::string formatted = base10.at("reduction_formatted").get<std::string>();
    CHECK(formatted.front() == '[');
    CHECK(formatted.find("%]") != std::string::npos);
    CHECK(formatted == "[0.0000%]");

    CHECK(report.contains("dm"));
    CHECK(report.at("dm").at("10min").size() == 3);  // three model pairs
    CHECK(report.contains("mcs"));
    CHECK(report.at("mcs").at("10min").at("models").size() == 3);
    CHECK(fs::exists(out + "/msfe.csv"));
    CHECK(fs::exists(out + "/r2.csv"));
    CHECK(fs::exists(out + "/dm.csv"));
    CHECK(fs::exists(out + "/mcs.csv"));
    CHECK(fs::exists(out + "/plot_10min.csv"));

    // report prints a text summary.
    std::ostringstream text;
    cmd_report(cfg, text);
    CHECK(text.str().find("Total cumulated MSFE") != std::string::npos);
    CHECK(text.str().find("baseline") != std::string::npos);
}

TEST_CASE("the DM section is omitted when only one model ran") {
    TempDir tmp("single");
    json j = small_config(tmp.path() + "/out");
    j["models"] = {"esn"};
    j["horizons"] = {"10min"};
    RunConfig cfg = run_config_from_json(j);
    cmd_simulate(cfg);
    cmd_backtest(cfg);
    cmd_evaluate(cfg);
    json report;
    std::istringstream in(read_file(report_json_path(tmp.path() + "/out")));
    in >> report;
    CHECK_FALSE(report.contains("dm"));
    CHECK_FALSE(report.contains("mcs"));
}

TEST_CASE("evaluate with a mismatched model list names the missing file") {
    TempDir tmp("mismatch");
    const std::string out = tmp.path() + "/out";
    json j = small_config(out);
    j["models"] = {"baseline"};
    RunConfig cfg1 = run_config_from_json(j);
    cmd_simulate(cfg1);
    cmd_backtest(cfg1);
    j["models"] = {"baseline", "esn"};
    RunConfig cfg2 = run_config_from_json(j);
    try {
        cmd_evaluate(cfg2);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("forecasts_esn_10min.csv") != std::string::npos);
    }
}

TEST_CASE("simulate -> backtest -> evaluate reruns are byte-identical") {
    TempDir tmp("repro");
    auto run_all = [&](const std::string& out) {
        json j = small_config(out);
        j["data"]["synthetic"]["days"] = 14;
        j["horizons"] = {"10min"};
        RunConfig cfg = run_config_from_json(j);
        cmd_simulate(cfg);
        cmd_backtest(cfg);
        cmd_evaluate(cfg);
    };
    const std::string out1 = tmp.path() + "/a";
    const std::string out2 = tmp.path() + "/b";
    run_all(out1);
    run_all(out2);
    for (const std::string name :
         {"panel.bin", "panel.csv", "signals.bin", "forecasts_baseline_10min.csv",
          "forecasts_benchmark_10min.csv", "forecasts_esn_10min.csv", "report.json", "msfe.csv",
          "dm.csv", "mcs.csv", "plot_10min.csv"}) {
        INFO("file = ", name);
        const std::string a = read_file(out1 + "/" + name);
        CHECK(a.size() > 0);
        CHECK(a == read_file(out2 + "/" + name));
    }
    // Manifests differ only through out_dir inside the resolved config; strip it.
    json m1, m2;
    std::istringstream s1(read_file(out1 + "/manifest_backtest.json"));
    std::istringstream s2(read_file(out2 + "/manifest_backtest.json"));
    s1 >> m1;
    s2 >> m2;
    m1["resolved_config"].erase("out_dir");
    m2["resolved_config"].erase("out_dir");
    m1.erase("config_hash");
    m2.erase("config_hash");
    CHECK(m1 == m2);
}

TEST_CASE("forecast files round-trip through the loader") {
    TempDir tmp("fio");
    const std::string out = tmp.path() + "/out";
    json j = small_config(out);
    j["horizons"] = {"10min"};
    j["models"] = {"baseline"};
    RunConfig cfg = run_config_from_json(j);
    cmd_simulate(cfg);
    cmd_backtest(cfg);

    const ReturnPanel panel = read_panel_bin(panel_bin_path(out));
    const ForecastSet fs =
        read_forecasts_csv(forecasts_path(out, "baseline", Horizon::Min10), panel.cal,
                           panel.tickers);
    CHECK(fs.model == "baseline");
    CHECK(!fs.recs.empty());
    for (const auto& rec : fs.recs) {
        CHECK(rec.h == Horizon::Min10);
        CHECK(rec.slot >= 0);
        CHECK(rec.slot < panel.cal.slots());
    }
}

TEST_CASE("tune emits trial logs and a mergeable winning spec") {
    TempDir tmp("tune");
    const std::string out = tmp.path() + "/out";
    json j = small_config(out);
    j["data"]["synthetic"]["days"] = 20;
    j["horizons"] = {"10min"};
    j["tuning"] = {{"budget", 3}, {"state_dim", 12}, {"presample_days", 16},
                   {"horizons", {"10min"}}};
    RunConfig cfg = run_config_from_json(j);
    cmd_simulate(cfg);
    cmd_tune(cfg);

    CHECK(fs::exists(out + "/trials_10min.csv"));
    const std::string trials = read_file(out + "/trials_10min.csv");
    CHECK(std::count(trials.begin(), trials.end(), '\n') == 4);  // header + 3 trials

    json frag;
    std::istringstream in(read_file(out + "/best_spec_10min.json"));
    in >> frag;
    CHECK(frag.contains("reservoir"));
    CHECK(frag.at("reservoir").contains("10min"));
    CHECK(frag.at("reservoir").at("10min").at("state_dim") == 12);
    // The fragment merges straight back into a run configuration.
    json merged = small_config(out);
    merged["reservoir"]["10min"] = frag.at("reservoir").at("10min");
    RunConfig cfg2 = run_config_from_json(merged);
    CHECK(cfg2.reservoir.at(Horizon::Min10).K == 12);

    // The recorded pre-sample strictly precedes the rest of the panel.
    const ReturnPanel panel = read_panel_bin(panel_bin_path(out));
    CHECK(frag.at("tuning_metadata").at("presample_end").get<std::string>() <
          format_timestamp(panel.cal.timestamp_of_row(panel.cal.rows() - 1)));
}

TEST_CASE("config errors carry their own exception type") {
    json j = small_config("x");
    j["models"] = {"nonsense"};
    CHECK_THROWS_AS(run_config_from_json(j), ConfigError);
    json j2 = small_config("x");
    j2["signals"]["factors"] = 0;
    CHECK_THROWS_AS(run_config_from_json(j2), ConfigError);
    json j3 = small_config("x");
    j3["data"]["source"] = "carrier-pigeon";
    CHECK_THROWS_AS(run_config_from_json(j3), ConfigError);
}

// Exit-code contract of the installed binary (0 ok, 2 config, 3 data).
// Runs only when CMake passes the binary location through the environment.
TEST_CASE("the esncast binary maps errors to exit codes") {
    const char* bin = std::getenv("ESNCAST_BIN");
    if (bin == nullptr) return;
    TempDir tmp("cli");
    const std::string out = tmp.path() + "/out";
    const std::string cfg_path = tmp.path() + "/cfg.json";
    json j = small_config(out);
    j["horizons"] = {"10min"};
    j["models"] = {"baseline"};
    write_file(cfg_path, j.dump());

    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("-c " + cfg_path + " simulate") == 0);
    CHECK(run("-c " + cfg_path + " backtest") == 0);
    CHECK(run("-c " + cfg_path + " evaluate") == 0);
    CHECK(run("-c " + tmp.path() + "/absent.json simulate") == 2);  // config error
    // Data error: evaluating in an empty directory.
    CHECK(run("-c " + cfg_path + " --out " + tmp.path() + "/empty evaluate") == 3);
    // Environment override steers the output directory.
    const std::string env_out = tmp.path() + "/enved";
    const std::string cmd = "ESNCAST_OUT=" + env_out + " " + std::string(bin) + " -c " +
                            cfg_path + " simulate >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(env_out + "/panel.bin"));
}

TEST_CASE("ingest builds a panel from bar files end to end") {
    TempDir tmp("ingest");
    const std::string data_dir = tmp.path() + "/bars";
    fs::create_directories(data_dir);
    // Two days, two tickers, full sessions of flat-ish minute bars.
    for (const std::string date : {"20130102", "20130103"}) {
        std::string text = kBarHeader;
        text += '\n';
        Rng rng(date == "20130102" ? 1u : 2u);
        for (const std::string ticker : {"AAA", "BBB"}) {
            double price = ticker == "AAA" ? 100.0 : 50.0;
            for (int k = 0; k < 390; ++k) {
                price *= 1.0 + 0.0004 * rng.normal();
                text += bar_row(date, ticker, 9 * 60 + 30 + k, price) + "\n";
            }
        }
        write_file(data_dir + "/" + date + ".csv", text);
    }

    json j = small_config(tmp.path() + "/out");
    j["data"] = {{"source", "csv"}, {"path", data_dir}};
    RunConfig cfg = run_config_from_json(j);
    cmd_ingest(cfg);
    const ReturnPanel panel = read_panel_bin(panel_bin_path(tmp.path() + "/out"));
    CHECK(panel.N() == 2);
    CHECK(panel.cal.n_days() == 2);
    CHECK(panel.T() == 2 * Grid::kRowsPerDay);
    // 09:30 rows carry no return (overnight disabled); later rows do.
    CHECK(panel.missing(0, 0));
    CHECK_FALSE(panel.missing(1, 0));
}
