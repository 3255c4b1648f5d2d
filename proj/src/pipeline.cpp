#include "esncast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "esncast/evaluation.hpp"
#include "esncast/kernels.hpp"
#include "esncast/rng.hpp"
#include "esncast/tuning.hpp"

namespace esncast {

namespace fs = std::filesystem;
using nlohmann::json;

std::string panel_bin_path(const std::string& out_dir) { return out_dir + "/panel.bin"; }
std::string panel_csv_path(const std::string& out_dir) { return out_dir + "/panel.csv"; }
std::string signals_bin_path(const std::string& out_dir) { return out_dir + "/signals.bin"; }
std::string forecasts_path(const std::string& out_dir, const std::string& model, Horizon h) {
    return out_dir + "/forecasts_" + model + "_" + horizon_name(h) + ".csv";
}
std::string report_json_path(const std::string& out_dir) { return out_dir + "/report.json"; }

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void ensure_out_dir(const RunConfig& cfg) { fs::create_directories(cfg.out_dir); }

void write_manifest(const RunConfig& cfg, const std::string& subcommand,
                    const std::vector<std::string>& outputs, json extra = json::object()) {
    json m;
    m["subcommand"] = subcommand;
    m["version"] = kVersion;
    m["seed"] = cfg.seed;
    m["config_hash"] = config_hash(cfg);
    m["kernels"] = kernels::name(kernels::active());
    m["resolved_config"] = resolved_json(cfg);
    // Output names relative to the manifest's own directory.
    json outs = json::array();
    for (const auto& path : outputs) outs.push_back(fs::path(path).filename().string());
    m["outputs"] = outs;
    if (!extra.empty()) m["details"] = extra;
    std::ofstream out(cfg.out_dir + "/manifest_" + subcommand + ".json", std::ios::binary);
    if (!out) throw DataError("cannot write manifest in " + cfg.out_dir);
    out << m.dump(2) << '\n';
}

ReturnPanel load_panel_or_die(const RunConfig& cfg) {
    const std::string bin = panel_bin_path(cfg.out_dir);
    const std::string csv = panel_csv_path(cfg.out_dir);
    if (fs::exists(bin)) return read_panel_bin(bin);
    if (fs::exists(csv)) return read_panel_csv(csv);
    throw DataError("no panel found; expected " + bin + " or " + csv +
                    " (run `simulate` or `ingest` first)");
}

SignalPanel load_or_build_signals(const RunConfig& cfg, const ReturnPanel& panel,
                                  bool persist) {
    const std::string bin = signals_bin_path(cfg.out_dir);
    if (fs::exists(bin)) {
        SignalPanel sp = read_signals_bin(bin);
        if (sp.cal == panel.cal && sp.tickers == panel.tickers) return sp;
        // Stale cache from another panel: rebuild.
    }
    SignalDiagnostics diag;
    SignalPanel sp = build_signal_panel(panel, cfg.signals, &diag, cfg.jobs);
    if (persist) write_signals_bin(sp, bin);
    return sp;
}

ReturnPanel slice_days(const ReturnPanel& panel, int n_days) {
    if (n_days >= panel.cal.n_days()) return panel;
    ReturnPanel out;
    out.cal.days.assign(panel.cal.days.begin(), panel.cal.days.begin() + n_days);
    out.tickers = panel.tickers;
    const size_t rows = static_cast<size_t>(out.cal.rows()) * out.tickers.size();
    out.ret.assign(panel.ret.begin(), panel.ret.begin() + rows);
    out.ret_missing.assign(panel.ret_missing.begin(), panel.ret_missing.begin() + rows);
    out.price_missing.assign(panel.price_missing.begin(), panel.price_missing.begin() + rows);
    return out;
}

int dm_overlap_steps(Horizon h) {
    return h == Horizon::Eod ? Grid::kSlotsPerDay : horizon_steps(h, 0);
}

}  // namespace

void cmd_simulate(const RunConfig& cfg) {
    if (cfg.data.source != "synthetic") {
        throw ConfigError("simulate requires data.source = \"synthetic\"");
    }
    ensure_out_dir(cfg);
    const ReturnPanel panel = simulate_panel(cfg.data.synthetic, cfg.data.synthetic_start);
    write_panel_bin(panel, panel_bin_path(cfg.out_dir));
    write_panel_csv(panel, panel_csv_path(cfg.out_dir));
    json extra;
    extra["days"] = panel.cal.n_days();
    extra["stocks"] = panel.N();
    write_manifest(cfg, "simulate", {panel_bin_path(cfg.out_dir), panel_csv_path(cfg.out_dir)},
                   extra);
}

void cmd_ingest(const RunConfig& cfg) {
    if (cfg.data.source != "csv") throw ConfigError("ingest requires data.source = \"csv\"");
    if (cfg.data.path.empty()) throw ConfigError("ingest requires data.path");
    ensure_out_dir(cfg);

    std::vector<std::string> files;
    if (fs::is_directory(cfg.data.path)) {
        for (const auto& e : fs::directory_iterator(cfg.data.path)) {
            if (e.path().extension() == ".csv") files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw DataError("no .csv files under " + cfg.data.path);
    } else {
        files.push_back(cfg.data.path);
    }

    BarSchema schema;
    schema.max_row_errors = cfg.data.max_row_errors;
    BarSeries all;
    long rows_read = 0, rows_accepted = 0, rows_rejected = 0;
    for (const auto& f : files) {
        IngestReport rep;
        BarSeries part = ingest_bars(f, schema, &rep);
        rows_read += rep.rows_read;
        rows_accepted += rep.rows_accepted;
        rows_rejected += static_cast<long>(rep.row_errors.size());
        all.bars.insert(all.bars.end(), part.bars.begin(), part.bars.end());
    }
    std::sort(all.bars.begin(), all.bars.end(), [](const OhlcBar& a, const OhlcBar& b) {
        if (a.ticker != b.ticker) return a.ticker < b.ticker;
        if (a.date != b.date) return a.date < b.date;
        return a.bar_start < b.bar_start;
    });

    const BarSeries resampled = resample_bars(all, Grid::kStepMinutes);
    ReturnOptions opts;
    opts.overnight_returns = cfg.data.overnight_returns;
    const ReturnPanel panel = compute_returns(resampled, opts);
    write_panel_bin(panel, panel_bin_path(cfg.out_dir));
    write_panel_csv(panel, panel_csv_path(cfg.out_dir));

    json extra;
    extra["files"] = files;
    extra["rows_read"] = rows_read;
    extra["rows_accepted"] = rows_accepted;
    extra["rows_rejected"] = rows_rejected;
    extra["days"] = panel.cal.n_days();
    extra["stocks"] = panel.N();
    write_manifest(cfg, "ingest", {panel_bin_path(cfg.out_dir), panel_csv_path(cfg.out_dir)},
                   extra);
}

void cmd_signals(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const ReturnPanel panel = load_panel_or_die(cfg);
    SignalDiagnostics diag;
    const SignalPanel sp = build_signal_panel(panel, cfg.signals, &diag, cfg.jobs);
    write_signals_bin(sp, signals_bin_path(cfg.out_dir));
    write_signals_csv(sp, cfg.out_dir + "/signals.csv");

    json extra;
    extra["emitted"] = diag.emitted;
    extra["missing_price"] = diag.missing_price;
    extra["missing_history"] = diag.missing_history;
    extra["invalid_ou"] = diag.invalid_ou;
    write_manifest(cfg, "signals",
                   {signals_bin_path(cfg.out_dir), cfg.out_dir + "/signals.csv"}, extra);
}

void cmd_backtest(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const ReturnPanel panel = load_panel_or_die(cfg);
    const SignalPanel sp = load_or_build_signals(cfg, panel, /*persist=*/true);
    const TargetProvider targets(panel);

    std::vector<std::string> outputs;
    json skip_summary;
    for (Horizon h : cfg.horizons) {
        const HorizonConfig& hcfg = cfg.training.at(h);
        for (const std::string& model : cfg.models) {
            RunDiagnostics diag;
            ForecastSet fc;
            if (model == "baseline") {
                fc = run_baseline(sp, targets, panel.cal, hcfg, &diag);
            } else if (model == "benchmark") {
                fc = run_benchmark(sp, targets, panel.cal, hcfg, &diag);
            } else {
                fc = run_esn(sp, targets, panel.cal, hcfg, cfg.reservoir.at(h), nullptr, &diag,
                             cfg.jobs);
            }
            const std::string path = forecasts_path(cfg.out_dir, model, h);
            write_forecasts_csv(fc, panel.cal, panel.tickers, path);
            outputs.push_back(path);
            skip_summary[std::string(horizon_name(h)) + "/" + model] = {
                {"forecasts", fc.recs.size()},
                {"fits", diag.fits},
                {"skips", diag.skips.size()},
                {"penalty_reuses", diag.penalty_reuses}};
        }
    }
    write_manifest(cfg, "backtest", outputs, skip_summary);
}

namespace {

// One model's predictions at a horizon, keyed for joining.
struct PredMap {
    std::unordered_map<int64_t, double> by_key;  // slot * N + stock
    std::set<int> slots;
};

PredMap index_forecasts(const ForecastSet& fc, Horizon h, int n_stocks) {
    PredMap pm;
    for (const auto& r : fc.recs) {
        if (r.h != h) continue;
        pm.by_key.emplace(static_cast<int64_t>(r.slot) * n_stocks + r.stock, r.prediction);
        pm.slots.insert(r.slot);
    }
    return pm;
}

// Per-event cross-sectional MSE losses on the slots/stocks every listed
// model shares (with realized targets present).
std::vector<std::vector<double>> aligned_losses(const std::vector<const PredMap*>& models,
                                                Horizon h, const TargetProvider& targets,
                                                int n_stocks, std::vector<int>* slots_out) {
    std::set<int> slots = models[0]->slots;
    for (size_t k = 1; k < models.size(); ++k) {
        std::set<int> merged;
        std::set_intersection(slots.begin(), slots.end(), models[k]->slots.begin(),
                              models[k]->slots.end(), std::inserter(merged, merged.begin()));
        slots.swap(merged);
    }
    std::vector<std::vector<double>> losses(models.size());
    if (slots_out != nullptr) slots_out->clear();
    for (int slot : slots) {
        std::vector<double> se(models.size(), 0.0);
        int n = 0;
        for (int i = 0; i < n_stocks; ++i) {
            const int64_t key = static_cast<int64_t>(slot) * n_stocks + i;
            bool everywhere = true;
            for (const PredMap* pm : models) {
                if (!pm->by_key.count(key)) {
                    everywhere = false;
                    break;
                }
            }
            if (!everywhere) continue;
            const auto real = targets.target(slot, i, h);
            if (!real) continue;
            for (size_t k = 0; k < models.size(); ++k) {
                const double d = *real - models[k]->by_key.at(key);
                se[k] += d * d;
            }
            ++n;
        }
        if (n == 0) continue;
        for (size_t k = 0; k < models.size(); ++k) {
            losses[k].push_back(se[k] / n);
        }
        if (slots_out != nullptr) slots_out->push_back(slot);
    }
    return losses;
}

}  // namespace

void cmd_evaluate(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const ReturnPanel panel = load_panel_or_die(cfg);
    const TargetProvider targets(panel);

    // Load every configured forecast file; a missing one is a config/data
    // mismatch and is reported by name.
    std::map<std::string, ForecastSet> sets;
    for (const std::string& model : cfg.models) {
        ForecastSet merged;
        merged.model = model;
        for (Horizon h : cfg.horizons) {
            const std::string path = forecasts_path(cfg.out_dir, model, h);
            if (!fs::exists(path)) {
                throw DataError("missing forecast file " + path +
                                " — model/horizon list does not match the backtest");
            }
            ForecastSet part = read_forecasts_csv(path, panel.cal, panel.tickers);
            merged.recs.insert(merged.recs.end(), part.recs.begin(), part.recs.end());
        }
        std::sort(merged.recs.begin(), merged.recs.end(),
                  [](const ForecastRecord& a, const ForecastRecord& b) {
                      if (a.h != b.h) return a.h < b.h;
                      if (a.slot != b.slot) return a.slot < b.slot;
                      return a.stock < b.stock;
                  });
        sets.emplace(model, std::move(merged));
    }

    const bool have_baseline =
        std::find(cfg.models.begin(), cfg.models.end(), "baseline") != cfg.models.end();
    const std::string reference = have_baseline ? "baseline" : cfg.models.front();

    json report;
    report["version"] = kVersion;
    report["config_hash"] = config_hash(cfg);
    report["models"] = cfg.models;
    json hs = json::array();
    for (Horizon h : cfg.horizons) hs.push_back(horizon_name(h));
    report["horizons"] = hs;

    std::vector<std::string> outputs;
    std::ofstream msfe_csv(cfg.out_dir + "/msfe.csv", std::ios::binary);
    msfe_csv << "horizon,model,msfe,reduction_vs_" << reference << "_pct\n";
    std::ofstream r2_csv(cfg.out_dir + "/r2.csv", std::ios::binary);
    r2_csv << "horizon,model,r2_zero_benchmark,r2_mean_benchmark\n";
    std::ofstream dm_csv(cfg.out_dir + "/dm.csv", std::ios::binary);
    dm_csv << "horizon,model_a,model_b,statistic,p_value,note\n";
    std::ofstream mcs_csv(cfg.out_dir + "/mcs.csv", std::ios::binary);
    mcs_csv << "horizon,model,included,p_value\n";

    for (Horizon h : cfg.horizons) {
        const char* hname = horizon_name(h);
        std::map<std::string, MsfeResult> msfe;
        std::map<std::string, PredMap> preds;
        for (const auto& [model, fc] : sets) {
            msfe.emplace(model, msfe_series(fc, h, targets));
            preds.emplace(model, index_forecasts(fc, h, panel.N()));
        }
        const double ref_total = msfe.at(reference).total;

        for (const std::string& model : cfg.models) {
            const double total = msfe.at(model).total;
            const double red = ref_total > 0 ? (total / ref_total - 1.0) * 100.0 : 0.0;
            json entry;
            entry["msfe"] = total;
            entry["reduction_vs_reference_pct"] = red;
            entry["reduction_formatted"] = "[" + fmt(red, "%.4f") + "%]";
            entry["events"] = msfe.at(model).slots.size();
            const auto r2z = pooled_r2(sets.at(model), h, targets, true);
            const auto r2m = pooled_r2(sets.at(model), h, targets, false);
            entry["r2_zero_benchmark"] = r2z ? json(*r2z) : json();
            entry["r2_mean_benchmark"] = r2m ? json(*r2m) : json();
            report["results"][hname][model] = entry;
            msfe_csv << hname << ',' << model << ',' << fmt(total) << ',' << fmt(red, "%.4f")
                     << '\n';
            r2_csv << hname << ',' << model << ',' << (r2z ? fmt(*r2z) : "") << ','
                   << (r2m ? fmt(*r2m) : "") << '\n';
        }

        // Pairwise DM tests (omitted entirely with a single model).
        if (cfg.models.size() >= 2) {
            json dm_section = json::array();
            for (size_t a = 0; a < cfg.models.size(); ++a) {
                for (size_t b = a + 1; b < cfg.models.size(); ++b) {
                    const std::string& ma = cfg.models[a];
                    const std::string& mb = cfg.models[b];
                    std::vector<const PredMap*> pair = {&preds.at(ma), &preds.at(mb)};
                    const auto losses = aligned_losses(pair, h, targets, panel.N(), nullptr);
                    if (losses[0].empty()) continue;
                    const DmResult dm =
                        diebold_mariano(losses[0], losses[1], dm_overlap_steps(h));
                    json e;
                    e["model_a"] = ma;
                    e["model_b"] = mb;
                    e["events"] = losses[0].size();
                    const char* note =
                        dm.note == DmResult::Note::EqualByConstruction ? "equal_by_construction"
                        : dm.note == DmResult::Note::SignOnlyDominance ? "sign_only_dominance"
                                                                       : "ok";
                    e["note"] = note;
                    e["statistic"] = std::isfinite(dm.statistic) ? json(dm.statistic) : json();
                    e["p_value"] = std::isfinite(dm.p_value) ? json(dm.p_value) : json();
                    dm_section.push_back(e);
                    dm_csv << hname << ',' << ma << ',' << mb << ','
                           << (std::isfinite(dm.statistic) ? fmt(dm.statistic, "%.4f") : "")
                           << ',' << (std::isfinite(dm.p_value) ? fmt(dm.p_value, "%.4f") : "")
                           << ',' << note << '\n';
                }
            }
            report["dm"][hname] = dm_section;
        }

        // Model confidence set over all models on the common event grid.
        if (cfg.models.size() >= 2) {
            std::vector<const PredMap*> all;
            for (const std::string& model : cfg.models) all.push_back(&preds.at(model));
            const auto losses = aligned_losses(all, h, targets, panel.N(), nullptr);
            if (!losses[0].empty()) {
                const McsResult mcs =
                    model_confidence_set(losses, cfg.evaluation.mcs_alpha,
                                         cfg.evaluation.mcs_bootstrap,
                                         mix_seed(cfg.seed, 0x3c5u), cfg.jobs);
                json section;
                section["alpha"] = mcs.alpha;
                section["bootstrap"] = mcs.bootstrap;
                section["block_length"] = mcs.block_length;
                for (size_t k = 0; k < cfg.models.size(); ++k) {
                    json e;
                    e["included"] = mcs.included[k] != 0;
                    e["p_value"] = mcs.p_values[k];
                    section["models"][cfg.models[k]] = e;
                    mcs_csv << hname << ',' << cfg.models[k] << ',' << int(mcs.included[k]) << ','
                            << fmt(mcs.p_values[k], "%.4f") << '\n';
                }
                report["mcs"][hname] = section;
            }
        }

        // Plot data: relative cuMSFE against the reference, common grid.
        {
            std::vector<const PredMap*> all;
            for (const std::string& model : cfg.models) all.push_back(&preds.at(model));
            std::vector<int> slots;
            const auto losses = aligned_losses(all, h, targets, panel.N(), &slots);
            const std::string plot_path =
                cfg.out_dir + "/plot_" + hname + ".csv";
            std::ofstream plot(plot_path, std::ios::binary);
            plot << "time";
            for (const std::string& model : cfg.models) plot << ",relcumsfe_" << model;
            plot << '\n';
            const size_t ref_idx = static_cast<size_t>(
                std::find(cfg.models.begin(), cfg.models.end(), reference) - cfg.models.begin());
            std::vector<double> running(cfg.models.size(), 0.0);
            for (size_t e = 0; e < slots.size(); ++e) {
                for (size_t k = 0; k < cfg.models.size(); ++k) running[k] += losses[k][e];
                plot << format_timestamp(panel.cal.timestamp_of_slot(slots[e]));
                for (size_t k = 0; k < cfg.models.size(); ++k) {
                    plot << ',' << fmt(running[ref_idx] > 0 ? running[k] / running[ref_idx] : 1.0);
                }
                plot << '\n';
            }
            outputs.push_back(plot_path);
        }
    }

    // Optional sampling-robustness study (ESN redraws with fixed hyperparameters).
    if (cfg.evaluation.robustness_models > 0) {
        const SignalPanel sp = load_or_build_signals(cfg, panel, /*persist=*/true);
        for (Horizon h : cfg.evaluation.robustness_horizons) {
            const MsfeResult& ref = msfe_series(sets.at(reference), h, targets);
            const RobustnessBands bands = robustness_study(
                cfg.reservoir.at(h), cfg.evaluation.robustness_models, sp, targets, panel.cal,
                cfg.training.at(h), ref, cfg.jobs);
            const std::string path =
                cfg.out_dir + "/robustness_" + horizon_name(h) + ".csv";
            std::ofstream out(path, std::ios::binary);
            out << "time,p5,p25,median,p75,p95\n";
            for (size_t e = 0; e < bands.slots.size(); ++e) {
                out << format_timestamp(panel.cal.timestamp_of_slot(bands.slots[e])) << ','
                    << fmt(bands.p5[e]) << ',' << fmt(bands.p25[e]) << ',' << fmt(bands.median[e])
                    << ',' << fmt(bands.p75[e]) << ',' << fmt(bands.p95[e]) << '\n';
            }
            outputs.push_back(path);
            json rb;
            rb["models"] = cfg.evaluation.robustness_models;
            rb["events"] = bands.slots.size();
            report["robustness"][horizon_name(h)] = rb;
        }
    }

    std::ofstream rj(report_json_path(cfg.out_dir), std::ios::binary);
    rj << report.dump(2) << '\n';
    outputs.insert(outputs.begin(),
                   {report_json_path(cfg.out_dir), cfg.out_dir + "/msfe.csv",
                    cfg.out_dir + "/r2.csv", cfg.out_dir + "/dm.csv", cfg.out_dir + "/mcs.csv"});
    write_manifest(cfg, "evaluate", outputs);
}

void cmd_tune(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const ReturnPanel full = load_panel_or_die(cfg);
    const int presample_days =
        cfg.tuning.presample_days > 0 ? cfg.tuning.presample_days : full.cal.n_days() / 2;
    if (presample_days < cfg.signals.pca_window_days + 2) {
        throw ConfigError("tuning: presample too short for signal construction");
    }
    const ReturnPanel pre = slice_days(full, presample_days);
    SignalDiagnostics sdiag;
    const SignalPanel sp = build_signal_panel(pre, cfg.signals, &sdiag, cfg.jobs);
    const TargetProvider targets(pre);

    SearchSpace space = SearchSpace::defaults();
    space.budget = cfg.tuning.budget;
    space.state_dim = cfg.tuning.state_dim;
    space.seed = mix_seed(cfg.seed, 0x7e5u);

    std::vector<std::string> outputs;
    json extra;
    for (Horizon h : cfg.tuning.horizons) {
        const TuneResult res =
            tune(space, sp, targets, pre.cal, cfg.training.at(h), cfg.seed, cfg.jobs);

        const std::string trials_path =
            cfg.out_dir + "/trials_" + horizon_name(h) + ".csv";
        std::ofstream tout(trials_path, std::ios::binary);
        tout << "trial,leak_rate,spectral_radius,input_scaling,a_sparsity,c_sparsity,cumsfe,"
                "seconds,failed\n";
        for (const Trial& t : res.trials) {
            tout << t.index << ',' << fmt(t.spec.alpha) << ',' << fmt(t.spec.rho) << ','
                 << fmt(t.spec.gamma) << ',' << fmt(t.spec.a_sparsity) << ','
                 << fmt(t.spec.c_sparsity) << ',' << (t.failed ? "" : fmt(t.objective)) << ','
                 << fmt(t.seconds, "%.3f") << ',' << (t.failed ? 1 : 0) << '\n';
        }
        outputs.push_back(trials_path);

        // Winning spec as a config fragment that merges into a RunConfig.
        json frag;
        json rj;
        rj["state_dim"] = res.best.K;
        rj["leak_rate"] = res.best.alpha;
        rj["spectral_radius"] = res.best.rho;
        rj["input_scaling"] = res.best.gamma;
        rj["a_sparsity"] = res.best.a_sparsity;
        rj["c_sparsity"] = res.best.c_sparsity;
        rj["seed"] = res.best.seed;
        frag["reservoir"][horizon_name(h)] = rj;
        frag["tuning_metadata"] = {
            {"objective_cumsfe", res.best_objective},
            {"trial", res.best_trial},
            {"presample_begin", format_timestamp(res.data_begin)},
            {"presample_end", format_timestamp(res.data_end)},
        };
        const std::string spec_path =
            cfg.out_dir + "/best_spec_" + horizon_name(h) + ".json";
        std::ofstream sout(spec_path, std::ios::binary);
        sout << frag.dump(2) << '\n';
        outputs.push_back(spec_path);
        extra[horizon_name(h)] = {{"best_trial", res.best_trial},
                                  {"best_cumsfe", res.best_objective}};
    }
    extra["presample_days"] = presample_days;
    write_manifest(cfg, "tune", outputs, extra);
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    const std::string path = report_json_path(cfg.out_dir);
    std::ifstream in(path);
    if (!in) throw DataError("no evaluation report at " + path + " (run `evaluate` first)");
    json report;
    in >> report;

    out << "esncast evaluation report (config " << report.value("config_hash", std::string("?"))
        << ")\n";
    const auto models = report.at("models").get<std::vector<std::string>>();
    const auto horizons = report.at("horizons").get<std::vector<std::string>>();

    out << "\nTotal cumulated MSFE (percentage change vs reference in brackets)\n";
    for (const auto& h : horizons) {
        out << "  " << h << ":\n";
        for (const auto& m : models) {
            const json& e = report.at("results").at(h).at(m);
            out << "    " << m << ": " << fmt(e.at("msfe").get<double>(), "%.6g") << "  "
                << e.at("reduction_formatted").get<std::string>() << '\n';
        }
    }
    out << "\nPooled forecast R^2 (zero benchmark / mean benchmark)\n";
    for (const auto& h : horizons) {
        out << "  " << h << ":";
        for (const auto& m : models) {
            const json& e = report.at("results").at(h).at(m);
            out << "  " << m << "=";
            if (e.at("r2_zero_benchmark").is_null()) {
                out << "n/a";
            } else {
                out << fmt(e.at("r2_zero_benchmark").get<double>(), "%.4f");
            }
            if (!e.at("r2_mean_benchmark").is_null()) {
                out << "/" << fmt(e.at("r2_mean_benchmark").get<double>(), "%.4f");
            }
        }
        out << '\n';
    }
    if (report.contains("dm")) {
        out << "\nDiebold-Mariano tests (statistic [p])\n";
        for (const auto& h : horizons) {
            if (!report.at("dm").contains(h)) continue;
            out << "  " << h << ":\n";
            for (const json& e : report.at("dm").at(h)) {
                out << "    " << e.at("model_a").get<std::string>() << " vs "
                    << e.at("model_b").get<std::string>() << ": ";
                if (e.at("statistic").is_null()) {
                    out << e.at("note").get<std::string>() << '\n';
                } else {
                    out << fmt(e.at("statistic").get<double>(), "%.4f") << " ["
                        << fmt(e.at("p_value").get<double>(), "%.4f") << "]\n";
                }
            }
        }
    }
    if (report.contains("mcs")) {
        out << "\nModel confidence set (included / cumulative p)\n";
        for (const auto& h : horizons) {
            if (!report.at("mcs").contains(h)) continue;
            out << "  " << h << ":";
            for (const auto& m : models) {
                const json& e = report.at("mcs").at(h).at("models").at(m);
                out << "  " << m << (e.at("included").get<bool>() ? "=in(" : "=out(")
                    << fmt(e.at("p_value").get<double>(), "%.4f") << ")";
            }
            out << '\n';
        }
    }
    out.flush();
}

}  // namespace esncast
