#pragma once

#include <iosfwd>
#include <string>

#include "esncast/config.hpp"

namespace esncast {

// Batch subcommands. Each writes its outputs plus a manifest
// (manifest_<cmd>.json: config hash, seed, resolved config, output list)
// into cfg.out_dir and throws ConfigError/DataError/InternalError on
// failure; the CLI maps those to exit codes 2/3/4.

void cmd_simulate(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);
void cmd_signals(const RunConfig& cfg);
void cmd_backtest(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_tune(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg, std::ostream& out);

// Canonical output locations under an output directory.
std::string panel_bin_path(const std::string& out_dir);
std::string panel_csv_path(const std::string& out_dir);
std::string signals_bin_path(const std::string& out_dir);
std::string forecasts_path(const std::string& out_dir, const std::string& model, Horizon h);
std::string report_json_path(const std::string& out_dir);

}  // namespace esncast
