#pragma once

#include <string>
#include <vector>

#include "esncast/panel.hpp"

namespace esncast {

struct ForecastRecord {
    Horizon h = Horizon::Min10;
    int slot = 0;   // prediction slot on the calendar grid
    int stock = 0;
    double prediction = 0.0;
    double lambda = 0.0;  // penalty scale in force when the readout was fitted
};

/// Per-model prediction set, sorted by (horizon, slot, stock).
struct ForecastSet {
    std::string model;
    std::vector<ForecastRecord> recs;
};

/// Columnar text, header "time,horizon,ticker,prediction,model,lambda".
void write_forecasts_csv(const ForecastSet& fs, const TradingCalendar& cal,
                         const std::vector<std::string>& tickers, const std::string& path);

ForecastSet read_forecasts_csv(const std::string& path, const TradingCalendar& cal,
                               const std::vector<std::string>& tickers);

}  // namespace esncast
