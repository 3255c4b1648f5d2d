#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esncast/common.hpp"
#include "esncast/timegrid.hpp"

namespace esncast {

/// One OHLC trade bar. `bar_start` is minutes since midnight EST; minute bars
/// cover [bar_start, bar_start + 1).
struct OhlcBar {
    Date date = 0;
    std::string ticker;
    int bar_start = 0;
    double first_trade_price = 0;
    double high_trade_price = 0;
    double low_trade_price = 0;
    double last_trade_price = 0;
    double volume_weight_price = 0;
    double volume = 0;
    double total_trades = 0;

    bool valid() const;
};

struct BarSeries {
    std::vector<OhlcBar> bars;  // sorted by (ticker, date, bar_start)
};

struct BarSchema {
    char delimiter = ',';
    // Row-level failures are collected; past this many the file is rejected.
    int max_row_errors = 100;
};

struct RowError {
    long line = 0;
    std::string reason;
};

struct IngestReport {
    long rows_read = 0;
    long rows_accepted = 0;
    std::vector<RowError> row_errors;
};

/// Parses a delimited bar file with the exact header
/// Date,Ticker,TimeBarStart,FirstTradePrice,HighTradePrice,LowTradePrice,
/// LastTradePrice,VolumeWeightPrice,Volume,TotalTrades.
/// Malformed header throws DataError; bad rows are collected (fatal above
/// schema.max_row_errors). Output is sorted by (ticker, date, bar_start).
BarSeries ingest_bars(const std::string& path, const BarSchema& schema, IngestReport* report);

/// Same parser over an in-memory table (used by ingest_bars and tests).
BarSeries ingest_bars_text(const std::string& text, const BarSchema& schema, IngestReport* report);

/// Aggregates bars into `step_minutes` windows aligned to midnight:
/// first = first FirstTradePrice, last = last LastTradePrice, high/low =
/// extremes, volume/trades summed, VWAP volume-weighted (plain mean when the
/// window traded zero volume). Empty windows emit nothing.
BarSeries resample_bars(const BarSeries& bars, int step_minutes);

}  // namespace esncast
