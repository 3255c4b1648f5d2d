#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esncast/bars.hpp"
#include "esncast/timegrid.hpp"

namespace esncast {

enum class Horizon { Min10, Min30, Min60, Hour2, Eod };

const char* horizon_name(Horizon h);
Horizon horizon_from_name(const std::string& s);

/// Grid steps covered by an intraday horizon; EOD depends on the slot.
int horizon_steps(Horizon h, int slot_in_day);

/// Time x stock panel of simple returns on the session grid (40 rows/day,
/// see Grid). `ret_missing` marks rows whose return is undefined; with the
/// overnight flag off that includes every 09:30 row. `price_missing` marks
/// rows with no price bar at all — the raw-data gaps that make a stock
/// untradeable at that time.
struct ReturnPanel {
    TradingCalendar cal;
    std::vector<std::string> tickers;
    std::vector<double> ret;             // T x N row-major, 0 where missing
    std::vector<uint8_t> ret_missing;    // T x N
    std::vector<uint8_t> price_missing;  // T x N

    int T() const { return cal.rows(); }
    int N() const { return static_cast<int>(tickers.size()); }
    size_t idx(int t, int i) const { return static_cast<size_t>(t) * tickers.size() + i; }

    double value(int t, int i) const { return ret[idx(t, i)]; }
    bool missing(int t, int i) const { return ret_missing[idx(t, i)] != 0; }
    bool no_price(int t, int i) const { return price_missing[idx(t, i)] != 0; }

    void resize_full_missing();
};

struct ReturnOptions {
    // Off: each day's first grid return is 09:30 bar -> 09:40 bar and the
    // 09:30 row carries no return. On: the 09:30 row holds the overnight
    // return against the prior close.
    bool overnight_returns = false;
};

/// Builds the return panel from 10-minute bars. The price at row r is the
/// LastTradePrice of the session bar starting at that row's minute; the 16:00
/// close mark takes the 16:00 bar (closing auction print) when present, else
/// the last price of the 15:50 bar.
ReturnPanel compute_returns(const BarSeries& bars, const ReturnOptions& opts = {});

/// Missing returns become 0 (price held at its last observation) and their
/// mask is cleared, within each ticker's listed lifetime: entries before the
/// first observed return stay missing. Idempotent. `price_missing` is kept
/// as-is — it records raw gaps, not imputation.
ReturnPanel forward_fill_returns(const ReturnPanel& panel);

/// Compounded simple return over (slot, slot + h]; EOD runs to the close
/// mark. Empty when the horizon leaves the session or a constituent return
/// is missing (raw mask, pre-fill).
std::optional<double> realized_horizon_return(const ReturnPanel& panel, int slot, int stock,
                                              Horizon h);

/// O(1) horizon-return lookups over a panel (per-day prefix products).
class TargetProvider {
public:
    explicit TargetProvider(const ReturnPanel& panel);

    std::optional<double> target(int slot, int stock, Horizon h) const;

    /// Row of the last return the target consumes (its realization time).
    static int realization_row(int slot, Horizon h);

    int n_slots() const { return n_days_ * Grid::kSlotsPerDay; }
    int n_stocks() const { return n_; }

private:
    int n_days_;
    int n_;
    std::vector<double> cumprod_;     // (day, stock, 0..39): prefix product of 1+r
    std::vector<int32_t> miss_pfx_;   // prefix count of missing returns, rows 1..39
    size_t pidx(int day, int stock, int j) const {
        return (static_cast<size_t>(day) * n_ + stock) * (Grid::kRowsPerDay) + j;
    }
};

// --- serialization -----------------------------------------------------

/// Columnar text: header "time,ticker,return,missing" where missing is
/// 0 = observed, 1 = return missing, 2 = no price bar.
void write_panel_csv(const ReturnPanel& panel, const std::string& path);
ReturnPanel read_panel_csv(const std::string& path);

/// Versioned little-endian binary cache, bit-exact round trip.
void write_panel_bin(const ReturnPanel& panel, const std::string& path);
ReturnPanel read_panel_bin(const std::string& path);

}  // namespace esncast
