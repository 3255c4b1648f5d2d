#include "esncast/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "esncast/common.hpp"

namespace esncast {

const char* horizon_name(Horizon h) {
    switch (h) {
        case Horizon::Min10: return "10min";
        case Horizon::Min30: return "30min";
        case Horizon::Min60: return "60min";
        case Horizon::Hour2: return "2hr";
        case Horizon::Eod: return "eod";
    }
    return "?";
}

Horizon horizon_from_name(const std::string& s) {
    if (s == "10min") return Horizon::Min10;
    if (s == "30min") return Horizon::Min30;
    if (s == "60min" || s == "1hr") return Horizon::Min60;
    if (s == "2hr") return Horizon::Hour2;
    if (s == "eod" || s == "EOD") return Horizon::Eod;
    throw ConfigError("unknown horizon: '" + s + "'");
}

int horizon_steps(Horizon h, int slot_in_day) {
    switch (h) {
        case Horizon::Min10: return 1;
        case Horizon::Min30: return 3;
        case Horizon::Min60: return 6;
        case Horizon::Hour2: return 12;
        case Horizon::Eod: return Grid::kSlotsPerDay - slot_in_day;
    }
    return 0;
}

void ReturnPanel::resize_full_missing() {
    const size_t sz = static_cast<size_t>(T()) * tickers.size();
    ret.assign(sz, 0.0);
    ret_missing.assign(sz, 1);
    price_missing.assign(sz, 1);
}

ReturnPanel compute_returns(const BarSeries& bars, const ReturnOptions& opts) {
    std::set<Date> dates;
    std::set<std::string> names;
    for (const auto& b : bars.bars) {
        dates.insert(b.date);
        names.insert(b.ticker);
    }
    if (dates.empty()) throw DataError("no bars to compute returns from");

    ReturnPanel panel;
    panel.cal.days.assign(dates.begin(), dates.end());
    panel.tickers.assign(names.begin(), names.end());
    panel.resize_full_missing();

    const int n_days = panel.cal.n_days();
    const int N = panel.N();

    std::map<Date, int> day_of;
    for (int d = 0; d < n_days; ++d) day_of[panel.cal.days[static_cast<size_t>(d)]] = d;
    std::map<std::string, int> stock_of;
    for (int i = 0; i < N; ++i) stock_of[panel.tickers[static_cast<size_t>(i)]] = i;

    // Price marks per grid row. Row r < 39 takes the session bar starting at
    // that minute; the close mark prefers the 16:00 bar's auction print.
    const double kNoPrice = -1.0;
    std::vector<double> price(static_cast<size_t>(panel.T()) * N, kNoPrice);
    auto pidx = [N](int t, int i) { return static_cast<size_t>(t) * N + i; };

    for (const auto& b : bars.bars) {
        if (!Grid::is_grid_minute(b.bar_start)) continue;  // pre/extended hours are off-grid
        const int r = Grid::row_of_minute(b.bar_start);
        const int row = panel.cal.row_index(day_of[b.date], r);
        price[pidx(row, stock_of[b.ticker])] = b.last_trade_price;
    }
    // Without a 16:00 auction bar the close mark falls back to the 15:50
    // bar's last trade (a zero return into the close).
    for (int d = 0; d < n_days; ++d) {
        const int close_row = panel.cal.row_index(d, Grid::kRowsPerDay - 1);
        const int last_slot_row = panel.cal.row_index(d, Grid::kRowsPerDay - 2);
        for (int i = 0; i < N; ++i) {
            if (price[pidx(close_row, i)] == kNoPrice) {
                price[pidx(close_row, i)] = price[pidx(last_slot_row, i)];
            }
        }
    }

    for (int i = 0; i < N; ++i) {
        for (int d = 0; d < n_days; ++d) {
            for (int r = 0; r < Grid::kRowsPerDay; ++r) {
                const int row = panel.cal.row_index(d, r);
                const double p = price[pidx(row, i)];
                panel.price_missing[panel.idx(row, i)] = p == kNoPrice ? 1 : 0;
                if (r == 0) {
                    if (opts.overnight_returns && d > 0) {
                        const double prev =
                            price[pidx(panel.cal.row_index(d - 1, Grid::kRowsPerDay - 1), i)];
                        if (p != kNoPrice && prev != kNoPrice) {
                            panel.ret[panel.idx(row, i)] = p / prev - 1.0;
                            panel.ret_missing[panel.idx(row, i)] = 0;
                        }
                    }
                    continue;  // overnight off: the 09:30 row has no return
                }
                const double prev = price[pidx(panel.cal.row_index(d, r - 1), i)];
                if (p != kNoPrice && prev != kNoPrice) {
                    panel.ret[panel.idx(row, i)] = p / prev - 1.0;
                    panel.ret_missing[panel.idx(row, i)] = 0;
                }
            }
        }
    }
    return panel;
}

ReturnPanel forward_fill_returns(const ReturnPanel& panel) {
    ReturnPanel out = panel;
    const int T = panel.T();
    const int N = panel.N();
    for (int i = 0; i < N; ++i) {
        int t = 0;
        while (t < T && panel.missing(t, i)) ++t;  // before first observation
        for (; t < T; ++t) {
            if (out.ret_missing[out.idx(t, i)]) {
                out.ret[out.idx(t, i)] = 0.0;  // price held fixed => zero return
                out.ret_missing[out.idx(t, i)] = 0;
            }
        }
    }
    return out;
}

std::optional<double> realized_horizon_return(const ReturnPanel& panel, int slot, int stock,
                                              Horizon h) {
    const int day = TradingCalendar::day_of_slot(slot);
    const int j = TradingCalendar::slot_in_day(slot);
    const int steps = horizon_steps(h, j);
    if (j + steps > Grid::kSlotsPerDay) return std::nullopt;  // leaves the session
    double acc = 1.0;
    for (int u = j + 1; u <= j + steps; ++u) {
        const int row = panel.cal.row_index(day, u);
        if (panel.missing(row, stock)) return std::nullopt;
        acc *= 1.0 + panel.value(row, stock);
    }
    return acc - 1.0;
}

TargetProvider::TargetProvider(const ReturnPanel& panel)
    : n_days_(panel.cal.n_days()), n_(panel.N()) {
    cumprod_.assign(static_cast<size_t>(n_days_) * n_ * Grid::kRowsPerDay, 1.0);
    miss_pfx_.assign(cumprod_.size(), 0);
    for (int d = 0; d < n_days_; ++d) {
        for (int i = 0; i < n_; ++i) {
            double cp = 1.0;
            int32_t mc = 0;
            cumprod_[pidx(d, i, 0)] = 1.0;
            miss_pfx_[pidx(d, i, 0)] = 0;
            for (int j = 1; j < Grid::kRowsPerDay; ++j) {
                const int row = d * Grid::kRowsPerDay + j;
                if (panel.missing(row, i)) {
                    ++mc;
                } else {
                    cp *= 1.0 + panel.value(row, i);
                }
                cumprod_[pidx(d, i, j)] = cp;
                miss_pfx_[pidx(d, i, j)] = mc;
            }
        }
    }
}

std::optional<double> TargetProvider::target(int slot, int stock, Horizon h) const {
    const int day = TradingCalendar::day_of_slot(slot);
    const int j = TradingCalendar::slot_in_day(slot);
    const int steps = horizon_steps(h, j);
    if (j + steps > Grid::kSlotsPerDay) return std::nullopt;
    if (miss_pfx_[pidx(day, stock, j + steps)] != miss_pfx_[pidx(day, stock, j)]) {
        return std::nullopt;
    }
    return cumprod_[pidx(day, stock, j + steps)] / cumprod_[pidx(day, stock, j)] - 1.0;
}

int TargetProvider::realization_row(int slot, Horizon h) {
    const int day = TradingCalendar::day_of_slot(slot);
    const int j = TradingCalendar::slot_in_day(slot);
    return day * Grid::kRowsPerDay + j + horizon_steps(h, j);
}

// --- serialization -----------------------------------------------------

namespace {

constexpr char kPanelMagic[8] = {'E', 'S', 'N', 'P', 'A', 'N', '0', '1'};

void write_u32(std::ofstream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
uint32_t read_u32(std::ifstream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

int flag_of(const ReturnPanel& p, int t, int i) {
    if (p.no_price(t, i)) return 2;
    return p.missing(t, i) ? 1 : 0;
}

}  // namespace

void write_panel_csv(const ReturnPanel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "time,ticker,return,missing\n";
    char buf[64];
    for (int t = 0; t < panel.T(); ++t) {
        const std::string ts = format_timestamp(panel.cal.timestamp_of_row(t));
        for (int i = 0; i < panel.N(); ++i) {
            const int flag = flag_of(panel, t, i);
            if (flag == 0) {
                std::snprintf(buf, sizeof buf, "%.17g", panel.value(t, i));
            } else {
                buf[0] = '\0';
            }
            out << ts << ',' << panel.tickers[static_cast<size_t>(i)] << ',' << buf << ',' << flag
                << '\n';
        }
    }
    if (!out) throw DataError("short write to " + path);
}

ReturnPanel read_panel_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open panel file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "time,ticker,return,missing") {
        throw DataError("bad panel csv header in " + path);
    }

    struct Cell {
        Timestamp ts;
        std::string ticker;
        double v;
        int flag;
    };
    std::vector<Cell> cells;
    std::set<Date> dates;
    std::set<std::string> names;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        size_t c1 = line.find(',');
        size_t c2 = line.find(',', c1 + 1);
        size_t c3 = line.find(',', c2 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad panel row");
        }
        Cell cell;
        cell.ts = parse_timestamp(line.substr(0, c1));
        cell.ticker = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string vs = line.substr(c2 + 1, c3 - c2 - 1);
        cell.flag = std::stoi(line.substr(c3 + 1));
        cell.v = vs.empty() ? 0.0 : std::strtod(vs.c_str(), nullptr);
        dates.insert(cell.ts.date);
        names.insert(cell.ticker);
        cells.push_back(std::move(cell));
    }

    ReturnPanel panel;
    panel.cal.days.assign(dates.begin(), dates.end());
    panel.tickers.assign(names.begin(), names.end());
    panel.resize_full_missing();

    std::map<Date, int> day_of;
    for (int d = 0; d < panel.cal.n_days(); ++d) day_of[panel.cal.days[static_cast<size_t>(d)]] = d;
    std::map<std::string, int> stock_of;
    for (int i = 0; i < panel.N(); ++i) stock_of[panel.tickers[static_cast<size_t>(i)]] = i;

    for (const auto& c : cells) {
        if (!Grid::is_grid_minute(c.ts.minute)) {
            throw DataError(path + ": off-grid timestamp " + format_timestamp(c.ts));
        }
        const int row = panel.cal.row_index(day_of[c.ts.date], Grid::row_of_minute(c.ts.minute));
        const size_t k = panel.idx(row, stock_of[c.ticker]);
        panel.price_missing[k] = c.flag == 2 ? 1 : 0;
        panel.ret_missing[k] = c.flag != 0 ? 1 : 0;
        panel.ret[k] = c.flag == 0 ? c.v : 0.0;
    }
    return panel;
}

void write_panel_bin(const ReturnPanel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(kPanelMagic, sizeof kPanelMagic);
    write_u32(out, static_cast<uint32_t>(panel.cal.n_days()));
    write_u32(out, static_cast<uint32_t>(panel.N()));
    for (Date d : panel.cal.days) {
        write_u32(out, static_cast<uint32_t>(d));
    }
    for (const auto& t : panel.tickers) {
        write_u32(out, static_cast<uint32_t>(t.size()));
        out.write(t.data(), static_cast<std::streamsize>(t.size()));
    }
    const size_t sz = panel.ret.size();
    out.write(reinterpret_cast<const char*>(panel.ret.data()),
              static_cast<std::streamsize>(sz * sizeof(double)));
    out.write(reinterpret_cast<const char*>(panel.ret_missing.data()),
              static_cast<std::streamsize>(sz));
    out.write(reinterpret_cast<const char*>(panel.price_missing.data()),
              static_cast<std::streamsize>(sz));
    if (!out) throw DataError("short write to " + path);
}

ReturnPanel read_panel_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open panel file: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kPanelMagic, sizeof magic) != 0) {
        throw DataError("bad panel cache magic in " + path);
    }
    const uint32_t n_days = read_u32(in);
    const uint32_t n = read_u32(in);
    ReturnPanel panel;
    panel.cal.days.resize(n_days);
    for (uint32_t d = 0; d < n_days; ++d) {
        panel.cal.days[d] = static_cast<Date>(read_u32(in));
    }
    panel.tickers.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        const uint32_t len = read_u32(in);
        std::string s(len, '\0');
        in.read(s.data(), len);
        panel.tickers[i] = std::move(s);
    }
    const size_t sz = static_cast<size_t>(panel.T()) * n;
    panel.ret.resize(sz);
    panel.ret_missing.resize(sz);
    panel.price_missing.resize(sz);
    in.read(reinterpret_cast<char*>(panel.ret.data()),
            static_cast<std::streamsize>(sz * sizeof(double)));
    in.read(reinterpret_cast<char*>(panel.ret_missing.data()), static_cast<std::streamsize>(sz));
    in.read(reinterpret_cast<char*>(panel.price_missing.data()), static_cast<std::streamsize>(sz));
    if (!in) throw DataError("truncated panel cache: " + path);
    return panel;
}

}  // namespace esncast
