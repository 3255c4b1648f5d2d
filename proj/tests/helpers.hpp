#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "esncast/panel.hpp"
#include "esncast/rng.hpp"
#include "esncast/stats.hpp"
#include "esncast/timegrid.hpp"

namespace testutil {

/// Unique scratch directory under the system temp root, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = (std::filesystem::temp_directory_path() /
                 ("esncast_" + tag + "_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++)))
                    .string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline const char* kBarHeader =
    "Date,Ticker,TimeBarStart,FirstTradePrice,HighTradePrice,LowTradePrice,LastTradePrice,"
    "VolumeWeightPrice,Volume,TotalTrades";

/// One bar row with flat prices (first=high=low=last=vwp=price).
inline std::string bar_row(const std::string& date, const std::string& ticker, int minute,
                           double price, double volume = 100, double trades = 10) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%02d%02d,%.17g,%.17g,%.17g,%.17g,%.17g,%g,%g",
                  date.c_str(), ticker.c_str(), minute / 60, minute % 60, price, price, price,
                  price, price, volume, trades);
    return buf;
}

/// Minute-bar file for one ticker/day with last prices given per session
/// minute starting at 09:30.
inline std::string session_minute_bars(const std::string& date, const std::string& ticker,
                                       const std::vector<double>& last_prices,
                                       int start_minute = 9 * 60 + 30) {
    std::string out = kBarHeader;
    out += '\n';
    for (size_t k = 0; k < last_prices.size(); ++k) {
        out += bar_row(date, ticker, start_minute + static_cast<int>(k), last_prices[k]);
        out += '\n';
    }
    return out;
}

/// Hand-built return panel: values[t][i], all observed unless masked after.
inline esncast::ReturnPanel make_panel(const std::vector<std::vector<double>>& values,
                                       int rows_per_day_check = esncast::Grid::kRowsPerDay) {
    const int T = static_cast<int>(values.size());
    if (T % rows_per_day_check != 0) throw std::runtime_error("test panel: T not day-aligned");
    esncast::ReturnPanel p;
    p.cal = esncast::make_weekday_calendar(esncast::make_date(2013, 1, 2),
                                           T / esncast::Grid::kRowsPerDay);
    const int N = static_cast<int>(values[0].size());
    for (int i = 0; i < N; ++i) p.tickers.push_back("T" + std::to_string(i));
    p.resize_full_missing();
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < N; ++i) {
            p.ret[p.idx(t, i)] = values[static_cast<size_t>(t)][static_cast<size_t>(i)];
            p.ret_missing[p.idx(t, i)] = 0;
            p.price_missing[p.idx(t, i)] = 0;
        }
    }
    return p;
}

inline double spearman_rho(std::vector<double> a, std::vector<double> b) {
    const size_t n = a.size();
    auto ranks = [](std::vector<double>& v) {
        std::vector<size_t> order(v.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        for (size_t k = 0; k < order.size(); ++k) r[order[k]] = static_cast<double>(k + 1);
        v = r;
    };
    ranks(a);
    ranks(b);
    double ma = 0, mb = 0;
    for (size_t k = 0; k < n; ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= n;
    mb /= n;
    double num = 0, va = 0, vb = 0;
    for (size_t k = 0; k < n; ++k) {
        num += (a[k] - ma) * (b[k] - mb);
        va += (a[k] - ma) * (a[k] - ma);
        vb += (b[k] - mb) * (b[k] - mb);
    }
    return num / std::sqrt(va * vb);
}

/// Two-sided p-value for Spearman rho via the t approximation.
inline double spearman_p(double rho, size_t n) {
    const double t = rho * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - rho * rho));
    return esncast::stats::student_t_two_sided_p(t, static_cast<double>(n) - 2.0);
}

}  // namespace testutil
