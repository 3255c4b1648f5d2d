#include "esncast/bars.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "esncast/common.hpp"

namespace esncast {

namespace {

constexpr int kEarliestBarMinute = 4 * 60;
constexpr int kLatestBarMinute = 20 * 60;

const char* kHeaderFields[] = {"Date",           "Ticker",         "TimeBarStart",
                               "FirstTradePrice", "HighTradePrice", "LowTradePrice",
                               "LastTradePrice",  "VolumeWeightPrice", "Volume", "TotalTrades"};
constexpr int kNumFields = 10;

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        const size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

// HHMM, HHMMSS or HHMMSSMMM; sub-minute precision is floored to the minute.
int parse_bar_start(const std::string& s) {
    if (s.size() != 4 && s.size() != 6 && s.size() != 9) {
        throw DataError("bad TimeBarStart '" + s + "'");
    }
    for (char c : s) {
        if (c < '0' || c > '9') throw DataError("bad TimeBarStart '" + s + "'");
    }
    const int hh = std::stoi(s.substr(0, 2));
    const int mm = std::stoi(s.substr(2, 2));
    if (hh > 23 || mm > 59) throw DataError("bad TimeBarStart '" + s + "'");
    return hh * 60 + mm;
}

double parse_number(const std::string& s, const char* what) {
    if (s.empty()) throw DataError(std::string("empty ") + what);
    size_t used = 0;
    double v;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DataError(std::string("bad ") + what + " '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw DataError(std::string("bad ") + what + " '" + s + "'");
    }
    return v;
}

}  // namespace

bool OhlcBar::valid() const {
    if (!(first_trade_price > 0 && high_trade_price > 0 && low_trade_price > 0 &&
          last_trade_price > 0 && volume_weight_price > 0)) {
        return false;
    }
    if (low_trade_price > std::min(first_trade_price, last_trade_price)) return false;
    if (high_trade_price < std::max(first_trade_price, last_trade_price)) return false;
    if (volume < 0 || total_trades < 0) return false;
    if (bar_start < kEarliestBarMinute || bar_start >= kLatestBarMinute) return false;
    return true;
}

BarSeries ingest_bars_text(const std::string& text, const BarSchema& schema,
                           IngestReport* report) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("bar file is empty");

    const auto header = split(line, schema.delimiter);
    if (static_cast<int>(header.size()) != kNumFields) {
        throw DataError("bar header has " + std::to_string(header.size()) + " fields, expected " +
                        std::to_string(kNumFields));
    }
    for (int i = 0; i < kNumFields; ++i) {
        if (header[static_cast<size_t>(i)] != kHeaderFields[i]) {
            throw DataError("bar header field " + std::to_string(i + 1) + " is '" +
                            header[static_cast<size_t>(i)] + "', expected '" + kHeaderFields[i] +
                            "'");
        }
    }

    BarSeries series;
    IngestReport local;
    IngestReport& rep = report != nullptr ? *report : local;
    rep = IngestReport{};

    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++rep.rows_read;
        try {
            const auto f = split(line, schema.delimiter);
            if (static_cast<int>(f.size()) != kNumFields) {
                throw DataError("row has " + std::to_string(f.size()) + " fields");
            }
            OhlcBar bar;
            bar.date = parse_date_yyyymmdd(f[0]);
            bar.ticker = f[1];
            if (bar.ticker.empty()) throw DataError("empty ticker");
            bar.bar_start = parse_bar_start(f[2]);
            bar.first_trade_price = parse_number(f[3], "FirstTradePrice");
            bar.high_trade_price = parse_number(f[4], "HighTradePrice");
            bar.low_trade_price = parse_number(f[5], "LowTradePrice");
            bar.last_trade_price = parse_number(f[6], "LastTradePrice");
            bar.volume_weight_price = parse_number(f[7], "VolumeWeightPrice");
            bar.volume = parse_number(f[8], "Volume");
            bar.total_trades = parse_number(f[9], "TotalTrades");
            if (!bar.valid()) throw DataError("bar violates price/field invariants");
            series.bars.push_back(std::move(bar));
            ++rep.rows_accepted;
        } catch (const DataError& e) {
            rep.row_errors.push_back({line_no, e.what()});
            if (static_cast<int>(rep.row_errors.size()) > schema.max_row_errors) {
                throw DataError("too many bad rows (> " + std::to_string(schema.max_row_errors) +
                                "), last at line " + std::to_string(line_no) + ": " + e.what());
            }
        }
    }

    std::sort(series.bars.begin(), series.bars.end(), [](const OhlcBar& a, const OhlcBar& b) {
        if (a.ticker != b.ticker) return a.ticker < b.ticker;
        if (a.date != b.date) return a.date < b.date;
        return a.bar_start < b.bar_start;
    });
    return series;
}

BarSeries ingest_bars(const std::string& path, const BarSchema& schema, IngestReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open bar file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return ingest_bars_text(buf.str(), schema, report);
}

BarSeries resample_bars(const BarSeries& bars, int step_minutes) {
    if (step_minutes <= 0) throw ConfigError("resample step must be positive");
    BarSeries out;
    size_t i = 0;
    const auto& b = bars.bars;
    while (i < b.size()) {
        const int window = b[i].bar_start / step_minutes;
        size_t j = i;
        OhlcBar agg = b[i];
        agg.bar_start = window * step_minutes;
        double pv = b[i].volume_weight_price * b[i].volume;
        double vol = b[i].volume;
        double trades = b[i].total_trades;
        double vwap_plain = b[i].volume_weight_price;
        int count = 1;
        for (j = i + 1; j < b.size(); ++j) {
            const OhlcBar& cur = b[j];
            if (cur.ticker != agg.ticker || cur.date != agg.date ||
                cur.bar_start / step_minutes != window) {
                break;
            }
            agg.high_trade_price = std::max(agg.high_trade_price, cur.high_trade_price);
            agg.low_trade_price = std::min(agg.low_trade_price, cur.low_trade_price);
            agg.last_trade_price = cur.last_trade_price;
            pv += cur.volume_weight_price * cur.volume;
            vol += cur.volume;
            trades += cur.total_trades;
            vwap_plain += cur.volume_weight_price;
            ++count;
        }
        agg.volume = vol;
        agg.total_trades = trades;
        agg.volume_weight_price = vol > 0 ? pv / vol : vwap_plain / count;
        out.bars.push_back(std::move(agg));
        i = j;
    }
    return out;
}

}  // namespace esncast
