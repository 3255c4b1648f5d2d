#include "esncast/forecast.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "esncast/common.hpp"

namespace esncast {

void write_forecasts_csv(const ForecastSet& fs, const TradingCalendar& cal,
                         const std::vector<std::string>& tickers, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "time,horizon,ticker,prediction,model,lambda\n";
    char pbuf[64], lbuf[64];
    for (const auto& r : fs.recs) {
        std::snprintf(pbuf, sizeof pbuf, "%.17g", r.prediction);
        std::snprintf(lbuf, sizeof lbuf, "%.17g", r.lambda);
        out << format_timestamp(cal.timestamp_of_slot(r.slot)) << ',' << horizon_name(r.h) << ','
            << tickers[static_cast<size_t>(r.stock)] << ',' << pbuf << ',' << fs.model << ','
            << lbuf << '\n';
    }
    if (!out) throw DataError("short write to " + path);
}

ForecastSet read_forecasts_csv(const std::string& path, const TradingCalendar& cal,
                               const std::vector<std::string>& tickers) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open forecast file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "time,horizon,ticker,prediction,model,lambda") {
        throw DataError("bad forecast csv header in " + path);
    }

    std::map<Date, int> day_of;
    for (int d = 0; d < cal.n_days(); ++d) day_of[cal.days[static_cast<size_t>(d)]] = d;
    std::map<std::string, int> stock_of;
    for (size_t i = 0; i < tickers.size(); ++i) stock_of[tickers[i]] = static_cast<int>(i);

    ForecastSet fs;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        size_t start = 0;
        for (;;) {
            const size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                f.push_back(line.substr(start));
                break;
            }
            f.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (f.size() != 6) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad forecast row");
        }
        const Timestamp ts = parse_timestamp(f[0]);
        const auto di = day_of.find(ts.date);
        if (di == day_of.end() || !Grid::is_grid_minute(ts.minute)) {
            throw DataError(path + ":" + std::to_string(line_no) + ": timestamp off the panel grid");
        }
        const int row_in_day = Grid::row_of_minute(ts.minute);
        if (row_in_day >= Grid::kSlotsPerDay) {
            throw DataError(path + ":" + std::to_string(line_no) + ": close mark is not a slot");
        }
        const auto si = stock_of.find(f[2]);
        if (si == stock_of.end()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": unknown ticker " + f[2]);
        }
        ForecastRecord rec;
        rec.h = horizon_from_name(f[1]);
        rec.slot = cal.slot_index(di->second, row_in_day);
        rec.stock = si->second;
        rec.prediction = std::strtod(f[3].c_str(), nullptr);
        rec.lambda = std::strtod(f[5].c_str(), nullptr);
        if (fs.model.empty()) {
            fs.model = f[4];
        } else if (fs.model != f[4]) {
            throw DataError(path + ": mixed model ids in one forecast file");
        }
        fs.recs.push_back(rec);
    }
    std::sort(fs.recs.begin(), fs.recs.end(), [](const ForecastRecord& a, const ForecastRecord& b) {
        if (a.h != b.h) return a.h < b.h;
        if (a.slot != b.slot) return a.slot < b.slot;
        return a.stock < b.stock;
    });
    return fs;
}

}  // namespace esncast
