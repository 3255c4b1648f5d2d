#include "esncast/timegrid.hpp"

#include <cstdio>

#include "esncast/common.hpp"

namespace esncast {

// Howard Hinnant's civil date algorithms.
Date make_date(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_date(Date z, int& year, int& month, int& day) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = y + (month <= 2);
}

int weekday(Date d) {
    // 1970-01-01 was a Thursday; map to 0 = Monday.
    return static_cast<int>(((d % 7) + 7 + 3) % 7);
}

std::string format_date(Date d) {
    int y, m, dy;
    civil_from_date(d, y, m, dy);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, dy);
    return buf;
}

Date parse_date_yyyymmdd(const std::string& s) {
    if (s.size() != 8) throw DataError("bad YYYYMMDD date: '" + s + "'");
    for (char c : s) {
        if (c < '0' || c > '9') throw DataError("bad YYYYMMDD date: '" + s + "'");
    }
    const int y = std::stoi(s.substr(0, 4));
    const int m = std::stoi(s.substr(4, 2));
    const int d = std::stoi(s.substr(6, 2));
    if (m < 1 || m > 12 || d < 1 || d > 31) throw DataError("bad YYYYMMDD date: '" + s + "'");
    return make_date(y, m, d);
}

Date parse_date_iso(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw DataError("bad ISO date: '" + s + "'");
    }
    return parse_date_yyyymmdd(s.substr(0, 4) + s.substr(5, 2) + s.substr(8, 2));
}

std::string format_timestamp(const Timestamp& ts) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%s %02d:%02d", format_date(ts.date).c_str(), ts.minute / 60,
                  ts.minute % 60);
    return buf;
}

Timestamp parse_timestamp(const std::string& s) {
    if (s.size() != 16 || s[10] != ' ' || s[13] != ':') {
        throw DataError("bad timestamp: '" + s + "'");
    }
    Timestamp ts;
    ts.date = parse_date_iso(s.substr(0, 10));
    ts.minute = std::stoi(s.substr(11, 2)) * 60 + std::stoi(s.substr(14, 2));
    return ts;
}

int TradingCalendar::row_of_timestamp(const Timestamp& ts) const {
    if (!Grid::is_grid_minute(ts.minute)) return -1;
    for (int d = 0; d < n_days(); ++d) {
        if (days[static_cast<size_t>(d)] == ts.date) {
            return row_index(d, Grid::row_of_minute(ts.minute));
        }
    }
    return -1;
}

TradingCalendar make_weekday_calendar(Date start, int n_days) {
    TradingCalendar cal;
    cal.days.reserve(static_cast<size_t>(n_days));
    Date d = start;
    while (static_cast<int>(cal.days.size()) < n_days) {
        if (weekday(d) < 5) cal.days.push_back(d);
        ++d;
    }
    return cal;
}

}  // namespace esncast
