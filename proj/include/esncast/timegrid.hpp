#pragma once

#include <cstdint>

#include "esncast/common.hpp"
#include <string>
#include <vector>

namespace esncast {

/// Calendar day as days since 1970-01-01.
using Date = int32_t;

Date make_date(int year, int month, int day);
void civil_from_date(Date d, int& year, int& month, int& day);
int weekday(Date d);  // 0 = Monday ... 6 = Sunday
std::string format_date(Date d);
Date parse_date_yyyymmdd(const std::string& s);  // "20130102"
Date parse_date_iso(const std::string& s);       // "2013-01-02"

/// Intraday timestamp: a trading date plus minute-of-day (EST).
struct Timestamp {
    Date date = 0;
    int minute = 0;

    bool operator==(const Timestamp&) const = default;
    auto operator<=>(const Timestamp&) const = default;
};

std::string format_timestamp(const Timestamp& ts);  // "2013-01-02 09:30"
Timestamp parse_timestamp(const std::string& s);

/// Fixed 10-minute session grid. Per trading day the panel carries 40 rows:
/// 09:30, 09:40, ..., 15:50 (the 39 rebalance slots) plus the 16:00 close
/// mark. Returns live on rows, predictions on slots.
struct Grid {
    static constexpr int kOpenMinute = 9 * 60 + 30;
    static constexpr int kCloseMinute = 16 * 60;
    static constexpr int kLastSlotMinute = 15 * 60 + 50;
    static constexpr int kStepMinutes = 10;
    static constexpr int kRowsPerDay = 40;
    static constexpr int kSlotsPerDay = 39;

    static int minute_of_row(int row_in_day) { return kOpenMinute + kStepMinutes * row_in_day; }
    static bool is_grid_minute(int minute) {
        return minute >= kOpenMinute && minute <= kCloseMinute &&
               (minute - kOpenMinute) % kStepMinutes == 0;
    }
    static int row_of_minute(int minute) { return (minute - kOpenMinute) / kStepMinutes; }
};

struct TradingCalendar {
    std::vector<Date> days;

    int n_days() const { return static_cast<int>(days.size()); }
    int rows() const { return n_days() * Grid::kRowsPerDay; }
    int slots() const { return n_days() * Grid::kSlotsPerDay; }

    int row_index(int day, int row_in_day) const { return day * Grid::kRowsPerDay + row_in_day; }
    int slot_index(int day, int slot_in_day) const {
        return day * Grid::kSlotsPerDay + slot_in_day;
    }
    static int day_of_row(int row) { return row / Grid::kRowsPerDay; }
    static int row_in_day(int row) { return row % Grid::kRowsPerDay; }
    static int day_of_slot(int slot) { return slot / Grid::kSlotsPerDay; }
    static int slot_in_day(int slot) { return slot % Grid::kSlotsPerDay; }

    /// Global row index of a prediction slot (slots map to rows 0..38 of a day).
    static int row_of_slot(int slot) {
        return day_of_slot(slot) * Grid::kRowsPerDay + slot_in_day(slot);
    }

    Timestamp timestamp_of_row(int row) const {
        return {days[static_cast<size_t>(day_of_row(row))], Grid::minute_of_row(row_in_day(row))};
    }
    Timestamp timestamp_of_slot(int slot) const { return timestamp_of_row(row_of_slot(slot)); }

    /// Maps a timestamp back onto the grid; returns -1 if not on it.
    int row_of_timestamp(const Timestamp& ts) const;

    bool operator==(const TradingCalendar&) const = default;
};

/// Consecutive weekdays starting at `start` (holidays are out of scope).
TradingCalendar make_weekday_calendar(Date start, int n_days);

}  // namespace esncast
