#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tsad {

// Seconds since epoch, parsed from NAB's "YYYY-MM-DD HH:MM:SS" format.
// Timestamps are naive (no timezone); NAB files carry none.
using Instant = std::int64_t;

Instant parse_timestamp(const std::string& text);
std::string format_timestamp(Instant t);

struct TimeSeries {
    std::string name;
    std::vector<Instant> timestamps;          // strictly increasing
    std::vector<double> values;               // NaN marks a missing reading
    std::optional<std::vector<bool>> labels;  // per-point anomaly flags

    std::size_t size() const { return values.size(); }
};

struct AnomalyWindow {
    Instant start = 0;
    Instant end = 0;  // inclusive
};

struct AnomalyWindows {
    std::string dataset_name;
    std::vector<AnomalyWindow> windows;  // sorted by start
};

// Index boundaries of the temporal train/val/test partition.
struct SplitView {
    std::size_t train_end = 0;
    std::size_t val_end = 0;
    std::size_t total = 0;

    std::size_t train_size() const { return train_end; }
    std::size_t val_size() const { return val_end - train_end; }
    std::size_t test_size() const { return total - val_end; }
};

TimeSeries load_series(const std::string& path);
void write_series(const TimeSeries& series, const std::string& path);

AnomalyWindows load_windows(const std::string& path, const std::string& dataset_key);

std::vector<bool> expand_labels(const AnomalyWindows& windows, const TimeSeries& series);

SplitView split(const TimeSeries& series, double train_frac, double val_frac);
SplitView split(std::size_t n, double train_frac, double val_frac);

}  // namespace tsad
