#include "tsad/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tsad {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Instant parse_timestamp(const std::string& text) {
    int y, mo, d, h, mi, s;
    if (std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &s) != 6)
        throw std::invalid_argument("unparseable timestamp: '" + text + "'");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        s < 0 || s > 60)
        throw std::invalid_argument("timestamp field out of range: '" + text + "'");
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(Instant t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, mo, d,
                  static_cast<int>(sod / 3600), static_cast<int>((sod % 3600) / 60),
                  static_cast<int>(sod % 60));
    return buf;
}

TimeSeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty series file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::istringstream hdr(line);
        std::string c0, c1;
        std::getline(hdr, c0, ',');
        std::getline(hdr, c1);
        if (trim(c0) != "timestamp" || trim(c1) != "value")
            throw std::runtime_error("malformed header in " + path + ": '" + line + "'");
    }

    TimeSeries ts;
    ts.name = path;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("malformed row in " + path + ": '" + line + "'");
        ts.timestamps.push_back(parse_timestamp(trim(line.substr(0, comma))));
        std::string cell = trim(line.substr(comma + 1));
        double v = std::numeric_limits<double>::quiet_NaN();
        if (!cell.empty()) {
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
                if (used != cell.size()) v = std::numeric_limits<double>::quiet_NaN();
            } catch (const std::exception&) {
                v = std::numeric_limits<double>::quiet_NaN();  // repaired downstream
            }
        }
        ts.values.push_back(v);
    }
    if (ts.values.empty()) throw std::runtime_error("no data rows in " + path);
    for (std::size_t j = 1; j < ts.timestamps.size(); ++j)
        if (ts.timestamps[j] <= ts.timestamps[j - 1])
            throw std::runtime_error("non-monotonic timestamps in " + path + " at row " +
                                     std::to_string(j + 1));
    return ts;
}

void write_series(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write series file: " + path);
    out << "timestamp,value\n";
    char buf[40];
    for (std::size_t j = 0; j < series.size(); ++j) {
        if (std::isnan(series.values[j])) {
            out << format_timestamp(series.timestamps[j]) << ",\n";
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g", series.values[j]);
            out << format_timestamp(series.timestamps[j]) << ',' << buf << '\n';
        }
    }
}

AnomalyWindows load_windows(const std::string& path, const std::string& dataset_key) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed label JSON in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("label file is not a JSON object: " + path);
    auto it = doc.find(dataset_key);
    if (it == doc.end())
        throw std::runtime_error("dataset key '" + dataset_key + "' absent from " + path);

    AnomalyWindows result;
    result.dataset_name = dataset_key;
    for (const auto& pair : *it) {
        if (!pair.is_array() || pair.size() != 2)
            throw std::runtime_error("malformed window pair for key '" + dataset_key + "'");
        AnomalyWindow w;
        w.start = parse_timestamp(pair[0].get<std::string>());
        w.end = parse_timestamp(pair[1].get<std::string>());
        if (w.start > w.end)
            throw std::runtime_error("window start after end for key '" + dataset_key + "'");
        result.windows.push_back(w);
    }
    std::sort(result.windows.begin(), result.windows.end(),
              [](const AnomalyWindow& a, const AnomalyWindow& b) { return a.start < b.start; });
    return result;
}

std::vector<bool> expand_labels(const AnomalyWindows& windows, const TimeSeries& series) {
    std::vector<bool> labels(series.size(), false);
    for (const auto& w : windows.windows) {
        auto lo = std::lower_bound(series.timestamps.begin(), series.timestamps.end(), w.start);
        auto hi = std::upper_bound(series.timestamps.begin(), series.timestamps.end(), w.end);
        for (auto it = lo; it != hi; ++it)
            labels[static_cast<std::size_t>(it - series.timestamps.begin())] = true;
    }
    return labels;
}

SplitView split(std::size_t n, double train_frac, double val_frac) {
    if (train_frac <= 0.0 || val_frac < 0.0 || train_frac + val_frac >= 1.0)
        throw std::invalid_argument("invalid split fractions");
    if (n < 10) throw std::invalid_argument("series too short to split: n = " + std::to_string(n));
    SplitView sv;
    sv.total = n;
    // The nudge keeps products like 0.7 * 90 = 62.999... from flooring one
    // short of the exact value.
    sv.train_end =
        static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n) + 1e-9));
    sv.val_end = sv.train_end +
                 static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(n) + 1e-9));
    if (sv.train_end == 0 || sv.val_end >= n)
        throw std::invalid_argument("split yields an empty segment");
    return sv;
}

SplitView split(const TimeSeries& series, double train_frac, double val_frac) {
    return split(series.size(), train_frac, val_frac);
}

}  // namespace tsad
