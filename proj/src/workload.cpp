#include "carbonsched/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace carbonsched {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    return cells;
}

double parse_intensity(const std::string& cell, std::size_t row) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value))
        throw std::runtime_error("non-numeric carbon intensity '" + cell + "' at data row " +
                                 std::to_string(row));
    if (value < 0.0)
        throw std::runtime_error("negative carbon intensity '" + cell + "' at data row " +
                                 std::to_string(row));
    return value;
}

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

} // namespace

std::int64_t counter_uniform(std::uint64_t seed, std::uint64_t domain, std::int64_t t,
                             std::uint64_t index, std::int64_t bound) {
    if (bound <= 0) return 0;
    const std::uint64_t h =
        mix64(mix64(mix64(seed ^ 0x5bf03635d5f8a225ULL) ^ domain) ^
              (static_cast<std::uint64_t>(t) * 0x2545f4914f6cdd1dULL) ^ index);
    return static_cast<std::int64_t>(h % static_cast<std::uint64_t>(bound + 1));
}

Arrivals generate_arrivals(const ArrivalModel& model, std::size_t task_types, std::int64_t t) {
    Arrivals arrivals;
    arrivals.count.assign(task_types, 0);
    switch (model.kind) {
        case ArrivalKind::constant:
            std::fill(arrivals.count.begin(), arrivals.count.end(), model.max_arrivals);
            break;
        case ArrivalKind::uniform_iid:
            for (std::size_t m = 0; m < task_types; ++m)
                arrivals.count[m] = counter_uniform(model.seed, 1, t, m, model.max_arrivals);
            break;
        case ArrivalKind::file_trace: {
            if (!model.trace || model.trace->slots.empty())
                throw std::runtime_error("arrival trace selected but no trace loaded");
            const auto& row = model.trace->slots[static_cast<std::size_t>(
                t % static_cast<std::int64_t>(model.trace->slots.size()))];
            if (row.size() != task_types)
                throw std::runtime_error("arrival trace column count does not match task types");
            arrivals.count = row;
            break;
        }
    }
    return arrivals;
}

CarbonSnapshot generate_carbon(const CarbonModel& model, std::size_t clouds, std::int64_t t) {
    CarbonSnapshot snap;
    snap.cloud_intensity.assign(clouds, 0.0);
    switch (model.kind) {
        case CarbonKind::constant:
            snap.edge_intensity = model.max_intensity;
            std::fill(snap.cloud_intensity.begin(), snap.cloud_intensity.end(),
                      model.max_intensity);
            break;
        case CarbonKind::uniform_iid: {
            // Integer grid {0,...,max}, stored as reals.
            const std::int64_t bound = std::llround(model.max_intensity);
            snap.edge_intensity =
                static_cast<double>(counter_uniform(model.seed, 2, t, 0, bound));
            for (std::size_t n = 0; n < clouds; ++n)
                snap.cloud_intensity[n] =
                    static_cast<double>(counter_uniform(model.seed, 2, t, n + 1, bound));
            break;
        }
        case CarbonKind::csv_trace: {
            if (!model.trace || model.trace->slots.empty())
                throw std::runtime_error("carbon csv_trace selected but no trace loaded");
            const auto& src = model.trace->slots[static_cast<std::size_t>(
                t % static_cast<std::int64_t>(model.trace->slots.size()))];
            if (src.cloud_intensity.size() != clouds)
                throw std::runtime_error("carbon trace region count does not match cloud count");
            snap = src;
            break;
        }
    }
    return snap;
}

std::int64_t arrival_upper_bound(const ArrivalModel& model) {
    switch (model.kind) {
        case ArrivalKind::constant:
        case ArrivalKind::uniform_iid:
            return model.max_arrivals;
        case ArrivalKind::file_trace: {
            std::int64_t bound = 0;
            if (model.trace)
                for (const auto& row : model.trace->slots)
                    for (std::int64_t a : row) bound = std::max(bound, a);
            return bound;
        }
    }
    return 0;
}

CarbonTrace load_carbon_csv(const std::string& path, const std::string& edge_region,
                            const std::vector<std::string>& cloud_regions) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open carbon trace file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("carbon trace file is empty: " + path);
    const std::vector<std::string> header = split_row(line);
    if (header.empty() || header[0] != "timestamp")
        throw std::runtime_error("carbon trace header must start with 'timestamp'");

    std::vector<std::string> wanted;
    wanted.push_back(edge_region);
    wanted.insert(wanted.end(), cloud_regions.begin(), cloud_regions.end());
    std::vector<std::size_t> columns;
    for (const std::string& name : wanted) {
        const auto it = std::find(header.begin() + 1, header.end(), name);
        if (it == header.end())
            throw std::runtime_error("carbon trace is missing region column '" + name + "'");
        columns.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    CarbonTrace trace;
    trace.region_names = wanted;
    std::string prev_timestamp;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const std::vector<std::string> cells = split_row(line);
        if (cells.size() != header.size())
            throw std::runtime_error("carbon trace row " + std::to_string(row) +
                                     " has wrong column count");
        // ISO-8601 timestamps order lexicographically.
        if (!prev_timestamp.empty() && cells[0] < prev_timestamp)
            throw std::runtime_error("carbon trace timestamps out of order at data row " +
                                     std::to_string(row));
        prev_timestamp = cells[0];

        CarbonSnapshot snap;
        snap.edge_intensity = parse_intensity(cells[columns[0]], row);
        for (std::size_t n = 0; n < cloud_regions.size(); ++n)
            snap.cloud_intensity.push_back(parse_intensity(cells[columns[n + 1]], row));
        trace.slots.push_back(std::move(snap));
    }
    if (trace.slots.empty())
        throw std::runtime_error("carbon trace has no data rows: " + path);
    return trace;
}

void write_carbon_csv(const std::string& path, const CarbonTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write carbon trace file: " + path);
    out << "timestamp";
    for (const std::string& name : trace.region_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < trace.slots.size(); ++i) {
        const std::int64_t minutes = static_cast<std::int64_t>(i) * trace.slot_duration_minutes;
        char ts[40];
        std::snprintf(ts, sizeof(ts), "2024-01-%02lldT%02lld:%02lld:00",
                      static_cast<long long>(minutes / 1440 + 1),
                      static_cast<long long>((minutes / 60) % 24),
                      static_cast<long long>(minutes % 60));
        out << ts << ',' << format_double(trace.slots[i].edge_intensity);
        for (double v : trace.slots[i].cloud_intensity) out << ',' << format_double(v);
        out << '\n';
    }
}

ArrivalsTrace load_arrivals_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open arrivals trace file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("arrivals trace file is empty: " + path);
    const std::vector<std::string> header = split_row(line);
    if (header.size() < 2 || header[0] != "timestamp")
        throw std::runtime_error("arrivals trace header must be 'timestamp' plus type columns");

    ArrivalsTrace trace;
    std::string prev_timestamp;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const std::vector<std::string> cells = split_row(line);
        if (cells.size() != header.size())
            throw std::runtime_error("arrivals trace row " + std::to_string(row) +
                                     " has wrong column count");
        if (!prev_timestamp.empty() && cells[0] < prev_timestamp)
            throw std::runtime_error("arrivals trace timestamps out of order at data row " +
                                     std::to_string(row));
        prev_timestamp = cells[0];

        std::vector<std::int64_t> counts;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            std::int64_t value = 0;
            const auto [ptr, ec] =
                std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), value);
            if (ec != std::errc{} || ptr != cells[i].data() + cells[i].size() || value < 0)
                throw std::runtime_error("invalid arrival count '" + cells[i] +
                                         "' at data row " + std::to_string(row));
            counts.push_back(value);
        }
        trace.slots.push_back(std::move(counts));
    }
    if (trace.slots.empty())
        throw std::runtime_error("arrivals trace has no data rows: " + path);
    return trace;
}

} // namespace carbonsched
