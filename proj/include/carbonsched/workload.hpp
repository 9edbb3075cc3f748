#ifndef CARBONSCHED_WORKLOAD_HPP
#define CARBONSCHED_WORKLOAD_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "carbonsched/model.hpp"

namespace carbonsched {

// Counter-based uniform draw on {0,...,bound}: a pure function of
// (seed, domain, slot, index), independent of evaluation order.
std::int64_t counter_uniform(std::uint64_t seed, std::uint64_t domain, std::int64_t t,
                             std::uint64_t index, std::int64_t bound);

/// Ordered per-slot carbon intensities for the edge region and each cloud
/// region, e.g. loaded from a half-hourly regional grid export.
struct CarbonTrace {
    std::vector<CarbonSnapshot> slots;
    std::vector<std::string> region_names; // edge first, then clouds
    int slot_duration_minutes = 30;
};

/// Per-slot task arrival counts, one column per task type.
struct ArrivalsTrace {
    std::vector<std::vector<std::int64_t>> slots; // [slot][type]
};

enum class ArrivalKind { uniform_iid, constant, file_trace };

struct ArrivalModel {
    ArrivalKind kind = ArrivalKind::constant;
    std::int64_t max_arrivals = 0; // uniform upper bound (inclusive) / constant value
    std::uint64_t seed = 0;
    std::shared_ptr<const ArrivalsTrace> trace;
};

enum class CarbonKind { uniform_iid, constant, csv_trace };

struct CarbonModel {
    CarbonKind kind = CarbonKind::constant;
    double max_intensity = 0.0; // uniform upper bound / constant value
    std::uint64_t seed = 0;
    std::shared_ptr<const CarbonTrace> trace;
};

// Arrivals for slot t. Deterministic in (seed, t, type); traces wrap around.
Arrivals generate_arrivals(const ArrivalModel& model, std::size_t task_types, std::int64_t t);

// Carbon intensities for slot t. Deterministic in (seed, t, region); traces
// wrap around.
CarbonSnapshot generate_carbon(const CarbonModel& model, std::size_t clouds, std::int64_t t);

// Largest arrival count the model can produce in any slot.
std::int64_t arrival_upper_bound(const ArrivalModel& model);

// Reads a carbon intensity CSV (header: timestamp,<region>,...; ISO-8601
// timestamps in ascending order) and maps the named regions onto the edge
// and each cloud. Throws std::runtime_error with the offending column/row.
CarbonTrace load_carbon_csv(const std::string& path, const std::string& edge_region,
                            const std::vector<std::string>& cloud_regions);

// Writes a trace back out in the same CSV schema (synthetic timestamps).
void write_carbon_csv(const std::string& path, const CarbonTrace& trace);

// Reads an arrivals CSV: timestamp plus one non-negative integer column per
// task type, in file column order.
ArrivalsTrace load_arrivals_csv(const std::string& path);

} // namespace carbonsched

#endif
