#ifndef CARBONSCHED_MODEL_HPP
#define CARBONSCHED_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace carbonsched {

/// Static description of the computing network: task types, per-task
/// energy costs and per-slot energy budgets of the edge server and clouds.
struct NetworkSpec {
    std::vector<double> edge_send_energy;               // kWh per type-m task sent
    std::vector<std::vector<double>> cloud_proc_energy; // [m][n] kWh per task processed
    double edge_budget = 0.0;                           // kWh per slot
    std::vector<double> cloud_budget;                   // kWh per slot, per cloud

    std::size_t task_types() const { return edge_send_energy.size(); }
    std::size_t clouds() const { return cloud_budget.size(); }

    // Throws std::invalid_argument on empty dimensions, non-positive
    // energies, negative budgets or mismatched array shapes.
    void validate() const;
};

/// Virtual queue lengths at the start of a slot. Advanced functionally by
/// step(); never mutated in place.
struct QueueState {
    std::int64_t t = 0;
    std::vector<std::int64_t> edge_q;               // per task type
    std::vector<std::vector<std::int64_t>> cloud_q; // [m][n]

    static QueueState zeros(const NetworkSpec& spec);
};

/// Per-slot scheduling decision: dispatch[m][n] tasks sent from the edge to
/// cloud n, work[m][n] tasks processed by cloud n.
struct Action {
    std::vector<std::vector<std::int64_t>> dispatch;
    std::vector<std::vector<std::int64_t>> work;

    static Action zeros(std::size_t task_types, std::size_t clouds);
};

/// Carbon intensity of every grid in the network at one slot, gCO2/kWh.
struct CarbonSnapshot {
    double edge_intensity = 0.0;
    std::vector<double> cloud_intensity;
};

/// Task arrivals at one slot, per task type.
struct Arrivals {
    std::vector<std::int64_t> count;
};

struct EnergyTotals {
    double edge = 0.0;
    std::vector<double> cloud;
};

// Adds with overflow detection; throws std::overflow_error on wrap.
std::int64_t checked_add(std::int64_t a, std::int64_t b);

// Total energy drawn by the edge and by each cloud under the given action.
EnergyTotals energy_totals(const Action& action, const NetworkSpec& spec);

// True iff the action respects the edge and every cloud energy budget.
// `slack` is an absolute tolerance added to each budget (default exact).
bool is_feasible(const Action& action, const NetworkSpec& spec, double slack = 0.0);

// Emissions of the whole network for one slot, gCO2.
double carbon_emissions(const Action& action, const NetworkSpec& spec,
                        const CarbonSnapshot& carbon);

// One slot of queue dynamics. Over-draining actions are legal: departures
// saturate at the current queue length.
QueueState step(const QueueState& state, const Action& action, const Arrivals& arrivals);

// Half the sum of squared queue lengths.
double lyapunov(const QueueState& state);

} // namespace carbonsched

#endif
