#ifndef CARBONSCHED_KNAPSACK_HPP
#define CARBONSCHED_KNAPSACK_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "carbonsched/model.hpp"
#include "carbonsched/policy.hpp"

namespace carbonsched {

/// Raised when a discretized instance exceeds the configured DP table size.
class OracleSizeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct KnapsackItem {
    std::int64_t weight = 0; // capacity cells per unit, > 0
    double cost = 0.0;       // objective contribution per unit (to minimize)
    std::int64_t cap = -1;   // max units, -1 for unbounded
};

struct KnapsackSolution {
    std::vector<std::int64_t> counts;
    double cost = 0.0;
};

// Exact integer minimizer of sum(cost_i * x_i) subject to
// sum(weight_i * x_i) <= budget and 0 <= x_i <= cap_i. Items with
// non-negative cost are never taken. Weights and budget are reduced by their
// gcd before the DP; the reduced budget must not exceed max_cells.
KnapsackSolution min_cost_knapsack(const std::vector<KnapsackItem>& items,
                                   std::int64_t budget, std::int64_t max_cells);

struct OracleConfig {
    double quantum = 0.01;                // kWh per capacity cell
    std::int64_t max_cells = 10'000'000;  // DP table size limit
    bool apply_queue_caps = true;         // cap dispatch/work by queue contents
};

// Exact minimizer of the per-slot edge dispatch subproblem. Only the
// dispatch matrix of the returned action is populated.
Action knapsack_oracle_edge(const QueueState& state, const NetworkSpec& spec,
                            const CarbonSnapshot& carbon, const PolicyConfig& config,
                            const OracleConfig& oracle = {});

// Exact minimizer of cloud n's per-slot work subproblem; returns the work
// column w[m] for that cloud.
std::vector<std::int64_t> knapsack_oracle_cloud(std::size_t n, const QueueState& state,
                                                const NetworkSpec& spec,
                                                const CarbonSnapshot& carbon,
                                                const PolicyConfig& config,
                                                const OracleConfig& oracle = {});

// Full-action convenience wrapper: edge subproblem plus every cloud column.
Action knapsack_oracle_action(const QueueState& state, const NetworkSpec& spec,
                              const CarbonSnapshot& carbon, const PolicyConfig& config,
                              const OracleConfig& oracle = {});

} // namespace carbonsched

#endif
