#ifndef CARBONSCHED_POLICY_HPP
#define CARBONSCHED_POLICY_HPP

#include "carbonsched/model.hpp"

namespace carbonsched {

/// Behavior on the first non-negative edge/cloud coefficient while walking
/// the ratio-sorted type list.
enum class EdgeBreakMode {
    break_on_first_nonnegative, // stop the stage (pseudocode-faithful)
    skip_and_continue           // skip this type, keep scanning
};

struct PolicyConfig {
    double V = 0.0;             // drift-plus-penalty weight, >= 0
    EdgeBreakMode edge_break_mode = EdgeBreakMode::break_on_first_nonnegative;
    // When set, the edge stage deducts floor(P/p)*p from the remaining budget
    // instead of the energy actually used. Audit/compatibility switch only.
    bool literal_edge_deduction = false;
};

/// Per-(type, cloud) linear coefficients of the per-slot drift-plus-penalty
/// upper bound: b weights dispatch decisions, c weights work decisions.
struct DppCoefficients {
    std::vector<std::vector<double>> b;
    std::vector<std::vector<double>> c;
};

// b[m][n] = V*C_e*p_e[m] + Qc[m][n] - Qe[m]
// c[m][n] = V*C_c[n]*p_c[m][n] - Qc[m][n]
DppCoefficients dpp_coefficients(const QueueState& state, const NetworkSpec& spec,
                                 const CarbonSnapshot& carbon, const PolicyConfig& config);

// sum(b .* dispatch) + sum(c .* work)
double dpp_objective(const Action& action, const DppCoefficients& coeffs);

// Greedy carbon-intensity scheduling policy. The returned action is feasible,
// integer, and never dispatches or works more tasks than are queued.
Action carbon_intensity_policy(const QueueState& state, const NetworkSpec& spec,
                               const CarbonSnapshot& carbon, const Arrivals& arrivals_observed,
                               const PolicyConfig& config);

// Carbon-oblivious baseline: longest edge queues drain first toward the
// shortest cloud queues; each cloud works its longest queues first.
Action queue_length_policy(const QueueState& state, const NetworkSpec& spec);

} // namespace carbonsched

#endif
