#ifndef CARBONSCHED_HARNESS_HPP
#define CARBONSCHED_HARNESS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "carbonsched/knapsack.hpp"
#include "carbonsched/model.hpp"
#include "carbonsched/policy.hpp"
#include "carbonsched/workload.hpp"

#include "json.hpp"

namespace carbonsched {

enum class PolicyKind { carbon_intensity, queue_length, oracle_exact };

struct RunConfig {
    NetworkSpec spec;
    PolicyKind policy = PolicyKind::carbon_intensity;
    PolicyConfig policy_config;
    OracleConfig oracle;
    ArrivalModel arrivals;
    CarbonModel carbon;
    std::int64_t horizon = 10'000;
    std::int64_t metrics_stride = 1;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> initial_edge_q;                // empty = zeros
    std::vector<std::vector<std::int64_t>> initial_cloud_q;  // empty = zeros
    bool log_actions = false;

    void validate() const;
};

struct SlotMetrics {
    std::int64_t t = 0;
    double emissions = 0.0;
    double cumulative_emissions = 0.0;
    std::vector<std::int64_t> edge_q_snapshot;
    std::vector<std::vector<std::int64_t>> cloud_q_snapshot;
    double lyapunov_value = 0.0;
    double drift = 0.0;
    double dpp_value = 0.0;     // drift + V * emissions
    double dpp_bound_rhs = 0.0; // per-slot drift bound right-hand side
};

struct RunMetrics {
    std::vector<SlotMetrics> series; // sampled at metrics_stride
    double cumulative_emissions = 0.0;
    double time_average_emissions = 0.0;
    std::vector<double> avg_edge_queue;
    std::vector<std::vector<double>> avg_cloud_queue;
    std::vector<double> mean_rate_ratio; // edge queues, Q(T)/T
    double max_mean_rate_ratio = 0.0;    // over all edge and cloud queues
    double B_estimate = 0.0;
    QueueState final_state;
    std::vector<Action> action_log; // filled when RunConfig::log_actions
};

/// A policy handed the harness an action violating an energy budget.
class InfeasibleActionError : public std::runtime_error {
  public:
    InfeasibleActionError(std::int64_t slot, const std::string& what)
        : std::runtime_error("infeasible action at slot " + std::to_string(slot) + ": " + what),
          slot(slot) {}
    std::int64_t slot;
};

// Smallest conservative constant bounding the sum of squared per-slot
// arrivals and feasible decisions, from the energy budgets alone.
double compute_B(const NetworkSpec& spec, std::int64_t max_arrivals);

struct DriftCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// Evaluates the one-slot drift bound: lhs = drift + V*C(t), rhs = B plus the
// arrival and decision terms. Requires next_state == step(state, action, arrivals).
DriftCheck drift_bound_check(const QueueState& state, const QueueState& next_state,
                             const Action& action, const Arrivals& arrivals,
                             const CarbonSnapshot& carbon, const NetworkSpec& spec,
                             const PolicyConfig& config, double B);

// Slot-by-slot simulation. Deterministic given the config.
RunMetrics run(const RunConfig& config);

struct SweepRow {
    double V = 0.0;
    double time_average_emissions = 0.0;
    std::vector<double> avg_edge_queue;
    std::vector<std::vector<double>> avg_cloud_queue;
};

// One run per V value on common seeds/streams.
std::vector<SweepRow> v_sweep(const RunConfig& base, const std::vector<double>& v_values);

struct AuditRow {
    std::int64_t t = 0;
    double greedy_obj = 0.0;
    double oracle_obj = 0.0;
    double gap = 0.0; // greedy - oracle, >= 0 up to rounding
};

// Simulates the greedy carbon-intensity policy and solves every slot's
// decoupled subproblems exactly for comparison.
std::vector<AuditRow> oracle_audit(const RunConfig& config, std::int64_t slots_to_audit);

// Plot-ready per-slot metrics. Byte-deterministic for identical inputs.
void write_metrics_csv(const std::string& path, const RunMetrics& metrics);

// Summary with time averages, mean-rate ratios, B and the full resolved
// configuration echo, sufficient to re-run bit-identically.
void write_summary_json(const std::string& path, const nlohmann::json& config_echo,
                        const RunMetrics& metrics);

// Nonzero dispatch/work entries per slot, for audit replay.
void write_action_log_csv(const std::string& path, const RunMetrics& metrics);

// Cross-check helper: recomputes cumulative emissions from a logged action
// sequence and the carbon stream.
double replay_emissions(const RunConfig& config, const std::vector<Action>& actions);

} // namespace carbonsched

#endif
