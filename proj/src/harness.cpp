#include "carbonsched/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace carbonsched {

namespace {

constexpr double kRelativeSlack = 1e-6;

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

// Streams are a function of (run seed, model seed) only, never of the
// policy, so compared runs see identical inputs.
ArrivalModel effective_arrivals(const RunConfig& config) {
    ArrivalModel model = config.arrivals;
    model.seed ^= config.seed;
    return model;
}

CarbonModel effective_carbon(const RunConfig& config) {
    CarbonModel model = config.carbon;
    model.seed ^= config.seed;
    return model;
}

Action invoke_policy(const RunConfig& config, const QueueState& state,
                     const CarbonSnapshot& carbon, const Arrivals& arrivals) {
    switch (config.policy) {
        case PolicyKind::carbon_intensity:
            return carbon_intensity_policy(state, config.spec, carbon, arrivals,
                                           config.policy_config);
        case PolicyKind::queue_length:
            return queue_length_policy(state, config.spec);
        case PolicyKind::oracle_exact:
            return knapsack_oracle_action(state, config.spec, carbon, config.policy_config,
                                          config.oracle);
    }
    throw std::logic_error("unknown policy kind");
}

QueueState initial_state(const RunConfig& config) {
    QueueState state = QueueState::zeros(config.spec);
    if (!config.initial_edge_q.empty()) state.edge_q = config.initial_edge_q;
    if (!config.initial_cloud_q.empty()) state.cloud_q = config.initial_cloud_q;
    return state;
}

} // namespace

void RunConfig::validate() const {
    spec.validate();
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (metrics_stride < 1) throw std::invalid_argument("metrics_stride must be at least 1");
    if (policy_config.V < 0.0) throw std::invalid_argument("V must be non-negative");
    if (!initial_edge_q.empty() && initial_edge_q.size() != spec.task_types())
        throw std::invalid_argument("initial edge queue size mismatch");
    if (!initial_cloud_q.empty()) {
        if (initial_cloud_q.size() != spec.task_types())
            throw std::invalid_argument("initial cloud queue size mismatch");
        for (const auto& row : initial_cloud_q)
            if (row.size() != spec.clouds())
                throw std::invalid_argument("initial cloud queue size mismatch");
    }
}

double compute_B(const NetworkSpec& spec, std::int64_t max_arrivals) {
    const double a = static_cast<double>(max_arrivals);
    double total = static_cast<double>(spec.task_types()) * a * a;
    for (std::size_t m = 0; m < spec.task_types(); ++m) {
        // Per-type dispatch can never exceed floor(P_e / p_e_m); the total
        // over clouds shares the same weight, so the same bound covers both
        // the row-sum square and the per-entry squares.
        const double d_max = std::floor(spec.edge_budget / spec.edge_send_energy[m]);
        total += 2.0 * d_max * d_max;
        for (std::size_t n = 0; n < spec.clouds(); ++n) {
            const double w_max =
                std::floor(spec.cloud_budget[n] / spec.cloud_proc_energy[m][n]);
            total += w_max * w_max;
        }
    }
    return 0.5 * total;
}

DriftCheck drift_bound_check(const QueueState& state, const QueueState& next_state,
                             const Action& action, const Arrivals& arrivals,
                             const CarbonSnapshot& carbon, const NetworkSpec& spec,
                             const PolicyConfig& config, double B) {
    DriftCheck check;
    const double drift = lyapunov(next_state) - lyapunov(state);
    check.lhs = drift + config.V * carbon_emissions(action, spec, carbon);

    check.rhs = B;
    for (std::size_t m = 0; m < spec.task_types(); ++m)
        check.rhs += static_cast<double>(state.edge_q[m]) * static_cast<double>(arrivals.count[m]);
    check.rhs += dpp_objective(action, dpp_coefficients(state, spec, carbon, config));

    const double slack = kRelativeSlack * std::max({1.0, std::abs(check.lhs), std::abs(check.rhs)});
    check.holds = check.lhs <= check.rhs + slack;
    return check;
}

RunMetrics run(const RunConfig& config) {
    config.validate();
    const NetworkSpec& spec = config.spec;
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    const ArrivalModel arrival_model = effective_arrivals(config);
    const CarbonModel carbon_model = effective_carbon(config);

    RunMetrics metrics;
    metrics.avg_edge_queue.assign(m_count, 0.0);
    metrics.avg_cloud_queue.assign(m_count, std::vector<double>(n_count, 0.0));
    metrics.B_estimate = compute_B(spec, arrival_upper_bound(arrival_model));

    const double max_budget =
        std::max(spec.edge_budget,
                 *std::max_element(spec.cloud_budget.begin(), spec.cloud_budget.end()));
    const double feasibility_slack = kRelativeSlack * std::max(1.0, max_budget);

    QueueState state = initial_state(config);
    for (std::int64_t t = 0; t < config.horizon; ++t) {
        const CarbonSnapshot carbon = generate_carbon(carbon_model, n_count, t);
        const Arrivals arrivals = generate_arrivals(arrival_model, m_count, t);
        const Action action = invoke_policy(config, state, carbon, arrivals);

        const EnergyTotals totals = energy_totals(action, spec);
        if (totals.edge > spec.edge_budget + feasibility_slack)
            throw InfeasibleActionError(t, "edge energy " + std::to_string(totals.edge) +
                                               " exceeds budget " +
                                               std::to_string(spec.edge_budget));
        for (std::size_t n = 0; n < n_count; ++n)
            if (totals.cloud[n] > spec.cloud_budget[n] + feasibility_slack)
                throw InfeasibleActionError(t, "cloud " + std::to_string(n) + " energy " +
                                                   std::to_string(totals.cloud[n]) +
                                                   " exceeds budget " +
                                                   std::to_string(spec.cloud_budget[n]));

        const double emissions = carbon_emissions(action, spec, carbon);
        const QueueState next = step(state, action, arrivals);
        metrics.cumulative_emissions += emissions;

        for (std::size_t m = 0; m < m_count; ++m) {
            metrics.avg_edge_queue[m] += static_cast<double>(state.edge_q[m]);
            for (std::size_t n = 0; n < n_count; ++n)
                metrics.avg_cloud_queue[m][n] += static_cast<double>(state.cloud_q[m][n]);
        }

        if (t % config.metrics_stride == 0) {
            SlotMetrics slot;
            slot.t = t;
            slot.emissions = emissions;
            slot.cumulative_emissions = metrics.cumulative_emissions;
            slot.edge_q_snapshot = state.edge_q;
            slot.cloud_q_snapshot = state.cloud_q;
            slot.lyapunov_value = lyapunov(state);
            slot.drift = lyapunov(next) - slot.lyapunov_value;
            slot.dpp_value = slot.drift + config.policy_config.V * emissions;
            slot.dpp_bound_rhs = drift_bound_check(state, next, action, arrivals, carbon, spec,
                                                   config.policy_config, metrics.B_estimate)
                                     .rhs;
            metrics.series.push_back(std::move(slot));
        }
        if (config.log_actions) metrics.action_log.push_back(action);
        state = next;
    }

    const double horizon = static_cast<double>(config.horizon);
    metrics.time_average_emissions = metrics.cumulative_emissions / horizon;
    for (std::size_t m = 0; m < m_count; ++m) {
        metrics.avg_edge_queue[m] /= horizon;
        for (std::size_t n = 0; n < n_count; ++n) metrics.avg_cloud_queue[m][n] /= horizon;
    }
    metrics.mean_rate_ratio.assign(m_count, 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        metrics.mean_rate_ratio[m] = static_cast<double>(state.edge_q[m]) / horizon;
        metrics.max_mean_rate_ratio =
            std::max(metrics.max_mean_rate_ratio, metrics.mean_rate_ratio[m]);
        for (std::size_t n = 0; n < n_count; ++n)
            metrics.max_mean_rate_ratio = std::max(
                metrics.max_mean_rate_ratio, static_cast<double>(state.cloud_q[m][n]) / horizon);
    }
    metrics.final_state = std::move(state);
    return metrics;
}

std::vector<SweepRow> v_sweep(const RunConfig& base, const std::vector<double>& v_values) {
    if (v_values.empty()) throw std::invalid_argument("v_sweep needs at least one V value");
    std::vector<SweepRow> rows;
    for (double v : v_values) {
        if (v < 0.0) throw std::invalid_argument("V values must be non-negative");
        RunConfig config = base;
        config.policy_config.V = v;
        const RunMetrics metrics = run(config);
        SweepRow row;
        row.V = v;
        row.time_average_emissions = metrics.time_average_emissions;
        row.avg_edge_queue = metrics.avg_edge_queue;
        row.avg_cloud_queue = metrics.avg_cloud_queue;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AuditRow> oracle_audit(const RunConfig& config, std::int64_t slots_to_audit) {
    config.validate();
    const NetworkSpec& spec = config.spec;
    const ArrivalModel arrival_model = effective_arrivals(config);
    const CarbonModel carbon_model = effective_carbon(config);
    const std::int64_t slots = std::min(slots_to_audit, config.horizon);

    std::vector<AuditRow> rows;
    QueueState state = initial_state(config);
    for (std::int64_t t = 0; t < slots; ++t) {
        const CarbonSnapshot carbon = generate_carbon(carbon_model, spec.clouds(), t);
        const Arrivals arrivals = generate_arrivals(arrival_model, spec.task_types(), t);
        const DppCoefficients coeffs =
            dpp_coefficients(state, spec, carbon, config.policy_config);
        const Action greedy =
            carbon_intensity_policy(state, spec, carbon, arrivals, config.policy_config);
        const Action oracle =
            knapsack_oracle_action(state, spec, carbon, config.policy_config, config.oracle);

        AuditRow row;
        row.t = t;
        row.greedy_obj = dpp_objective(greedy, coeffs);
        row.oracle_obj = dpp_objective(oracle, coeffs);
        row.gap = row.greedy_obj - row.oracle_obj;
        rows.push_back(row);

        state = step(state, greedy, arrivals);
    }
    return rows;
}

void write_metrics_csv(const std::string& path, const RunMetrics& metrics) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics file: " + path);
    out << "t,emissions,cumulative_emissions,lyapunov,drift,dpp_value,dpp_bound_rhs";
    if (!metrics.series.empty()) {
        const SlotMetrics& first = metrics.series.front();
        for (std::size_t m = 0; m < first.edge_q_snapshot.size(); ++m)
            out << ",edge_q_" << m;
        for (std::size_t m = 0; m < first.cloud_q_snapshot.size(); ++m)
            for (std::size_t n = 0; n < first.cloud_q_snapshot[m].size(); ++n)
                out << ",cloud_q_" << m << '_' << n;
    }
    out << '\n';
    for (const SlotMetrics& slot : metrics.series) {
        out << slot.t << ',' << format_double(slot.emissions) << ','
            << format_double(slot.cumulative_emissions) << ','
            << format_double(slot.lyapunov_value) << ',' << format_double(slot.drift) << ','
            << format_double(slot.dpp_value) << ',' << format_double(slot.dpp_bound_rhs);
        for (std::int64_t q : slot.edge_q_snapshot) out << ',' << q;
        for (const auto& row : slot.cloud_q_snapshot)
            for (std::int64_t q : row) out << ',' << q;
        out << '\n';
    }
}

void write_summary_json(const std::string& path, const nlohmann::json& config_echo,
                        const RunMetrics& metrics) {
    nlohmann::json summary;
    summary["config"] = config_echo;
    summary["cumulative_emissions"] = metrics.cumulative_emissions;
    summary["time_average_emissions"] = metrics.time_average_emissions;
    summary["avg_edge_queue"] = metrics.avg_edge_queue;
    summary["avg_cloud_queue"] = metrics.avg_cloud_queue;
    summary["mean_rate_ratio"] = metrics.mean_rate_ratio;
    summary["max_mean_rate_ratio"] = metrics.max_mean_rate_ratio;
    summary["B"] = metrics.B_estimate;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write summary file: " + path);
    out << summary.dump(2) << '\n';
}

void write_action_log_csv(const std::string& path, const RunMetrics& metrics) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write action log file: " + path);
    out << "t,kind,type,cloud,count\n";
    for (std::size_t t = 0; t < metrics.action_log.size(); ++t) {
        const Action& action = metrics.action_log[t];
        for (std::size_t m = 0; m < action.dispatch.size(); ++m) {
            for (std::size_t n = 0; n < action.dispatch[m].size(); ++n) {
                if (action.dispatch[m][n] != 0)
                    out << t << ",dispatch," << m << ',' << n << ',' << action.dispatch[m][n]
                        << '\n';
                if (action.work[m][n] != 0)
                    out << t << ",work," << m << ',' << n << ',' << action.work[m][n] << '\n';
            }
        }
    }
}

double replay_emissions(const RunConfig& config, const std::vector<Action>& actions) {
    const CarbonModel carbon_model = effective_carbon(config);
    double total = 0.0;
    for (std::size_t t = 0; t < actions.size(); ++t) {
        const CarbonSnapshot carbon =
            generate_carbon(carbon_model, config.spec.clouds(), static_cast<std::int64_t>(t));
        total += carbon_emissions(actions[t], config.spec, carbon);
    }
    return total;
}

} // namespace carbonsched
