#include "carbonsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace carbonsched {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

void check_dims(const Action& action, const NetworkSpec& spec) {
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    require(action.dispatch.size() == m_count && action.work.size() == m_count,
            "action row count does not match task type count");
    for (std::size_t m = 0; m < m_count; ++m) {
        require(action.dispatch[m].size() == n_count && action.work[m].size() == n_count,
                "action column count does not match cloud count");
    }
}

} // namespace

void NetworkSpec::validate() const {
    const std::size_t m_count = task_types();
    const std::size_t n_count = clouds();
    require(m_count >= 1, "need at least one task type");
    require(n_count >= 1, "need at least one cloud");
    require(cloud_proc_energy.size() == m_count, "cloud_proc_energy row count mismatch");
    for (std::size_t m = 0; m < m_count; ++m) {
        require(std::isfinite(edge_send_energy[m]) && edge_send_energy[m] > 0.0,
                "edge send energy must be strictly positive");
        require(cloud_proc_energy[m].size() == n_count, "cloud_proc_energy column count mismatch");
        for (double p : cloud_proc_energy[m])
            require(std::isfinite(p) && p > 0.0, "cloud processing energy must be strictly positive");
    }
    require(std::isfinite(edge_budget) && edge_budget >= 0.0, "edge budget must be non-negative");
    for (double b : cloud_budget)
        require(std::isfinite(b) && b >= 0.0, "cloud budget must be non-negative");
}

QueueState QueueState::zeros(const NetworkSpec& spec) {
    QueueState s;
    s.t = 0;
    s.edge_q.assign(spec.task_types(), 0);
    s.cloud_q.assign(spec.task_types(), std::vector<std::int64_t>(spec.clouds(), 0));
    return s;
}

Action Action::zeros(std::size_t task_types, std::size_t clouds) {
    Action a;
    a.dispatch.assign(task_types, std::vector<std::int64_t>(clouds, 0));
    a.work.assign(task_types, std::vector<std::int64_t>(clouds, 0));
    return a;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in queue arithmetic");
    return r;
}

EnergyTotals energy_totals(const Action& action, const NetworkSpec& spec) {
    check_dims(action, spec);
    EnergyTotals totals;
    totals.cloud.assign(spec.clouds(), 0.0);
    for (std::size_t m = 0; m < spec.task_types(); ++m) {
        for (std::size_t n = 0; n < spec.clouds(); ++n) {
            totals.edge += static_cast<double>(action.dispatch[m][n]) * spec.edge_send_energy[m];
            totals.cloud[n] += static_cast<double>(action.work[m][n]) * spec.cloud_proc_energy[m][n];
        }
    }
    return totals;
}

bool is_feasible(const Action& action, const NetworkSpec& spec, double slack) {
    const EnergyTotals totals = energy_totals(action, spec);
    if (totals.edge > spec.edge_budget + slack) return false;
    for (std::size_t n = 0; n < spec.clouds(); ++n)
        if (totals.cloud[n] > spec.cloud_budget[n] + slack) return false;
    return true;
}

double carbon_emissions(const Action& action, const NetworkSpec& spec,
                        const CarbonSnapshot& carbon) {
    const EnergyTotals totals = energy_totals(action, spec);
    require(carbon.cloud_intensity.size() == spec.clouds(), "carbon snapshot cloud count mismatch");
    double total = carbon.edge_intensity * totals.edge;
    for (std::size_t n = 0; n < spec.clouds(); ++n)
        total += carbon.cloud_intensity[n] * totals.cloud[n];
    return total;
}

QueueState step(const QueueState& state, const Action& action, const Arrivals& arrivals) {
    const std::size_t m_count = state.edge_q.size();
    require(action.dispatch.size() == m_count && action.work.size() == m_count,
            "action row count does not match queue state");
    require(arrivals.count.size() == m_count, "arrival count does not match task type count");

    QueueState next = state;
    next.t = checked_add(state.t, 1);
    for (std::size_t m = 0; m < m_count; ++m) {
        const std::size_t n_count = state.cloud_q[m].size();
        require(action.dispatch[m].size() == n_count && action.work[m].size() == n_count,
                "action column count does not match queue state");
        std::int64_t dispatched = 0;
        for (std::size_t n = 0; n < n_count; ++n) {
            require(action.dispatch[m][n] >= 0 && action.work[m][n] >= 0,
                    "action entries must be non-negative");
            dispatched = checked_add(dispatched, action.dispatch[m][n]);
            const std::int64_t drained = std::max<std::int64_t>(
                state.cloud_q[m][n] - action.work[m][n], 0);
            next.cloud_q[m][n] = checked_add(drained, action.dispatch[m][n]);
        }
        require(arrivals.count[m] >= 0, "arrival counts must be non-negative");
        const std::int64_t drained = std::max<std::int64_t>(state.edge_q[m] - dispatched, 0);
        next.edge_q[m] = checked_add(drained, arrivals.count[m]);
    }
    return next;
}

double lyapunov(const QueueState& state) {
    double sum = 0.0;
    for (std::int64_t q : state.edge_q) sum += static_cast<double>(q) * static_cast<double>(q);
    for (const auto& row : state.cloud_q)
        for (std::int64_t q : row) sum += static_cast<double>(q) * static_cast<double>(q);
    return 0.5 * sum;
}

} // namespace carbonsched
