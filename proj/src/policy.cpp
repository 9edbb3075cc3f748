#include "carbonsched/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace carbonsched {

namespace {

void check_inputs(const QueueState& state, const NetworkSpec& spec,
                  const CarbonSnapshot* carbon) {
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    if (state.edge_q.size() != m_count || state.cloud_q.size() != m_count)
        throw std::invalid_argument("queue state does not match network spec");
    for (const auto& row : state.cloud_q)
        if (row.size() != n_count)
            throw std::invalid_argument("queue state cloud count does not match network spec");
    if (carbon && carbon->cloud_intensity.size() != n_count)
        throw std::invalid_argument("carbon snapshot does not match network spec");
}

// Lowest index wins on ties.
std::size_t argmin_cloud_queue(const QueueState& state, std::size_t m) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < state.cloud_q[m].size(); ++n)
        if (state.cloud_q[m][n] < state.cloud_q[m][best]) best = n;
    return best;
}

std::int64_t unit_capacity(double budget, double energy_per_unit) {
    if (budget <= 0.0) return 0;
    return static_cast<std::int64_t>(std::floor(budget / energy_per_unit));
}

} // namespace

DppCoefficients dpp_coefficients(const QueueState& state, const NetworkSpec& spec,
                                 const CarbonSnapshot& carbon, const PolicyConfig& config) {
    check_inputs(state, spec, &carbon);
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    DppCoefficients coeffs;
    coeffs.b.assign(m_count, std::vector<double>(n_count, 0.0));
    coeffs.c.assign(m_count, std::vector<double>(n_count, 0.0));
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t n = 0; n < n_count; ++n) {
            coeffs.b[m][n] = config.V * carbon.edge_intensity * spec.edge_send_energy[m]
                             + static_cast<double>(state.cloud_q[m][n])
                             - static_cast<double>(state.edge_q[m]);
            coeffs.c[m][n] = config.V * carbon.cloud_intensity[n] * spec.cloud_proc_energy[m][n]
                             - static_cast<double>(state.cloud_q[m][n]);
        }
    }
    return coeffs;
}

double dpp_objective(const Action& action, const DppCoefficients& coeffs) {
    if (action.dispatch.size() != coeffs.b.size() || action.work.size() != coeffs.c.size())
        throw std::invalid_argument("action does not match coefficient shape");
    double total = 0.0;
    for (std::size_t m = 0; m < coeffs.b.size(); ++m) {
        for (std::size_t n = 0; n < coeffs.b[m].size(); ++n) {
            total += coeffs.b[m][n] * static_cast<double>(action.dispatch[m][n]);
            total += coeffs.c[m][n] * static_cast<double>(action.work[m][n]);
        }
    }
    return total;
}

Action carbon_intensity_policy(const QueueState& state, const NetworkSpec& spec,
                               const CarbonSnapshot& carbon, const Arrivals& /*arrivals_observed*/,
                               const PolicyConfig& config) {
    check_inputs(state, spec, &carbon);
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    Action action = Action::zeros(m_count, n_count);

    // Edge stage: each type targets its shortest cloud queue; walk types in
    // increasing (Qc - Qe)/p_e order while the dispatch coefficient is negative.
    std::vector<std::size_t> target(m_count);
    std::vector<double> ratio(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        target[m] = argmin_cloud_queue(state, m);
        ratio[m] = (static_cast<double>(state.cloud_q[m][target[m]])
                    - static_cast<double>(state.edge_q[m])) / spec.edge_send_energy[m];
    }
    std::vector<std::size_t> order(m_count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ratio[a] < ratio[b]; });

    double remaining = spec.edge_budget;
    for (std::size_t m : order) {
        const double p = spec.edge_send_energy[m];
        const std::int64_t capacity = unit_capacity(remaining, p);
        if (capacity <= 0) continue;
        const double coeff = config.V * carbon.edge_intensity * p
                             + static_cast<double>(state.cloud_q[m][target[m]])
                             - static_cast<double>(state.edge_q[m]);
        if (coeff < 0.0) {
            const std::int64_t sent = std::min(state.edge_q[m], capacity);
            action.dispatch[m][target[m]] = sent;
            remaining -= config.literal_edge_deduction
                             ? static_cast<double>(capacity) * p
                             : static_cast<double>(sent) * p;
        } else if (config.edge_break_mode == EdgeBreakMode::break_on_first_nonnegative) {
            break;
        }
    }

    // Cloud stage: each cloud works its types in decreasing Qc/p_c order while
    // the work coefficient is negative.
    for (std::size_t n = 0; n < n_count; ++n) {
        std::vector<std::size_t> cloud_order(m_count);
        std::iota(cloud_order.begin(), cloud_order.end(), 0);
        std::stable_sort(cloud_order.begin(), cloud_order.end(), [&](std::size_t a, std::size_t b) {
            const double ra = static_cast<double>(state.cloud_q[a][n]) / spec.cloud_proc_energy[a][n];
            const double rb = static_cast<double>(state.cloud_q[b][n]) / spec.cloud_proc_energy[b][n];
            return ra > rb;
        });

        double budget = spec.cloud_budget[n];
        for (std::size_t m : cloud_order) {
            const double p = spec.cloud_proc_energy[m][n];
            const std::int64_t capacity = unit_capacity(budget, p);
            if (capacity <= 0) continue;
            const double coeff = config.V * carbon.cloud_intensity[n] * p
                                 - static_cast<double>(state.cloud_q[m][n]);
            if (coeff < 0.0) {
                const std::int64_t worked = std::min(state.cloud_q[m][n], capacity);
                action.work[m][n] = worked;
                budget -= static_cast<double>(worked) * p;
            } else if (config.edge_break_mode == EdgeBreakMode::break_on_first_nonnegative) {
                break;
            }
        }
    }
    return action;
}

Action queue_length_policy(const QueueState& state, const NetworkSpec& spec) {
    check_inputs(state, spec, nullptr);
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    Action action = Action::zeros(m_count, n_count);

    std::vector<std::size_t> order(m_count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return state.edge_q[a] > state.edge_q[b];
    });

    double remaining = spec.edge_budget;
    for (std::size_t m : order) {
        const std::size_t n = argmin_cloud_queue(state, m);
        const std::int64_t sent =
            std::min(state.edge_q[m], unit_capacity(remaining, spec.edge_send_energy[m]));
        if (sent > 0) {
            action.dispatch[m][n] = sent;
            remaining -= static_cast<double>(sent) * spec.edge_send_energy[m];
        }
    }

    for (std::size_t n = 0; n < n_count; ++n) {
        std::vector<std::size_t> cloud_order(m_count);
        std::iota(cloud_order.begin(), cloud_order.end(), 0);
        std::stable_sort(cloud_order.begin(), cloud_order.end(), [&](std::size_t a, std::size_t b) {
            return state.cloud_q[a][n] > state.cloud_q[b][n];
        });
        double budget = spec.cloud_budget[n];
        for (std::size_t m : cloud_order) {
            const std::int64_t worked =
                std::min(state.cloud_q[m][n], unit_capacity(budget, spec.cloud_proc_energy[m][n]));
            if (worked > 0) {
                action.work[m][n] = worked;
                budget -= static_cast<double>(worked) * spec.cloud_proc_energy[m][n];
            }
        }
    }
    return action;
}

} // namespace carbonsched
