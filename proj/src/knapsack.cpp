#include "carbonsched/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace carbonsched {

namespace {

struct ActiveItem {
    std::size_t original = 0;
    std::int64_t weight = 0;
    double cost = 0.0;
    std::int64_t cap = 0; // effective, already clamped to budget/weight
};

// One bounded-knapsack layer: out[idx] = min over k in [0, cap] of
// in[idx - k*weight] + k*cost. Sliding-window minimum per weight residue.
void apply_layer(const std::vector<double>& in, std::vector<double>& out,
                 const ActiveItem& item) {
    const std::int64_t budget = static_cast<std::int64_t>(in.size()) - 1;
    const std::int64_t w = item.weight;
    out.resize(in.size());
    std::deque<std::int64_t> window; // j indices, keys increasing
    for (std::int64_t r = 0; r < w && r <= budget; ++r) {
        window.clear();
        for (std::int64_t j = 0, idx = r; idx <= budget; ++j, idx += w) {
            const double key = in[idx] - static_cast<double>(j) * item.cost;
            while (!window.empty()) {
                const std::int64_t back = window.back();
                if (in[back * w + r] - static_cast<double>(back) * item.cost >= key)
                    window.pop_back();
                else
                    break;
            }
            window.push_back(j);
            while (window.front() < j - item.cap) window.pop_front();
            const std::int64_t f = window.front();
            out[idx] = in[f * w + r] - static_cast<double>(f) * item.cost
                       + static_cast<double>(j) * item.cost;
        }
    }
}

// Best unit count for one item given the preceding layer and remaining cells.
std::int64_t best_count(const std::vector<double>& before, const ActiveItem& item,
                        std::int64_t cells) {
    std::int64_t best_k = 0;
    double best_val = before[cells];
    const std::int64_t k_max = std::min(item.cap, cells / item.weight);
    for (std::int64_t k = 1; k <= k_max; ++k) {
        const double val = before[cells - k * item.weight] + static_cast<double>(k) * item.cost;
        if (val < best_val) {
            best_val = val;
            best_k = k;
        }
    }
    return best_k;
}

} // namespace

KnapsackSolution min_cost_knapsack(const std::vector<KnapsackItem>& items,
                                   std::int64_t budget, std::int64_t max_cells) {
    KnapsackSolution solution;
    solution.counts.assign(items.size(), 0);
    if (budget < 0) budget = 0;

    std::vector<ActiveItem> active;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const KnapsackItem& item = items[i];
        if (item.weight <= 0) throw std::invalid_argument("knapsack item weight must be positive");
        if (item.cost >= 0.0 || item.cap == 0 || item.weight > budget) continue;
        const std::int64_t cap = item.cap < 0 ? budget / item.weight
                                              : std::min(item.cap, budget / item.weight);
        active.push_back({i, item.weight, item.cost, cap});
    }
    if (active.empty()) return solution;

    std::int64_t g = 0;
    for (const ActiveItem& item : active) g = std::gcd(g, item.weight);
    const std::int64_t cells = budget / g;
    if (cells > max_cells)
        throw OracleSizeError("instance too large for oracle: " + std::to_string(cells) +
                              " cells exceeds limit " + std::to_string(max_cells));
    for (ActiveItem& item : active) item.weight /= g;

    // Keep every layer when the table is small; otherwise recompute prefixes
    // during backtracking to bound memory by two rows.
    const bool store_layers =
        static_cast<std::int64_t>(active.size() + 1) * (cells + 1) <= 16'000'000;

    std::vector<std::vector<double>> layers;
    std::vector<double> prev(static_cast<std::size_t>(cells) + 1, 0.0);
    std::vector<double> cur;
    if (store_layers) layers.push_back(prev);
    for (const ActiveItem& item : active) {
        apply_layer(prev, cur, item);
        prev.swap(cur);
        if (store_layers) layers.push_back(prev);
    }

    std::int64_t remaining = cells;
    for (std::size_t i = active.size(); i-- > 0;) {
        const std::vector<double>* before;
        std::vector<double> scratch;
        if (store_layers) {
            before = &layers[i];
        } else {
            scratch.assign(static_cast<std::size_t>(cells) + 1, 0.0);
            std::vector<double> tmp;
            for (std::size_t j = 0; j < i; ++j) {
                apply_layer(scratch, tmp, active[j]);
                scratch.swap(tmp);
            }
            before = &scratch;
        }
        const std::int64_t k = best_count(*before, active[i], remaining);
        solution.counts[active[i].original] = k;
        solution.cost += static_cast<double>(k) * active[i].cost;
        remaining -= k * active[i].weight;
    }
    return solution;
}

namespace {

std::int64_t energy_cells(double energy, double quantum) {
    const std::int64_t w = std::llround(energy / quantum);
    if (w < 1 || std::abs(static_cast<double>(w) * quantum - energy) >
                     1e-9 * std::max(1.0, energy))
        throw std::invalid_argument("energy value not representable on the oracle grid");
    return w;
}

std::int64_t budget_cells(double budget, double quantum) {
    if (budget <= 0.0) return 0;
    return static_cast<std::int64_t>(std::floor(budget / quantum + 1e-9));
}

} // namespace

Action knapsack_oracle_edge(const QueueState& state, const NetworkSpec& spec,
                            const CarbonSnapshot& carbon, const PolicyConfig& config,
                            const OracleConfig& oracle) {
    const DppCoefficients coeffs = dpp_coefficients(state, spec, carbon, config);
    const std::size_t m_count = spec.task_types();
    const std::size_t n_count = spec.clouds();
    Action action = Action::zeros(m_count, n_count);

    // Dispatch weight depends only on the type, so for each type only the
    // cloud with the smallest b coefficient can appear in an optimal solution.
    std::vector<std::size_t> target(m_count, 0);
    std::vector<KnapsackItem> items(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t n = 1; n < n_count; ++n)
            if (coeffs.b[m][n] < coeffs.b[m][target[m]]) target[m] = n;
        items[m].weight = energy_cells(spec.edge_send_energy[m], oracle.quantum);
        items[m].cost = coeffs.b[m][target[m]];
        items[m].cap = oracle.apply_queue_caps ? state.edge_q[m] : -1;
    }
    const KnapsackSolution sol = min_cost_knapsack(
        items, budget_cells(spec.edge_budget, oracle.quantum), oracle.max_cells);
    for (std::size_t m = 0; m < m_count; ++m) action.dispatch[m][target[m]] = sol.counts[m];
    return action;
}

std::vector<std::int64_t> knapsack_oracle_cloud(std::size_t n, const QueueState& state,
                                                const NetworkSpec& spec,
                                                const CarbonSnapshot& carbon,
                                                const PolicyConfig& config,
                                                const OracleConfig& oracle) {
    if (n >= spec.clouds()) throw std::invalid_argument("cloud index out of range");
    const DppCoefficients coeffs = dpp_coefficients(state, spec, carbon, config);
    const std::size_t m_count = spec.task_types();
    std::vector<KnapsackItem> items(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        items[m].weight = energy_cells(spec.cloud_proc_energy[m][n], oracle.quantum);
        items[m].cost = coeffs.c[m][n];
        items[m].cap = oracle.apply_queue_caps ? state.cloud_q[m][n] : -1;
    }
    const KnapsackSolution sol = min_cost_knapsack(
        items, budget_cells(spec.cloud_budget[n], oracle.quantum), oracle.max_cells);
    return sol.counts;
}

Action knapsack_oracle_action(const QueueState& state, const NetworkSpec& spec,
                              const CarbonSnapshot& carbon, const PolicyConfig& config,
                              const OracleConfig& oracle) {
    Action action = knapsack_oracle_edge(state, spec, carbon, config, oracle);
    for (std::size_t n = 0; n < spec.clouds(); ++n) {
        const std::vector<std::int64_t> work = knapsack_oracle_cloud(n, state, spec, carbon,
                                                                     config, oracle);
        for (std::size_t m = 0; m < spec.task_types(); ++m) action.work[m][n] = work[m];
    }
    return action;
}

} // namespace carbonsched
