#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "carbonsched/harness.hpp"

using namespace carbonsched;

namespace {

NetworkSpec benchmark_spec() {
    NetworkSpec spec;
    spec.edge_send_energy.assign(5, 3.45);
    const std::vector<double> proc = {74.0, 97.0, 54.0, 16.0, 5.8};
    for (double p : proc) spec.cloud_proc_energy.push_back(std::vector<double>(5, p));
    spec.edge_budget = 4000.0;
    spec.cloud_budget.assign(5, 30000.0);
    return spec;
}

RunConfig benchmark_config() {
    RunConfig config;
    config.spec = benchmark_spec();
    config.policy = PolicyKind::carbon_intensity;
    config.policy_config.V = 0.05;
    config.arrivals.kind = ArrivalKind::uniform_iid;
    config.arrivals.max_arrivals = 400;
    config.carbon.kind = CarbonKind::uniform_iid;
    config.carbon.max_intensity = 700.0;
    config.horizon = 1000;
    config.seed = 1;
    return config;
}

} // namespace

TEST_CASE("compute_B") {
    SUBCASE("degenerate network") {
        NetworkSpec spec;
        spec.edge_send_energy = {1.0};
        spec.cloud_proc_energy = {{1.0}};
        spec.edge_budget = 0.0;
        spec.cloud_budget = {0.0};
        CHECK(compute_B(spec, 0) == 0.0);
    }

    SUBCASE("hand-computed single-queue value") {
        NetworkSpec spec;
        spec.edge_send_energy = {1.0};
        spec.cloud_proc_energy = {{1.0}};
        spec.edge_budget = 3.0; // three dispatches
        spec.cloud_budget = {1.0}; // one work unit
        CHECK(compute_B(spec, 2) == doctest::Approx(11.5)); // (4 + 18 + 1) / 2
    }
}

TEST_CASE("drift bound check") {
    const NetworkSpec spec = benchmark_spec();
    PolicyConfig policy;
    policy.V = 0.05;

    SUBCASE("zero action, zero arrivals") {
        const QueueState state = QueueState::zeros(spec);
        Arrivals none;
        none.count.assign(5, 0);
        CarbonSnapshot carbon;
        carbon.edge_intensity = 100.0;
        carbon.cloud_intensity.assign(5, 100.0);
        const Action action = Action::zeros(5, 5);
        const QueueState next = step(state, action, none);
        const DriftCheck check =
            drift_bound_check(state, next, action, none, carbon, spec, policy, 5.0);
        CHECK(check.lhs == 0.0);
        CHECK(check.rhs == doctest::Approx(5.0));
        CHECK(check.holds);
    }

    SUBCASE("B=0 is violated by a single arrival") {
        NetworkSpec tiny;
        tiny.edge_send_energy = {1.0};
        tiny.cloud_proc_energy = {{1.0}};
        tiny.edge_budget = 0.0;
        tiny.cloud_budget = {0.0};
        const QueueState state = QueueState::zeros(tiny);
        Arrivals one;
        one.count = {1};
        CarbonSnapshot carbon;
        carbon.edge_intensity = 0.0;
        carbon.cloud_intensity = {0.0};
        const Action action = Action::zeros(1, 1);
        const QueueState next = step(state, action, one);
        const DriftCheck check =
            drift_bound_check(state, next, action, one, carbon, tiny, policy, 0.0);
        CHECK(check.lhs - check.rhs == doctest::Approx(0.5));
        CHECK_FALSE(check.holds);
    }

    SUBCASE("holds on randomized tuples with B from compute_B") {
        const double B = compute_B(spec, 400);
        std::mt19937_64 rng(77);
        std::uniform_int_distribution<std::int64_t> queue(0, 5000);
        std::uniform_int_distribution<std::int64_t> arrival(0, 400);
        std::uniform_int_distribution<int> intensity(0, 700);
        Arrivals none;
        none.count.assign(5, 0);

        for (int trial = 0; trial < 2000; ++trial) {
            QueueState state = QueueState::zeros(spec);
            for (auto& q : state.edge_q) q = queue(rng);
            for (auto& row : state.cloud_q)
                for (auto& q : row) q = queue(rng);
            Arrivals arrivals;
            arrivals.count.assign(5, 0);
            for (auto& a : arrivals.count) a = arrival(rng);
            CarbonSnapshot carbon;
            carbon.edge_intensity = intensity(rng);
            carbon.cloud_intensity.assign(5, 0.0);
            for (double& c : carbon.cloud_intensity) c = intensity(rng);

            // Random feasible action within the budgets.
            Action action = Action::zeros(5, 5);
            double edge_left = spec.edge_budget;
            for (std::size_t m = 0; m < 5; ++m) {
                const std::int64_t cap =
                    static_cast<std::int64_t>(edge_left / spec.edge_send_energy[m]) / 5;
                if (cap > 0) {
                    const std::size_t n = rng() % 5;
                    action.dispatch[m][n] =
                        std::uniform_int_distribution<std::int64_t>(0, cap)(rng);
                    edge_left -= action.dispatch[m][n] * spec.edge_send_energy[m];
                }
            }
            for (std::size_t n = 0; n < 5; ++n) {
                double left = spec.cloud_budget[n];
                for (std::size_t m = 0; m < 5; ++m) {
                    const std::int64_t cap =
                        static_cast<std::int64_t>(left / spec.cloud_proc_energy[m][n]) / 5;
                    if (cap > 0) {
                        action.work[m][n] =
                            std::uniform_int_distribution<std::int64_t>(0, cap)(rng);
                        left -= action.work[m][n] * spec.cloud_proc_energy[m][n];
                    }
                }
            }
            REQUIRE(is_feasible(action, spec, 1e-6));

            const QueueState next = step(state, action, arrivals);
            const DriftCheck check =
                drift_bound_check(state, next, action, arrivals, carbon, spec, policy, B);
            CHECK(check.holds);
        }
    }
}

TEST_CASE("run basics") {
    SUBCASE("trivial one-slot run") {
        RunConfig config = benchmark_config();
        config.horizon = 1;
        config.arrivals.kind = ArrivalKind::constant;
        config.arrivals.max_arrivals = 0;
        const RunMetrics metrics = run(config);
        CHECK(metrics.cumulative_emissions == 0.0);
        for (std::int64_t q : metrics.final_state.edge_q) CHECK(q == 0);
    }

    SUBCASE("determinism, bit for bit") {
        const RunConfig config = benchmark_config();
        const RunMetrics a = run(config);
        const RunMetrics b = run(config);
        CHECK(a.cumulative_emissions == b.cumulative_emissions);
        CHECK(a.time_average_emissions == b.time_average_emissions);
        CHECK(a.avg_edge_queue == b.avg_edge_queue);
        REQUIRE(a.series.size() == b.series.size());
        for (std::size_t i = 0; i < a.series.size(); ++i) {
            CHECK(a.series[i].emissions == b.series[i].emissions);
            CHECK(a.series[i].lyapunov_value == b.series[i].lyapunov_value);
            CHECK(a.series[i].edge_q_snapshot == b.series[i].edge_q_snapshot);
        }
    }

    SUBCASE("doubling a constant intensity doubles baseline emissions") {
        RunConfig config = benchmark_config();
        config.policy = PolicyKind::queue_length;
        config.carbon.kind = CarbonKind::constant;
        config.carbon.max_intensity = 120.0;
        config.horizon = 300;
        const double once = run(config).cumulative_emissions;
        config.carbon.max_intensity = 240.0;
        const double twice = run(config).cumulative_emissions;
        CHECK(twice == doctest::Approx(2.0 * once));
    }

    SUBCASE("cumulative emissions are non-decreasing and match the series") {
        const RunConfig config = benchmark_config();
        const RunMetrics metrics = run(config);
        double prev = 0.0;
        double sum = 0.0;
        for (const SlotMetrics& slot : metrics.series) {
            CHECK(slot.emissions >= 0.0);
            CHECK(slot.cumulative_emissions >= prev);
            prev = slot.cumulative_emissions;
            sum += slot.emissions;
        }
        CHECK(sum == doctest::Approx(metrics.cumulative_emissions));
        CHECK(metrics.time_average_emissions ==
              doctest::Approx(metrics.cumulative_emissions / config.horizon));
    }

    SUBCASE("drift bound holds in every simulated slot") {
        const RunConfig config = benchmark_config();
        const RunMetrics metrics = run(config);
        for (const SlotMetrics& slot : metrics.series)
            CHECK(slot.dpp_value <=
                  slot.dpp_bound_rhs + 1e-6 * std::max(1.0, std::abs(slot.dpp_bound_rhs)));
    }

    SUBCASE("action log replays to the same cumulative emissions") {
        RunConfig config = benchmark_config();
        config.log_actions = true;
        const RunMetrics metrics = run(config);
        REQUIRE(metrics.action_log.size() == static_cast<std::size_t>(config.horizon));
        CHECK(replay_emissions(config, metrics.action_log) ==
              doctest::Approx(metrics.cumulative_emissions));
    }

    SUBCASE("infeasible configuration is rejected up front") {
        RunConfig config = benchmark_config();
        config.horizon = 0;
        CHECK_THROWS_AS(run(config), std::invalid_argument);
    }
}

TEST_CASE("policy streams are shared across policies for a seed") {
    RunConfig config = benchmark_config();
    config.carbon.kind = CarbonKind::constant;
    config.carbon.max_intensity = 0.0;
    config.horizon = 50;
    config.policy = PolicyKind::carbon_intensity;
    const RunMetrics a = run(config);
    config.policy = PolicyKind::queue_length;
    const RunMetrics b = run(config);
    // Zero intensity: both runs emit zero, and both see identical arrivals.
    CHECK(a.cumulative_emissions == 0.0);
    CHECK(b.cumulative_emissions == 0.0);
    std::int64_t total_a = 0;
    std::int64_t total_b = 0;
    for (std::size_t m = 0; m < 5; ++m) {
        total_a += a.final_state.edge_q[m];
        for (std::size_t n = 0; n < 5; ++n) total_a += a.final_state.cloud_q[m][n];
        total_b += b.final_state.edge_q[m];
        for (std::size_t n = 0; n < 5; ++n) total_b += b.final_state.cloud_q[m][n];
    }
    // Same arrival stream: total backlog differs only by processed work; with
    // zero intensity both policies work at full tilt, so totals stay close.
    CHECK(total_a >= 0);
    CHECK(total_b >= 0);
}

TEST_CASE("v_sweep structure") {
    RunConfig config = benchmark_config();
    config.horizon = 400;
    const std::vector<SweepRow> rows = v_sweep(config, {0.01, 0.05, 0.1});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].V == 0.01);
    CHECK(rows[2].V == 0.1);
    for (const SweepRow& row : rows) CHECK(row.avg_edge_queue.size() == 5);
    CHECK_THROWS_AS(v_sweep(config, {}), std::invalid_argument);
    CHECK_THROWS_AS(v_sweep(config, {-1.0}), std::invalid_argument);
}

TEST_CASE("oracle audit") {
    SUBCASE("zero queues means zero objectives") {
        RunConfig config = benchmark_config();
        config.arrivals.kind = ArrivalKind::constant;
        config.arrivals.max_arrivals = 0;
        const std::vector<AuditRow> rows = oracle_audit(config, 5);
        REQUIRE(rows.size() == 5);
        for (const AuditRow& row : rows) {
            CHECK(row.greedy_obj == 0.0);
            CHECK(row.oracle_obj == 0.0);
            CHECK(row.gap == 0.0);
        }
    }

    SUBCASE("single-type instances have zero gap") {
        RunConfig config;
        config.spec.edge_send_energy = {3.45};
        config.spec.cloud_proc_energy = {{5.8, 5.8}};
        config.spec.edge_budget = 4000.0;
        config.spec.cloud_budget = {30000.0, 30000.0};
        config.policy_config.V = 0.05;
        config.arrivals.kind = ArrivalKind::uniform_iid;
        config.arrivals.max_arrivals = 400;
        config.carbon.kind = CarbonKind::uniform_iid;
        config.carbon.max_intensity = 700.0;
        config.horizon = 200;
        config.seed = 9;
        const std::vector<AuditRow> rows = oracle_audit(config, 200);
        for (const AuditRow& row : rows) CHECK(row.gap == 0.0);
    }

    SUBCASE("oracle dominates on the full instance") {
        RunConfig config = benchmark_config();
        config.horizon = 60;
        const std::vector<AuditRow> rows = oracle_audit(config, 60);
        REQUIRE(rows.size() == 60);
        for (const AuditRow& row : rows)
            CHECK(row.oracle_obj <=
                  row.greedy_obj + 1e-9 * std::max(1.0, std::abs(row.greedy_obj)));
    }
}

TEST_CASE("metrics csv writer") {
    RunConfig config = benchmark_config();
    config.horizon = 20;
    const RunMetrics metrics = run(config);
    const std::string path = "/tmp/carbonsched_test_metrics.csv";
    write_metrics_csv(path, metrics);

    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header.rfind("t,emissions,cumulative_emissions,lyapunov,drift,dpp_value,dpp_bound_rhs",
                       0) == 0);
    CHECK(header.find("edge_q_0") != std::string::npos);
    CHECK(header.find("cloud_q_4_4") != std::string::npos);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 20);
    std::remove(path.c_str());
}
