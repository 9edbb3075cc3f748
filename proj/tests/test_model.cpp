#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "carbonsched/model.hpp"

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

} // namespace

TEST_CASE("spec validation rejects bad shapes and values") {
    NetworkSpec spec = benchmark_spec();
    CHECK_NOTHROW(spec.validate());

    NetworkSpec bad = spec;
    bad.cloud_proc_energy[2].pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = spec;
    bad.edge_send_energy[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = spec;
    bad.cloud_budget[1] = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("energy totals") {
    const NetworkSpec spec = benchmark_spec();

    SUBCASE("all-zero action") {
        const Action action = Action::zeros(5, 5);
        const EnergyTotals totals = energy_totals(action, spec);
        CHECK(totals.edge == 0.0);
        for (double c : totals.cloud) CHECK(c == 0.0);
    }

    SUBCASE("two dispatches of type 1") {
        Action action = Action::zeros(5, 5);
        action.dispatch[0][0] = 2;
        CHECK(energy_totals(action, spec).edge == doctest::Approx(6.90));
    }

    SUBCASE("ResNet50 plus InceptionV3 at cloud 0") {
        Action action = Action::zeros(5, 5);
        action.work[0][0] = 1;
        action.work[1][0] = 1;
        CHECK(energy_totals(action, spec).cloud[0] == doctest::Approx(171.0));
    }

    SUBCASE("dimension mismatch") {
        const Action action = Action::zeros(4, 5);
        CHECK_THROWS_AS(energy_totals(action, spec), std::invalid_argument);
    }
}

TEST_CASE("feasibility against the edge budget") {
    const NetworkSpec spec = benchmark_spec();
    CHECK(is_feasible(Action::zeros(5, 5), spec));

    Action action = Action::zeros(5, 5);
    action.dispatch[0][0] = 1160; // 4002 kWh
    CHECK_FALSE(is_feasible(action, spec));
    action.dispatch[0][0] = 1159; // 3998.55 kWh
    CHECK(is_feasible(action, spec));
}

TEST_CASE("carbon emissions") {
    const NetworkSpec spec = benchmark_spec();
    CarbonSnapshot carbon;
    carbon.edge_intensity = 100.0;
    carbon.cloud_intensity.assign(5, 0.0);

    CHECK(carbon_emissions(Action::zeros(5, 5), spec, carbon) == 0.0);

    Action action = Action::zeros(5, 5);
    action.dispatch[0][0] = 2; // edge total 6.90
    CHECK(carbon_emissions(action, spec, carbon) == doctest::Approx(690.0));

    SUBCASE("scaling intensities scales emissions") {
        std::mt19937_64 rng(7);
        action.work[3][2] = 12;
        action.dispatch[4][1] = 5;
        carbon.cloud_intensity = {10.0, 250.0, 31.5, 0.0, 700.0};
        const double base = carbon_emissions(action, spec, carbon);
        for (double k : {2.0, 0.5, 13.25}) {
            CarbonSnapshot scaled = carbon;
            scaled.edge_intensity *= k;
            for (double& c : scaled.cloud_intensity) c *= k;
            CHECK(carbon_emissions(action, spec, scaled) == doctest::Approx(k * base));
        }
    }

    SUBCASE("linear in the action") {
        Action a = Action::zeros(5, 5);
        Action b = Action::zeros(5, 5);
        a.dispatch[1][1] = 3;
        a.work[2][0] = 4;
        b.dispatch[0][2] = 7;
        b.work[4][4] = 11;
        Action sum = Action::zeros(5, 5);
        for (std::size_t m = 0; m < 5; ++m) {
            for (std::size_t n = 0; n < 5; ++n) {
                sum.dispatch[m][n] = a.dispatch[m][n] + b.dispatch[m][n];
                sum.work[m][n] = a.work[m][n] + b.work[m][n];
            }
        }
        carbon.cloud_intensity = {50.0, 60.0, 70.0, 80.0, 90.0};
        CHECK(carbon_emissions(sum, spec, carbon) ==
              doctest::Approx(carbon_emissions(a, spec, carbon) +
                              carbon_emissions(b, spec, carbon)));
    }
}

TEST_CASE("queue dynamics") {
    const NetworkSpec spec = benchmark_spec();
    QueueState state = QueueState::zeros(spec);

    SUBCASE("identity on zero action and arrivals") {
        state.edge_q = {5, 0, 3, 0, 0};
        Arrivals none;
        none.count.assign(5, 0);
        const QueueState next = step(state, Action::zeros(5, 5), none);
        CHECK(next.t == 1);
        CHECK(next.edge_q == state.edge_q);
        CHECK(next.cloud_q == state.cloud_q);
    }

    SUBCASE("edge drain with arrivals") {
        state.edge_q[0] = 5;
        Action action = Action::zeros(5, 5);
        action.dispatch[0][0] = 2;
        action.dispatch[0][3] = 1;
        Arrivals arrivals;
        arrivals.count.assign(5, 0);
        arrivals.count[0] = 2;
        const QueueState next = step(state, action, arrivals);
        CHECK(next.edge_q[0] == 4);
        CHECK(next.cloud_q[0][0] == 2);
        CHECK(next.cloud_q[0][3] == 1);
    }

    SUBCASE("cloud over-drain saturates at zero") {
        state.cloud_q[0][0] = 2;
        Action action = Action::zeros(5, 5);
        action.work[0][0] = 7;
        action.dispatch[0][0] = 1;
        Arrivals none;
        none.count.assign(5, 0);
        const QueueState next = step(state, action, none);
        CHECK(next.cloud_q[0][0] == 1);
    }

    SUBCASE("queues stay non-negative over random trajectories") {
        std::mt19937_64 rng(42);
        std::uniform_int_distribution<std::int64_t> small(0, 6);
        QueueState s = QueueState::zeros(spec);
        for (int t = 0; t < 300; ++t) {
            Action action = Action::zeros(5, 5);
            Arrivals arrivals;
            arrivals.count.assign(5, 0);
            for (std::size_t m = 0; m < 5; ++m) {
                arrivals.count[m] = small(rng);
                for (std::size_t n = 0; n < 5; ++n) {
                    action.dispatch[m][n] = small(rng);
                    action.work[m][n] = small(rng);
                }
            }
            s = step(s, action, arrivals);
            for (std::int64_t q : s.edge_q) CHECK(q >= 0);
            for (const auto& row : s.cloud_q)
                for (std::int64_t q : row) CHECK(q >= 0);
        }
        CHECK(s.t == 300);
    }

    SUBCASE("negative action entries rejected") {
        Action action = Action::zeros(5, 5);
        action.work[1][1] = -1;
        Arrivals none;
        none.count.assign(5, 0);
        CHECK_THROWS_AS(step(state, action, none), std::invalid_argument);
    }

    SUBCASE("overflow is a hard error") {
        state.edge_q[0] = INT64_MAX;
        Arrivals arrivals;
        arrivals.count.assign(5, 0);
        arrivals.count[0] = 1;
        CHECK_THROWS_AS(step(state, Action::zeros(5, 5), arrivals), std::overflow_error);
    }
}

TEST_CASE("lyapunov function") {
    NetworkSpec spec;
    spec.edge_send_energy = {1.0};
    spec.cloud_proc_energy = {{1.0}};
    spec.edge_budget = 1.0;
    spec.cloud_budget = {1.0};

    QueueState state = QueueState::zeros(spec);
    CHECK(lyapunov(state) == 0.0);

    state.edge_q[0] = 3;
    state.cloud_q[0][0] = 4;
    CHECK(lyapunov(state) == doctest::Approx(12.5));

    SUBCASE("invariant under permuting equal cloud queues") {
        const NetworkSpec wide = [] {
            NetworkSpec s;
            s.edge_send_energy = {1.0};
            s.cloud_proc_energy = {{1.0, 1.0, 1.0}};
            s.edge_budget = 1.0;
            s.cloud_budget = {1.0, 1.0, 1.0};
            return s;
        }();
        QueueState a = QueueState::zeros(wide);
        a.cloud_q[0] = {2, 9, 5};
        QueueState b = QueueState::zeros(wide);
        b.cloud_q[0] = {9, 5, 2};
        CHECK(lyapunov(a) == lyapunov(b));
    }

    SUBCASE("positive unless all queues are zero") {
        QueueState s = QueueState::zeros(spec);
        s.cloud_q[0][0] = 1;
        CHECK(lyapunov(s) > 0.0);
    }
}
