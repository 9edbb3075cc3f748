// Command-line front end: single runs, policy comparisons, V sweeps and
// oracle audits over a declarative experiment file.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "carbonsched/config.hpp"
#include "carbonsched/harness.hpp"

namespace {

using namespace carbonsched;

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> horizon;
    bool quiet = false;
};

std::string fmt(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

Experiment load_with_overrides(const GlobalOptions& opts) {
    Experiment exp = load_experiment(opts.config_path);
    if (!opts.out_dir.empty()) exp.output_dir = opts.out_dir;
    if (opts.seed) exp.seeds = {*opts.seed};
    if (opts.horizon) {
        exp.base.horizon = *opts.horizon;
        exp.base.validate();
    }
    return exp;
}

std::string run_stem(const Experiment& exp, PolicyKind policy, std::uint64_t seed) {
    return exp.output_dir + "/" + policy_name(policy) + "_seed" + std::to_string(seed);
}

RunMetrics execute_one(const Experiment& exp, PolicyKind policy, std::uint64_t seed,
                       bool write_files, bool quiet) {
    RunConfig config = exp.base;
    config.policy = policy;
    config.seed = seed;
    const RunMetrics metrics = run(config);
    if (write_files) {
        std::filesystem::create_directories(exp.output_dir);
        const std::string stem = run_stem(exp, policy, seed);
        write_metrics_csv(stem + ".csv", metrics);
        write_summary_json(stem + ".json",
                           run_config_echo(config, policy, seed, config.policy_config.V),
                           metrics);
        if (config.log_actions) write_action_log_csv(stem + "_actions.csv", metrics);
    }
    if (!quiet) {
        std::cout << policy_name(policy) << " seed=" << seed
                  << " time_avg_emissions=" << fmt(metrics.time_average_emissions)
                  << " max_mean_rate_ratio=" << fmt(metrics.max_mean_rate_ratio) << '\n';
    }
    return metrics;
}

int cmd_run(const GlobalOptions& opts) {
    const Experiment exp = load_with_overrides(opts);
    for (PolicyKind policy : exp.policies)
        for (std::uint64_t seed : exp.seeds) execute_one(exp, policy, seed, true, opts.quiet);
    return 0;
}

int cmd_compare(const GlobalOptions& opts) {
    const Experiment exp = load_with_overrides(opts);
    if (exp.policies.size() < 2)
        throw ConfigError("compare needs at least two entries in 'policies'");

    // Baseline for normalization: the queue-length policy when present,
    // otherwise the first listed policy.
    std::size_t baseline = 0;
    for (std::size_t i = 0; i < exp.policies.size(); ++i)
        if (exp.policies[i] == PolicyKind::queue_length) baseline = i;

    std::map<std::size_t, std::vector<RunMetrics>> per_policy; // policy idx -> per-seed metrics
    for (std::size_t i = 0; i < exp.policies.size(); ++i)
        for (std::uint64_t seed : exp.seeds)
            per_policy[i].push_back(execute_one(exp, exp.policies[i], seed, false, true));

    std::filesystem::create_directories(exp.output_dir);
    const std::string path = exp.output_dir + "/compare.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write comparison file: " + path);
    out << 't';
    for (PolicyKind policy : exp.policies) out << ',' << policy_name(policy) << "_cum_norm";
    out << '\n';
    const double base_final = per_policy[baseline][0].cumulative_emissions;
    const std::size_t rows = per_policy[baseline][0].series.size();
    for (std::size_t r = 0; r < rows; ++r) {
        out << per_policy[baseline][0].series[r].t;
        for (std::size_t i = 0; i < exp.policies.size(); ++i) {
            const double cum = per_policy[i][0].series[r].cumulative_emissions;
            out << ',' << fmt(base_final > 0.0 ? cum / base_final : 0.0);
        }
        out << '\n';
    }

    for (std::size_t i = 0; i < exp.policies.size(); ++i) {
        if (i == baseline) continue;
        double reduction_sum = 0.0;
        for (std::size_t s = 0; s < exp.seeds.size(); ++s) {
            const double base_cum = per_policy[baseline][s].cumulative_emissions;
            const double cum = per_policy[i][s].cumulative_emissions;
            reduction_sum += base_cum > 0.0 ? 1.0 - cum / base_cum : 0.0;
        }
        const double reduction = 100.0 * reduction_sum / static_cast<double>(exp.seeds.size());
        if (!opts.quiet)
            std::cout << policy_name(exp.policies[i]) << " vs "
                      << policy_name(exp.policies[baseline]) << ": reduction " << fmt(reduction)
                      << "% at horizon\n";
    }
    return 0;
}

int cmd_sweep(const GlobalOptions& opts) {
    const Experiment exp = load_with_overrides(opts);
    if (exp.v_grid.empty()) throw ConfigError("sweep needs a non-empty 'v_grid'");

    // Average each V row across seeds on common streams.
    std::vector<std::vector<SweepRow>> per_seed;
    for (std::uint64_t seed : exp.seeds) {
        RunConfig config = exp.base;
        config.policy = exp.policies.front();
        config.seed = seed;
        per_seed.push_back(v_sweep(config, exp.v_grid));
    }

    std::filesystem::create_directories(exp.output_dir);
    const std::string path = exp.output_dir + "/sweep.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep file: " + path);
    const std::size_t m_count = exp.base.spec.task_types();
    const std::size_t n_count = exp.base.spec.clouds();
    out << "V,avg_emissions";
    for (std::size_t m = 0; m < m_count; ++m) out << ",avg_edge_q_" << m;
    for (std::size_t m = 0; m < m_count; ++m)
        for (std::size_t n = 0; n < n_count; ++n) out << ",avg_cloud_q_" << m << '_' << n;
    out << '\n';
    const double seeds = static_cast<double>(exp.seeds.size());
    for (std::size_t v = 0; v < exp.v_grid.size(); ++v) {
        double emissions = 0.0;
        std::vector<double> edge(m_count, 0.0);
        std::vector<std::vector<double>> cloud(m_count, std::vector<double>(n_count, 0.0));
        for (const auto& rows : per_seed) {
            emissions += rows[v].time_average_emissions;
            for (std::size_t m = 0; m < m_count; ++m) {
                edge[m] += rows[v].avg_edge_queue[m];
                for (std::size_t n = 0; n < n_count; ++n)
                    cloud[m][n] += rows[v].avg_cloud_queue[m][n];
            }
        }
        out << fmt(exp.v_grid[v]) << ',' << fmt(emissions / seeds);
        for (std::size_t m = 0; m < m_count; ++m) out << ',' << fmt(edge[m] / seeds);
        for (std::size_t m = 0; m < m_count; ++m)
            for (std::size_t n = 0; n < n_count; ++n) out << ',' << fmt(cloud[m][n] / seeds);
        out << '\n';
        if (!opts.quiet)
            std::cout << "V=" << fmt(exp.v_grid[v])
                      << " avg_emissions=" << fmt(emissions / seeds) << '\n';
    }
    return 0;
}

int cmd_audit(const GlobalOptions& opts, std::int64_t slots) {
    const Experiment exp = load_with_overrides(opts);
    RunConfig config = exp.base;
    config.seed = exp.seeds.front();
    const std::vector<AuditRow> rows = oracle_audit(config, slots);

    std::filesystem::create_directories(exp.output_dir);
    const std::string path = exp.output_dir + "/audit.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write audit file: " + path);
    out << "t,greedy_obj,oracle_obj,gap\n";
    double max_gap = 0.0;
    std::size_t dominated = 0;
    for (const AuditRow& row : rows) {
        out << row.t << ',' << fmt(row.greedy_obj) << ',' << fmt(row.oracle_obj) << ','
            << fmt(row.gap) << '\n';
        max_gap = std::max(max_gap, row.gap);
        if (row.gap >= 0.0) ++dominated;
    }
    if (!opts.quiet)
        std::cout << "audited " << rows.size() << " slots, max gap " << fmt(max_gap)
                  << ", oracle dominated " << dominated << '/' << rows.size() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carbon-aware edge/cloud task scheduling simulator"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", opts.out_dir, "Output directory override");
    app.add_option("--seed", opts.seed, "Run a single seed, overriding the config seed list");
    app.add_option("--horizon", opts.horizon, "Horizon override in slots");
    app.add_flag("--quiet", opts.quiet, "Suppress per-run summary lines");

    CLI::App* run_cmd = app.add_subcommand("run", "Run every configured policy and seed");
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Run all policies on shared streams and compare emissions");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep the configured V grid");
    CLI::App* audit_cmd =
        app.add_subcommand("audit", "Compare the greedy policy against the exact oracle");
    std::int64_t audit_slots = 1000;
    audit_cmd->add_option("--slots", audit_slots, "Number of slots to audit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(opts);
        if (compare_cmd->parsed()) return cmd_compare(opts);
        if (sweep_cmd->parsed()) return cmd_sweep(opts);
        if (audit_cmd->parsed()) return cmd_audit(opts, audit_slots);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleActionError& e) {
        std::cerr << "runtime assertion: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
