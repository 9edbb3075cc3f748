#ifndef CARBONSCHED_CONFIG_HPP
#define CARBONSCHED_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "carbonsched/harness.hpp"

#include "json.hpp"

namespace carbonsched {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A fully validated experiment file: the shared run configuration plus the
/// policy list, V grid and seed list the commands iterate over.
struct Experiment {
    RunConfig base; // policy/V/seed fields are filled per run
    std::vector<PolicyKind> policies;
    std::vector<double> v_grid;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = "out";
};

// Parses and validates an experiment JSON file. Unknown keys are rejected;
// relative trace paths resolve against the config file's directory.
// Throws ConfigError with a field-level message.
Experiment load_experiment(const std::string& path);

const char* policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

// Resolved-configuration echo for summary outputs; round-trips everything
// needed to reproduce the run bit-identically.
nlohmann::json run_config_echo(const RunConfig& config, PolicyKind policy,
                               std::uint64_t seed, double v);

} // namespace carbonsched

#endif
