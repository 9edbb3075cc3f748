#include "carbonsched/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace carbonsched {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

const json& require_key(const json& obj, const std::string& where, const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("missing key '" + key + "' in " + where);
    return *it;
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
    const json& v = require_key(obj, where, key);
    if (!v.is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
    return v.get<double>();
}

NetworkSpec parse_network(const json& obj) {
    reject_unknown_keys(obj, "network",
                        {"clouds", "edge_send_energy", "cloud_proc_energy", "edge_budget",
                         "cloud_budget"});
    NetworkSpec spec;
    const json& edge_energy = require_key(obj, "network", "edge_send_energy");
    if (!edge_energy.is_array() || edge_energy.empty())
        throw ConfigError("'network.edge_send_energy' must be a non-empty array");
    spec.edge_send_energy = edge_energy.get<std::vector<double>>();
    const std::size_t m_count = spec.edge_send_energy.size();

    const std::size_t n_count = static_cast<std::size_t>(
        get_number(obj, "network", "clouds"));
    if (n_count < 1) throw ConfigError("'network.clouds' must be at least 1");

    const json& proc = require_key(obj, "network", "cloud_proc_energy");
    if (!proc.is_array() || proc.size() != m_count)
        throw ConfigError("'network.cloud_proc_energy' must list one entry per task type");
    for (const json& row : proc) {
        if (row.is_number()) {
            // homogeneous clouds: one scalar per type
            spec.cloud_proc_energy.push_back(std::vector<double>(n_count, row.get<double>()));
        } else if (row.is_array() && row.size() == n_count) {
            spec.cloud_proc_energy.push_back(row.get<std::vector<double>>());
        } else {
            throw ConfigError("'network.cloud_proc_energy' rows must be a scalar or an array "
                              "of one value per cloud");
        }
    }

    spec.edge_budget = get_number(obj, "network", "edge_budget");
    const json& cloud_budget = require_key(obj, "network", "cloud_budget");
    if (cloud_budget.is_number()) {
        spec.cloud_budget.assign(n_count, cloud_budget.get<double>());
    } else if (cloud_budget.is_array() && cloud_budget.size() == n_count) {
        spec.cloud_budget = cloud_budget.get<std::vector<double>>();
    } else {
        throw ConfigError("'network.cloud_budget' must be a scalar or an array of one value "
                          "per cloud");
    }

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid 'network' section: ") + e.what());
    }
    return spec;
}

std::string resolve_path(const std::string& raw, const std::filesystem::path& base_dir) {
    std::filesystem::path p(raw);
    if (p.is_relative()) p = base_dir / p;
    return p.string();
}

ArrivalModel parse_arrivals(const json& obj, const std::filesystem::path& base_dir,
                            std::size_t task_types) {
    reject_unknown_keys(obj, "arrivals", {"kind", "max", "seed", "path"});
    ArrivalModel model;
    const std::string kind = require_key(obj, "arrivals", "kind").get<std::string>();
    if (kind == "uniform_iid")
        model.kind = ArrivalKind::uniform_iid;
    else if (kind == "constant")
        model.kind = ArrivalKind::constant;
    else if (kind == "file_trace")
        model.kind = ArrivalKind::file_trace;
    else
        throw ConfigError("'arrivals.kind' must be uniform_iid, constant or file_trace");

    if (model.kind == ArrivalKind::file_trace) {
        const std::string path =
            resolve_path(require_key(obj, "arrivals", "path").get<std::string>(), base_dir);
        auto trace = std::make_shared<ArrivalsTrace>(load_arrivals_csv(path));
        for (const auto& row : trace->slots)
            if (row.size() != task_types)
                throw ConfigError("arrivals trace column count does not match task types");
        model.trace = std::move(trace);
    } else {
        model.max_arrivals = static_cast<std::int64_t>(get_number(obj, "arrivals", "max"));
        if (model.max_arrivals < 0) throw ConfigError("'arrivals.max' must be non-negative");
    }
    if (obj.contains("seed")) model.seed = obj["seed"].get<std::uint64_t>();
    return model;
}

CarbonModel parse_carbon(const json& obj, const std::filesystem::path& base_dir,
                         std::size_t clouds) {
    reject_unknown_keys(obj, "carbon",
                        {"kind", "max", "seed", "path", "edge_region", "cloud_regions"});
    CarbonModel model;
    const std::string kind = require_key(obj, "carbon", "kind").get<std::string>();
    if (kind == "uniform_iid")
        model.kind = CarbonKind::uniform_iid;
    else if (kind == "constant")
        model.kind = CarbonKind::constant;
    else if (kind == "csv_trace")
        model.kind = CarbonKind::csv_trace;
    else
        throw ConfigError("'carbon.kind' must be uniform_iid, constant or csv_trace");

    if (model.kind == CarbonKind::csv_trace) {
        const std::string path =
            resolve_path(require_key(obj, "carbon", "path").get<std::string>(), base_dir);
        const std::string edge_region =
            require_key(obj, "carbon", "edge_region").get<std::string>();
        const auto cloud_regions =
            require_key(obj, "carbon", "cloud_regions").get<std::vector<std::string>>();
        if (cloud_regions.size() != clouds)
            throw ConfigError("'carbon.cloud_regions' must name one region per cloud");
        model.trace =
            std::make_shared<CarbonTrace>(load_carbon_csv(path, edge_region, cloud_regions));
    } else {
        model.max_intensity = get_number(obj, "carbon", "max");
        if (model.max_intensity < 0.0) throw ConfigError("'carbon.max' must be non-negative");
    }
    if (obj.contains("seed")) model.seed = obj["seed"].get<std::uint64_t>();
    return model;
}

PolicyConfig parse_policy_config(const json& obj) {
    reject_unknown_keys(obj, "policy_config", {"V", "edge_break_mode", "literal_edge_deduction"});
    PolicyConfig config;
    if (obj.contains("V")) {
        config.V = obj["V"].get<double>();
        if (config.V < 0.0) throw ConfigError("'policy_config.V' must be non-negative");
    }
    if (obj.contains("edge_break_mode")) {
        const std::string mode = obj["edge_break_mode"].get<std::string>();
        if (mode == "break_on_first_nonnegative")
            config.edge_break_mode = EdgeBreakMode::break_on_first_nonnegative;
        else if (mode == "skip_and_continue")
            config.edge_break_mode = EdgeBreakMode::skip_and_continue;
        else
            throw ConfigError("'policy_config.edge_break_mode' must be "
                              "break_on_first_nonnegative or skip_and_continue");
    }
    if (obj.contains("literal_edge_deduction"))
        config.literal_edge_deduction = obj["literal_edge_deduction"].get<bool>();
    return config;
}

OracleConfig parse_oracle(const json& obj) {
    reject_unknown_keys(obj, "oracle", {"quantum", "max_cells", "apply_queue_caps"});
    OracleConfig config;
    if (obj.contains("quantum")) {
        config.quantum = obj["quantum"].get<double>();
        if (config.quantum <= 0.0) throw ConfigError("'oracle.quantum' must be positive");
    }
    if (obj.contains("max_cells")) {
        config.max_cells = obj["max_cells"].get<std::int64_t>();
        if (config.max_cells < 1) throw ConfigError("'oracle.max_cells' must be positive");
    }
    if (obj.contains("apply_queue_caps"))
        config.apply_queue_caps = obj["apply_queue_caps"].get<bool>();
    return config;
}

} // namespace

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::carbon_intensity: return "carbon_intensity";
        case PolicyKind::queue_length: return "queue_length";
        case PolicyKind::oracle_exact: return "oracle_exact";
    }
    return "unknown";
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "carbon_intensity") return PolicyKind::carbon_intensity;
    if (name == "queue_length") return PolicyKind::queue_length;
    if (name == "oracle_exact") return PolicyKind::oracle_exact;
    throw ConfigError("unknown policy '" + name +
                      "': expected carbon_intensity, queue_length or oracle_exact");
}

Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    reject_unknown_keys(doc, "config root",
                        {"network", "arrivals", "carbon", "policies", "policy", "policy_config",
                         "oracle", "v_grid", "horizon", "metrics_stride", "seed", "seeds",
                         "output_dir", "log_actions"});

    const std::filesystem::path base_dir = std::filesystem::path(path).parent_path();

    Experiment exp;
    exp.base.spec = parse_network(require_key(doc, "config root", "network"));
    exp.base.arrivals = parse_arrivals(require_key(doc, "config root", "arrivals"), base_dir,
                                       exp.base.spec.task_types());
    exp.base.carbon =
        parse_carbon(require_key(doc, "config root", "carbon"), base_dir, exp.base.spec.clouds());
    if (doc.contains("policy_config")) exp.base.policy_config = parse_policy_config(doc["policy_config"]);
    if (doc.contains("oracle")) exp.base.oracle = parse_oracle(doc["oracle"]);

    if (doc.contains("policies")) {
        for (const json& p : doc["policies"]) exp.policies.push_back(parse_policy(p.get<std::string>()));
    }
    if (doc.contains("policy")) exp.policies.push_back(parse_policy(doc["policy"].get<std::string>()));
    if (exp.policies.empty()) throw ConfigError("config must name a 'policy' or 'policies' list");
    exp.base.policy = exp.policies.front();

    if (doc.contains("v_grid")) {
        exp.v_grid = doc["v_grid"].get<std::vector<double>>();
        for (double v : exp.v_grid)
            if (v < 0.0) throw ConfigError("'v_grid' values must be non-negative");
    }

    if (doc.contains("horizon")) exp.base.horizon = doc["horizon"].get<std::int64_t>();
    if (doc.contains("metrics_stride"))
        exp.base.metrics_stride = doc["metrics_stride"].get<std::int64_t>();
    if (doc.contains("log_actions")) exp.base.log_actions = doc["log_actions"].get<bool>();

    if (doc.contains("seeds"))
        exp.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    if (doc.contains("seed")) exp.seeds.push_back(doc["seed"].get<std::uint64_t>());
    if (exp.seeds.empty()) exp.seeds.push_back(0);

    if (doc.contains("output_dir")) exp.output_dir = doc["output_dir"].get<std::string>();

    try {
        exp.base.seed = exp.seeds.front();
        exp.base.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return exp;
}

nlohmann::json run_config_echo(const RunConfig& config, PolicyKind policy,
                               std::uint64_t seed, double v) {
    json echo;
    echo["network"]["edge_send_energy"] = config.spec.edge_send_energy;
    echo["network"]["cloud_proc_energy"] = config.spec.cloud_proc_energy;
    echo["network"]["edge_budget"] = config.spec.edge_budget;
    echo["network"]["cloud_budget"] = config.spec.cloud_budget;
    echo["network"]["clouds"] = config.spec.clouds();

    switch (config.arrivals.kind) {
        case ArrivalKind::uniform_iid: echo["arrivals"]["kind"] = "uniform_iid"; break;
        case ArrivalKind::constant: echo["arrivals"]["kind"] = "constant"; break;
        case ArrivalKind::file_trace: echo["arrivals"]["kind"] = "file_trace"; break;
    }
    echo["arrivals"]["max"] = config.arrivals.max_arrivals;
    echo["arrivals"]["seed"] = config.arrivals.seed;

    switch (config.carbon.kind) {
        case CarbonKind::uniform_iid: echo["carbon"]["kind"] = "uniform_iid"; break;
        case CarbonKind::constant: echo["carbon"]["kind"] = "constant"; break;
        case CarbonKind::csv_trace: echo["carbon"]["kind"] = "csv_trace"; break;
    }
    echo["carbon"]["max"] = config.carbon.max_intensity;
    echo["carbon"]["seed"] = config.carbon.seed;
    if (config.carbon.trace) echo["carbon"]["regions"] = config.carbon.trace->region_names;

    echo["policy"] = policy_name(policy);
    echo["policy_config"]["V"] = v;
    echo["policy_config"]["edge_break_mode"] =
        config.policy_config.edge_break_mode == EdgeBreakMode::break_on_first_nonnegative
            ? "break_on_first_nonnegative"
            : "skip_and_continue";
    echo["policy_config"]["literal_edge_deduction"] = config.policy_config.literal_edge_deduction;
    echo["horizon"] = config.horizon;
    echo["metrics_stride"] = config.metrics_stride;
    echo["seed"] = seed;
    return echo;
}

} // namespace carbonsched
