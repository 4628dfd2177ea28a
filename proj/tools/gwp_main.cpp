// gwp: global win probability analysis for two-arm cluster randomized
// trials with multiple endpoints, plus the matching simulation engine.
//
// Subcommands:
//   analyze       rank-based analysis of a tab-delimited trial file
//   simulate      replicated scenario experiments (coverage/error metrics)
//   oracle-check  self-validating equivalence suites on random fixtures

#include "gwp/errors.hpp"
#include "gwp/oracle.hpp"
#include "gwp/report.hpp"
#include "gwp/scenario.hpp"
#include "gwp/tsv.hpp"
#include "gwp/version.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;
constexpr int kExitConvergence = 4;

constexpr std::uint64_t kDefaultSeed = 20250101;

struct EndpointArg {
    gwp::EndpointSpec spec;
    std::string column;
};

EndpointArg parse_endpoint_arg(const std::string& raw) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = raw.find(':', start);
        if (pos == std::string::npos) {
            parts.push_back(raw.substr(start));
            break;
        }
        parts.push_back(raw.substr(start, pos - start));
        start = pos + 1;
    }
    if (parts.size() != 4)
        throw CLI::ValidationError("--endpoint expects name:column:direction:weight, got '" +
                                   raw + "'");
    EndpointArg e;
    e.spec.name = parts[0];
    e.column = parts[1];
    if (parts[2] == "higher" || parts[2] == "higher_is_better")
        e.spec.direction = gwp::Direction::higher_is_better;
    else if (parts[2] == "lower" || parts[2] == "lower_is_better")
        e.spec.direction = gwp::Direction::lower_is_better;
    else
        throw CLI::ValidationError("--endpoint direction must be higher or lower, got '" +
                                   parts[2] + "'");
    try {
        e.spec.weight = std::stod(parts[3]);
    } catch (...) {
        throw CLI::ValidationError("--endpoint weight must be numeric, got '" + parts[3] + "'");
    }
    if (e.spec.weight < 0.0)
        throw CLI::ValidationError("--endpoint weight must be >= 0");
    return e;
}

void write_output(const std::string& text, const std::string& out_path) {
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw gwp::IoError("cannot open output file '" + out_path + "'");
        out << text;
    }
}

int run_analyze(const std::string& input, const std::string& arm_col,
                const std::string& cluster_col, const std::string& id_col,
                const std::vector<std::string>& endpoint_args, const std::string& control_label,
                const std::string& treatment_label, double level, const std::string& scale,
                const std::string& crit, int df_override, std::uint64_t seed,
                const std::string& out_path, bool machine) {
    gwp::TsvSchema schema;
    schema.arm_col = arm_col;
    schema.cluster_col = cluster_col;
    schema.id_col = id_col;
    schema.control_label = control_label;
    schema.treatment_label = treatment_label;

    std::vector<gwp::EndpointSpec> endpoints;
    for (const auto& raw : endpoint_args) {
        const EndpointArg e = parse_endpoint_arg(raw);
        endpoints.push_back(e.spec);
        schema.endpoint_cols.push_back(e.column);
    }

    auto [data, validation] = gwp::load_trial_tsv(input, schema, endpoints);

    gwp::AnalysisOptions opts;
    opts.level = level;
    opts.critical = crit == "z" ? gwp::Critical::normal_z : gwp::Critical::student_t;
    opts.df_override = df_override;
    if (scale == "identity")
        opts.scale = gwp::IntervalScaleChoice::identity;
    else if (scale == "logit")
        opts.scale = gwp::IntervalScaleChoice::logit;
    else
        opts.scale = gwp::IntervalScaleChoice::both;

    gwp::AnalysisReport rep = gwp::analyze(data, opts);
    rep.input_path = input;
    rep.input_digest = gwp::fnv1a_digest(input);
    rep.seed = seed;

    const std::string text = machine ? gwp::format_report_machine(rep, &validation)
                                     : gwp::format_report(rep, &validation);
    write_output(text, out_path);
    return kExitOk;
}

int run_simulate(const std::string& config_path, bool grid, int reps_override,
                 long long seed_override, int threads_override, const std::string& out_path) {
    std::vector<gwp::ScenarioConfig> configs;
    if (grid)
        configs = gwp::expand_scenario_grid_file(config_path);
    else
        configs = {gwp::parse_scenario_config_file(config_path)};

    for (auto& cfg : configs) {
        if (reps_override > 0) cfg.reps = reps_override;
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (threads_override > 0) cfg.threads = threads_override;
        cfg.validate();
    }

    std::ostringstream rows;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const gwp::ScenarioMetrics m = gwp::run_scenario(configs[i]);
        std::cout << "# scenario " << (i + 1) << " of " << configs.size() << "\n"
                  << gwp::format_metrics_report(configs[i], m) << "\n";
        rows << gwp::format_metrics_row(configs[i], m) << "\n";
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw gwp::IoError("cannot open output file '" + out_path + "'");
        out << rows.str();
    } else {
        std::cout << rows.str();
    }
    return kExitOk;
}

int run_oracle_check(std::uint64_t seed, int datasets, bool inject) {
    gwp::OracleOptions opts;
    opts.seed = seed;
    opts.datasets = datasets;
    opts.inject_fault = inject;
    const auto suites = gwp::run_oracle_suites(opts);

    bool all_pass = true;
    for (const auto& s : suites) {
        std::cout << (s.pass ? "PASS" : "FAIL") << " " << s.name << " (cases " << s.cases
                  << ", worst " << s.worst << ", seed " << seed << ")";
        if (!s.detail.empty()) std::cout << " " << s.detail;
        std::cout << "\n";
        all_pass = all_pass && s.pass;
    }
    return all_pass ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"global win probability for cluster randomized trials"};
    app.set_version_flag("--version", GWP_VERSION);
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analyze a tab-delimited trial file");
    std::string input, arm_col = "arm", cluster_col = "cluster", id_col = "id";
    std::string control_label = "0", treatment_label = "1";
    std::vector<std::string> endpoint_args;
    double level = 0.95;
    std::string scale = "both", crit = "t", out_path;
    int df_override = -1;
    std::uint64_t seed = kDefaultSeed;
    bool machine = false;
    analyze->add_option("--input", input, "input TSV file")->required();
    analyze->add_option("--arm-col", arm_col, "arm column name");
    analyze->add_option("--cluster-col", cluster_col, "cluster column name");
    analyze->add_option("--id-col", id_col, "individual id column name");
    analyze->add_option("--endpoint", endpoint_args,
                        "endpoint as name:column:direction:weight (repeatable)")
        ->required();
    analyze->add_option("--control-label", control_label, "arm value meaning control");
    analyze->add_option("--treatment-label", treatment_label, "arm value meaning treatment");
    analyze->add_option("--level", level, "confidence level")->check(CLI::Range(0.5, 0.9999));
    analyze->add_option("--scale", scale, "interval scale")
        ->check(CLI::IsMember({"identity", "logit", "both"}));
    analyze->add_option("--crit", crit, "critical value family")
        ->check(CLI::IsMember({"t", "z"}));
    analyze->add_option("--df-override", df_override, "override the C-2 degrees of freedom");
    analyze->add_option("--seed", seed, "seed recorded in provenance");
    analyze->add_option("--out", out_path, "also write the report to this file");
    analyze->add_flag("--machine", machine, "emit machine-readable key = value block");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run replicated scenario experiments");
    std::string config_path, sim_out;
    bool grid = false;
    int reps_override = 0, threads_override = 0;
    long long seed_override = -1;
    simulate->add_option("--config", config_path, "scenario config (key = value)")->required();
    simulate->add_flag("--grid", grid, "expand ';' lists of clusters/omega12/theta_targets");
    simulate->add_option("--reps", reps_override, "override replication count");
    simulate->add_option("--seed", seed_override, "override master seed");
    simulate->add_option("--threads", threads_override, "override worker thread count");
    simulate->add_option("--out", sim_out, "metrics row file (one scenario per line)");

    // oracle-check
    auto* oracle = app.add_subcommand("oracle-check", "run equivalence suites");
    std::uint64_t oracle_seed = kDefaultSeed;
    int oracle_datasets = 50;
    bool inject = false;
    oracle->add_option("--seed", oracle_seed, "fixture seed");
    oracle->add_option("--datasets", oracle_datasets, "fixtures per suite")
        ->check(CLI::PositiveNumber);
    oracle->add_flag("--fail-inject", inject, "test hook: inject a fault")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
        if (analyze->parsed())
            return run_analyze(input, arm_col, cluster_col, id_col, endpoint_args,
                               control_label, treatment_label, level, scale, crit, df_override,
                               seed, out_path, machine);
        if (simulate->parsed())
            return run_simulate(config_path, grid, reps_override, seed_override,
                                threads_override, sim_out);
        if (oracle->parsed()) return run_oracle_check(oracle_seed, oracle_datasets, inject);
        return kExitOther;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const gwp::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const gwp::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const gwp::TsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const gwp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
}
