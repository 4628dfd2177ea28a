#pragma once

#include "gwp/simgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwp {

struct BinomialSpec {
    int n = 4;
    double p = 0.5;
};

enum class IntervalScaleChoice { identity, logit, both };

// One simulation scenario: design parameters, targets, and replication
// controls. Parsed from a key = value config file.
struct ScenarioConfig {
    int clusters = 10; // total, split evenly
    ClusterSizeMode size_mode = ClusterSizeMode::equal;
    int cluster_size = 30;       // n under equal, n_base under deletion
    double deletion_prob = 0.0;  // > 0 selects deletion mode
    BinomialSpec control_k1{4, 0.5};
    BinomialSpec control_k2{6, 0.5};
    std::vector<double> theta_targets{0.5}; // 1 entry homogeneous, 2 per-endpoint
    CorrelationTargets corr;
    double level = 0.95;
    IntervalScaleChoice scale = IntervalScaleChoice::both;
    int reps = 2000;
    std::uint64_t seed = 20250101;
    int threads = 1;

    void validate() const; // throws std::invalid_argument
    double true_theta() const;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses `key = value` lines ('#' comments allowed). Unknown keys are
// errors. In grid mode (cmd_simulate --grid) the keys clusters, omega12
// and theta_targets may hold ';'-separated lists which expand factorially
// (clusters outer, omega12 middle, theta inner).
ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig parse_scenario_config_file(const std::string& path);
std::vector<ScenarioConfig> expand_scenario_grid(std::istream& in);
std::vector<ScenarioConfig> expand_scenario_grid_file(const std::string& path);

struct ScaleTally {
    double ecp = 0.0;        // percent
    double left_tail = 0.0;  // percent of lower bounds above the true theta
    double right_tail = 0.0; // percent of upper bounds below the true theta
    double ter = 0.0;        // left/right; meaningless when !ter_defined
    bool ter_defined = false;
    double err = 0.0; // percent of intervals excluding 0.5
};

struct ScenarioMetrics {
    double true_theta = 0.5;
    ScaleTally identity;
    ScaleTally logit;
    double mean_theta_hat = 0.0;
    double mean_icc_hat = 0.0;
    int reps_requested = 0;
    int reps_used = 0;
    int reps_failed = 0;
};

// Runs the replicated experiment: generate, win fractions, REML fit,
// intervals on both scales, tallies. Replicate r uses the RNG stream at
// (seed, r); aggregation is order-independent, so results do not depend
// on cfg.threads. Throws std::runtime_error when more than 1% of
// replicates fail to fit.
ScenarioMetrics run_scenario(const ScenarioConfig& cfg);

// Flat key = value block (human-readable report).
std::string format_metrics_report(const ScenarioConfig& cfg, const ScenarioMetrics& m);

// Single-line machine-readable row; full precision.
std::string format_metrics_row(const ScenarioConfig& cfg, const ScenarioMetrics& m);

} // namespace gwp
