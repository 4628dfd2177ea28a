#pragma once

#include "gwp/dataset.hpp"
#include "gwp/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gwp {

struct FixtureSpec {
    int min_clusters = 4;
    int max_clusters = 10;
    int min_cluster_size = 2;
    int max_cluster_size = 8;
    int min_endpoints = 1;
    int max_endpoints = 3;
    bool balanced = false;       // all clusters share one size
    int categories = 5;          // ordinal values 0..categories-1 (ties abound)
    int cluster_shift_range = 3; // random integer shift per cluster
};

// Random clustered ordinal dataset with ties and real between-cluster
// variation. Both arms always receive at least one cluster.
TrialDataset random_fixture(RandomStream& rng, const FixtureSpec& spec);

// Equal-weight plug-in estimate of the global win probability: the mean
// over endpoints of the pairwise U-statistic, evaluated by direct
// enumeration of all treatment/control pairs. Independent of the
// rank/mixed-model pipeline.
double plugin_theta_bruteforce(const TrialDataset& d);

struct SuiteResult {
    std::string name;
    bool pass = false;
    int cases = 0;
    double worst = 0.0; // largest observed discrepancy
    std::string detail;
};

struct OracleOptions {
    std::uint64_t seed = 424242;
    int datasets = 50;
    bool inject_fault = false; // test hook: perturbs one comparison
};

// Runs the equivalence suites on seeded random fixtures:
//   rank_vs_bruteforce, plugin_identity (balanced), rank_sum_identity,
//   reml_vs_anova (balanced, interior), transform_consistency.
std::vector<SuiteResult> run_oracle_suites(const OracleOptions& opts);

} // namespace gwp
