#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gwp {

enum class Arm : int8_t { control = 0, treatment = 1 };

enum class Direction : int8_t { higher_is_better, lower_is_better };

struct EndpointSpec {
    std::string name;
    Direction direction = Direction::higher_is_better;
    double weight = 1.0;
};

// Individual-level responses from a two-arm cluster randomized trial.
// Column-oriented: values[k][row] is endpoint k for the given row. Every
// cluster belongs to exactly one arm; rows reference clusters by index.
struct TrialDataset {
    std::vector<EndpointSpec> endpoints;
    std::vector<std::string> cluster_labels; // per cluster
    std::vector<Arm> cluster_arm;            // per cluster
    std::vector<int> row_cluster;            // per row
    std::vector<std::string> row_id;         // per row, may be empty for generated data
    std::vector<std::vector<double>> values; // [K][rows]

    std::size_t num_endpoints() const { return endpoints.size(); }
    std::size_t num_rows() const { return row_cluster.empty() ? 0 : row_cluster.size(); }
    std::size_t num_clusters() const { return cluster_labels.size(); }

    Arm row_arm(std::size_t row) const { return cluster_arm[row_cluster[row]]; }

    // Individuals per arm.
    std::size_t arm_size(Arm a) const;
    // Clusters per arm.
    std::size_t arm_clusters(Arm a) const;
    // Individuals in the given cluster.
    std::size_t cluster_size(int cluster) const;

    // Throws std::invalid_argument when any structural invariant fails:
    // no endpoints, empty arm, empty cluster, non-finite values, or
    // duplicate (cluster, individual) pairs.
    void validate() const;
};

struct ValidationIssue {
    std::size_t line;   // 1-based line number in the source file
    std::string reason;
};

struct ValidationReport {
    std::size_t rows_total = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    std::vector<std::size_t> cluster_sizes; // parallel to dataset cluster order
    std::size_t n_control = 0;
    std::size_t n_treatment = 0;
    std::vector<ValidationIssue> issues;
};

// Negates the values of every lower_is_better endpoint and resets its
// direction flag, so downstream math can assume larger = better.
TrialDataset apply_directions(const TrialDataset& d);

// Swaps the arm labels of every cluster. Used by mirror-symmetry checks.
TrialDataset swap_arms(const TrialDataset& d);

} // namespace gwp
