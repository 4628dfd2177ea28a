#include "gwp/dataset.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace gwp {

std::size_t TrialDataset::arm_size(Arm a) const {
    std::size_t n = 0;
    for (int c : row_cluster)
        if (cluster_arm[c] == a) ++n;
    return n;
}

std::size_t TrialDataset::arm_clusters(Arm a) const {
    std::size_t n = 0;
    for (Arm x : cluster_arm)
        if (x == a) ++n;
    return n;
}

std::size_t TrialDataset::cluster_size(int cluster) const {
    std::size_t n = 0;
    for (int c : row_cluster)
        if (c == cluster) ++n;
    return n;
}

void TrialDataset::validate() const {
    if (endpoints.empty())
        throw std::invalid_argument("dataset: at least one endpoint required");

    double weight_sum = 0.0;
    for (const auto& e : endpoints) {
        if (e.weight < 0.0)
            throw std::invalid_argument("dataset: endpoint weight must be >= 0 (" + e.name + ")");
        weight_sum += e.weight;
    }
    if (!(weight_sum > 0.0))
        throw std::invalid_argument("dataset: at least one endpoint must have positive weight");

    if (cluster_labels.size() != cluster_arm.size())
        throw std::invalid_argument("dataset: cluster label/arm size mismatch");
    if (values.size() != endpoints.size())
        throw std::invalid_argument("dataset: value columns do not match endpoint count");

    const std::size_t n = row_cluster.size();
    for (const auto& col : values)
        if (col.size() != n)
            throw std::invalid_argument("dataset: ragged value columns");
    if (!row_id.empty() && row_id.size() != n)
        throw std::invalid_argument("dataset: row id size mismatch");

    if (arm_clusters(Arm::control) == 0)
        throw std::invalid_argument("dataset: control arm has no clusters");
    if (arm_clusters(Arm::treatment) == 0)
        throw std::invalid_argument("dataset: treatment arm has no clusters");

    std::vector<std::size_t> sizes(cluster_labels.size(), 0);
    for (int c : row_cluster) {
        if (c < 0 || static_cast<std::size_t>(c) >= cluster_labels.size())
            throw std::invalid_argument("dataset: row references unknown cluster");
        ++sizes[c];
    }
    for (std::size_t c = 0; c < sizes.size(); ++c)
        if (sizes[c] == 0)
            throw std::invalid_argument("dataset: cluster '" + cluster_labels[c] + "' has no individuals");

    for (const auto& col : values)
        for (double v : col)
            if (!std::isfinite(v))
                throw std::invalid_argument("dataset: non-finite endpoint value");

    if (!row_id.empty()) {
        std::set<std::pair<int, std::string>> seen;
        for (std::size_t r = 0; r < n; ++r)
            if (!seen.emplace(row_cluster[r], row_id[r]).second)
                throw std::invalid_argument("dataset: duplicate (cluster, individual) pair: " +
                                            cluster_labels[row_cluster[r]] + "/" + row_id[r]);
    }
}

TrialDataset apply_directions(const TrialDataset& d) {
    TrialDataset out = d;
    for (std::size_t k = 0; k < out.endpoints.size(); ++k) {
        if (out.endpoints[k].direction == Direction::lower_is_better) {
            for (double& v : out.values[k]) v = -v;
            out.endpoints[k].direction = Direction::higher_is_better;
        }
    }
    return out;
}

TrialDataset swap_arms(const TrialDataset& d) {
    TrialDataset out = d;
    for (Arm& a : out.cluster_arm)
        a = (a == Arm::control) ? Arm::treatment : Arm::control;
    return out;
}

} // namespace gwp
