#pragma once

#include "gwp/dataset.hpp"

#include <vector>

namespace gwp {

struct EndpointSummary {
    std::string name;
    double mean_control = 0.0, sd_control = 0.0;
    double mean_treatment = 0.0, sd_treatment = 0.0;
    double icc = 0.0; // NaN when the endpoint is degenerate
};

struct DatasetSummary {
    std::vector<EndpointSummary> endpoints;
    // Pearson correlation across all individuals, K x K.
    std::vector<std::vector<double>> correlation;
};

// Per-arm descriptives, pairwise endpoint correlations, and the observed
// ICC per endpoint. The ICC is the one-way ANOVA moment estimator applied
// to clusters nested within arms (residuals after arm means): with
// MSC = between-cluster mean square within arms and MSW = within-cluster
// mean square, sigma2_between = (MSC - MSW)/n0 and
// icc = sigma2_between / (sigma2_between + MSW), clamped at zero.
DatasetSummary summarize(const TrialDataset& d);

} // namespace gwp
