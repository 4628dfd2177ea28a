#pragma once

#include "gwp/dataset.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gwp {

// Column mapping for a tab-delimited trial file. Arm values in the file
// must equal control_label or treatment_label after trimming (defaults
// "0"/"1"; numeric strings equal to 0 or 1 are also accepted).
struct TsvSchema {
    std::string arm_col;
    std::string cluster_col;
    std::string id_col;
    std::vector<std::string> endpoint_cols; // parallel to the EndpointSpec list
    std::string control_label = "0";
    std::string treatment_label = "1";
};

// Thrown on unreadable files, absent schema columns, malformed arm or
// numeric values, or structural violations (cluster in both arms).
struct TsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads a tab-delimited file with a header row. Rows with a missing
// endpoint value (empty, NA, NaN or ".") are dropped and reported;
// malformed non-missing values are errors. The returned dataset has been
// validated.
std::pair<TrialDataset, ValidationReport>
load_trial_tsv(const std::string& path, const TsvSchema& schema,
               const std::vector<EndpointSpec>& endpoints);

} // namespace gwp
