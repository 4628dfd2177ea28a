#include "gwp/tsv.hpp"

#include "gwp/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace gwp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

bool is_missing(const std::string& cell) {
    const std::string t = trim(cell);
    return t.empty() || t == "NA" || t == "na" || t == "NaN" || t == "nan" || t == ".";
}

bool parse_double(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

} // namespace

std::pair<TrialDataset, ValidationReport>
load_trial_tsv(const std::string& path, const TsvSchema& schema,
               const std::vector<EndpointSpec>& endpoints) {
    if (endpoints.empty())
        throw TsvError("load_trial_tsv: no endpoints specified");
    if (schema.endpoint_cols.size() != endpoints.size())
        throw TsvError("load_trial_tsv: endpoint column list does not match endpoint specs");

    std::ifstream in(path);
    if (!in)
        throw IoError("load_trial_tsv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw TsvError("load_trial_tsv: '" + path + "' is empty");
    const auto header = split_tabs(line);

    auto col_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return i;
        throw TsvError("load_trial_tsv: column '" + name + "' not found in header of '" + path + "'");
    };

    const std::size_t arm_idx = col_index(schema.arm_col);
    const std::size_t cluster_idx = col_index(schema.cluster_col);
    const std::size_t id_idx = col_index(schema.id_col);
    std::vector<std::size_t> value_idx;
    for (const auto& c : schema.endpoint_cols) value_idx.push_back(col_index(c));

    const std::size_t K = endpoints.size();
    TrialDataset d;
    d.endpoints = endpoints;
    d.values.assign(K, {});
    ValidationReport report;

    std::map<std::string, int> cluster_index;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_tabs(line);
        ++report.rows_total;

        auto cell = [&](std::size_t idx) -> std::string {
            return idx < cells.size() ? cells[idx] : std::string();
        };

        // Arm
        const std::string arm_raw = trim(cell(arm_idx));
        Arm arm;
        if (arm_raw == schema.control_label) {
            arm = Arm::control;
        } else if (arm_raw == schema.treatment_label) {
            arm = Arm::treatment;
        } else {
            double v;
            if (parse_double(arm_raw, v) && (v == 0.0 || v == 1.0))
                arm = (v == 0.0) ? Arm::control : Arm::treatment;
            else
                throw TsvError("load_trial_tsv: line " + std::to_string(line_no) +
                               ": arm value '" + arm_raw + "' is not 0/1");
        }

        const std::string cluster_label = trim(cell(cluster_idx));
        if (cluster_label.empty())
            throw TsvError("load_trial_tsv: line " + std::to_string(line_no) + ": empty cluster label");
        const std::string id = trim(cell(id_idx));

        // Endpoint values; listwise deletion on missing cells.
        std::vector<double> vals(K);
        bool missing = false;
        std::string missing_col;
        for (std::size_t k = 0; k < K; ++k) {
            const std::string raw = cell(value_idx[k]);
            if (is_missing(raw)) {
                missing = true;
                missing_col = schema.endpoint_cols[k];
                break;
            }
            if (!parse_double(raw, vals[k]))
                throw TsvError("load_trial_tsv: line " + std::to_string(line_no) +
                               ": malformed value '" + trim(raw) + "' in column '" +
                               schema.endpoint_cols[k] + "'");
        }
        if (missing) {
            ++report.rows_dropped;
            report.issues.push_back({line_no, "missing value in column '" + missing_col + "'"});
            continue;
        }

        auto [it, inserted] = cluster_index.try_emplace(cluster_label,
                                                        static_cast<int>(d.cluster_labels.size()));
        if (inserted) {
            d.cluster_labels.push_back(cluster_label);
            d.cluster_arm.push_back(arm);
        } else if (d.cluster_arm[it->second] != arm) {
            throw TsvError("load_trial_tsv: line " + std::to_string(line_no) + ": cluster '" +
                           cluster_label + "' appears in both arms");
        }

        d.row_cluster.push_back(it->second);
        d.row_id.push_back(id);
        for (std::size_t k = 0; k < K; ++k) d.values[k].push_back(vals[k]);
        ++report.rows_kept;
        if (arm == Arm::control)
            ++report.n_control;
        else
            ++report.n_treatment;
    }

    if (d.arm_clusters(Arm::control) == 0)
        throw TsvError("load_trial_tsv: control arm has no clusters after deletion");
    if (d.arm_clusters(Arm::treatment) == 0)
        throw TsvError("load_trial_tsv: treatment arm has no clusters after deletion");

    try {
        d.validate();
    } catch (const std::invalid_argument& e) {
        throw TsvError(std::string("load_trial_tsv: ") + e.what());
    }

    report.cluster_sizes.resize(d.num_clusters(), 0);
    for (int c : d.row_cluster) ++report.cluster_sizes[c];
    return {std::move(d), std::move(report)};
}

} // namespace gwp
