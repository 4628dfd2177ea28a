#pragma once

#include "gwp/inference.hpp"
#include "gwp/scenario.hpp"
#include "gwp/summary.hpp"
#include "gwp/tsv.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gwp {

struct AnalysisOptions {
    double level = 0.95;
    Critical critical = Critical::student_t;
    IntervalScaleChoice scale = IntervalScaleChoice::both;
    int df_override = -1; // < 0 keeps the C - 2 rule
};

// End-to-end analysis products: descriptives, per-endpoint win
// estimates, the global fit and its intervals/tests, and the win
// difference / win odds transforms.
struct AnalysisReport {
    DatasetSummary observed;     // values as loaded, before direction flips
    DatasetSummary win_fraction; // descriptives of endpoint win fractions
    std::vector<double> endpoint_theta; // mean treatment win fraction per endpoint
    std::vector<WinLossTie> endpoint_wlt;
    LmmFit fit;
    GwpEstimate estimate;
    std::vector<IntervalEstimate> intervals;
    std::vector<TestResult> tests;
    WinDifference win_difference;
    WinOdds win_odds;

    // provenance
    std::string input_path;
    std::string input_digest;
    std::uint64_t seed = 0;
    std::string tool_version;
};

// Runs load -> directions -> ranks -> win fractions -> global win
// fractions -> REML -> inference on an already-loaded dataset.
AnalysisReport analyze(const TrialDataset& raw, const AnalysisOptions& opts);

// Human-readable rendering: 4 decimals for estimates, 3 for interval
// bounds.
std::string format_report(const AnalysisReport& r, const ValidationReport* vr = nullptr);

// Machine-readable key = value block, full precision, LF line endings.
std::string format_report_machine(const AnalysisReport& r, const ValidationReport* vr = nullptr);

// FNV-1a 64-bit digest of a file's bytes (provenance only).
std::string fnv1a_digest(const std::string& path);

} // namespace gwp
