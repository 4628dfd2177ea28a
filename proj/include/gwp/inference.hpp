#pragma once

#include "gwp/mixed_model.hpp"

#include <vector>

namespace gwp {

enum class Scale { identity, logit };
enum class Critical { student_t, normal_z };

struct GwpEstimate {
    double theta_hat = 0.5;
    double se = 0.0;
    int df = 0;
    double icc_hat = 0.0;
    std::vector<double> weights; // endpoint weights used upstream
    int k = 0;                   // number of endpoints
};

// theta = 0.5*(beta1 + 1); the standard error convention is
// SE(theta) = SE(beta1).
GwpEstimate estimate_gwp(const LmmFit& fit, std::vector<double> weights = {});

struct IntervalEstimate {
    Scale scale = Scale::identity;
    double level = 0.95;
    double lower = 0.0;
    double upper = 1.0;
    Critical critical = Critical::student_t;
};

// Identity: theta -/+ crit*SE. Logit: transform, interval on the logit
// scale with SE/(theta(1-theta)), then inverse-logit. Critical value is
// Student t with the fit's df (default) or the normal z.
IntervalEstimate confidence_interval(const GwpEstimate& e, double level, Scale scale,
                                     Critical critical = Critical::student_t);

struct TestResult {
    double statistic = 0.0;
    bool t_reference = true; // false: standard normal reference
    int df = 0;
    double p_value = 1.0;
    double null_value = 0.5;
    bool two_sided = true;
};

// H0: theta = 0.5. Identity: T = (theta - 0.5)/SE. Logit:
// T = logit(theta) * theta(1-theta)/SE, i.e. the logit estimate divided
// by its delta-method standard error. Two-sided by default.
TestResult hypothesis_test(const GwpEstimate& e, Scale scale,
                           Critical critical = Critical::student_t,
                           bool two_sided = true);

struct WinDifference {
    double delta_hat = 0.0;
    double se = 0.0;
    IntervalEstimate interval;
};

// Delta = 2*theta - 1, SE(Delta) = 2*SE(theta); identity-scale interval.
WinDifference to_win_difference(const GwpEstimate& e, double level,
                                Critical critical = Critical::student_t);

struct WinOdds {
    double lambda_hat = 1.0;
    double se_log_lambda = 0.0;
    IntervalEstimate interval; // bounds on the lambda scale
};

// lambda = theta/(1-theta), SE(ln lambda) = SE/(theta(1-theta)); the
// interval exponentiates the symmetric log-scale interval.
WinOdds to_win_odds(const GwpEstimate& e, double level,
                    Critical critical = Critical::student_t);

struct RankSumDiagnostic {
    double lhs = 0.0; // mean rank-sum difference, treatment minus control
    double rhs = 0.0; // N*K*(theta - 0.5)
    double abs_diff = 0.0;
    bool pass = false; // |diff| < 1e-8 * N * K
};

// Checks the rank-sum identity under equal endpoint weights, with theta
// taken as the unweighted mean of the treatment global win fractions.
// Throws std::invalid_argument when endpoint weights are unequal.
RankSumDiagnostic rank_sum_equivalence(const TrialDataset& d,
                                       const GlobalWinFractionTable& g,
                                       const std::vector<RankTable>& rank_tables);

// theta = Phi(delta/sqrt(2)) and its inverse.
double cohen_to_theta(double delta);
double theta_to_cohen(double theta);

} // namespace gwp
