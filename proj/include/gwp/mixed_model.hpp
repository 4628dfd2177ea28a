#pragma once

#include "gwp/dataset.hpp"
#include "gwp/ranks.hpp"

#include <vector>

namespace gwp {

struct VarianceComponents {
    double sigma2_alpha = 0.0; // between-cluster
    double sigma2_eps = 0.0;   // residual
    double rho = 0.0;          // sigma2_alpha / (sigma2_alpha + sigma2_eps)
};

// Random-intercept fit of y = beta0 + beta1*Arm + cluster + residual.
struct LmmFit {
    double beta0 = 0.0;
    double beta1 = 0.0;    // GLS treatment mean minus GLS control mean
    double se_beta1 = 0.0; // model-based GLS standard error
    VarianceComponents vc;
    int df = 0; // C - 2 under the default rule
    int n_clusters = 0;
    int clusters_control = 0;
    int clusters_treatment = 0;
    int iterations = 0;
    double reml_criterion = 0.0; // -2 * restricted log-likelihood at the optimum
    bool boundary = false;       // rho clamped at 0
    bool converged = false;
};

// REML for the two-level random-intercept model. The restricted
// likelihood is profiled to one dimension in rho over [0, 1-1e-8] and the
// stationarity equation is solved by bisecting the sign of the analytic
// derivative (interval tolerance 1e-12, iteration cap 200). Boundary
// solutions (sigma2_alpha = 0) are returned with the boundary flag set.
// Throws ConvergenceError when the residual variance is zero (all
// responses fit exactly) and std::invalid_argument on structural problems
// (an empty arm, fewer than 3 observations).
LmmFit fit_reml(const TrialDataset& d, const std::vector<double>& y);
LmmFit fit_reml(const TrialDataset& d, const GlobalWinFractionTable& g);

// Closed-form ANOVA moment estimators for balanced designs (all clusters
// the same size). sigma2_eps = pooled within-cluster mean square;
// sigma2_alpha = max(0, (between-cluster-within-arm mean square -
// sigma2_eps)/n). Coincides with REML whenever the REML solution is
// interior. Throws std::invalid_argument on unbalanced input.
VarianceComponents balanced_anova_components(const TrialDataset& d,
                                             const std::vector<double>& y);

struct GlsArmMeans {
    double mean_control = 0.0;
    double mean_treatment = 0.0;
    double var_control = 0.0;
    double var_treatment = 0.0;
};

// Weighted cluster-mean combination with weights
// w_ic = { (sigma2/n_ic) [1 + (n_ic - 1) rho] }^-1 and
// Var(mean_i) = 1 / sum_c w_ic. With equal cluster sizes this reduces to
// the simple mean per arm.
GlsArmMeans gls_arm_means(const TrialDataset& d, const std::vector<double>& y,
                          const VarianceComponents& vc);

} // namespace gwp
