#pragma once

#include "gwp/dataset.hpp"
#include "gwp/rng.hpp"

#include <cstdint>
#include <vector>

namespace gwp {

// Discrete ordinal marginal: ordered support, pmf, and the standard
// normal quantiles of the cumulative pmf used by the mean-mapping
// discretization. Thresholds at probability 0 or 1 are +/- infinity.
struct OrdinalMarginal {
    std::vector<double> support;
    std::vector<double> pmf;
    std::vector<double> thresholds; // size = categories - 1

    double mean() const;
    double variance() const;

    // Maps a standard normal draw to the support value of its category.
    double discretize(double z) const;

    // Validates the pmf (entries >= 0, sum within 1e-12 of 1) and builds
    // thresholds.
    static OrdinalMarginal from_pmf(std::vector<double> support, std::vector<double> pmf);
    static OrdinalMarginal binomial(int n_trials, double p);
};

// Win probability of `treatment` over `control` for two discrete
// marginals: sum f1(x) f0(y) H(x - y), ties counted half. Exact double
// sum over the supports.
double win_probability(const OrdinalMarginal& treatment, const OrdinalMarginal& control);
double binomial_win_probability(int n1, double p1, int n0, double p0);

// Solves for the treatment success probability of Binomial(n_trials, p1)
// so the win probability over `control` equals target. Bisection to
// 1e-10; throws std::invalid_argument when the target is unattainable.
double solve_treatment_p(int n_trials, const OrdinalMarginal& control, double target_theta);

// Pearson correlation of the pair obtained by discretizing a bivariate
// standard normal with latent correlation r_latent through the two
// marginals' thresholds. Exact cell probabilities via the bivariate
// normal CDF.
double discretized_correlation(const OrdinalMarginal& a, const OrdinalMarginal& b,
                               double r_latent);

// Latent correlation whose discretized correlation equals target, by
// bisection over [-0.9999, 0.9999] to 1e-6. Throws when unattainable.
double solve_intermediate_correlation(const OrdinalMarginal& a, const OrdinalMarginal& b,
                                      double target);

// Target correlations of the discretized responses (K = 2):
// omega12 within-subject cross-endpoint, phi11/phi22 endpoint ICCs,
// phi12 cross-subject cross-endpoint.
struct CorrelationTargets {
    double omega12 = 0.3;
    double phi11 = 0.1;
    double phi22 = 0.05;
    double phi12 = 0.025;
};

// Latent (intermediate) counterparts for one arm, plus the Cholesky
// factors of Phi and Omega - Phi used when sampling.
struct LatentCorrelations {
    double omega12 = 0.0;
    double phi11 = 0.0;
    double phi22 = 0.0;
    double phi12 = 0.0;
    double chol_phi[3] = {0.0, 0.0, 0.0};   // l11, l21, l22
    double chol_resid[3] = {0.0, 0.0, 0.0}; // for Omega - Phi
};

// Solves the four intermediate correlations for an arm with the given
// endpoint marginals and verifies both latent blocks are positive
// semi-definite. Throws std::invalid_argument otherwise.
LatentCorrelations solve_latent_correlations(const OrdinalMarginal& m1,
                                             const OrdinalMarginal& m2,
                                             const CorrelationTargets& targets);

enum class ClusterSizeMode { equal, deletion };

// Arm-level generator inputs: per-endpoint marginals plus the solved
// latent correlations for that arm.
struct ArmDesign {
    OrdinalMarginal k1;
    OrdinalMarginal k2;
    LatentCorrelations latent;
};

struct GeneratorConfig {
    int clusters_control = 5;
    int clusters_treatment = 5;
    ClusterSizeMode size_mode = ClusterSizeMode::equal;
    int cluster_size = 30;       // n, or n_base under deletion
    double deletion_prob = 0.25; // used when size_mode == deletion
    ArmDesign control;
    ArmDesign treatment;
};

// Draws one trial: per cluster a latent N(0, Phi) effect, per individual
// an independent N(0, Omega - Phi) residual; the sum is discretized
// coordinate-wise through the arm's marginal thresholds. Under deletion
// mode each of the n_base individuals is kept with probability
// 1 - deletion_prob; empty clusters redraw their deletion indicators.
TrialDataset generate_trial(const GeneratorConfig& cfg, std::uint64_t replicate_seed);

} // namespace gwp
