#include "gwp/simgen.hpp"

#include "gwp/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gwp {

double OrdinalMarginal::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) m += support[i] * pmf[i];
    return m;
}

double OrdinalMarginal::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i)
        v += (support[i] - m) * (support[i] - m) * pmf[i];
    return v;
}

double OrdinalMarginal::discretize(double z) const {
    std::size_t cat = thresholds.size();
    for (std::size_t c = 0; c < thresholds.size(); ++c) {
        if (z <= thresholds[c]) {
            cat = c;
            break;
        }
    }
    return support[cat];
}

OrdinalMarginal OrdinalMarginal::from_pmf(std::vector<double> support,
                                          std::vector<double> pmf) {
    if (support.empty() || support.size() != pmf.size())
        throw std::invalid_argument("OrdinalMarginal: support/pmf size mismatch");
    for (std::size_t i = 1; i < support.size(); ++i)
        if (!(support[i] > support[i - 1]))
            throw std::invalid_argument("OrdinalMarginal: support must be strictly increasing");
    double total = 0.0;
    for (double p : pmf) {
        if (p < 0.0)
            throw std::invalid_argument("OrdinalMarginal: negative pmf entry");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument("OrdinalMarginal: pmf must sum to 1");

    OrdinalMarginal m;
    m.support = std::move(support);
    m.pmf = std::move(pmf);
    double cum = 0.0;
    for (std::size_t c = 0; c + 1 < m.pmf.size(); ++c) {
        cum += m.pmf[c];
        if (cum <= 0.0)
            m.thresholds.push_back(-std::numeric_limits<double>::infinity());
        else if (cum >= 1.0)
            m.thresholds.push_back(std::numeric_limits<double>::infinity());
        else
            m.thresholds.push_back(norm_quantile(cum));
    }
    return m;
}

OrdinalMarginal OrdinalMarginal::binomial(int n_trials, double p) {
    if (n_trials < 1)
        throw std::invalid_argument("OrdinalMarginal::binomial: n must be >= 1");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("OrdinalMarginal::binomial: p must lie in [0,1]");

    std::vector<double> support(n_trials + 1), pmf(n_trials + 1);
    for (int k = 0; k <= n_trials; ++k) {
        support[k] = static_cast<double>(k);
        // exp of log pmf keeps extreme p stable
        double logp;
        if (p == 0.0)
            logp = (k == 0) ? 0.0 : -std::numeric_limits<double>::infinity();
        else if (p == 1.0)
            logp = (k == n_trials) ? 0.0 : -std::numeric_limits<double>::infinity();
        else
            logp = std::lgamma(n_trials + 1.0) - std::lgamma(k + 1.0) -
                   std::lgamma(n_trials - k + 1.0) + k * std::log(p) +
                   (n_trials - k) * std::log1p(-p);
        pmf[k] = std::exp(logp);
    }
    // Normalize away rounding residue.
    double total = 0.0;
    for (double v : pmf) total += v;
    for (double& v : pmf) v /= total;
    return from_pmf(std::move(support), std::move(pmf));
}

double win_probability(const OrdinalMarginal& treatment, const OrdinalMarginal& control) {
    double theta = 0.0;
    for (std::size_t i = 0; i < treatment.support.size(); ++i) {
        for (std::size_t j = 0; j < control.support.size(); ++j) {
            double h;
            if (treatment.support[i] > control.support[j])
                h = 1.0;
            else if (treatment.support[i] == control.support[j])
                h = 0.5;
            else
                continue;
            theta += treatment.pmf[i] * control.pmf[j] * h;
        }
    }
    return theta;
}

double binomial_win_probability(int n1, double p1, int n0, double p0) {
    return win_probability(OrdinalMarginal::binomial(n1, p1),
                           OrdinalMarginal::binomial(n0, p0));
}

double solve_treatment_p(int n_trials, const OrdinalMarginal& control, double target_theta) {
    if (!(target_theta > 0.0 && target_theta < 1.0))
        throw std::invalid_argument("solve_treatment_p: target must lie in (0,1)");

    auto theta_at = [&](double p) {
        return win_probability(OrdinalMarginal::binomial(n_trials, p), control);
    };

    double lo = 1e-12, hi = 1.0 - 1e-12;
    const double theta_lo = theta_at(lo);
    const double theta_hi = theta_at(hi);
    if (target_theta < theta_lo || target_theta > theta_hi)
        throw std::invalid_argument(
            "solve_treatment_p: target " + std::to_string(target_theta) +
            " outside achievable range [" + std::to_string(theta_lo) + ", " +
            std::to_string(theta_hi) + "]");

    // Theta is nondecreasing in p (stochastic ordering of binomials).
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double t = theta_at(mid);
        if (std::fabs(t - target_theta) < 1e-10) return mid;
        if (t < target_theta)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

double discretized_correlation(const OrdinalMarginal& a, const OrdinalMarginal& b,
                               double r_latent) {
    if (!(std::fabs(r_latent) < 1.0))
        throw std::invalid_argument("discretized_correlation: |r_latent| must be < 1");

    const std::size_t na = a.support.size();
    const std::size_t nb = b.support.size();
    const double inf = std::numeric_limits<double>::infinity();

    auto ta = [&](std::size_t i) { return i == 0 ? -inf : (i <= a.thresholds.size() ? a.thresholds[i - 1] : inf); };
    auto tb = [&](std::size_t j) { return j == 0 ? -inf : (j <= b.thresholds.size() ? b.thresholds[j - 1] : inf); };

    // CDF grid over threshold crossings, then cell probabilities by
    // differencing.
    std::vector<std::vector<double>> F(na + 1, std::vector<double>(nb + 1));
    for (std::size_t i = 0; i <= na; ++i)
        for (std::size_t j = 0; j <= nb; ++j)
            F[i][j] = bvn_cdf(ta(i), tb(j), r_latent);

    double exy = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            const double cell = F[i + 1][j + 1] - F[i][j + 1] - F[i + 1][j] + F[i][j];
            exy += std::max(0.0, cell) * a.support[i] * b.support[j];
        }
    }

    const double sa = std::sqrt(a.variance());
    const double sb = std::sqrt(b.variance());
    if (!(sa > 0.0 && sb > 0.0))
        throw std::invalid_argument("discretized_correlation: degenerate marginal");
    return (exy - a.mean() * b.mean()) / (sa * sb);
}

double solve_intermediate_correlation(const OrdinalMarginal& a, const OrdinalMarginal& b,
                                      double target) {
    const double bound = 0.9999;
    double lo = -bound, hi = bound;
    const double c_lo = discretized_correlation(a, b, lo);
    const double c_hi = discretized_correlation(a, b, hi);
    if (target < c_lo || target > c_hi)
        throw std::invalid_argument(
            "solve_intermediate_correlation: target " + std::to_string(target) +
            " outside achievable range [" + std::to_string(c_lo) + ", " +
            std::to_string(c_hi) + "]");

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double c = discretized_correlation(a, b, mid);
        if (std::fabs(c - target) < 1e-6) return mid;
        if (c < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Lower Cholesky of [[a, c], [c, b]]; tolerates singular blocks.
void chol2(double a, double b, double c, double out[3]) {
    const double tol = 1e-12;
    if (a < -tol || b < -tol)
        throw std::invalid_argument("latent correlation block is not PSD");
    a = std::max(a, 0.0);
    b = std::max(b, 0.0);
    if (a <= tol) {
        if (std::fabs(c) > 1e-9)
            throw std::invalid_argument("latent correlation block is not PSD");
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = std::sqrt(b);
        return;
    }
    out[0] = std::sqrt(a);
    out[1] = c / out[0];
    const double rest = b - out[1] * out[1];
    if (rest < -1e-9)
        throw std::invalid_argument("latent correlation block is not PSD");
    out[2] = std::sqrt(std::max(rest, 0.0));
}

} // namespace

LatentCorrelations solve_latent_correlations(const OrdinalMarginal& m1,
                                             const OrdinalMarginal& m2,
                                             const CorrelationTargets& targets) {
    LatentCorrelations lat;
    lat.omega12 = solve_intermediate_correlation(m1, m2, targets.omega12);
    lat.phi11 = solve_intermediate_correlation(m1, m1, targets.phi11);
    lat.phi22 = solve_intermediate_correlation(m2, m2, targets.phi22);
    lat.phi12 = solve_intermediate_correlation(m1, m2, targets.phi12);

    // Phi must be PSD and Omega - Phi must be PSD for the cluster-effect
    // plus residual decomposition to exist.
    if (lat.phi11 * lat.phi22 < lat.phi12 * lat.phi12 - 1e-12)
        throw std::invalid_argument("solve_latent_correlations: latent Phi is not PSD");
    const double r11 = 1.0 - lat.phi11;
    const double r22 = 1.0 - lat.phi22;
    const double r12 = lat.omega12 - lat.phi12;
    if (r11 < 0.0 || r22 < 0.0 || r11 * r22 < r12 * r12 - 1e-12)
        throw std::invalid_argument("solve_latent_correlations: latent Omega - Phi is not PSD");

    chol2(lat.phi11, lat.phi22, lat.phi12, lat.chol_phi);
    chol2(r11, r22, r12, lat.chol_resid);
    return lat;
}

TrialDataset generate_trial(const GeneratorConfig& cfg, std::uint64_t replicate_seed) {
    if (cfg.clusters_control < 1 || cfg.clusters_treatment < 1)
        throw std::invalid_argument("generate_trial: both arms need at least one cluster");
    if (cfg.cluster_size < 1)
        throw std::invalid_argument("generate_trial: cluster size must be >= 1");
    if (cfg.size_mode == ClusterSizeMode::deletion &&
        !(cfg.deletion_prob >= 0.0 && cfg.deletion_prob < 1.0))
        throw std::invalid_argument("generate_trial: deletion probability must lie in [0,1)");

    RandomStream rng(replicate_seed);

    TrialDataset d;
    d.endpoints = {{"k1", Direction::higher_is_better, 1.0},
                   {"k2", Direction::higher_is_better, 1.0}};
    d.values.assign(2, {});

    auto gen_arm = [&](Arm arm, const ArmDesign& design, int n_clusters) {
        const char prefix = arm == Arm::treatment ? 'T' : 'C';
        for (int c = 0; c < n_clusters; ++c) {
            const int cluster_index = static_cast<int>(d.cluster_labels.size());
            d.cluster_labels.push_back(prefix + std::to_string(c + 1));
            d.cluster_arm.push_back(arm);

            int kept = cfg.cluster_size;
            if (cfg.size_mode == ClusterSizeMode::deletion) {
                do {
                    kept = 0;
                    for (int i = 0; i < cfg.cluster_size; ++i)
                        if (!rng.bernoulli(cfg.deletion_prob)) ++kept;
                } while (kept == 0);
            }

            // Cluster-level latent effect, N(0, Phi).
            const double g1 = rng.normal();
            const double g2 = rng.normal();
            const double u1 = design.latent.chol_phi[0] * g1;
            const double u2 = design.latent.chol_phi[1] * g1 + design.latent.chol_phi[2] * g2;

            for (int i = 0; i < kept; ++i) {
                const double e1 = rng.normal();
                const double e2 = rng.normal();
                const double z1 = u1 + design.latent.chol_resid[0] * e1;
                const double z2 = u2 + design.latent.chol_resid[1] * e1 +
                                  design.latent.chol_resid[2] * e2;
                d.row_cluster.push_back(cluster_index);
                d.row_id.push_back(std::to_string(i + 1));
                d.values[0].push_back(design.k1.discretize(z1));
                d.values[1].push_back(design.k2.discretize(z2));
            }
        }
    };

    gen_arm(Arm::control, cfg.control, cfg.clusters_control);
    gen_arm(Arm::treatment, cfg.treatment, cfg.clusters_treatment);
    return d;
}

} // namespace gwp
