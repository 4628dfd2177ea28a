#include "gwp/mixed_model.hpp"

#include "gwp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gwp {

namespace {

struct ClusterStats {
    double n = 0.0;
    double sum = 0.0;
    double sumsq = 0.0;
    Arm arm = Arm::control;
    double mean() const { return sum / n; }
};

std::vector<ClusterStats> cluster_stats(const TrialDataset& d, const std::vector<double>& y) {
    if (y.size() != d.num_rows())
        throw std::invalid_argument("mixed_model: response length does not match dataset");
    std::vector<ClusterStats> cs(d.num_clusters());
    for (std::size_t c = 0; c < cs.size(); ++c) cs[c].arm = d.cluster_arm[c];
    for (std::size_t r = 0; r < y.size(); ++r) {
        ClusterStats& s = cs[d.row_cluster[r]];
        s.n += 1.0;
        s.sum += y[r];
        s.sumsq += y[r] * y[r];
    }
    for (const auto& s : cs)
        if (s.n == 0.0)
            throw std::invalid_argument("mixed_model: empty cluster");
    return cs;
}

// Everything the profiled REML criterion needs at a given rho, computed
// from per-cluster sufficient statistics in O(C).
struct ProfileEval {
    double criterion;    // -2 restricted log-likelihood up to a constant
    double sigma2;       // profiled total variance
    double beta0, beta1;
    double var0, var1;   // Var of each GLS arm mean, in units of sigma2
    double logdet_w;
    double sum_u[2];
};

ProfileEval eval_profile(const std::vector<ClusterStats>& cs, double n_total, double rho) {
    double sum_u[2] = {0.0, 0.0};
    double sum_uy[2] = {0.0, 0.0};
    double quad = 0.0;
    double logdet_w = 0.0;

    for (const auto& c : cs) {
        const double shrink = 1.0 + (c.n - 1.0) * rho;
        const double u = c.n / shrink;
        const double ybar = c.mean();
        const int a = static_cast<int>(c.arm);
        sum_u[a] += u;
        sum_uy[a] += u * ybar;
        quad += (c.sumsq - rho * c.n * ybar * ybar * u) / (1.0 - rho);
        logdet_w += (c.n - 1.0) * std::log1p(-rho) + std::log(shrink);
    }

    const double mean0 = sum_uy[0] / sum_u[0];
    const double mean1 = sum_uy[1] / sum_u[1];
    // Residual quadratic form after the per-arm GLS projection. Grouping
    // the arm terms keeps the criterion invariant under arm relabeling.
    const double q = quad - (sum_uy[0] * mean0 + sum_uy[1] * mean1);

    ProfileEval e;
    e.sigma2 = q / (n_total - 2.0);
    e.beta0 = mean0;
    e.beta1 = mean1 - mean0;
    e.var0 = 1.0 / sum_u[0];
    e.var1 = 1.0 / sum_u[1];
    e.logdet_w = logdet_w;
    e.sum_u[0] = sum_u[0];
    e.sum_u[1] = sum_u[1];
    if (!(e.sigma2 > 0.0)) {
        e.criterion = std::numeric_limits<double>::infinity();
        return e;
    }
    e.criterion = (n_total - 2.0) * std::log(e.sigma2) + logdet_w +
                  (std::log(sum_u[0]) + std::log(sum_u[1]));
    return e;
}

} // namespace

LmmFit fit_reml(const TrialDataset& d, const std::vector<double>& y) {
    const auto cs = cluster_stats(d, y);
    const double n_total = static_cast<double>(y.size());
    const int n_clusters = static_cast<int>(cs.size());

    int c_arm[2] = {0, 0};
    for (const auto& c : cs) ++c_arm[static_cast<int>(c.arm)];
    if (c_arm[0] == 0 || c_arm[1] == 0)
        throw std::invalid_argument("fit_reml: both arms need at least one cluster");
    if (n_clusters < 2)
        throw std::invalid_argument("fit_reml: at least two clusters required");
    if (n_total <= 2.0)
        throw std::invalid_argument("fit_reml: more than two observations required");

    if (!std::isfinite(eval_profile(cs, n_total, 0.0).criterion))
        throw ConvergenceError("fit_reml: zero residual variance (all responses identical "
                               "given arm)");

    // Stationarity equation: minimize the criterion by bisecting the sign
    // of its analytic derivative. Comparing criterion values directly
    // cannot resolve the minimizer past ~sqrt(eps); the derivative keeps
    // full double precision.
    auto dcriterion = [&](double rho) {
        double sum_u[2] = {0.0, 0.0};
        double sum_uy[2] = {0.0, 0.0};
        double d_u[2] = {0.0, 0.0};
        double d_uy[2] = {0.0, 0.0};
        double quad = 0.0, d_quad = 0.0, d_logdet = 0.0;
        const double om = 1.0 - rho;

        for (const auto& c : cs) {
            const double s = 1.0 + (c.n - 1.0) * rho;
            const double u = c.n / s;
            const double du = -c.n * (c.n - 1.0) / (s * s);
            const double ybar = c.mean();
            const double g = c.n * ybar * ybar;
            const int a = static_cast<int>(c.arm);
            sum_u[a] += u;
            sum_uy[a] += u * ybar;
            d_u[a] += du;
            d_uy[a] += du * ybar;
            const double numer = c.sumsq - rho * g * u;
            quad += numer / om;
            d_quad += numer / (om * om) - g * (u + rho * du) / om;
            d_logdet += (c.n - 1.0) * (1.0 / s - 1.0 / om);
        }

        auto proj = [&](int a) { return sum_uy[a] * sum_uy[a] / sum_u[a]; };
        auto d_proj = [&](int a) {
            return (2.0 * sum_uy[a] * d_uy[a] * sum_u[a] -
                    sum_uy[a] * sum_uy[a] * d_u[a]) /
                   (sum_u[a] * sum_u[a]);
        };
        const double q = quad - (proj(0) + proj(1));
        if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
        const double dq = d_quad - (d_proj(0) + d_proj(1));
        return (n_total - 2.0) * dq / q + d_logdet + (d_u[0] / sum_u[0] + d_u[1] / sum_u[1]);
    };

    const double hi = 1.0 - 1e-8;
    const int max_iter = 200;
    double x = 0.0;
    bool boundary = false;
    bool converged = true;
    int iter = 0;

    if (dcriterion(0.0) >= 0.0) {
        boundary = true; // criterion increasing at 0: variance ratio on the floor
    } else if (dcriterion(hi) <= 0.0) {
        x = hi; // still decreasing at the cap: between-cluster variance dominates
    } else {
        double a = 0.0, b = hi;
        converged = false;
        for (; iter < max_iter; ++iter) {
            const double mid = 0.5 * (a + b);
            if (b - a < 1e-12 || mid == a || mid == b) {
                converged = true;
                break;
            }
            if (dcriterion(mid) < 0.0)
                a = mid;
            else
                b = mid;
        }
        x = 0.5 * (a + b);
        if (x < 1e-10) {
            x = 0.0;
            boundary = true;
        }
    }

    const ProfileEval e = eval_profile(cs, n_total, x);

    LmmFit fit;
    fit.beta0 = e.beta0;
    fit.beta1 = e.beta1;
    fit.se_beta1 = std::sqrt(e.sigma2 * (e.var0 + e.var1));
    fit.vc.rho = x;
    fit.vc.sigma2_alpha = x * e.sigma2;
    fit.vc.sigma2_eps = (1.0 - x) * e.sigma2;
    fit.df = n_clusters - 2;
    fit.n_clusters = n_clusters;
    fit.clusters_control = c_arm[0];
    fit.clusters_treatment = c_arm[1];
    fit.iterations = iter;
    fit.reml_criterion = e.criterion + (n_total - 2.0) * (1.0 + std::log(2.0 * std::numbers::pi));
    fit.boundary = boundary;
    fit.converged = converged;
    if (!fit.converged)
        throw ConvergenceError("fit_reml: optimizer failed to converge");
    return fit;
}

LmmFit fit_reml(const TrialDataset& d, const GlobalWinFractionTable& g) {
    return fit_reml(d, g.y);
}

VarianceComponents balanced_anova_components(const TrialDataset& d,
                                             const std::vector<double>& y) {
    const auto cs = cluster_stats(d, y);
    const double n = cs.front().n;
    for (const auto& c : cs)
        if (c.n != n)
            throw std::invalid_argument("balanced_anova_components: unbalanced cluster sizes");
    const int n_clusters = static_cast<int>(cs.size());
    if (n_clusters < 3)
        throw std::invalid_argument("balanced_anova_components: at least 3 clusters required");
    const double n_total = n * n_clusters;
    if (n_total <= static_cast<double>(n_clusters))
        throw std::invalid_argument("balanced_anova_components: needs clusters of size > 1");

    double arm_sum[2] = {0.0, 0.0};
    double arm_n[2] = {0.0, 0.0};
    for (const auto& c : cs) {
        const int a = static_cast<int>(c.arm);
        arm_sum[a] += c.sum;
        arm_n[a] += c.n;
    }

    double ssw = 0.0, ssb = 0.0;
    for (const auto& c : cs) {
        const int a = static_cast<int>(c.arm);
        ssw += c.sumsq - c.n * c.mean() * c.mean();
        const double arm_mean = arm_sum[a] / arm_n[a];
        ssb += c.n * (c.mean() - arm_mean) * (c.mean() - arm_mean);
    }

    const double msw = ssw / (n_total - n_clusters);
    const double msb = ssb / (n_clusters - 2);

    VarianceComponents vc;
    vc.sigma2_eps = msw;
    vc.sigma2_alpha = std::max(0.0, (msb - msw) / n);
    const double total = vc.sigma2_alpha + vc.sigma2_eps;
    vc.rho = total > 0.0 ? vc.sigma2_alpha / total : 0.0;
    return vc;
}

GlsArmMeans gls_arm_means(const TrialDataset& d, const std::vector<double>& y,
                          const VarianceComponents& vc) {
    const auto cs = cluster_stats(d, y);
    const double sigma2 = vc.sigma2_alpha + vc.sigma2_eps;
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("gls_arm_means: total variance must be positive");
    const double rho = vc.rho;

    double sum_w[2] = {0.0, 0.0};
    double sum_wy[2] = {0.0, 0.0};
    for (const auto& c : cs) {
        const double w = 1.0 / ((sigma2 / c.n) * (1.0 + (c.n - 1.0) * rho));
        const int a = static_cast<int>(c.arm);
        sum_w[a] += w;
        sum_wy[a] += w * c.mean();
    }

    GlsArmMeans out;
    out.mean_control = sum_wy[0] / sum_w[0];
    out.mean_treatment = sum_wy[1] / sum_w[1];
    out.var_control = 1.0 / sum_w[0];
    out.var_treatment = 1.0 / sum_w[1];
    return out;
}

} // namespace gwp
