#include "gwp/inference.hpp"

#include "gwp/dists.hpp"

#include <cmath>
#include <stdexcept>

namespace gwp {

namespace {

double critical_value(Critical critical, double level, int df) {
    const double p = 1.0 - 0.5 * (1.0 - level);
    if (critical == Critical::normal_z) return norm_quantile(p);
    if (df < 1)
        throw std::invalid_argument("critical_value: t critical requires df >= 1; "
                                    "fit has df = " + std::to_string(df) +
                                    " (C - 2 rule needs at least 3 clusters)");
    return t_quantile(p, static_cast<double>(df));
}

double logit(double p) { return std::log(p / (1.0 - p)); }
double inv_logit(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

GwpEstimate estimate_gwp(const LmmFit& fit, std::vector<double> weights) {
    GwpEstimate e;
    e.theta_hat = 0.5 * (fit.beta1 + 1.0);
    e.se = fit.se_beta1;
    e.df = fit.df;
    const double total = fit.vc.sigma2_alpha + fit.vc.sigma2_eps;
    e.icc_hat = total > 0.0 ? fit.vc.sigma2_alpha / total : 0.0;
    e.k = static_cast<int>(weights.size());
    e.weights = std::move(weights);
    return e;
}

IntervalEstimate confidence_interval(const GwpEstimate& e, double level, Scale scale,
                                     Critical critical) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence_interval: level must lie in (0,1)");

    IntervalEstimate ci;
    ci.scale = scale;
    ci.level = level;
    ci.critical = critical;
    const double crit = critical_value(critical, level, e.df);

    if (scale == Scale::identity) {
        ci.lower = e.theta_hat - crit * e.se;
        ci.upper = e.theta_hat + crit * e.se;
        return ci;
    }

    if (!(e.theta_hat > 0.0 && e.theta_hat < 1.0))
        throw std::invalid_argument("confidence_interval: logit scale requires theta in (0,1)");
    const double center = logit(e.theta_hat);
    const double spread = crit * e.se / (e.theta_hat * (1.0 - e.theta_hat));
    ci.lower = inv_logit(center - spread);
    ci.upper = inv_logit(center + spread);
    return ci;
}

TestResult hypothesis_test(const GwpEstimate& e, Scale scale, Critical critical,
                           bool two_sided) {
    TestResult t;
    t.two_sided = two_sided;
    t.null_value = scale == Scale::identity ? 0.5 : 0.0;

    if (scale == Scale::identity) {
        t.statistic = e.se > 0.0 ? (e.theta_hat - 0.5) / e.se
                                 : (e.theta_hat == 0.5 ? 0.0
                                                       : std::copysign(HUGE_VAL, e.theta_hat - 0.5));
    } else {
        if (!(e.theta_hat > 0.0 && e.theta_hat < 1.0))
            throw std::invalid_argument("hypothesis_test: logit scale requires theta in (0,1)");
        const double se_logit = e.se / (e.theta_hat * (1.0 - e.theta_hat));
        t.statistic = se_logit > 0.0 ? logit(e.theta_hat) / se_logit
                                     : (e.theta_hat == 0.5 ? 0.0
                                                           : std::copysign(HUGE_VAL, e.theta_hat - 0.5));
    }

    t.t_reference = critical == Critical::student_t;
    if (t.t_reference) {
        if (e.df < 1)
            throw std::invalid_argument("hypothesis_test: t reference requires df >= 1");
        t.df = e.df;
    }

    double upper_tail;
    if (std::isinf(t.statistic)) {
        upper_tail = 0.0;
    } else if (t.t_reference) {
        upper_tail = 1.0 - t_cdf(std::fabs(t.statistic), static_cast<double>(t.df));
    } else {
        upper_tail = 1.0 - norm_cdf(std::fabs(t.statistic));
    }
    if (two_sided) {
        t.p_value = std::min(1.0, 2.0 * upper_tail);
    } else {
        // one-sided: benefit direction (theta > 0.5, i.e. statistic > 0)
        if (std::isinf(t.statistic)) {
            t.p_value = t.statistic > 0 ? 0.0 : 1.0;
        } else if (t.t_reference) {
            t.p_value = 1.0 - t_cdf(t.statistic, static_cast<double>(t.df));
        } else {
            t.p_value = 1.0 - norm_cdf(t.statistic);
        }
    }
    return t;
}

WinDifference to_win_difference(const GwpEstimate& e, double level, Critical critical) {
    WinDifference wd;
    wd.delta_hat = 2.0 * e.theta_hat - 1.0;
    wd.se = 2.0 * e.se;
    const double crit = critical_value(critical, level, e.df);
    wd.interval.scale = Scale::identity;
    wd.interval.level = level;
    wd.interval.critical = critical;
    wd.interval.lower = wd.delta_hat - crit * wd.se;
    wd.interval.upper = wd.delta_hat + crit * wd.se;
    return wd;
}

WinOdds to_win_odds(const GwpEstimate& e, double level, Critical critical) {
    if (!(e.theta_hat > 0.0 && e.theta_hat < 1.0))
        throw std::invalid_argument("to_win_odds: theta must lie in (0,1)");

    WinOdds wo;
    wo.lambda_hat = e.theta_hat / (1.0 - e.theta_hat);
    wo.se_log_lambda = e.se / (e.theta_hat * (1.0 - e.theta_hat));
    const double crit = critical_value(critical, level, e.df);
    const double center = std::log(wo.lambda_hat);
    wo.interval.scale = Scale::logit;
    wo.interval.level = level;
    wo.interval.critical = critical;
    wo.interval.lower = std::exp(center - crit * wo.se_log_lambda);
    wo.interval.upper = std::exp(center + crit * wo.se_log_lambda);
    return wo;
}

RankSumDiagnostic rank_sum_equivalence(const TrialDataset& d,
                                       const GlobalWinFractionTable& g,
                                       const std::vector<RankTable>& rank_tables) {
    if (g.weights_used.empty())
        throw std::invalid_argument("rank_sum_equivalence: missing endpoint weights");
    for (double w : g.weights_used)
        if (w != g.weights_used.front())
            throw std::invalid_argument("rank_sum_equivalence: requires equal endpoint weights");
    if (rank_tables.size() != d.num_endpoints())
        throw std::invalid_argument("rank_sum_equivalence: rank table count mismatch");

    const std::size_t n = d.num_rows();
    const double n0 = static_cast<double>(d.arm_size(Arm::control));
    const double n1 = static_cast<double>(d.arm_size(Arm::treatment));
    const double nk = static_cast<double>(n) * static_cast<double>(d.num_endpoints());

    double ranksum_mean[2] = {0.0, 0.0};
    for (std::size_t r = 0; r < n; ++r) {
        double rs = 0.0;
        for (const auto& rt : rank_tables) rs += rt.overall_rank[r];
        ranksum_mean[static_cast<int>(d.row_arm(r))] += rs;
    }
    ranksum_mean[0] /= n0;
    ranksum_mean[1] /= n1;

    double theta = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        if (d.row_arm(r) == Arm::treatment) theta += g.y[r];
    theta /= n1;

    RankSumDiagnostic out;
    out.lhs = ranksum_mean[1] - ranksum_mean[0];
    out.rhs = nk * (theta - 0.5);
    out.abs_diff = std::fabs(out.lhs - out.rhs);
    out.pass = out.abs_diff < 1e-8 * nk;
    return out;
}

double cohen_to_theta(double delta) {
    return norm_cdf(delta / std::sqrt(2.0));
}

double theta_to_cohen(double theta) {
    if (!(theta > 0.0 && theta < 1.0))
        throw std::invalid_argument("theta_to_cohen: theta must lie in (0,1)");
    return std::sqrt(2.0) * norm_quantile(theta);
}

} // namespace gwp
