#include "gwp/oracle.hpp"

#include "gwp/inference.hpp"
#include "gwp/mixed_model.hpp"
#include "gwp/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gwp {

namespace {

int uniform_int(RandomStream& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
}

} // namespace

TrialDataset random_fixture(RandomStream& rng, const FixtureSpec& spec) {
    const int n_clusters = uniform_int(rng, spec.min_clusters, spec.max_clusters);
    const int K = uniform_int(rng, spec.min_endpoints, spec.max_endpoints);
    const int balanced_size = uniform_int(rng, spec.min_cluster_size, spec.max_cluster_size);

    TrialDataset d;
    for (int k = 0; k < K; ++k)
        d.endpoints.push_back({"e" + std::to_string(k + 1), Direction::higher_is_better, 1.0});
    d.values.assign(K, {});

    // Random split with at least one cluster per arm.
    const int n_treatment = uniform_int(rng, 1, n_clusters - 1);
    for (int c = 0; c < n_clusters; ++c) {
        const Arm arm = c < n_treatment ? Arm::treatment : Arm::control;
        d.cluster_labels.push_back((arm == Arm::treatment ? "T" : "C") + std::to_string(c));
        d.cluster_arm.push_back(arm);

        const int size = spec.balanced
                             ? balanced_size
                             : uniform_int(rng, spec.min_cluster_size, spec.max_cluster_size);
        std::vector<int> shift(K);
        for (int k = 0; k < K; ++k) shift[k] = uniform_int(rng, 0, spec.cluster_shift_range);
        for (int i = 0; i < size; ++i) {
            d.row_cluster.push_back(c);
            d.row_id.push_back(std::to_string(i + 1));
            for (int k = 0; k < K; ++k)
                d.values[k].push_back(
                    static_cast<double>(uniform_int(rng, 0, spec.categories - 1) + shift[k]));
        }
    }
    return d;
}

double plugin_theta_bruteforce(const TrialDataset& d) {
    const std::size_t n = d.num_rows();
    double theta_sum = 0.0;
    for (std::size_t k = 0; k < d.num_endpoints(); ++k) {
        double h_sum = 0.0;
        double pairs = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (d.row_arm(a) != Arm::treatment) continue;
            for (std::size_t b = 0; b < n; ++b) {
                if (d.row_arm(b) != Arm::control) continue;
                if (d.values[k][a] > d.values[k][b])
                    h_sum += 1.0;
                else if (d.values[k][a] == d.values[k][b])
                    h_sum += 0.5;
                pairs += 1.0;
            }
        }
        theta_sum += h_sum / pairs;
    }
    return theta_sum / static_cast<double>(d.num_endpoints());
}

namespace {

SuiteResult suite_rank_vs_bruteforce(const OracleOptions& opts) {
    SuiteResult res{"rank_vs_bruteforce"};
    RandomStream rng(opts.seed);
    FixtureSpec spec;
    double worst = 0.0;
    for (int i = 0; i < opts.datasets; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        for (std::size_t k = 0; k < d.num_endpoints(); ++k) {
            WinFractionTable fast = win_fractions(d, k);
            const WinFractionTable slow = win_fractions_bruteforce(d, k);
            if (opts.inject_fault && i == 0 && k == 0) fast.y[0] += 1e-6;
            for (std::size_t r = 0; r < fast.y.size(); ++r)
                worst = std::max(worst, std::fabs(fast.y[r] - slow.y[r]));
        }
        ++res.cases;
    }
    res.worst = worst;
    res.pass = worst < 1e-12;
    return res;
}

SuiteResult suite_plugin_identity(const OracleOptions& opts) {
    SuiteResult res{"plugin_identity"};
    RandomStream rng(opts.seed + 1);
    FixtureSpec spec;
    spec.balanced = true;
    double worst = 0.0;
    for (int i = 0; i < opts.datasets; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        const GlobalWinFractionTable g = global_win_fractions(d);
        const LmmFit fit = fit_reml(d, g);
        const double theta_model = 0.5 * (fit.beta1 + 1.0);
        const double theta_plugin = plugin_theta_bruteforce(d);
        worst = std::max(worst, std::fabs(theta_model - theta_plugin));
        ++res.cases;
    }
    res.worst = worst;
    res.pass = worst < 1e-10;
    return res;
}

SuiteResult suite_rank_sum_identity(const OracleOptions& opts) {
    SuiteResult res{"rank_sum_identity"};
    RandomStream rng(opts.seed + 2);
    FixtureSpec spec;
    double worst = 0.0;
    bool all_pass = true;
    for (int i = 0; i < opts.datasets; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        std::vector<RankTable> rts;
        std::vector<WinFractionTable> wf;
        std::vector<double> weights(d.num_endpoints(), 1.0);
        for (std::size_t k = 0; k < d.num_endpoints(); ++k) {
            rts.push_back(rank_tables(d, k));
            wf.push_back(win_fractions_rank_form(d, rts.back()));
        }
        const GlobalWinFractionTable g = global_win_fractions(wf, weights);
        const RankSumDiagnostic diag = rank_sum_equivalence(d, g, rts);
        const double nk = static_cast<double>(d.num_rows() * d.num_endpoints());
        worst = std::max(worst, diag.abs_diff / nk);
        all_pass = all_pass && diag.pass;
        ++res.cases;
    }
    res.worst = worst;
    res.pass = all_pass;
    return res;
}

SuiteResult suite_reml_vs_anova(const OracleOptions& opts) {
    SuiteResult res{"reml_vs_anova"};
    RandomStream rng(opts.seed + 3);
    FixtureSpec spec;
    spec.balanced = true;
    spec.min_clusters = 6;
    double worst = 0.0;
    int interior = 0;
    int attempts = 0;
    while (interior < opts.datasets && attempts < opts.datasets * 20) {
        ++attempts;
        const TrialDataset d = random_fixture(rng, spec);
        const GlobalWinFractionTable g = global_win_fractions(d);
        const VarianceComponents anova = balanced_anova_components(d, g.y);
        if (!(anova.rho > 0.01)) continue; // keep clearly interior draws
        const LmmFit fit = fit_reml(d, g);
        if (fit.boundary) continue;
        ++interior;
        const double rel_alpha =
            std::fabs(fit.vc.sigma2_alpha - anova.sigma2_alpha) / anova.sigma2_alpha;
        const double rel_eps = std::fabs(fit.vc.sigma2_eps - anova.sigma2_eps) / anova.sigma2_eps;
        worst = std::max({worst, rel_alpha, rel_eps});
    }
    res.cases = interior;
    res.worst = worst;
    res.pass = interior >= opts.datasets && worst < 1e-8;
    if (interior < opts.datasets) res.detail = "too few interior solutions";
    return res;
}

SuiteResult suite_transform_consistency(const OracleOptions& opts) {
    SuiteResult res{"transform_consistency"};
    RandomStream rng(opts.seed + 4);
    FixtureSpec spec;
    double worst = 0.0;
    for (int i = 0; i < opts.datasets; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        const TrialDataset m = swap_arms(d);

        const LmmFit fit_d = fit_reml(d, global_win_fractions(d));
        const LmmFit fit_m = fit_reml(m, global_win_fractions(m));
        const GwpEstimate est_d = estimate_gwp(fit_d);
        const GwpEstimate est_m = estimate_gwp(fit_m);

        // Mirroring the arms complements theta and negates/inverts the
        // transforms.
        worst = std::max(worst, std::fabs(est_d.theta_hat + est_m.theta_hat - 1.0));
        const WinDifference wd_d = to_win_difference(est_d, 0.95);
        const WinDifference wd_m = to_win_difference(est_m, 0.95);
        worst = std::max(worst, std::fabs(wd_d.delta_hat + wd_m.delta_hat));
        worst = std::max(worst, std::fabs(wd_d.delta_hat - (2.0 * est_d.theta_hat - 1.0)));
        const WinOdds wo_d = to_win_odds(est_d, 0.95);
        const WinOdds wo_m = to_win_odds(est_m, 0.95);
        worst = std::max(worst, std::fabs(wo_d.lambda_hat * wo_m.lambda_hat - 1.0));
        worst = std::max(worst,
                         std::fabs(wo_d.lambda_hat - est_d.theta_hat / (1.0 - est_d.theta_hat)));
        ++res.cases;
    }
    res.worst = worst;
    res.pass = worst < 1e-10;
    return res;
}

} // namespace

std::vector<SuiteResult> run_oracle_suites(const OracleOptions& opts) {
    std::vector<SuiteResult> out;
    out.push_back(suite_rank_vs_bruteforce(opts));
    out.push_back(suite_plugin_identity(opts));
    out.push_back(suite_rank_sum_identity(opts));
    out.push_back(suite_reml_vs_anova(opts));
    out.push_back(suite_transform_consistency(opts));
    return out;
}

} // namespace gwp
