#include "gwp/errors.hpp"
#include "gwp/mixed_model.hpp"
#include "gwp/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace gwp;

namespace {

// Builds a one-endpoint dataset from per-cluster value lists.
TrialDataset clustered(const std::vector<std::pair<std::vector<double>, Arm>>& clusters) {
    TrialDataset d;
    d.endpoints = {{"y", Direction::higher_is_better, 1.0}};
    d.values.assign(1, {});
    int id = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        d.cluster_labels.push_back("cl" + std::to_string(c));
        d.cluster_arm.push_back(clusters[c].second);
        for (double v : clusters[c].first) {
            d.row_cluster.push_back(static_cast<int>(c));
            d.row_id.push_back(std::to_string(++id));
            d.values[0].push_back(v);
        }
    }
    return d;
}

// Unbalanced 10-cluster fixture with a REML solution computed
// independently (profiled restricted likelihood solved to 1e-15 and
// cross-checked against a second mixed-model implementation).
TrialDataset reml_reference_fixture() {
    return clustered({
        {{-0.1133410752, 0.7818765758, 0.8769333361}, Arm::control},
        {{-1.0339520695, -0.3189421144, -0.5409836122, -0.3912628948, -0.8093842798},
         Arm::control},
        {{0.9966852589, 0.64080464, 1.1714098947, 0.8415439623}, Arm::control},
        {{0.18362303, -0.4801936624, 0.4384727886, -0.0257153175, -0.0931835438,
          -0.3412171342},
         Arm::control},
        {{0.6506247275, 0.5137255575}, Arm::control},
        {{0.6429078501, 0.5594752895, 0.5831195631, 0.5921637588, 1.4475770578, 0.1735457491,
          0.1206318928},
         Arm::treatment},
        {{0.5231692564, 0.7796656915, 0.1582058163, -0.2048986934, -0.1970610627},
         Arm::treatment},
        {{1.0993345613, 0.9992846099, 0.3949526221, 0.8437881373}, Arm::treatment},
        {{0.6501843316, 0.9765544222, 0.6526378076}, Arm::treatment},
        {{0.7714092818, 0.8821794464, 1.05326386, 0.0090418371, 0.5777841389, 0.5024334199},
         Arm::treatment},
    });
}

} // namespace

TEST_CASE("balanced ANOVA components on a hand-computed fixture") {
    // 4 clusters x 3, means 0.45/0.60 (control) and 0.75/0.50 (treatment);
    // SSW = 0.02 -> MSW = 0.0025; SSB within arms = 0.1275 on 2 df.
    const TrialDataset d = clustered({
        {{0.40, 0.50, 0.45}, Arm::control},
        {{0.60, 0.55, 0.65}, Arm::control},
        {{0.70, 0.80, 0.75}, Arm::treatment},
        {{0.45, 0.50, 0.55}, Arm::treatment},
    });
    const VarianceComponents vc = balanced_anova_components(d, d.values[0]);
    CHECK(vc.sigma2_eps == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(vc.sigma2_alpha == doctest::Approx(0.020416666666666666).epsilon(1e-12));
    CHECK(vc.rho == doctest::Approx(0.8909090909090909).epsilon(1e-12));
    CHECK(vc.rho ==
          doctest::Approx(vc.sigma2_alpha / (vc.sigma2_alpha + vc.sigma2_eps)).epsilon(1e-12));
}

TEST_CASE("balanced ANOVA rejects unbalanced input and handles degenerate data") {
    const TrialDataset unbalanced = clustered({
        {{1.0, 2.0}, Arm::control},
        {{1.0, 2.0, 3.0}, Arm::control},
        {{2.0, 3.0}, Arm::treatment},
        {{1.0, 1.0}, Arm::treatment},
    });
    CHECK_THROWS_AS(balanced_anova_components(unbalanced, unbalanced.values[0]),
                    std::invalid_argument);

    const TrialDataset constant = clustered({
        {{2.0, 2.0}, Arm::control},
        {{2.0, 2.0}, Arm::control},
        {{2.0, 2.0}, Arm::treatment},
        {{2.0, 2.0}, Arm::treatment},
    });
    const VarianceComponents vc = balanced_anova_components(constant, constant.values[0]);
    CHECK(vc.sigma2_alpha == 0.0);
    CHECK(vc.sigma2_eps == 0.0);
    CHECK(vc.rho == 0.0);
}

TEST_CASE("fit_reml reproduces an independently solved unbalanced fit") {
    const TrialDataset d = reml_reference_fixture();
    const LmmFit fit = fit_reml(d, d.values[0]);

    CHECK(fit.converged);
    CHECK_FALSE(fit.boundary);
    CHECK(fit.vc.rho == doctest::Approx(0.5827238053561379).epsilon(1e-7));
    CHECK(fit.vc.sigma2_alpha == doctest::Approx(0.1833639724117067).epsilon(1e-7));
    CHECK(fit.vc.sigma2_eps == doctest::Approx(0.13130306319985863).epsilon(1e-7));
    CHECK(fit.beta0 == doctest::Approx(0.2475680071368345).epsilon(1e-7));
    CHECK(fit.beta1 == doctest::Approx(0.35403958115071943).epsilon(1e-7));
    CHECK(fit.se_beta1 == doctest::Approx(0.29397029379738815).epsilon(1e-7));
    CHECK(fit.df == 8); // C - 2
    CHECK(fit.n_clusters == 10);
    CHECK(fit.clusters_control == 5);
    CHECK(fit.clusters_treatment == 5);
}

TEST_CASE("fit_reml convergence diagnostics") {
    const TrialDataset d = reml_reference_fixture();
    const LmmFit fit = fit_reml(d, d.values[0]);
    CHECK(std::isfinite(fit.reml_criterion));
    CHECK(fit.iterations <= 200);
    CHECK(fit.converged);
}

TEST_CASE("fit_reml agrees with balanced ANOVA on interior solutions") {
    RandomStream rng(2024);
    FixtureSpec spec;
    spec.balanced = true;
    spec.min_clusters = 6;
    int interior = 0;
    for (int i = 0; i < 60 && interior < 25; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        const GlobalWinFractionTable g = global_win_fractions(d);
        const VarianceComponents anova = balanced_anova_components(d, g.y);
        if (!(anova.rho > 0.01)) continue;
        const LmmFit fit = fit_reml(d, g);
        if (fit.boundary) continue;
        ++interior;
        CHECK(fit.vc.sigma2_alpha ==
              doctest::Approx(anova.sigma2_alpha).epsilon(1e-8));
        CHECK(fit.vc.sigma2_eps == doctest::Approx(anova.sigma2_eps).epsilon(1e-8));
    }
    CHECK(interior >= 25);
}

TEST_CASE("fit_reml returns the boundary when cluster means are equal") {
    const TrialDataset d = clustered({
        {{0.0, 1.0, 2.0}, Arm::control},
        {{1.5, 0.0, 1.5}, Arm::control},
        {{2.0, 1.0, 0.0}, Arm::treatment},
        {{0.5, 1.0, 1.5}, Arm::treatment},
    });
    // every cluster mean is exactly 1.0
    const LmmFit fit = fit_reml(d, d.values[0]);
    CHECK(fit.boundary);
    CHECK(fit.vc.sigma2_alpha == 0.0);
    CHECK(fit.vc.rho == 0.0);
    CHECK(fit.beta1 == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("fit_reml error paths") {
    SUBCASE("zero residual variance") {
        // constant response within each arm leaves nothing to fit
        const TrialDataset constant = clustered({
            {{1.0, 1.0}, Arm::control},
            {{1.0, 1.0}, Arm::treatment},
        });
        CHECK_THROWS_AS(fit_reml(constant, constant.values[0]), ConvergenceError);
    }
    SUBCASE("too few observations") {
        const TrialDataset tiny = clustered({
            {{1.0}, Arm::control},
            {{2.0}, Arm::treatment},
        });
        CHECK_THROWS_AS(fit_reml(tiny, tiny.values[0]), std::invalid_argument);
    }
    SUBCASE("response length mismatch") {
        const TrialDataset d = reml_reference_fixture();
        std::vector<double> y(d.num_rows() - 1, 0.5);
        CHECK_THROWS_AS(fit_reml(d, y), std::invalid_argument);
    }
}

TEST_CASE("scale equivariance of the fit") {
    const TrialDataset d = reml_reference_fixture();
    const LmmFit base = fit_reml(d, d.values[0]);

    const double a = 2.5;
    std::vector<double> scaled = d.values[0];
    for (double& v : scaled) v *= a;
    const LmmFit fit = fit_reml(d, scaled);

    CHECK(fit.beta1 == doctest::Approx(a * base.beta1).epsilon(1e-9));
    CHECK(fit.se_beta1 == doctest::Approx(a * base.se_beta1).epsilon(1e-9));
    CHECK(fit.vc.sigma2_alpha == doctest::Approx(a * a * base.vc.sigma2_alpha).epsilon(1e-8));
    CHECK(fit.vc.sigma2_eps == doctest::Approx(a * a * base.vc.sigma2_eps).epsilon(1e-8));
    CHECK(fit.vc.rho == doctest::Approx(base.vc.rho).epsilon(1e-8));
}

TEST_CASE("equal-cluster-size theta equals the plug-in U-statistic mean") {
    RandomStream rng(888);
    FixtureSpec spec;
    spec.balanced = true;
    for (int i = 0; i < 25; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        const GlobalWinFractionTable g = global_win_fractions(d);
        const LmmFit fit = fit_reml(d, g);
        const double theta_model = 0.5 * (fit.beta1 + 1.0);
        const double theta_plugin = plugin_theta_bruteforce(d);
        CHECK(theta_model == doctest::Approx(theta_plugin).epsilon(1e-10));
    }
}

TEST_CASE("mirrored arms complement the fitted arm means") {
    RandomStream rng(4321);
    FixtureSpec spec;
    for (int i = 0; i < 10; ++i) {
        const TrialDataset d = random_fixture(rng, spec);
        const TrialDataset m = swap_arms(d);
        const LmmFit fit_d = fit_reml(d, global_win_fractions(d));
        const LmmFit fit_m = fit_reml(m, global_win_fractions(m));
        CHECK(fit_d.beta1 == doctest::Approx(-fit_m.beta1).epsilon(1e-10));
    }
}

TEST_CASE("gls_arm_means") {
    SUBCASE("equal cluster sizes reduce to the simple mean for any rho") {
        const TrialDataset d = clustered({
            {{0.2, 0.4, 0.6}, Arm::control},
            {{0.8, 1.0, 0.0}, Arm::control},
            {{0.5, 0.7, 0.9}, Arm::treatment},
            {{0.1, 0.3, 0.2}, Arm::treatment},
        });
        for (double rho : {0.0, 0.3, 0.9}) {
            VarianceComponents vc{rho * 0.04, (1.0 - rho) * 0.04, rho};
            const GlsArmMeans g = gls_arm_means(d, d.values[0], vc);
            CHECK(g.mean_control == doctest::Approx((0.2 + 0.4 + 0.6 + 0.8 + 1.0 + 0.0) / 6.0)
                                        .epsilon(1e-14));
            CHECK(g.mean_treatment == doctest::Approx((0.5 + 0.7 + 0.9 + 0.1 + 0.3 + 0.2) / 6.0)
                                          .epsilon(1e-14));
        }
    }
    SUBCASE("rho = 0 weights clusters by size") {
        const TrialDataset d = clustered({
            {{1.0}, Arm::control},
            {{2.0, 2.0, 2.0}, Arm::control},
            {{3.0}, Arm::treatment},
            {{5.0}, Arm::treatment},
        });
        VarianceComponents vc{0.0, 1.0, 0.0};
        const GlsArmMeans g = gls_arm_means(d, d.values[0], vc);
        CHECK(g.mean_control == doctest::Approx((1.0 + 3 * 2.0) / 4.0).epsilon(1e-14));
    }
    SUBCASE("one cluster per arm returns that cluster's mean regardless of rho") {
        const TrialDataset d = clustered({
            {{1.0, 2.0, 3.0}, Arm::control},
            {{4.0, 6.0}, Arm::treatment},
        });
        for (double rho : {0.0, 0.5, 0.99}) {
            VarianceComponents vc{rho, 1.0 - rho, rho};
            const GlsArmMeans g = gls_arm_means(d, d.values[0], vc);
            CHECK(g.mean_control == doctest::Approx(2.0).epsilon(1e-14));
            CHECK(g.mean_treatment == doctest::Approx(5.0).epsilon(1e-14));
        }
    }
    SUBCASE("beta1 equals the GLS mean difference at the fitted components") {
        const TrialDataset d = reml_reference_fixture();
        const LmmFit fit = fit_reml(d, d.values[0]);
        const GlsArmMeans g = gls_arm_means(d, d.values[0], fit.vc);
        CHECK(fit.beta1 == doctest::Approx(g.mean_treatment - g.mean_control).epsilon(1e-12));
        CHECK(fit.se_beta1 ==
              doctest::Approx(std::sqrt(g.var_control + g.var_treatment)).epsilon(1e-12));
    }
}
