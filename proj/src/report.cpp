#include "gwp/report.hpp"

#include "gwp/errors.hpp"
#include "gwp/version.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gwp {

AnalysisReport analyze(const TrialDataset& raw, const AnalysisOptions& opts) {
    raw.validate();

    AnalysisReport rep;
    rep.tool_version = GWP_VERSION;
    rep.observed = summarize(raw);

    const TrialDataset d = apply_directions(raw);
    const std::size_t K = d.num_endpoints();

    std::vector<RankTable> rank_tabs;
    std::vector<WinFractionTable> wf;
    std::vector<double> weights;
    for (std::size_t k = 0; k < K; ++k) {
        rank_tabs.push_back(rank_tables(d, k));
        wf.push_back(win_fractions_rank_form(d, rank_tabs.back()));
        weights.push_back(d.endpoints[k].weight);
    }

    // Win fraction descriptives reuse the dataset structure with
    // win fractions as values.
    TrialDataset wf_data = d;
    for (std::size_t k = 0; k < K; ++k) wf_data.values[k] = wf[k].y;
    rep.win_fraction = summarize(wf_data);

    const double n1 = static_cast<double>(d.arm_size(Arm::treatment));
    for (std::size_t k = 0; k < K; ++k) {
        double mean_trt = 0.0;
        for (std::size_t r = 0; r < d.num_rows(); ++r)
            if (d.row_arm(r) == Arm::treatment) mean_trt += wf[k].y[r];
        rep.endpoint_theta.push_back(mean_trt / n1);
        rep.endpoint_wlt.push_back(win_loss_tie_proportions(d, k));
    }

    const GlobalWinFractionTable g = global_win_fractions(wf, weights);
    rep.fit = fit_reml(d, g);
    if (opts.df_override >= 0) rep.fit.df = opts.df_override;
    rep.estimate = estimate_gwp(rep.fit, weights);

    const bool want_identity = opts.scale != IntervalScaleChoice::logit;
    const bool want_logit = opts.scale != IntervalScaleChoice::identity;
    if (want_identity) {
        rep.intervals.push_back(
            confidence_interval(rep.estimate, opts.level, Scale::identity, opts.critical));
        rep.tests.push_back(hypothesis_test(rep.estimate, Scale::identity, opts.critical));
    }
    if (want_logit) {
        rep.intervals.push_back(
            confidence_interval(rep.estimate, opts.level, Scale::logit, opts.critical));
        rep.tests.push_back(hypothesis_test(rep.estimate, Scale::logit, opts.critical));
    }

    rep.win_difference = to_win_difference(rep.estimate, opts.level, opts.critical);
    rep.win_odds = to_win_odds(rep.estimate, opts.level, opts.critical);
    return rep;
}

namespace {

std::string f4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string f3(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string ffull(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* scale_name(Scale s) { return s == Scale::identity ? "identity" : "logit"; }
const char* crit_name(Critical c) { return c == Critical::student_t ? "t" : "z"; }

} // namespace

std::string format_report(const AnalysisReport& r, const ValidationReport* vr) {
    std::ostringstream os;
    os << "gwp analyze (v" << r.tool_version << ")\n";
    if (!r.input_path.empty())
        os << "input: " << r.input_path << " (digest " << r.input_digest << ")\n";
    if (vr) {
        os << "rows: total " << vr->rows_total << ", kept " << vr->rows_kept << ", dropped "
           << vr->rows_dropped << "\n";
        os << "individuals: control " << vr->n_control << ", treatment " << vr->n_treatment
           << "\n";
    }
    os << "clusters: control " << r.fit.clusters_control << ", treatment "
       << r.fit.clusters_treatment << "\n\n";

    os << "descriptives (observed scores)\n";
    for (std::size_t k = 0; k < r.observed.endpoints.size(); ++k) {
        const auto& e = r.observed.endpoints[k];
        os << "  " << e.name << ": control " << f4(e.mean_control) << " (" << f4(e.sd_control)
           << "), treatment " << f4(e.mean_treatment) << " (" << f4(e.sd_treatment)
           << "), icc " << (std::isnan(e.icc) ? "undefined" : f4(e.icc)) << "\n";
    }
    for (std::size_t a = 0; a < r.observed.endpoints.size(); ++a)
        for (std::size_t b = a + 1; b < r.observed.endpoints.size(); ++b)
            os << "  corr(" << r.observed.endpoints[a].name << ", "
               << r.observed.endpoints[b].name << ") = " << f4(r.observed.correlation[a][b])
               << "\n";

    os << "descriptives (win fractions)\n";
    for (std::size_t k = 0; k < r.win_fraction.endpoints.size(); ++k) {
        const auto& e = r.win_fraction.endpoints[k];
        os << "  " << e.name << ": control " << f4(e.mean_control) << " (" << f4(e.sd_control)
           << "), treatment " << f4(e.mean_treatment) << " (" << f4(e.sd_treatment)
           << "), icc " << (std::isnan(e.icc) ? "undefined" : f4(e.icc)) << "\n";
    }
    for (std::size_t a = 0; a < r.win_fraction.endpoints.size(); ++a)
        for (std::size_t b = a + 1; b < r.win_fraction.endpoints.size(); ++b)
            os << "  corr(" << r.win_fraction.endpoints[a].name << ", "
               << r.win_fraction.endpoints[b].name << ") = "
               << f4(r.win_fraction.correlation[a][b]) << "\n";

    os << "per-endpoint win probability (mean treatment win fraction)\n";
    for (std::size_t k = 0; k < r.endpoint_theta.size(); ++k) {
        const auto& wlt = r.endpoint_wlt[k];
        os << "  " << r.observed.endpoints[k].name << ": theta " << f4(r.endpoint_theta[k])
           << " (win " << f4(wlt.win) << ", loss " << f4(wlt.loss) << ", tie " << f4(wlt.tie)
           << ")\n";
    }

    os << "\nglobal win probability\n";
    os << "  weights:";
    for (double w : r.estimate.weights) os << " " << f4(w);
    os << "\n";
    os << "  theta = " << f4(r.estimate.theta_hat) << " (se " << f4(r.estimate.se) << ", df "
       << r.estimate.df << ")\n";
    os << "  icc = " << f4(r.estimate.icc_hat) << "\n";
    os << "  beta1 = " << f4(r.fit.beta1) << " (se " << f4(r.fit.se_beta1) << ")\n";
    os << "  sigma2_alpha = " << f4(r.fit.vc.sigma2_alpha) << ", sigma2_eps = "
       << f4(r.fit.vc.sigma2_eps) << (r.fit.boundary ? " (boundary)" : "") << "\n";
    for (const auto& ci : r.intervals)
        os << "  " << static_cast<int>(ci.level * 100 + 0.5) << "% ci (" << scale_name(ci.scale)
           << ", " << crit_name(ci.critical) << "): " << f3(ci.lower) << " to " << f3(ci.upper)
           << "\n";
    for (const auto& t : r.tests) {
        os << "  test (" << (t.null_value == 0.5 ? "identity" : "logit") << "): T = "
           << f4(t.statistic) << ", ";
        if (t.t_reference)
            os << "t(" << t.df << ")";
        else
            os << "N(0,1)";
        os << ", p = " << f4(t.p_value) << "\n";
    }

    os << "\ntransforms\n";
    os << "  win difference = " << f4(r.win_difference.delta_hat) << " (se "
       << f4(r.win_difference.se) << "), ci " << f3(r.win_difference.interval.lower) << " to "
       << f3(r.win_difference.interval.upper) << "\n";
    os << "  win odds = " << f4(r.win_odds.lambda_hat) << " (se of log "
       << f4(r.win_odds.se_log_lambda) << "), ci " << f3(r.win_odds.interval.lower) << " to "
       << f3(r.win_odds.interval.upper) << "\n";
    os << "\nseed = " << r.seed << "\n";
    return os.str();
}

std::string format_report_machine(const AnalysisReport& r, const ValidationReport* vr) {
    std::ostringstream os;
    os << "tool_version = " << r.tool_version << "\n";
    if (!r.input_path.empty()) {
        os << "input_path = " << r.input_path << "\n";
        os << "input_digest = " << r.input_digest << "\n";
    }
    os << "seed = " << r.seed << "\n";
    if (vr) {
        os << "rows_total = " << vr->rows_total << "\n";
        os << "rows_kept = " << vr->rows_kept << "\n";
        os << "rows_dropped = " << vr->rows_dropped << "\n";
        os << "n_control = " << vr->n_control << "\n";
        os << "n_treatment = " << vr->n_treatment << "\n";
    }
    os << "clusters_control = " << r.fit.clusters_control << "\n";
    os << "clusters_treatment = " << r.fit.clusters_treatment << "\n";

    for (std::size_t k = 0; k < r.observed.endpoints.size(); ++k) {
        const auto& e = r.observed.endpoints[k];
        const std::string p = "endpoint." + e.name + ".";
        os << p << "mean_control = " << ffull(e.mean_control) << "\n";
        os << p << "sd_control = " << ffull(e.sd_control) << "\n";
        os << p << "mean_treatment = " << ffull(e.mean_treatment) << "\n";
        os << p << "sd_treatment = " << ffull(e.sd_treatment) << "\n";
        os << p << "icc_observed = " << ffull(e.icc) << "\n";
        const auto& w = r.win_fraction.endpoints[k];
        os << p << "wf_mean_control = " << ffull(w.mean_control) << "\n";
        os << p << "wf_sd_control = " << ffull(w.sd_control) << "\n";
        os << p << "wf_mean_treatment = " << ffull(w.mean_treatment) << "\n";
        os << p << "wf_sd_treatment = " << ffull(w.sd_treatment) << "\n";
        os << p << "wf_icc = " << ffull(w.icc) << "\n";
        os << p << "theta = " << ffull(r.endpoint_theta[k]) << "\n";
        os << p << "win = " << ffull(r.endpoint_wlt[k].win) << "\n";
        os << p << "loss = " << ffull(r.endpoint_wlt[k].loss) << "\n";
        os << p << "tie = " << ffull(r.endpoint_wlt[k].tie) << "\n";
    }
    for (std::size_t a = 0; a < r.observed.endpoints.size(); ++a)
        for (std::size_t b = a + 1; b < r.observed.endpoints.size(); ++b) {
            os << "corr." << r.observed.endpoints[a].name << "." << r.observed.endpoints[b].name
               << " = " << ffull(r.observed.correlation[a][b]) << "\n";
            os << "wf_corr." << r.observed.endpoints[a].name << "."
               << r.observed.endpoints[b].name << " = " << ffull(r.win_fraction.correlation[a][b])
               << "\n";
        }

    os << "theta_hat = " << ffull(r.estimate.theta_hat) << "\n";
    os << "se = " << ffull(r.estimate.se) << "\n";
    os << "df = " << r.estimate.df << "\n";
    os << "icc_hat = " << ffull(r.estimate.icc_hat) << "\n";
    os << "beta0 = " << ffull(r.fit.beta0) << "\n";
    os << "beta1 = " << ffull(r.fit.beta1) << "\n";
    os << "se_beta1 = " << ffull(r.fit.se_beta1) << "\n";
    os << "sigma2_alpha = " << ffull(r.fit.vc.sigma2_alpha) << "\n";
    os << "sigma2_eps = " << ffull(r.fit.vc.sigma2_eps) << "\n";
    os << "rho = " << ffull(r.fit.vc.rho) << "\n";
    os << "boundary = " << (r.fit.boundary ? 1 : 0) << "\n";
    os << "reml_criterion = " << ffull(r.fit.reml_criterion) << "\n";
    os << "reml_iterations = " << r.fit.iterations << "\n";

    for (const auto& ci : r.intervals) {
        const std::string p = std::string("ci.") + scale_name(ci.scale) + ".";
        os << p << "level = " << ffull(ci.level) << "\n";
        os << p << "lower = " << ffull(ci.lower) << "\n";
        os << p << "upper = " << ffull(ci.upper) << "\n";
        os << p << "critical = " << crit_name(ci.critical) << "\n";
    }
    for (const auto& t : r.tests) {
        const std::string p =
            std::string("test.") + (t.null_value == 0.5 ? "identity" : "logit") + ".";
        os << p << "statistic = " << ffull(t.statistic) << "\n";
        os << p << "p_value = " << ffull(t.p_value) << "\n";
        os << p << "reference = " << (t.t_reference ? "t" : "z") << "\n";
    }
    os << "win_difference = " << ffull(r.win_difference.delta_hat) << "\n";
    os << "win_difference_se = " << ffull(r.win_difference.se) << "\n";
    os << "win_difference_lower = " << ffull(r.win_difference.interval.lower) << "\n";
    os << "win_difference_upper = " << ffull(r.win_difference.interval.upper) << "\n";
    os << "win_odds = " << ffull(r.win_odds.lambda_hat) << "\n";
    os << "win_odds_se_log = " << ffull(r.win_odds.se_log_lambda) << "\n";
    os << "win_odds_lower = " << ffull(r.win_odds.interval.lower) << "\n";
    os << "win_odds_upper = " << ffull(r.win_odds.interval.upper) << "\n";
    return os.str();
}

std::string fnv1a_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("fnv1a_digest: cannot open '" + path + "'");
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

} // namespace gwp
