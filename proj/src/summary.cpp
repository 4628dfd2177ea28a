#include "gwp/summary.hpp"

#include <cmath>
#include <limits>

namespace gwp {

namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& x, const std::vector<char>& take) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (take[i]) {
            sum += x[i];
            ++n;
        }
    MeanSd out;
    if (n == 0) return out;
    out.mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (take[i]) ss += (x[i] - out.mean) * (x[i] - out.mean);
    out.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    return out;
}

// ANOVA moment estimator of the ICC for clusters nested within arms.
double anova_icc(const TrialDataset& d, std::size_t k) {
    const std::size_t C = d.num_clusters();
    const std::size_t N = d.num_rows();
    if (C < 3 || N <= C) return std::numeric_limits<double>::quiet_NaN();

    std::vector<double> cluster_sum(C, 0.0);
    std::vector<std::size_t> cluster_n(C, 0);
    double arm_sum[2] = {0.0, 0.0};
    std::size_t arm_n[2] = {0, 0};
    for (std::size_t r = 0; r < N; ++r) {
        const int c = d.row_cluster[r];
        const int a = static_cast<int>(d.cluster_arm[c]);
        cluster_sum[c] += d.values[k][r];
        ++cluster_n[c];
        arm_sum[a] += d.values[k][r];
        ++arm_n[a];
    }

    double ssw = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
        const int c = d.row_cluster[r];
        const double diff = d.values[k][r] - cluster_sum[c] / cluster_n[c];
        ssw += diff * diff;
    }

    double ssc = 0.0;
    double sum_n2_over_arm = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        const int a = static_cast<int>(d.cluster_arm[c]);
        const double cm = cluster_sum[c] / cluster_n[c];
        const double am = arm_sum[a] / arm_n[a];
        ssc += cluster_n[c] * (cm - am) * (cm - am);
        sum_n2_over_arm += static_cast<double>(cluster_n[c]) * cluster_n[c] / arm_n[a];
    }

    const double msw = ssw / (N - C);
    const double msc = ssc / (C - 2);
    const double n0 = (static_cast<double>(N) - sum_n2_over_arm) / (C - 2);
    if (!(n0 > 0.0)) return std::numeric_limits<double>::quiet_NaN();

    const double sigma2_between = std::max(0.0, (msc - msw) / n0);
    const double total = sigma2_between + msw;
    if (!(total > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return sigma2_between / total;
}

} // namespace

DatasetSummary summarize(const TrialDataset& d) {
    d.validate();
    const std::size_t K = d.num_endpoints();
    const std::size_t N = d.num_rows();

    std::vector<char> is_control(N), is_treatment(N);
    for (std::size_t r = 0; r < N; ++r) {
        const bool t = d.row_arm(r) == Arm::treatment;
        is_control[r] = !t;
        is_treatment[r] = t;
    }

    DatasetSummary s;
    for (std::size_t k = 0; k < K; ++k) {
        EndpointSummary es;
        es.name = d.endpoints[k].name;
        const MeanSd c = mean_sd(d.values[k], is_control);
        const MeanSd t = mean_sd(d.values[k], is_treatment);
        es.mean_control = c.mean;
        es.sd_control = c.sd;
        es.mean_treatment = t.mean;
        es.sd_treatment = t.sd;
        es.icc = anova_icc(d, k);
        s.endpoints.push_back(es);
    }

    // Pooled Pearson correlations across all individuals.
    std::vector<double> mean(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        for (double v : d.values[k]) mean[k] += v;
        mean[k] /= N;
    }
    s.correlation.assign(K, std::vector<double>(K, 1.0));
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a + 1; b < K; ++b) {
            double sab = 0.0, saa = 0.0, sbb = 0.0;
            for (std::size_t r = 0; r < N; ++r) {
                const double da = d.values[a][r] - mean[a];
                const double db = d.values[b][r] - mean[b];
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            const double denom = std::sqrt(saa * sbb);
            const double corr = denom > 0.0 ? sab / denom
                                            : std::numeric_limits<double>::quiet_NaN();
            s.correlation[a][b] = s.correlation[b][a] = corr;
        }
    }
    return s;
}

} // namespace gwp
