#include "gwp/ranks.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gwp {

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0)
        throw std::invalid_argument("midranks: empty input");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j); // 1-based positions i+1..j
        for (std::size_t m = i; m < j; ++m) ranks[order[m]] = avg;
        i = j;
    }
    return ranks;
}

RankTable rank_tables(const TrialDataset& d, std::size_t k) {
    if (k >= d.num_endpoints())
        throw std::invalid_argument("rank_tables: endpoint index out of range");
    const std::size_t n = d.num_rows();
    const std::vector<double>& x = d.values[k];

    RankTable rt;
    rt.endpoint = k;
    rt.overall_rank = midranks(x);
    rt.group_rank.assign(n, 0.0);

    for (Arm arm : {Arm::control, Arm::treatment}) {
        std::vector<std::size_t> rows;
        std::vector<double> vals;
        for (std::size_t r = 0; r < n; ++r) {
            if (d.row_arm(r) == arm) {
                rows.push_back(r);
                vals.push_back(x[r]);
            }
        }
        const std::vector<double> g = midranks(vals);
        for (std::size_t i = 0; i < rows.size(); ++i) rt.group_rank[rows[i]] = g[i];
    }
    return rt;
}

WinFractionTable win_fractions_rank_form(const TrialDataset& d, const RankTable& rt) {
    const std::size_t n = d.num_rows();
    if (rt.overall_rank.size() != n || rt.group_rank.size() != n)
        throw std::invalid_argument("win_fractions_rank_form: rank table does not match dataset");
    const double n0 = static_cast<double>(d.arm_size(Arm::control));
    const double n1 = static_cast<double>(d.arm_size(Arm::treatment));

    WinFractionTable wf;
    wf.endpoint = rt.endpoint;
    wf.y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double opposite = d.row_arm(r) == Arm::treatment ? n0 : n1;
        wf.y[r] = (rt.overall_rank[r] - rt.group_rank[r]) / opposite;
    }
    return wf;
}

WinFractionTable win_fractions(const TrialDataset& d, std::size_t k) {
    return win_fractions_rank_form(d, rank_tables(d, k));
}

WinFractionTable win_fractions_bruteforce(const TrialDataset& d, std::size_t k) {
    if (k >= d.num_endpoints())
        throw std::invalid_argument("win_fractions_bruteforce: endpoint index out of range");
    const std::size_t n = d.num_rows();
    const std::vector<double>& x = d.values[k];

    WinFractionTable wf;
    wf.endpoint = k;
    wf.y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Arm own = d.row_arm(r);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (d.row_arm(s) == own) continue;
            if (x[r] > x[s])
                sum += 1.0;
            else if (x[r] == x[s])
                sum += 0.5;
            ++count;
        }
        wf.y[r] = sum / static_cast<double>(count);
    }
    return wf;
}

GlobalWinFractionTable global_win_fractions(const std::vector<WinFractionTable>& tables,
                                            const std::vector<double>& weights) {
    if (tables.empty())
        throw std::invalid_argument("global_win_fractions: no endpoint tables");
    if (tables.size() != weights.size())
        throw std::invalid_argument("global_win_fractions: weight count does not match tables");
    const std::size_t n = tables.front().y.size();
    for (const auto& t : tables)
        if (t.y.size() != n)
            throw std::invalid_argument("global_win_fractions: tables cover different row sets");

    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0)
            throw std::invalid_argument("global_win_fractions: negative weight");
        wsum += w;
    }
    if (!(wsum > 0.0))
        throw std::invalid_argument("global_win_fractions: weights sum to zero");

    GlobalWinFractionTable g;
    g.weights_used = weights;
    g.y.assign(n, 0.0);
    // Normalizing the weights first keeps the K = 1 case an exact identity.
    std::vector<double> norm = weights;
    for (double& w : norm) w /= wsum;
    for (std::size_t k = 0; k < tables.size(); ++k)
        for (std::size_t r = 0; r < n; ++r) g.y[r] += norm[k] * tables[k].y[r];
    return g;
}

GlobalWinFractionTable global_win_fractions(const TrialDataset& d) {
    std::vector<WinFractionTable> tables;
    std::vector<double> weights;
    for (std::size_t k = 0; k < d.num_endpoints(); ++k) {
        tables.push_back(win_fractions(d, k));
        weights.push_back(d.endpoints[k].weight);
    }
    return global_win_fractions(tables, weights);
}

WinLossTie win_loss_tie_proportions(const TrialDataset& d, std::size_t k) {
    if (k >= d.num_endpoints())
        throw std::invalid_argument("win_loss_tie_proportions: endpoint index out of range");

    std::vector<double> ctl, trt;
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
        if (d.row_arm(r) == Arm::treatment)
            trt.push_back(d.values[k][r]);
        else
            ctl.push_back(d.values[k][r]);
    }
    std::sort(ctl.begin(), ctl.end());

    // Integer win/tie counts over all pairs via binary search.
    unsigned long long wins = 0, ties = 0;
    for (double t : trt) {
        const auto lb = std::lower_bound(ctl.begin(), ctl.end(), t);
        const auto ub = std::upper_bound(ctl.begin(), ctl.end(), t);
        wins += static_cast<unsigned long long>(lb - ctl.begin());
        ties += static_cast<unsigned long long>(ub - lb);
    }
    const double pairs = static_cast<double>(trt.size()) * static_cast<double>(ctl.size());

    WinLossTie out;
    out.win = static_cast<double>(wins) / pairs;
    out.tie = static_cast<double>(ties) / pairs;
    out.loss = 1.0 - out.win - out.tie;
    return out;
}

} // namespace gwp
