#pragma once

#include "gwp/dataset.hpp"

#include <span>
#include <vector>

namespace gwp {

// Midranks: tied values receive the average of the positions they occupy.
// Output sums to n(n+1)/2. Ties use exact value equality.
std::vector<double> midranks(std::span<const double> values);

// Overall rank (among all N responses) and group-specific rank (among the
// responses of the row's own arm) for one endpoint.
struct RankTable {
    std::size_t endpoint = 0;
    std::vector<double> overall_rank; // per row, in [1, N]
    std::vector<double> group_rank;   // per row, in [1, N_i]
};

RankTable rank_tables(const TrialDataset& d, std::size_t k);

// Per-individual win fractions for one endpoint: the proportion of wins
// (ties counted half) against every response in the opposite arm.
struct WinFractionTable {
    std::size_t endpoint = 0;
    std::vector<double> y; // per row, in [0, 1]
};

// Rank form: Y = (R - G) / (N - N_i).
WinFractionTable win_fractions_rank_form(const TrialDataset& d, const RankTable& rt);

// Convenience: rank_tables + rank form.
WinFractionTable win_fractions(const TrialDataset& d, std::size_t k);

// Direct pairwise evaluation (win 1, tie 0.5, loss 0 against each opposite
// arm response). O(N1*N0); the independent oracle for the rank form.
WinFractionTable win_fractions_bruteforce(const TrialDataset& d, std::size_t k);

// Weighted within-individual mean of the K endpoint win fractions.
struct GlobalWinFractionTable {
    std::vector<double> y; // per row
    std::vector<double> weights_used;
};

GlobalWinFractionTable global_win_fractions(const std::vector<WinFractionTable>& tables,
                                            const std::vector<double>& weights);

// Builds endpoint win fractions (rank form) and the weighted global table
// using the dataset's endpoint weights.
GlobalWinFractionTable global_win_fractions(const TrialDataset& d);

struct WinLossTie {
    double win = 0.0;
    double loss = 0.0;
    double tie = 0.0;
};

// Treatment win/loss/tie proportions over all N1*N0 pairs; sums to 1.
WinLossTie win_loss_tie_proportions(const TrialDataset& d, std::size_t k);

} // namespace gwp
