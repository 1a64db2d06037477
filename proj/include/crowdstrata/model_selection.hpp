#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "crowdstrata/count_data.hpp"
#include "crowdstrata/stratification.hpp"

namespace crowdstrata {

/// Cross-validation grid for the prior parameter gamma.
struct GridSpec {
    std::vector<double> gammas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    /// Held-out fractions.
    std::vector<double> ratios{0.1, 0.2, 0.25};
    int n_seeds = 10;
    Count beta = kDefaultBeta;
    LikelihoodKind likelihood = LikelihoodKind::Multinomial;
    std::optional<int> alpha;
    /// Worker threads for the grid; 0 picks hardware concurrency. Results do
    /// not depend on this value.
    unsigned threads = 0;

    void validate() const;
};

struct GridCell {
    double gamma = 0.0;
    double ratio = 0.0;
    double mean_loglik = 0.0;
};

struct GammaSelection {
    double gamma_best = 0.0;
    std::vector<double> gammas;
    std::vector<double> ratios;
    /// Gamma-major, ratio-minor.
    std::vector<GridCell> table;
    /// rank_indices[r][g]: 0-based position of gammas[g] when ratio r's means
    /// are sorted descending (ties toward smaller gamma).
    std::vector<std::vector<int>> rank_indices;
    /// index_sums[g] = sum over ratios of rank_indices[r][g].
    std::vector<int> index_sums;
};

/// Seeded shuffle; the last ceil(ratio * n) records are held out.
std::pair<std::vector<CountRecord>, std::vector<CountRecord>> split_records(const std::vector<CountRecord>& records,
                                                                            double ratio, std::uint64_t seed);

/// Log-probability of the test counts under the piecewise-uniform density
/// given by the optimal partition of the smoothed train histogram. Test
/// counts above the train range take the last bin's per-cell probability.
double held_out_log_likelihood(const std::vector<CountRecord>& train, const std::vector<CountRecord>& test,
                               double gamma, const GridSpec& spec);

GammaSelection select_gamma(const std::vector<CountRecord>& records, const GridSpec& spec);

/// Ranks already-computed means; exposed separately so the rank rule can be
/// checked on hand-made tables. means[g][r] indexes gammas by g, ratios by r.
GammaSelection rank_gammas(const std::vector<double>& gammas, const std::vector<double>& ratios,
                           const std::vector<std::vector<double>>& means);

/// select_gamma, then the optimal partition of the full smoothed histogram.
Partition optimal_bins(const std::vector<CountRecord>& records, const GridSpec& spec,
                       GammaSelection* selection = nullptr);

}  // namespace crowdstrata
