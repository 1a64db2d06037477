#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "crowdstrata/count_data.hpp"

namespace crowdstrata {

/// Closed integer count range [lo, hi].
struct Bin {
    Count lo = 0;
    Count hi = 0;

    [[nodiscard]] Count width() const noexcept { return hi - lo + 1; }
    [[nodiscard]] bool contains(double value) const noexcept {
        return static_cast<double>(lo) <= value && value <= static_cast<double>(hi);
    }
    friend bool operator==(const Bin&, const Bin&) = default;
};

enum class LikelihoodKind { Multinomial, Poisson };

std::string_view to_string(LikelihoodKind kind);
LikelihoodKind parse_likelihood(std::string_view name);

/// Geometric prior over the number of bins. An unset alpha means "number of
/// cells in the histogram being partitioned", which makes the cap vacuous.
struct PriorConfig {
    double gamma = 0.5;
    std::optional<int> alpha;

    void validate() const;
    [[nodiscard]] int resolved_alpha(std::size_t n_cells) const;
};

struct Partition {
    std::vector<Bin> bins;
    double map_score = 0.0;
    double gamma_used = 0.0;
    int alpha = 1;
    Count beta = 0;
    LikelihoodKind likelihood = LikelihoodKind::Multinomial;

    [[nodiscard]] std::size_t size() const noexcept { return bins.size(); }
    [[nodiscard]] Count max_count() const { return bins.back().hi; }

    /// Index of the bin holding `count`; counts above the range land in the
    /// last bin. Sets *clamped when that happens.
    [[nodiscard]] std::size_t bin_index(Count count, bool* clamped = nullptr) const;

    /// Throws ValidationError unless bins are non-empty, contiguous and start at 0.
    void validate() const;
};

/// log P(n_bins) = log[(1-gamma)/(1-gamma^alpha)] + n_bins log gamma on
/// [1, alpha], -inf outside. cfg.alpha must be set.
double prior_log_prob(int n_bins, const PriorConfig& cfg);

/// O(1) bin log-likelihoods over one histogram via prefix sums of the
/// frequencies and of lgamma(freq + 1).
class BinScorer {
public:
    BinScorer(const CountHistogram& hist, LikelihoodKind kind);

    /// Throws RangeError unless 0 <= lo <= hi <= C.
    [[nodiscard]] double operator()(Count lo, Count hi) const;

    [[nodiscard]] Count max_count() const noexcept { return max_count_; }
    [[nodiscard]] LikelihoodKind kind() const noexcept { return kind_; }

private:
    LikelihoodKind kind_;
    Count max_count_;
    std::vector<double> mass_;    // mass_[c] = sum of freqs below c
    std::vector<double> lgfact_;  // lgfact_[c] = sum of lgamma(freq + 1) below c
    std::vector<double> log_int_;     // log(k)
    std::vector<double> lgamma_int_;  // lgamma(k + 1)

    static constexpr std::size_t kMaxTable = std::size_t{1} << 22;
};

double bin_log_likelihood(const CountHistogram& hist, Count lo, Count hi, LikelihoodKind kind);

/// Sum of bin log-likelihoods plus the log prior on the bin count.
double partition_log_score(const CountHistogram& hist, std::span<const Bin> bins, const PriorConfig& cfg,
                           LikelihoodKind kind);

/// MAP partition by dynamic programming over the histogram's support cells.
/// Ties go to fewer bins, then to the earlier final split.
Partition optimal_partition(const CountHistogram& hist, const PriorConfig& cfg, LikelihoodKind kind);

inline constexpr std::size_t kBruteForceMaxCells = 20;

/// Exhaustive enumeration of all 2^(M-1) partitions; same tie rule as
/// optimal_partition. Refuses histograms with more than 20 support cells.
Partition brute_force_partition(const CountHistogram& hist, const PriorConfig& cfg, LikelihoodKind kind);

}  // namespace crowdstrata
