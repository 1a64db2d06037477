#include "crowdstrata/stratification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crowdstrata/error.hpp"

namespace crowdstrata {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_p0(double gamma, int alpha) { return std::log((1.0 - gamma) / (1.0 - std::pow(gamma, alpha))); }

// Bins may only start at a support cell. A bin spanning support cells
// [first, last] covers counts from cells[first] (0 for the first bin) up to
// one below the next bin's start (C for the last bin).
struct CellLayout {
    std::vector<Count> cells;
    Count max_count = 0;

    explicit CellLayout(const CountHistogram& hist) : cells(hist.support()), max_count(hist.max_count()) {
        if (cells.empty()) throw ValidationError("cannot partition an empty histogram");
    }

    [[nodiscard]] std::size_t size() const noexcept { return cells.size(); }

    [[nodiscard]] Bin bin(std::size_t first, std::size_t last) const {
        const Count lo = first == 0 ? 0 : cells[first];
        const Count hi = last + 1 == cells.size() ? max_count : cells[last + 1] - 1;
        return {lo, hi};
    }
};

// Scores this close are treated as equal so that mathematically tied
// partitions fall to the tie rule instead of to rounding noise.
constexpr double kTieTolerance = 1e-12;

bool tied(double a, double b) {
    return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

bool strictly_above(double a, double b) { return a > b && !tied(a, b); }

// Candidate ordering shared by the DP and the enumeration oracle.
bool better(double score, std::size_t n_bins, std::size_t last_start, double best_score, std::size_t best_n_bins,
            std::size_t best_last_start) {
    if (best_score == kNegInf) return true;
    if (!tied(score, best_score)) return score > best_score;
    if (n_bins != best_n_bins) return n_bins < best_n_bins;
    return last_start < best_last_start;
}

Partition make_partition(const CellLayout& layout, const std::vector<std::size_t>& starts, double score,
                         const PriorConfig& cfg, int alpha, const CountHistogram& hist, LikelihoodKind kind) {
    Partition p;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const std::size_t last = k + 1 < starts.size() ? starts[k + 1] - 1 : layout.size() - 1;
        p.bins.push_back(layout.bin(starts[k], last));
    }
    p.map_score = score;
    p.gamma_used = cfg.gamma;
    p.alpha = alpha;
    p.beta = hist.smoothing_beta();
    p.likelihood = kind;
    return p;
}

}  // namespace

std::string_view to_string(LikelihoodKind kind) {
    return kind == LikelihoodKind::Multinomial ? "multinomial" : "poisson";
}

LikelihoodKind parse_likelihood(std::string_view name) {
    if (name == "multinomial") return LikelihoodKind::Multinomial;
    if (name == "poisson") return LikelihoodKind::Poisson;
    throw ValidationError("unknown likelihood '" + std::string(name) + "'");
}

void PriorConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    if (alpha && *alpha < 1) throw ValidationError("alpha must be at least 1");
}

int PriorConfig::resolved_alpha(std::size_t n_cells) const {
    return alpha ? *alpha : static_cast<int>(std::max<std::size_t>(n_cells, 1));
}

std::size_t Partition::bin_index(Count count, bool* clamped) const {
    if (clamped) *clamped = count > bins.back().hi;
    if (count < 0) throw RangeError("negative count");
    auto it = std::lower_bound(bins.begin(), bins.end(), count, [](const Bin& b, Count c) { return b.hi < c; });
    if (it == bins.end()) return bins.size() - 1;
    return static_cast<std::size_t>(it - bins.begin());
}

void Partition::validate() const {
    if (bins.empty()) throw ValidationError("partition has no bins");
    if (bins.front().lo != 0) throw ValidationError("partition must start at count 0");
    for (std::size_t k = 0; k < bins.size(); ++k) {
        if (bins[k].hi < bins[k].lo) throw ValidationError("bin with hi < lo");
        if (k > 0 && bins[k].lo != bins[k - 1].hi + 1) throw ValidationError("partition bins are not contiguous");
    }
}

double prior_log_prob(int n_bins, const PriorConfig& cfg) {
    cfg.validate();
    if (!cfg.alpha) throw ValidationError("prior_log_prob needs an explicit alpha");
    const int alpha = *cfg.alpha;
    if (n_bins < 1 || n_bins > alpha) return kNegInf;
    return log_p0(cfg.gamma, alpha) + n_bins * std::log(cfg.gamma);
}

BinScorer::BinScorer(const CountHistogram& hist, LikelihoodKind kind) : kind_(kind), max_count_(hist.max_count()) {
    const auto& freqs = hist.freqs();
    mass_.assign(freqs.size() + 1, 0.0);
    lgfact_.assign(freqs.size() + 1, 0.0);
    for (std::size_t c = 0; c < freqs.size(); ++c) {
        const double x = static_cast<double>(freqs[c]);
        mass_[c + 1] = mass_[c] + x;
        lgfact_[c + 1] = lgfact_[c] + std::lgamma(x + 1.0);
    }
    // Bin masses and widths are integers; tabulate their logs when small enough.
    const auto table_size = static_cast<std::size_t>(std::max(hist.total(), hist.max_count() + 1)) + 1;
    if (table_size <= kMaxTable) {
        log_int_.resize(table_size);
        lgamma_int_.resize(table_size);
        for (std::size_t k = 0; k < table_size; ++k) {
            log_int_[k] = std::log(static_cast<double>(k));
            lgamma_int_[k] = std::lgamma(static_cast<double>(k) + 1.0);
        }
    }
}

double BinScorer::operator()(Count lo, Count hi) const {
    if (lo < 0 || hi < lo || hi > max_count())
        throw RangeError("bin [" + std::to_string(lo) + ", " + std::to_string(hi) + "] outside histogram range [0, " +
                         std::to_string(max_count()) + "]");
    const auto l = static_cast<std::size_t>(lo);
    const auto h = static_cast<std::size_t>(hi) + 1;
    const double mass = mass_[h] - mass_[l];
    const Count width = hi - lo + 1;
    const double log_fact = lgfact_[h] - lgfact_[l];
    const bool tabulated = !log_int_.empty();
    const auto mass_index = static_cast<std::size_t>(mass);
    const double log_width = tabulated ? log_int_[static_cast<std::size_t>(width)] : std::log(static_cast<double>(width));
    switch (kind_) {
        case LikelihoodKind::Multinomial: {
            if (lo == hi) return 0.0;
            const double log_mass_fact = tabulated ? lgamma_int_[mass_index] : std::lgamma(mass + 1.0);
            return log_mass_fact - log_fact - mass * log_width;
        }
        case LikelihoodKind::Poisson: {
            if (mass == 0.0) return 0.0;
            const double log_mass = tabulated ? log_int_[mass_index] : std::log(mass);
            return mass * (log_mass - log_width) - mass - log_fact;
        }
    }
    return 0.0;
}

double bin_log_likelihood(const CountHistogram& hist, Count lo, Count hi, LikelihoodKind kind) {
    return BinScorer(hist, kind)(lo, hi);
}

double partition_log_score(const CountHistogram& hist, std::span<const Bin> bins, const PriorConfig& cfg,
                           LikelihoodKind kind) {
    cfg.validate();
    Partition shape;
    shape.bins.assign(bins.begin(), bins.end());
    shape.validate();
    if (shape.max_count() != hist.max_count())
        throw RangeError("partition does not cover the histogram range [0, " + std::to_string(hist.max_count()) + "]");

    const int alpha = cfg.resolved_alpha(hist.support().size());
    if (static_cast<int>(bins.size()) > alpha) return kNegInf;
    const BinScorer scorer(hist, kind);
    const double log_gamma = std::log(cfg.gamma);
    double acc = 0.0;
    for (const Bin& b : bins) acc = acc + (scorer(b.lo, b.hi) + log_gamma);
    return acc + log_p0(cfg.gamma, alpha);
}

Partition optimal_partition(const CountHistogram& hist, const PriorConfig& cfg, LikelihoodKind kind) {
    cfg.validate();
    const CellLayout layout(hist);
    const BinScorer scorer(hist, kind);
    const std::size_t m = layout.size();
    const int alpha = cfg.resolved_alpha(m);
    const double log_gamma = std::log(cfg.gamma);
    auto block = [&](std::size_t first, std::size_t last) {
        const Bin b = layout.bin(first, last);
        return scorer(b.lo, b.hi) + log_gamma;
    };

    std::vector<std::size_t> starts;
    double best_score = kNegInf;

    if (static_cast<std::size_t>(alpha) >= m) {
        // score[r] = best score for cells [0, r); start[r] = first cell of its last bin
        std::vector<double> score(m + 1, kNegInf);
        std::vector<std::size_t> n_bins(m + 1, 0), start(m + 1, 0);
        score[0] = 0.0;
        for (std::size_t r = 1; r <= m; ++r) {
            for (std::size_t i = 0; i < r; ++i) {
                const double s = score[i] + block(i, r - 1);
                if (better(s, n_bins[i] + 1, i, score[r], n_bins[r], start[r])) {
                    score[r] = s;
                    n_bins[r] = n_bins[i] + 1;
                    start[r] = i;
                }
            }
        }
        for (std::size_t r = m; r > 0; r = start[r]) starts.push_back(start[r]);
        best_score = score[m];
    } else {
        // Bin-count-constrained variant: score[k][r] uses exactly k bins.
        const auto kmax = static_cast<std::size_t>(alpha);
        std::vector<std::vector<double>> score(kmax + 1, std::vector<double>(m + 1, kNegInf));
        std::vector<std::vector<std::size_t>> start(kmax + 1, std::vector<std::size_t>(m + 1, 0));
        score[0][0] = 0.0;
        for (std::size_t k = 1; k <= kmax; ++k) {
            for (std::size_t r = k; r <= m; ++r) {
                for (std::size_t i = k - 1; i < r; ++i) {
                    if (score[k - 1][i] == kNegInf) continue;
                    const double s = score[k - 1][i] + block(i, r - 1);
                    if (score[k][r] == kNegInf || strictly_above(s, score[k][r])) {
                        score[k][r] = s;
                        start[k][r] = i;
                    }
                }
            }
        }
        std::size_t best_k = 0;
        for (std::size_t k = 1; k <= kmax; ++k) {
            if (score[k][m] == kNegInf) continue;
            if (best_k == 0 || strictly_above(score[k][m], best_score)) {
                best_score = score[k][m];
                best_k = k;
            }
        }
        for (std::size_t k = best_k, r = m; k > 0; --k) {
            starts.push_back(start[k][r]);
            r = start[k][r];
        }
    }
    std::reverse(starts.begin(), starts.end());
    return make_partition(layout, starts, best_score + log_p0(cfg.gamma, alpha), cfg, alpha, hist, kind);
}

Partition brute_force_partition(const CountHistogram& hist, const PriorConfig& cfg, LikelihoodKind kind) {
    cfg.validate();
    const CellLayout layout(hist);
    const std::size_t m = layout.size();
    if (m > kBruteForceMaxCells)
        throw ValidationError("brute-force enumeration refused: " + std::to_string(m) + " cells exceeds " +
                              std::to_string(kBruteForceMaxCells));
    const BinScorer scorer(hist, kind);
    const int alpha = cfg.resolved_alpha(m);
    const double log_gamma = std::log(cfg.gamma);

    double best_score = kNegInf;
    std::vector<std::size_t> best_starts;
    std::vector<std::size_t> starts;
    // Bit b of mask set means a new bin starts at cell b + 1.
    const std::uint64_t n_masks = std::uint64_t{1} << (m - 1);
    for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
        starts.assign(1, 0);
        for (std::size_t b = 0; b + 1 < m; ++b)
            if (mask >> b & 1U) starts.push_back(b + 1);
        if (static_cast<int>(starts.size()) > alpha) continue;

        double acc = 0.0;
        for (std::size_t k = 0; k < starts.size(); ++k) {
            const std::size_t last = k + 1 < starts.size() ? starts[k + 1] - 1 : m - 1;
            const Bin bin = layout.bin(starts[k], last);
            acc = acc + (scorer(bin.lo, bin.hi) + log_gamma);
        }

        bool take = best_starts.empty();
        if (!take && tied(acc, best_score) && starts.size() == best_starts.size()) {
            // compare split positions from the last bin backwards
            take = std::lexicographical_compare(starts.rbegin(), starts.rend(), best_starts.rbegin(), best_starts.rend());
        } else if (!take) {
            take = better(acc, starts.size(), starts.back(), best_score, best_starts.size(), best_starts.back());
        }
        if (take) {
            best_score = acc;
            best_starts = starts;
        }
    }
    return make_partition(layout, best_starts, best_score + log_p0(cfg.gamma, alpha), cfg, alpha, hist, kind);
}

}  // namespace crowdstrata
