#include "crowdstrata/model_selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "crowdstrata/error.hpp"
#include "crowdstrata/random.hpp"

namespace crowdstrata {

namespace {

std::size_t held_out_size(double ratio, std::size_t n) {
    const double exact = ratio * static_cast<double>(n);
    const double nearest = std::round(exact);
    // 0.1 * 30 evaluates to 3.0000000000000004; don't let that round up to 4
    if (std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(exact));
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

void GridSpec::validate() const {
    if (gammas.empty()) throw ValidationError("gamma grid is empty");
    if (ratios.empty()) throw ValidationError("ratio grid is empty");
    for (double g : gammas)
        if (!(g > 0.0 && g < 1.0)) throw ValidationError("grid gamma outside (0, 1)");
    for (double r : ratios)
        if (!(r > 0.0 && r < 1.0)) throw ValidationError("grid ratio outside (0, 1)");
    if (n_seeds < 1) throw ValidationError("n_seeds must be positive");
    if (beta < 0) throw ValidationError("beta must be non-negative");
    if (alpha && *alpha < 1) throw ValidationError("alpha must be at least 1");
}

std::pair<std::vector<CountRecord>, std::vector<CountRecord>> split_records(const std::vector<CountRecord>& records,
                                                                            double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
    const std::size_t n = records.size();
    const std::size_t n_test = held_out_size(ratio, n);
    if (n_test == 0 || n_test >= n)
        throw ValidationError("split ratio " + std::to_string(ratio) + " on " + std::to_string(n) +
                              " records leaves an empty side");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span(order));

    std::pair<std::vector<CountRecord>, std::vector<CountRecord>> out;
    out.first.reserve(n - n_test);
    out.second.reserve(n_test);
    for (std::size_t i = 0; i < n; ++i) (i < n - n_test ? out.first : out.second).push_back(records[order[i]]);
    return out;
}

double held_out_log_likelihood(const std::vector<CountRecord>& train, const std::vector<CountRecord>& test,
                               double gamma, const GridSpec& spec) {
    if (train.empty() || test.empty()) throw ValidationError("train and test sets must be non-empty");
    const CountHistogram hist = smooth(build_histogram(train), spec.beta);
    const Partition part = optimal_partition(hist, PriorConfig{gamma, spec.alpha}, spec.likelihood);

    const auto& freqs = hist.freqs();
    const double total = static_cast<double>(hist.total());
    std::vector<double> log_cell_prob;
    log_cell_prob.reserve(part.size());
    for (const Bin& b : part.bins) {
        const auto mass = std::accumulate(freqs.begin() + b.lo, freqs.begin() + b.hi + 1, Count{0});
        log_cell_prob.push_back(std::log(static_cast<double>(mass) / total / static_cast<double>(b.width())));
    }
    double loglik = 0.0;
    for (const auto& r : test) loglik += log_cell_prob[part.bin_index(r.count)];
    return loglik;
}

GammaSelection rank_gammas(const std::vector<double>& gammas, const std::vector<double>& ratios,
                           const std::vector<std::vector<double>>& means) {
    GammaSelection sel;
    sel.gammas = gammas;
    sel.ratios = ratios;
    const std::size_t ng = gammas.size();
    const std::size_t nr = ratios.size();
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t r = 0; r < nr; ++r) sel.table.push_back({gammas[g], ratios[r], means[g][r]});

    sel.index_sums.assign(ng, 0);
    sel.rank_indices.assign(nr, std::vector<int>(ng, 0));
    std::vector<std::size_t> order(ng);
    for (std::size_t r = 0; r < nr; ++r) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (means[a][r] != means[b][r]) return means[a][r] > means[b][r];
            if (gammas[a] != gammas[b]) return gammas[a] < gammas[b];
            return a < b;
        });
        for (std::size_t pos = 0; pos < ng; ++pos) {
            sel.rank_indices[r][order[pos]] = static_cast<int>(pos);
            sel.index_sums[order[pos]] += static_cast<int>(pos);
        }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < ng; ++g) {
        if (sel.index_sums[g] < sel.index_sums[best] ||
            (sel.index_sums[g] == sel.index_sums[best] && gammas[g] < gammas[best]))
            best = g;
    }
    sel.gamma_best = gammas[best];
    return sel;
}

GammaSelection select_gamma(const std::vector<CountRecord>& records, const GridSpec& spec) {
    spec.validate();
    if (records.empty()) throw ValidationError("cannot tune on an empty record set");
    const std::size_t ng = spec.gammas.size();
    const std::size_t nr = spec.ratios.size();
    const auto ns = static_cast<std::size_t>(spec.n_seeds);

    // Splits depend only on (ratio, seed); share them across gammas.
    std::vector<std::pair<std::vector<CountRecord>, std::vector<CountRecord>>> splits;
    splits.reserve(nr * ns);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t s = 0; s < ns; ++s) splits.push_back(split_records(records, spec.ratios[r], s));

    std::vector<double> cell(ng * nr * ns);
    parallel_for(cell.size(), spec.threads, [&](std::size_t idx) {
        const std::size_t g = idx / (nr * ns);
        const std::size_t rs = idx % (nr * ns);
        cell[idx] = held_out_log_likelihood(splits[rs].first, splits[rs].second, spec.gammas[g], spec);
    });

    std::vector<std::vector<double>> means(ng, std::vector<double>(nr, 0.0));
    for (std::size_t g = 0; g < ng; ++g) {
        for (std::size_t r = 0; r < nr; ++r) {
            double sum = 0.0;
            for (std::size_t s = 0; s < ns; ++s) sum += cell[(g * nr + r) * ns + s];
            means[g][r] = sum / static_cast<double>(ns);
        }
    }
    return rank_gammas(spec.gammas, spec.ratios, means);
}

Partition optimal_bins(const std::vector<CountRecord>& records, const GridSpec& spec, GammaSelection* selection) {
    GammaSelection sel = select_gamma(records, spec);
    const CountHistogram hist = smooth(build_histogram(records), spec.beta);
    Partition part = optimal_partition(hist, PriorConfig{sel.gamma_best, spec.alpha}, spec.likelihood);
    if (selection) *selection = std::move(sel);
    return part;
}

}  // namespace crowdstrata
