#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "crowdstrata/error.hpp"
#include "crowdstrata/model_selection.hpp"
#include "crowdstrata/serialize.hpp"
#include "oracle.hpp"

using namespace crowdstrata;

namespace {

std::vector<CountRecord> records_from(const std::vector<Count>& counts) {
    std::vector<CountRecord> out;
    for (std::size_t i = 0; i < counts.size(); ++i) out.push_back({"r" + std::to_string(i), counts[i]});
    return out;
}

std::vector<CountRecord> heavy_tail(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<Count> counts;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        counts.push_back(static_cast<Count>(std::floor(std::exp(4.0 * u))));
    }
    return records_from(counts);
}

}  // namespace

TEST_SUITE("model-selection") {

TEST_CASE("split sizes and determinism") {
    const auto recs = records_from({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    const auto [train, test] = split_records(recs, 0.2, 7);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
    const auto again = split_records(recs, 0.2, 7);
    CHECK(again.first == train);
    CHECK(again.second == test);

    std::vector<std::string> ids;
    for (const auto& r : train) ids.push_back(r.id);
    for (const auto& r : test) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> expected;
    for (const auto& r : recs) expected.push_back(r.id);
    std::sort(expected.begin(), expected.end());
    CHECK(ids == expected);

    CHECK(split_records(records_from(std::vector<Count>(30, 1)), 0.1, 0).second.size() == 3);
    CHECK(split_records(records_from(std::vector<Count>(7, 1)), 0.25, 0).second.size() == 2);

    CHECK_THROWS_AS(split_records(records_from({4}), 0.5, 0), ValidationError);
    CHECK_THROWS_AS(split_records(recs, 0.0, 0), ValidationError);
    CHECK_THROWS_AS(split_records(recs, 1.0, 0), ValidationError);
}

TEST_CASE("held-out log-likelihood examples") {
    GridSpec spec;
    // Smoothed train [2,2]; at gamma 0.1 one bin covers both cells.
    const auto train = records_from({0, 1});
    const auto test = records_from({0, 0});
    CHECK(held_out_log_likelihood(train, test, 0.1, spec) == doctest::Approx(2 * std::log(0.5)).epsilon(1e-14));

    // Beyond the train range: scored with the last bin's per-cell probability.
    const double clamped = held_out_log_likelihood(train, records_from({17}), 0.1, spec);
    CHECK(std::isfinite(clamped));
    CHECK(clamped == doctest::Approx(std::log(0.5)).epsilon(1e-14));

    // Two bins with masses 3 and 1 over N = 4.
    GridSpec raw = spec;
    raw.beta = 0;
    const auto train2 = records_from({0, 0, 0, 1});
    CHECK(optimal_partition(build_histogram(train2), {0.9, std::nullopt}, LikelihoodKind::Multinomial).size() == 2);
    CHECK(held_out_log_likelihood(train2, records_from({0}), 0.9, raw) ==
          doctest::Approx(std::log(0.75)).epsilon(1e-14));
    CHECK(held_out_log_likelihood(train2, records_from({1}), 0.9, raw) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-14));

    CHECK_THROWS_AS(held_out_log_likelihood({}, test, 0.5, spec), ValidationError);
    CHECK_THROWS_AS(held_out_log_likelihood(train, {}, 0.5, spec), ValidationError);
}

TEST_CASE("held-out log-likelihood matches a direct density") {
    GridSpec spec;
    const auto recs = heavy_tail(120, 4);
    for (double gamma : {0.1, 0.5, 0.9}) {
        const auto [train, test] = split_records(recs, 0.25, 3);
        const auto hist = smooth(build_histogram(train), 1);
        const auto part = optimal_partition(hist, {gamma, std::nullopt}, LikelihoodKind::Multinomial);
        double expected = 0.0;
        for (const auto& r : test) {
            const Count c = std::min(r.count, hist.max_count());
            const auto it = std::find_if(part.bins.begin(), part.bins.end(), [&](const Bin& b) { return b.contains(c); });
            double mass = 0.0;
            for (Count k = it->lo; k <= it->hi; ++k) mass += static_cast<double>(hist.freq(k));
            expected += std::log(mass / static_cast<double>(hist.total()) / static_cast<double>(it->width()));
        }
        CHECK(held_out_log_likelihood(train, test, gamma, spec) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("rank rule examples") {
    const std::vector<double> gammas{0.3, 0.5};
    const std::vector<double> ratios{0.1, 0.2};
    auto sel = rank_gammas(gammas, ratios, {{-10, -11}, {-12, -9}});
    CHECK(sel.rank_indices == std::vector<std::vector<int>>{{0, 1}, {1, 0}});
    CHECK(sel.index_sums == std::vector<int>{1, 1});
    CHECK(sel.gamma_best == 0.3);

    sel = rank_gammas(gammas, ratios, {{-10, -9}, {-12, -11}});
    CHECK(sel.index_sums == std::vector<int>{0, 2});
    CHECK(sel.gamma_best == 0.3);

    // Ordering of the grid does not matter for the tie break.
    sel = rank_gammas({0.5, 0.3}, ratios, {{-12, -9}, {-10, -11}});
    CHECK(sel.gamma_best == 0.3);

    // Equal means rank the smaller gamma first.
    sel = rank_gammas({0.7, 0.2}, {0.1}, {{-5}, {-5}});
    CHECK(sel.rank_indices[0] == std::vector<int>{1, 0});
    CHECK(sel.gamma_best == 0.2);

    sel = rank_gammas({0.4}, ratios, {{-3, -4}});
    CHECK(sel.gamma_best == 0.4);
    CHECK(sel.index_sums == std::vector<int>{0});
}

TEST_CASE("select_gamma table, ranks and sums") {
    GridSpec spec;
    spec.n_seeds = 3;
    const auto recs = heavy_tail(80, 1);
    const auto sel = select_gamma(recs, spec);
    const std::size_t ng = spec.gammas.size(), nr = spec.ratios.size();
    REQUIRE(sel.table.size() == ng * nr);
    for (std::size_t g = 0; g < ng; ++g) {
        for (std::size_t r = 0; r < nr; ++r) {
            const auto& cell = sel.table[g * nr + r];
            CHECK(cell.gamma == spec.gammas[g]);
            CHECK(cell.ratio == spec.ratios[r]);
            double sum = 0.0;
            for (int s = 0; s < spec.n_seeds; ++s) {
                const auto [train, test] = split_records(recs, spec.ratios[r], static_cast<std::uint64_t>(s));
                sum += held_out_log_likelihood(train, test, spec.gammas[g], spec);
            }
            CHECK(cell.mean_loglik == sum / spec.n_seeds);
            CHECK(std::isfinite(cell.mean_loglik));
        }
    }
    for (const auto& idx : sel.rank_indices) {
        auto sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expected(ng);
        std::iota(expected.begin(), expected.end(), 0);
        CHECK(sorted == expected);
    }
    CHECK(std::accumulate(sel.index_sums.begin(), sel.index_sums.end(), 0) ==
          static_cast<int>(nr * (ng - 1) * ng / 2));
    CHECK(std::find(spec.gammas.begin(), spec.gammas.end(), sel.gamma_best) != spec.gammas.end());
    const auto best = std::min_element(sel.index_sums.begin(), sel.index_sums.end());
    CHECK(sel.gamma_best == spec.gammas[static_cast<std::size_t>(best - sel.index_sums.begin())]);
}

TEST_CASE("select_gamma does not depend on the thread count") {
    GridSpec spec;
    spec.n_seeds = 2;
    const auto recs = heavy_tail(60, 9);
    spec.threads = 1;
    const auto one = selection_json(select_gamma(recs, spec));
    spec.threads = 4;
    CHECK(selection_json(select_gamma(recs, spec)) == one);
    CHECK(selection_json(select_gamma(recs, spec)) == one);
}

TEST_CASE("optimal_bins") {
    GridSpec single;
    single.gammas = {0.4};
    single.n_seeds = 2;
    const auto recs = heavy_tail(70, 2);
    GammaSelection sel;
    const auto part = optimal_bins(recs, single, &sel);
    CHECK(sel.gamma_best == 0.4);
    CHECK(part.gamma_used == 0.4);
    const auto direct = optimal_partition(smooth(build_histogram(recs), 1), {0.4, std::nullopt}, LikelihoodKind::Multinomial);
    CHECK(partition_json(part) == partition_json(direct));

    GridSpec spec;
    CHECK(partition_json(optimal_bins(recs, spec)) == partition_json(optimal_bins(recs, spec)));

    // Toy set whose histogram is [5,5,1,1] without extra smoothing.
    GridSpec toy;
    toy.beta = 0;
    const auto toy_recs = records_from({0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 3});
    const auto toy_part = optimal_bins(toy_recs, toy, &sel);
    const auto ref = oracle::enumerate({5, 5, 1, 1}, sel.gamma_best, 4, false);
    std::vector<oracle::BinBounds> got;
    for (const auto& b : toy_part.bins) got.emplace_back(b.lo, b.hi);
    CHECK(got == ref.bins);
    CHECK(toy_part.map_score == doctest::Approx(ref.score).epsilon(1e-12));

    CHECK_THROWS_AS(optimal_bins({}, spec), ValidationError);
}

TEST_CASE("grid validation") {
    GridSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.gammas = {};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.gammas = {1.0};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = GridSpec{};
    spec.ratios = {0.0};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = GridSpec{};
    spec.n_seeds = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("defaults") {
    const GridSpec spec;
    CHECK(spec.gammas == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
    CHECK(spec.ratios == std::vector<double>{0.1, 0.2, 0.25});
    CHECK(spec.n_seeds == 10);
    CHECK(spec.beta == 1);
    CHECK(spec.likelihood == LikelihoodKind::Multinomial);
}

}
