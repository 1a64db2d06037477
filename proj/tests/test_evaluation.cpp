#include <doctest.h>

#include <cmath>
#include <random>

#include "crowdstrata/error.hpp"
#include "crowdstrata/evaluation.hpp"
#include "crowdstrata/sampling.hpp"
#include "crowdstrata/serialize.hpp"
#include "oracle.hpp"

using namespace crowdstrata;

namespace {

Partition make(std::vector<Bin> bins) {
    Partition p;
    p.bins = std::move(bins);
    return p;
}

BinStats stats(std::size_t n, double mae, double std) {
    BinStats s;
    s.n = n;
    s.mae = mae;
    s.std = std;
    return s;
}

std::vector<PredictionRecord> random_preds(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PredictionRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<Count>(std::floor(std::exp(6 * u(gen))));
        out.push_back({"p" + std::to_string(i), y, static_cast<double>(y) * (0.5 + u(gen)) + 20 * (u(gen) - 0.5)});
    }
    return out;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("per-bin stats") {
    const std::vector<PredictionRecord> preds{{"a", 5, 6}, {"b", 5, 2}};
    const auto s = per_bin_stats(preds, make({{0, 10}}));
    REQUIRE(s.size() == 1);
    CHECK(s[0].n == 2);
    CHECK(*s[0].mae == 2.0);
    CHECK(*s[0].std == 1.0);

    const auto t = per_bin_stats({{"a", 50, 47}}, make({{0, 10}, {11, 99}}));
    CHECK(t[0].n == 0);
    CHECK_FALSE(t[0].mae);
    CHECK_FALSE(t[0].std);
    CHECK(t[1].n == 1);
    CHECK(*t[1].std == 0.0);
}

TEST_CASE("routing matches assign_bins") {
    std::mt19937_64 gen(6);
    const auto part = make({{0, 3}, {4, 40}, {41, 200}});
    const auto preds = random_preds(gen, 200);
    std::vector<CountRecord> recs;
    for (const auto& p : preds) recs.push_back({p.id, p.y});
    const auto assignment = assign_bins(recs, part);
    const auto s = per_bin_stats(preds, part);
    for (std::size_t b = 0; b < s.size(); ++b) CHECK(s[b].n == assignment.bins[b].size());
}

TEST_CASE("pool examples") {
    auto r = pool({stats(4, 2.5, 0.7)});
    CHECK(r.first == 2.5);
    CHECK(r.second == doctest::Approx(0.7).epsilon(1e-15));
    r = pool({stats(2, 1, 0), stats(2, 3, 0)});
    CHECK(r.first == 2.0);
    CHECK(r.second == 0.0);
    r = pool({stats(1, 0, 0), stats(3, 4, 2)});
    CHECK(r.first == 3.0);
    CHECK(r.second == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    BinStats empty;
    r = pool({empty, stats(1, 0, 0), stats(3, 4, 2)});
    CHECK(r.first == 3.0);
    CHECK_THROWS_AS(pool({empty}), ValidationError);
}

TEST_CASE("global stats") {
    auto g = global_stats({{"a", 5, 6}, {"b", 5, 2}});
    CHECK(g == std::pair{2.0, 1.0});
    g = global_stats({{"a", 5, 5}, {"b", 7, 7}});
    CHECK(g == std::pair{0.0, 0.0});
    CHECK_THROWS_AS(global_stats({}), ValidationError);

    std::mt19937_64 gen(3);
    const auto preds = random_preds(gen, 100);
    std::vector<double> errs;
    for (const auto& p : preds) errs.push_back(std::abs(static_cast<double>(p.y) - p.y_hat));
    const auto ref = oracle::two_pass(errs);
    g = global_stats(preds);
    CHECK(std::abs(g.first - ref.mean) < 1e-12 * std::max(1.0, ref.mean));
    CHECK(std::abs(g.second - ref.std) < 1e-12 * std::max(1.0, ref.std));
}

TEST_CASE("pooled mean equals global mean, pooled std is at most global std") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 100; ++trial) {
        const auto preds = random_preds(gen, 5 + gen() % 200);
        std::vector<Bin> bins{{0, static_cast<Count>(gen() % 20)}};
        while (bins.back().hi < 300) {
            const Count lo = bins.back().hi + 1;
            bins.push_back({lo, lo + static_cast<Count>(gen() % 100)});
        }
        const auto rep = evaluate(preds, make(bins));
        CHECK(std::abs(rep.pooled_mae - rep.global_mae) <= 1e-12 * std::max(1.0, rep.global_mae));
        CHECK(rep.pooled_std <= rep.global_std + 1e-12);
        std::size_t n = 0;
        for (const auto& s : rep.per_bin) n += s.n;
        CHECK(n == rep.n_total);
    }
}

TEST_CASE("ingest predictions") {
    const auto p = ingest_predictions("id,count_true,count_pred\r\na,3,2.5\r\n\r\nb,0,1e1\n");
    REQUIRE(p.size() == 2);
    CHECK(p[1].y_hat == 10.0);
    CHECK(ingest_predictions("id,count_true,count_pred\n").empty());
    CHECK_THROWS_AS(ingest_predictions("id,count_true,count_pred\na,x,1\n"), ParseError);
    CHECK_THROWS_AS(ingest_predictions("id,count_true,count_pred\na,-1,1\n"), ValidationError);
    CHECK_THROWS_AS(ingest_predictions("id,count_true,count_pred\na,1\n"), ParseError);
    CHECK_THROWS_AS(ingest_predictions("id,count\na,1\n"), ParseError);
}

TEST_CASE("render report") {
    const auto part = make({{0, 10}, {11, 99}});
    const auto rep = evaluate({{"a", 5, 6}, {"b", 5, 2}}, part);
    CHECK(render_report(rep, part) ==
          "bin_lo,bin_hi,n,mae,std\n"
          "0,10,2,2,1\n"
          "11,99,0,,\n"
          "pooled,,2,2,1\n"
          "global,,2,2,1\n");
    const auto json = report_json(rep);
    CHECK(json.find("\"std\": null") != std::string::npos);
}

TEST_CASE("perfect predictions") {
    const auto rep = evaluate({{"a", 1, 1}, {"b", 40, 40}}, make({{0, 10}, {11, 99}}));
    CHECK(rep.pooled_mae == 0.0);
    CHECK(rep.pooled_std == 0.0);
    CHECK(rep.global_mae == 0.0);
    CHECK(rep.global_std == 0.0);
}

}
