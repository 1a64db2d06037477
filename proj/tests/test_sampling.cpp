#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "crowdstrata/error.hpp"
#include "crowdstrata/sampling.hpp"
#include "crowdstrata/serialize.hpp"

using namespace crowdstrata;

namespace {

Partition two_bins() {
    Partition p;
    p.bins = {{0, 10}, {11, 99}};
    return p;
}

BinAssignment sized(const std::vector<std::size_t>& sizes) {
    BinAssignment a;
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        a.bins.emplace_back();
        for (std::size_t i = 0; i < sizes[b]; ++i) a.bins.back().push_back("b" + std::to_string(b) + "_" + std::to_string(i));
        a.total += sizes[b];
    }
    return a;
}

std::vector<std::string> flatten(const BatchPlan& plan) {
    std::vector<std::string> out;
    for (const auto& batch : plan.batches) out.insert(out.end(), batch.begin(), batch.end());
    return out;
}

std::map<std::string, std::size_t> owners(const BinAssignment& a) {
    std::map<std::string, std::size_t> out;
    for (std::size_t b = 0; b < a.bins.size(); ++b)
        for (const auto& id : a.bins[b]) out[id] = b;
    return out;
}

void check_coverage(const BinAssignment& a, const BatchPlan& plan, std::size_t batch_size) {
    auto ids = flatten(plan);
    std::vector<std::string> expected;
    for (const auto& bin : a.bins) expected.insert(expected.end(), bin.begin(), bin.end());
    std::sort(ids.begin(), ids.end());
    std::sort(expected.begin(), expected.end());
    CHECK(ids == expected);
    for (std::size_t i = 0; i + 1 < plan.batches.size(); ++i) CHECK(plan.batches[i].size() == batch_size);
    REQUIRE_FALSE(plan.batches.empty());
    CHECK(plan.batches.back().size() >= 1);
    CHECK(plan.batches.back().size() <= batch_size);
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("assign_bins") {
    const auto a = assign_bins({{"a", 5}, {"b", 50}, {"c", 10}, {"d", 11}}, two_bins());
    CHECK(a.bins == std::vector<std::vector<std::string>>{{"a", "c"}, {"b", "d"}});
    CHECK(a.total == 4);
    CHECK_FALSE(a.clamped());

    const auto c = assign_bins({{"x", 120}, {"y", 0}}, two_bins());
    CHECK(c.bins == std::vector<std::vector<std::string>>{{"y"}, {"x"}});
    CHECK(c.clamped_ids == std::vector<std::string>{"x"});
}

TEST_CASE("RR examples") {
    const auto a = sized({2, 1});
    const auto plan = plan_epoch_rr(a, 2, 5);
    REQUIRE(plan.batches.size() == 2);
    CHECK(plan.batches[0].size() == 2);
    CHECK(plan.batches[1].size() == 1);
    check_coverage(a, plan, 2);

    const auto even = sized({4, 4});
    const auto own = owners(even);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = plan_epoch_rr(even, 2, seed);
        REQUIRE(p.batches.size() == 4);
        for (const auto& batch : p.batches) {
            CHECK(own.at(batch[0]) == 0);
            CHECK(own.at(batch[1]) == 1);
        }
    }

    const auto single = sized({7});
    const auto s = plan_epoch_rr(single, 3, 1);
    check_coverage(single, s, 3);
    CHECK(s.batches.size() == 3);
}

TEST_CASE("RR visits bins in cursor order") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> sizes(1 + gen() % 6);
        for (auto& s : sizes) s = gen() % 6;
        sizes[gen() % sizes.size()] += 1;
        const auto a = sized(sizes);
        const auto own = owners(a);

        // Independent simulation of the cursor: bin sequence only.
        std::vector<std::size_t> left = sizes, expected;
        std::size_t cursor = 0, remaining = a.total;
        while (remaining > 0) {
            while (left[cursor] == 0) cursor = (cursor + 1) % left.size();
            expected.push_back(cursor);
            --left[cursor];
            --remaining;
            cursor = (cursor + 1) % left.size();
        }
        const auto plan = plan_epoch_rr(a, 1 + gen() % 5, gen());
        std::vector<std::size_t> got;
        for (const auto& id : flatten(plan)) got.push_back(own.at(id));
        CHECK(got == expected);
    }
}

TEST_CASE("RS examples") {
    const auto single = sized({5});
    const auto s = plan_epoch_rs(single, 2, 3);
    check_coverage(single, s, 2);

    const auto pair = sized({1, 1});
    const auto own = owners(pair);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = plan_epoch_rs(pair, 2, seed);
        REQUIRE(p.batches.size() == 1);
        CHECK(own.at(p.batches[0][0]) != own.at(p.batches[0][1]));
    }
    CHECK(plan_epoch_rs(sized({3, 9, 2}), 4, 11) == plan_epoch_rs(sized({3, 9, 2}), 4, 11));
}

TEST_CASE("RS picks bins uniformly") {
    // Three equal bins; over 1200 plans the bin of each of the first
    // four draws should be uniform. Chi-square, 2 dof, p = 0.001.
    const auto a = sized({20, 20, 20});
    const auto own = owners(a);
    for (std::size_t draw = 0; draw < 4; ++draw) {
        std::array<double, 3> hits{};
        const std::size_t n_plans = 1200;
        for (std::uint64_t seed = 0; seed < n_plans; ++seed) {
            const auto p = plan_epoch_rs(a, 4, seed * 7919 + 13);
            hits[own.at(p.batches[0][draw])] += 1;
        }
        double chi2 = 0.0;
        const double e = static_cast<double>(n_plans) / 3.0;
        for (double h : hits) chi2 += (h - e) * (h - e) / e;
        CHECK(chi2 < 13.82);
    }

    // Unequal sizes: the first pick is still uniform over bins, not ids.
    const auto skew = sized({1, 10});
    const auto own2 = owners(skew);
    double first_small = 0;
    const std::size_t n_plans = 2000;
    for (std::uint64_t seed = 0; seed < n_plans; ++seed)
        if (own2.at(plan_epoch_rs(skew, 4, seed).batches[0][0]) == 0) first_small += 1;
    const double e = n_plans / 2.0;
    CHECK((first_small - e) * (first_small - e) / e * 2 < 10.83);
}

TEST_CASE("empty bins are skipped") {
    const auto a = sized({0, 3, 0, 2});
    for (auto scheme : {Scheme::RoundRobin, Scheme::RandomBin}) check_coverage(a, plan_epoch(a, scheme, 2, 1), 2);
}

TEST_CASE("errors and names") {
    CHECK_THROWS_AS(plan_epoch_rr(sized({2}), 0, 0), ValidationError);
    CHECK_THROWS_AS(plan_epoch_rs(sized({2}), 0, 0), ValidationError);
    CHECK_THROWS_AS(plan_epoch_rr(sized({0, 0}), 2, 0), ValidationError);
    CHECK_THROWS_AS(plan_epoch_rs(BinAssignment{}, 2, 0), ValidationError);
    CHECK(to_string(Scheme::RoundRobin) == "rr");
    CHECK(to_string(Scheme::RandomBin) == "rs");
    CHECK(parse_scheme("rs") == Scheme::RandomBin);
    CHECK_THROWS_AS(parse_scheme("rx"), ValidationError);
}

TEST_CASE("plan JSON") {
    auto plan = plan_epoch_rr(sized({1, 1}), 2, 9);
    const auto text = plan_json(plan);
    CHECK(text.rfind("{\n  \"scheme\": \"rr\",\n  \"batch_size\": 2,\n  \"seed\": 9,\n  \"batches\": [", 0) == 0);
}

}
