#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crowdstrata/count_data.hpp"
#include "crowdstrata/stratification.hpp"

namespace crowdstrata {

struct BinAssignment {
    /// bins[k] lists the ids whose count falls in partition bin k, in input order.
    std::vector<std::vector<std::string>> bins;
    /// Ids whose count exceeded the partition range and were put in the last bin.
    std::vector<std::string> clamped_ids;
    std::size_t total = 0;

    [[nodiscard]] std::size_t bin_count() const noexcept { return bins.size(); }
    [[nodiscard]] bool clamped() const noexcept { return !clamped_ids.empty(); }
};

enum class Scheme { RoundRobin, RandomBin };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// One epoch of minibatches. Concatenated, the batches are a permutation of
/// the assigned ids; all batches hold batch_size ids except possibly the last.
struct BatchPlan {
    std::vector<std::vector<std::string>> batches;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::RoundRobin;

    friend bool operator==(const BatchPlan&, const BatchPlan&) = default;
};

BinAssignment assign_bins(const std::vector<CountRecord>& records, const Partition& partition);

/// Cycles through bins from bin 0, drawing one random unused id per visit
/// and skipping exhausted bins.
BatchPlan plan_epoch_rr(const BinAssignment& assignment, std::size_t batch_size, std::uint64_t seed);

/// Picks a non-exhausted bin uniformly, then a random unused id from it.
BatchPlan plan_epoch_rs(const BinAssignment& assignment, std::size_t batch_size, std::uint64_t seed);

BatchPlan plan_epoch(const BinAssignment& assignment, Scheme scheme, std::size_t batch_size, std::uint64_t seed);

}  // namespace crowdstrata
