#include "crowdstrata/sampling.hpp"

#include "crowdstrata/error.hpp"
#include "crowdstrata/random.hpp"

namespace crowdstrata {

namespace {

void check_inputs(const BinAssignment& assignment, std::size_t batch_size) {
    if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
    if (assignment.total == 0) throw ValidationError("bin assignment is empty");
}

// Removes and returns a uniformly chosen id from pool.
std::string draw(std::vector<std::string>& pool, Rng& rng) {
    const std::size_t j = rng.uniform_index(pool.size());
    std::swap(pool[j], pool.back());
    std::string id = std::move(pool.back());
    pool.pop_back();
    return id;
}

class Batcher {
public:
    Batcher(BatchPlan& plan) : plan_(plan) {}

    void push(std::string id) {
        if (plan_.batches.empty() || plan_.batches.back().size() == plan_.batch_size) {
            plan_.batches.emplace_back();
            plan_.batches.back().reserve(plan_.batch_size);
        }
        plan_.batches.back().push_back(std::move(id));
    }

private:
    BatchPlan& plan_;
};

}  // namespace

std::string_view to_string(Scheme scheme) { return scheme == Scheme::RoundRobin ? "rr" : "rs"; }

Scheme parse_scheme(std::string_view name) {
    if (name == "rr") return Scheme::RoundRobin;
    if (name == "rs") return Scheme::RandomBin;
    throw ValidationError("unknown sampling scheme '" + std::string(name) + "' (expected rr or rs)");
}

BinAssignment assign_bins(const std::vector<CountRecord>& records, const Partition& partition) {
    partition.validate();
    BinAssignment out;
    out.bins.resize(partition.size());
    for (const auto& r : records) {
        bool clamped = false;
        const std::size_t k = partition.bin_index(r.count, &clamped);
        out.bins[k].push_back(r.id);
        if (clamped) out.clamped_ids.push_back(r.id);
    }
    out.total = records.size();
    return out;
}

BatchPlan plan_epoch_rr(const BinAssignment& assignment, std::size_t batch_size, std::uint64_t seed) {
    check_inputs(assignment, batch_size);
    BatchPlan plan{{}, batch_size, seed, Scheme::RoundRobin};
    Batcher batcher(plan);
    Rng rng(seed);
    auto pools = assignment.bins;
    std::size_t remaining = assignment.total;
    for (std::size_t cursor = 0; remaining > 0; cursor = (cursor + 1) % pools.size()) {
        if (pools[cursor].empty()) continue;
        batcher.push(draw(pools[cursor], rng));
        --remaining;
    }
    return plan;
}

BatchPlan plan_epoch_rs(const BinAssignment& assignment, std::size_t batch_size, std::uint64_t seed) {
    check_inputs(assignment, batch_size);
    BatchPlan plan{{}, batch_size, seed, Scheme::RandomBin};
    Batcher batcher(plan);
    Rng rng(seed);
    auto pools = assignment.bins;
    // indices of bins that still hold ids, kept in ascending order
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < pools.size(); ++k)
        if (!pools[k].empty()) live.push_back(k);
    while (!live.empty()) {
        const std::size_t pick = rng.uniform_index(live.size());
        auto& pool = pools[live[pick]];
        batcher.push(draw(pool, rng));
        if (pool.empty()) live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return plan;
}

BatchPlan plan_epoch(const BinAssignment& assignment, Scheme scheme, std::size_t batch_size, std::uint64_t seed) {
    return scheme == Scheme::RoundRobin ? plan_epoch_rr(assignment, batch_size, seed)
                                        : plan_epoch_rs(assignment, batch_size, seed);
}

}  // namespace crowdstrata
