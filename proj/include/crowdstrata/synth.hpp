#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowdstrata/bin_loss.hpp"
#include "crowdstrata/count_data.hpp"
#include "crowdstrata/evaluation.hpp"
#include "crowdstrata/model_selection.hpp"
#include "crowdstrata/sampling.hpp"

namespace crowdstrata {

/// Heavy-tailed synthetic counts with a noisy scalar feature per sample.
///
/// Counts are round(exp(N(log_mean, log_sigma))) redrawn until <= max_count.
/// The feature is z = y * (1 + eps) + bias with eps = exp(noise_spread * N(0, 1)) - 1,
/// a strictly positive multiplicative error. Under the heavy-tailed prior the
/// best predictor of y from z is concave, so a linear probe cannot fit the
/// bulk and the tail at once.
struct SynthSpec {
    std::size_t n_samples = 2000;
    double log_mean = 3.0;
    double log_sigma = 1.2;
    Count max_count = 1500;
    double noise_spread = 0.6;
    double bias = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthDataset {
    std::vector<CountRecord> records;
    /// features[i] belongs to records[i]
    std::vector<double> features;
};

SynthDataset generate_dataset(const SynthSpec& spec);

/// How the comparison obtains its partition from the training split.
struct PartitionConfig {
    /// Run the gamma grid search; otherwise use `gamma` directly.
    bool tune = false;
    /// The grid search selects 0.1 on the default generator for most seeds.
    double gamma = 0.1;
    GridSpec grid;
};

struct TrainerConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    /// Base step, relative to the mean training count.
    double learning_rate = 0.05;
    /// Held-out fraction used for evaluation.
    double holdout = 0.2;
    LossConfig loss;

    void validate() const;
};

enum class Objective {
    /// Plain absolute error; never consults bins.
    Absolute,
    /// Absolute error plus lambda2 times the bin loss.
    Combined,
};

/// y_hat = slope * (z / feature_scale) + intercept
struct LinearModel {
    double slope = 0.0;
    double intercept = 0.0;
    double feature_scale = 1.0;

    [[nodiscard]] double predict(double z) const { return slope * (z / feature_scale) + intercept; }
};

struct TrainingSample {
    std::string id;
    Count y = 0;
    double z = 0.0;
};

struct TrainResult {
    LinearModel model;
    /// Mean training objective over the full train set after each epoch.
    /// Non-increasing: an epoch that would raise it is undone and the step halved.
    std::vector<double> epoch_loss;
    /// Ids visited per epoch, in visit order.
    std::vector<std::vector<std::string>> epoch_visits;
};

/// Minibatch subgradient descent. `partition` is required for
/// Objective::Combined and ignored (may be null) for Objective::Absolute.
/// Scheme selects the per-epoch plan; Objective::Absolute runs use a
/// single-bin shuffle regardless.
TrainResult train_linear(const std::vector<TrainingSample>& train, const Partition* partition, Objective objective,
                         Scheme scheme, const TrainerConfig& cfg, std::uint64_t seed);

struct SchemeResult {
    std::string name;  // "no-binning", "rr", "rs"
    LinearModel model;
    EvalReport report;
};

struct SeedRun {
    std::uint64_t seed = 0;
    Partition partition;
    std::vector<SchemeResult> schemes;
};

struct ComparisonReport {
    std::vector<std::uint64_t> seeds;
    std::vector<SeedRun> runs;
    /// Seeds where RR (resp. RS) has lower pooled std than no-binning.
    std::size_t rr_wins = 0;
    std::size_t rs_wins = 0;
    /// Seeds where at least one bin-aware scheme beats no-binning.
    std::size_t wins = 0;
};

SeedRun run_seed(SynthSpec spec, const PartitionConfig& pcfg, const TrainerConfig& tcfg, std::uint64_t seed);

/// One SeedRun per seed (the seed replaces spec.seed), plus win counts on
/// pooled error std.
ComparisonReport run_comparison(const SynthSpec& spec, const PartitionConfig& pcfg, const TrainerConfig& tcfg,
                                const std::vector<std::uint64_t>& seeds);

}  // namespace crowdstrata
