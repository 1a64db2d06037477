#include "crowdstrata/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "crowdstrata/error.hpp"
#include "crowdstrata/random.hpp"

namespace crowdstrata {

namespace {

// Sub-seed streams derived from a run seed.
enum Stream : std::uint64_t { kSplitStream = 1, kTrainStream = 2, kEpochStream = 3 };

double sign(double v) { return (v > 0.0) - (v < 0.0); }

std::string sample_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06zu", i);
    return buf;
}

double objective_value(const TrainingSample& s, double y_hat, const Bin* bin, const LossConfig& loss) {
    const double y = static_cast<double>(s.y);
    double value = std::abs(y - y_hat);
    if (bin) value += loss.lambda2 * bin_loss(y, y_hat, *bin, loss.lambda1);
    return value;
}

double objective_slope(const TrainingSample& s, double y_hat, const Bin* bin, const LossConfig& loss) {
    const double y = static_cast<double>(s.y);
    double g = sign(y_hat - y);
    if (bin) g += loss.lambda2 * bin_loss_subgradient(y, y_hat, *bin, loss.lambda1);
    return g;
}

}  // namespace

void SynthSpec::validate() const {
    if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
    if (!(log_sigma >= 0.0)) throw ValidationError("log_sigma must be non-negative");
    if (!(noise_spread >= 0.0)) throw ValidationError("noise spread must be non-negative");
    if (max_count < 1) throw ValidationError("max_count must be at least 1");
    if (!std::isfinite(log_mean) || !std::isfinite(bias)) throw ValidationError("non-finite synth parameter");
}

void TrainerConfig::validate() const {
    if (epochs < 1) throw ValidationError("epochs must be at least 1");
    if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (!(holdout > 0.0 && holdout < 1.0)) throw ValidationError("holdout must lie in (0, 1)");
    loss.validate();
}

SynthDataset generate_dataset(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    SynthDataset data;
    data.records.reserve(spec.n_samples);
    data.features.reserve(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        Count y = 0;
        do {
            y = round_count(std::exp(spec.log_mean + spec.log_sigma * rng.normal()));
        } while (y > spec.max_count);
        const double noise = rng.normal();
        data.records.push_back({sample_id(i), y});
        const double rel_error = std::expm1(spec.noise_spread * noise);
        data.features.push_back(static_cast<double>(y) * (1.0 + rel_error) + spec.bias);
    }
    return data;
}

TrainResult train_linear(const std::vector<TrainingSample>& train, const Partition* partition, Objective objective,
                         Scheme scheme, const TrainerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (train.empty()) throw ValidationError("training set is empty");
    if (objective == Objective::Combined && !partition)
        throw ValidationError("the combined objective needs a partition");

    const double n = static_cast<double>(train.size());
    double feature_mean = 0.0, target_mean = 0.0;
    for (const auto& s : train) {
        feature_mean += s.z;
        target_mean += static_cast<double>(s.y);
    }
    feature_mean /= n;
    target_mean /= n;

    TrainResult result;
    LinearModel& model = result.model;
    model.feature_scale = feature_mean > 0.0 ? feature_mean : 1.0;
    const double step_scale = target_mean > 0.0 ? target_mean : 1.0;

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < train.size(); ++i) index.emplace(train[i].id, i);
    if (index.size() != train.size()) throw ValidationError("duplicate training ids");

    // Per-sample bin; null on the plain path so bins are never consulted there.
    std::vector<Bin> bins;
    BinAssignment assignment;
    if (objective == Objective::Combined) {
        std::vector<CountRecord> records;
        records.reserve(train.size());
        for (const auto& s : train) {
            records.push_back({s.id, s.y});
            bins.push_back(loss_bin(*partition, s.y));
        }
        assignment = assign_bins(records, *partition);
    } else {
        assignment.bins.emplace_back();
        for (const auto& s : train) assignment.bins.front().push_back(s.id);
        assignment.total = train.size();
        scheme = Scheme::RoundRobin;
    }
    auto bin_of = [&](std::size_t i) -> const Bin* { return bins.empty() ? nullptr : &bins[i]; };

    auto train_objective = [&] {
        double total = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i)
            total += objective_value(train[i], model.predict(train[i].z), bin_of(i), cfg.loss);
        return total / n;
    };

    // An epoch that raises the full-train objective is rolled back and the
    // step halved, so epoch_loss never increases.
    double best_loss = train_objective();
    double backoff = 1.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const BatchPlan plan = plan_epoch(assignment, scheme, cfg.batch_size, mix_seed(seed, kEpochStream + epoch));
        const double lr = backoff * cfg.learning_rate * step_scale / std::sqrt(1.0 + static_cast<double>(epoch));
        const LinearModel start = model;
        auto& visits = result.epoch_visits.emplace_back();
        visits.reserve(train.size());
        for (const auto& batch : plan.batches) {
            double grad_slope = 0.0, grad_intercept = 0.0;
            for (const auto& id : batch) {
                const std::size_t i = index.at(id);
                const double x = train[i].z / model.feature_scale;
                const double g = objective_slope(train[i], model.predict(train[i].z), bin_of(i), cfg.loss);
                grad_slope += g * x;
                grad_intercept += g;
                visits.push_back(id);
            }
            const double m = static_cast<double>(batch.size());
            model.slope -= lr * grad_slope / m;
            model.intercept -= lr * grad_intercept / m;
        }
        const double loss = train_objective();
        if (loss <= best_loss) {
            best_loss = loss;
        } else {
            model = start;
            backoff *= 0.5;
        }
        result.epoch_loss.push_back(best_loss);
    }
    return result;
}

SeedRun run_seed(SynthSpec spec, const PartitionConfig& pcfg, const TrainerConfig& tcfg, std::uint64_t seed) {
    tcfg.validate();
    spec.seed = seed;
    const SynthDataset data = generate_dataset(spec);
    std::unordered_map<std::string, double> feature;
    for (std::size_t i = 0; i < data.records.size(); ++i) feature.emplace(data.records[i].id, data.features[i]);

    auto [train_records, test_records] = split_records(data.records, tcfg.holdout, mix_seed(seed, kSplitStream));

    SeedRun run;
    run.seed = seed;
    if (pcfg.tune) {
        run.partition = optimal_bins(train_records, pcfg.grid);
    } else {
        const CountHistogram hist = smooth(build_histogram(train_records), pcfg.grid.beta);
        run.partition = optimal_partition(hist, PriorConfig{pcfg.gamma, pcfg.grid.alpha}, pcfg.grid.likelihood);
    }

    std::vector<TrainingSample> train;
    train.reserve(train_records.size());
    for (const auto& r : train_records) train.push_back({r.id, r.count, feature.at(r.id)});

    struct Variant {
        const char* name;
        Objective objective;
        Scheme scheme;
    };
    constexpr Variant variants[] = {{"no-binning", Objective::Absolute, Scheme::RoundRobin},
                                    {"rr", Objective::Combined, Scheme::RoundRobin},
                                    {"rs", Objective::Combined, Scheme::RandomBin}};
    const std::uint64_t train_seed = mix_seed(seed, kTrainStream);
    for (const auto& v : variants) {
        const Partition* bins = v.objective == Objective::Combined ? &run.partition : nullptr;
        const TrainResult fit = train_linear(train, bins, v.objective, v.scheme, tcfg, train_seed);
        std::vector<PredictionRecord> preds;
        preds.reserve(test_records.size());
        for (const auto& r : test_records) preds.push_back({r.id, r.count, fit.model.predict(feature.at(r.id))});
        run.schemes.push_back({v.name, fit.model, evaluate(preds, run.partition)});
    }
    return run;
}

ComparisonReport run_comparison(const SynthSpec& spec, const PartitionConfig& pcfg, const TrainerConfig& tcfg,
                                const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ValidationError("comparison needs at least one seed");
    ComparisonReport report;
    report.seeds = seeds;
    for (std::uint64_t seed : seeds) {
        SeedRun run = run_seed(spec, pcfg, tcfg, seed);
        const double baseline = run.schemes[0].report.pooled_std;
        const bool rr = run.schemes[1].report.pooled_std < baseline;
        const bool rs = run.schemes[2].report.pooled_std < baseline;
        report.rr_wins += rr;
        report.rs_wins += rs;
        report.wins += rr || rs;
        report.runs.push_back(std::move(run));
    }
    return report;
}

}  // namespace crowdstrata
