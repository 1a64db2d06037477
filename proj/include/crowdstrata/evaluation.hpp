#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdstrata/count_data.hpp"
#include "crowdstrata/stratification.hpp"

namespace crowdstrata {

struct PredictionRecord {
    std::string id;
    Count y = 0;
    double y_hat = 0.0;
};

/// Absolute-error statistics of one bin. mae/std are absent for empty bins.
/// std is the population standard deviation.
struct BinStats {
    Bin bin;
    std::size_t n = 0;
    std::optional<double> mae;
    std::optional<double> std;
};

struct EvalReport {
    std::vector<BinStats> per_bin;
    double pooled_mae = 0.0;
    double pooled_std = 0.0;
    double global_mae = 0.0;
    double global_std = 0.0;
    std::size_t n_total = 0;
};

/// Parses `id,count_true,count_pred`. Blank lines are ignored.
std::vector<PredictionRecord> ingest_predictions(std::string_view text);

/// Routes each record by y (clamped into the last bin above the range).
std::vector<BinStats> per_bin_stats(const std::vector<PredictionRecord>& preds, const Partition& partition);

/// Sample-weighted mean of bin MAEs and sample-weighted root mean of bin
/// variances. Empty bins are skipped; throws ValidationError if all are empty.
std::pair<double, double> pool(const std::vector<BinStats>& stats);

/// Mean and population std of |y - y_hat| over all records.
std::pair<double, double> global_stats(const std::vector<PredictionRecord>& preds);

EvalReport evaluate(const std::vector<PredictionRecord>& preds, const Partition& partition);

/// Plot-ready CSV: `bin_lo,bin_hi,n,mae,std` rows followed by `pooled` and
/// `global` trailer rows (label in bin_lo, bin_hi empty).
std::string render_report(const EvalReport& report, const Partition& partition);

}  // namespace crowdstrata
