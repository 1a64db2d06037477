#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crowdstrata/bin_loss.hpp"
#include "crowdstrata/count_data.hpp"
#include "crowdstrata/evaluation.hpp"
#include "crowdstrata/model_selection.hpp"
#include "crowdstrata/sampling.hpp"
#include "crowdstrata/stratification.hpp"

// JSON and CSV interchange formats. JSON keys are emitted in a fixed order
// and reals use the shortest representation that round-trips exactly, so
// outputs are byte-stable across runs.
namespace crowdstrata {

struct ComparisonReport;

std::string histogram_json(const CountHistogram& hist);
std::string partition_json(const Partition& partition);
Partition parse_partition_json(std::string_view text);
std::string selection_json(const GammaSelection& selection);
std::string plan_json(const BatchPlan& plan);
std::string report_json(const EvalReport& report);
std::string comparison_json(const ComparisonReport& report);

/// `id,y,y_hat,bin_lo,bin_hi,bin_loss` rows. The bin_loss column is the term
/// added to a model loss, lambda2 * bin_loss(lambda1), with `decimals` digits.
/// Ground truths above the partition range are scored against the last bin
/// stretched up to y, and those stretched bounds are written.
std::string loss_csv(const std::vector<PredictionRecord>& preds, const Partition& partition,
                     const LossConfig& cfg = {}, int decimals = 4);

}  // namespace crowdstrata
