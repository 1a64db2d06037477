#pragma once

#include "crowdstrata/stratification.hpp"

namespace crowdstrata {

struct LossConfig {
    /// Weight of the logarithmic in-bin branch.
    double lambda1 = 1.0;
    /// Weight of the bin loss when added to a model loss.
    double lambda2 = 1.0;

    void validate() const;
};

/// lambda1 * ln(1 + |y - y_hat|) when y_hat lies in y's bin (closed interval),
/// |y - y_hat| otherwise. Throws ContractError if `bin` does not contain y.
double bin_loss(double y, double y_hat, const Bin& bin, double lambda1 = 1.0);

/// model_loss + lambda2 * bin_loss(y, y_hat, bin, lambda1).
double combined_loss(double model_loss, double y, double y_hat, const Bin& bin, const LossConfig& cfg = {});

/// The bin a ground truth y is scored against: its partition bin, stretched
/// up to y when y lies above the partition range.
Bin loss_bin(const Partition& partition, Count y);

/// Derivative of bin_loss with respect to y_hat. Returns 0 at y_hat == y and
/// the in-bin branch value on the bin edges.
double bin_loss_subgradient(double y, double y_hat, const Bin& bin, double lambda1 = 1.0);

}  // namespace crowdstrata
