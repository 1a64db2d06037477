#include "crowdstrata/bin_loss.hpp"

#include <cmath>
#include <string>

#include "crowdstrata/error.hpp"

namespace crowdstrata {

namespace {

void require_member(double y, const Bin& bin) {
    if (!bin.contains(y))
        throw ContractError("ground truth " + std::to_string(y) + " is outside its bin [" + std::to_string(bin.lo) +
                            ", " + std::to_string(bin.hi) + "]");
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void LossConfig::validate() const {
    if (!(lambda1 >= 0.0)) throw ValidationError("lambda1 must be non-negative");
    if (!(lambda2 >= 0.0)) throw ValidationError("lambda2 must be non-negative");
}

double bin_loss(double y, double y_hat, const Bin& bin, double lambda1) {
    require_member(y, bin);
    const double err = std::abs(y - y_hat);
    return bin.contains(y_hat) ? lambda1 * std::log1p(err) : err;
}

double combined_loss(double model_loss, double y, double y_hat, const Bin& bin, const LossConfig& cfg) {
    if (!std::isfinite(model_loss)) throw ValidationError("model loss is not finite");
    cfg.validate();
    return model_loss + cfg.lambda2 * bin_loss(y, y_hat, bin, cfg.lambda1);
}

Bin loss_bin(const Partition& partition, Count y) {
    Bin bin = partition.bins[partition.bin_index(y)];
    if (y > bin.hi) bin.hi = y;
    return bin;
}

double bin_loss_subgradient(double y, double y_hat, const Bin& bin, double lambda1) {
    require_member(y, bin);
    const double diff = y_hat - y;
    if (diff == 0.0) return 0.0;
    if (bin.contains(y_hat)) return lambda1 * sign(diff) / (1.0 + std::abs(diff));
    return sign(diff);
}

}  // namespace crowdstrata
