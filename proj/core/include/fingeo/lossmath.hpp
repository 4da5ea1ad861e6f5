#pragma once

#include "fingeo/grid.hpp"

namespace fingeo::loss {

/// Training-objective weights. Defaults follow the reference configuration.
struct LossParams {
    float alpha = 1.0f;
    float beta = 1.0f;
    float gamma = 1.0f;
    float sigma = 0.5f;
    float lambda1 = 1.0f;
    float lambda2 = 20.0f;
    float lambda3 = 100.0f;

    void validate() const;
};

/// Mask-averaged binary cross-entropy over all bins plus a coherence penalty
/// alpha*(1/mean-coherence - 1), where per-pixel coherence uses 3x3
/// box-smoothed doubled-angle resultants.
float orientation_loss(const OrientationDistribution& pred,
                       const OrientationDistribution& truth, const Mask& mask,
                       float alpha);

/// Mask-averaged squared error plus beta times the mask-averaged squared
/// forward-difference gradient of the prediction.
float period_loss(const PeriodMap& pred, const PeriodMap& truth, const Mask& mask,
                  float beta);

/// w = exp(-|g*|/sigma) per pixel; balances marginal against central area.
FloatGrid gradient_weight(const GradientMap& truth, float sigma);

/// Weight-normalized squared error plus gamma times the smoothness term,
/// summed over both gradient channels.
float gradient_loss(const GradientMap& pred, const GradientMap& truth,
                    const Mask& mask, float gamma, float sigma);

/// lambda1*l_ori + lambda2*l_ped + lambda3*l_grad.
float total_loss(float l_ori, float l_ped, float l_grad, const LossParams& params);

} // namespace fingeo::loss
