#pragma once

#include "fingeo/grid.hpp"

namespace fingeo::metrics {

/// Mask-mean angular error with 180-degree wraparound:
/// mean over mask of min(|d|, 180 - |d|). Bounded by 90.
float orientation_error(const OrientationField& pred, const OrientationField& truth,
                        const Mask& mask);

enum class RmseKind { Period, Gradient, Depth };

struct RmseOptions {
    bool weighted = false;
    float sigma = 0.5f;
    // Weights exp(-|g*|/sigma) come from the reference gradient; required when
    // weighted is true.
    const GradientMap* truth_gradient = nullptr;
};

/// Root weighted mean squared error over the mask.
/// Depth inputs are min-aligned over the mask before differencing, so the
/// result is invariant to constant offsets. Gradient error is the 2-norm of
/// the per-pixel vector difference.
float rmse(const FloatGrid& pred, const FloatGrid& truth, const Mask& mask,
           RmseKind kind, const RmseOptions& opts = {});

float rmse(const GradientMap& pred, const GradientMap& truth, const Mask& mask,
           const RmseOptions& opts = {});

} // namespace fingeo::metrics
