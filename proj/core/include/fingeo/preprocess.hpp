#pragma once

#include <optional>

#include "fingeo/grid.hpp"

namespace fingeo::preprocess {

/// Circular central region covering about 20 percent of the foreground.
struct CenterRegion {
    int cx = 0;
    int cy = 0;
    double radius = 0.0;
};

struct PreprocessReport {
    float scale_factor = 1.0f;
    float yaw_deg = 0.0f;
    float mean_period_px = 0.0f;
};

/// Foreground segmentation: threshold (Otsu when unset), keep the largest
/// 4-connected component, fill holes.
Mask segment(const GrayImage& image, std::optional<float> threshold = std::nullopt);

/// Contrast-limited adaptive histogram equalization over tiles with bilinear
/// blending between tile mappings. Pixels outside the mask are set to 0.
/// Constant tiles map to 0.5.
GrayImage enhance(const GrayImage& image, const Mask& mask, int tile_px = 32,
                  float clip = 2.0f);

/// Center = foreground centroid; radius chosen so the circle covers 20% of |M|.
CenterRegion center_region(const Mask& mask);

/// Mean ridge period inside the center region by the x-signature method:
/// block-wise projection along the ridge orientation, mean peak spacing.
float mean_ridge_period(const GrayImage& image, const CenterRegion& region,
                        const OrientationField& orientation);

struct RescaleResult {
    GrayImage image;
    Mask mask;
    float scale_factor = 1.0f;
};

/// Resample so the measured ridge period becomes target_period (10 px at
/// 500 ppi); output pitch is fixed at 0.05 mm/px.
RescaleResult rescale_to_period(const GrayImage& image, const Mask& mask,
                                float measured_period, float target_period = 10.0f);

/// Yaw angle of the finger centerline in degrees, range (-90, 90).
/// Fits x = m*y + b through per-row contour midpoints.
float estimate_yaw(const Mask& mask);

struct RotateResult {
    GrayImage image;
    Mask mask;
};

/// Rotates image and mask about the mask centroid so the centerline becomes
/// vertical; canvas padded so no foreground is clipped.
RotateResult rotate_upright(const GrayImage& image, const Mask& mask, float yaw_deg);

} // namespace fingeo::preprocess
