#pragma once

#include "fingeo/grid.hpp"

namespace fingeo::texture {

struct OrientationEstimate {
    OrientationField theta;
    CoherenceMap coherence;
};

/// Structure-tensor ridge orientation with per-pixel coherence.
/// Flat neighborhoods yield coherence 0 and a 0-degree sentinel.
OrientationEstimate estimate_orientation_field(const GrayImage& image,
                                               const Mask& mask, int block_px = 16);

struct DecodedOrientation {
    OrientationField field;
    size_t undefined_count = 0; // pixels with a vanishing resultant (sentinel 0)
};

/// Probability-weighted angular decoding of a per-pixel orientation
/// distribution via the doubled-angle resultant.
DecodedOrientation decode_orientation(const OrientationDistribution& dist);

/// Per-pixel ridge period from an x-signature taken along the ridge-normal
/// direction within an oriented window. Pixels with no signal carry sentinel 0.
PeriodMap estimate_period_map(const GrayImage& image, const Mask& mask,
                              const OrientationField& orientation,
                              int window_px = 24);

/// Surface slope from ridge-period foreshortening: |g| = sqrt((p0/p)^2 - 1),
/// pointing so that depth decreases away from the period-maximum anchor.
/// Periods above p0 clamp to zero slant; clamp_count (optional) reports how
/// many pixels were clamped.
GradientMap gradient_from_texture(const PeriodMap& period,
                                  const OrientationField& orientation,
                                  const Mask& mask, float p0,
                                  size_t* clamp_count = nullptr);

} // namespace fingeo::texture
