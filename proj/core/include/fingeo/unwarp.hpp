#pragma once

#include <utility>

#include "fingeo/grid.hpp"

namespace fingeo::unwarp {

/// Signed arc-length offsets from the zero point:
/// u(x,y) integrates sqrt(1+gx^2) along the row, v(x,y) integrates
/// sqrt(1+gy^2) along the column, both trapezoidal.
struct ArcCoords {
    int width = 0;
    int height = 0;
    FloatGrid u, v;
};

ArcCoords arc_length_coords(const GradientMap& grad, const Mask& mask,
                            std::pair<int, int> zero);

struct UnwarpResult {
    GrayImage image;
    Mask mask;
    // Offset of the output canvas origin in arc-coordinate space:
    // input (x,y) maps to output (cx + u - offset_x, cy + v - offset_y).
    int offset_x = 0;
    int offset_y = 0;
};

/// Resamples the image so surface arc length becomes planar distance.
/// The forward map (x,y) -> (cx+u, cy+v) is inverted per output pixel via
/// the monotone structure of u and v, sampling the input bilinearly.
UnwarpResult unwarp_image(const GrayImage& image, const Mask& mask,
                          const ArcCoords& coords, std::pair<int, int> zero);

} // namespace fingeo::unwarp
