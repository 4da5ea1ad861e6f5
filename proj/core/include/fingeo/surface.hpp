#pragma once

#include <utility>

#include "fingeo/grid.hpp"

namespace fingeo::surface {

struct MlsReport {
    size_t plane_fallbacks = 0; // ill-conditioned quadrics refit as planes
};

/// Moving-least-squares smoothing: per masked pixel, a weighted quadric
/// f = a1 x^2 + a2 xy + a3 y^2 + a4 x + a5 y + a6 fit over the K nearest
/// masked neighbors with weights exp(-dist^2/epsilon^2); z is replaced by
/// f at the pixel. When grad_out is given it receives (df/dx, df/dy) of the
/// same fit (fused mode).
DepthMap mls_smooth(const DepthMap& depth, const Mask& mask, int k_neighbors = 64,
                    float epsilon_px = 8.0f, MlsReport* report = nullptr,
                    GradientMap* grad_out = nullptr);

/// Central differences in the mask interior, one-sided at the boundary.
GradientMap depth_to_gradient(const DepthMap& depth, const Mask& mask);

/// Masked pixel of minimum gradient magnitude; ties broken by distance to the
/// mask centroid, then row-major order.
std::pair<int, int> find_zero_point(const GradientMap& grad, const Mask& mask);

struct IntegrateReport {
    size_t filled_pixels = 0; // unreachable along both paths, filled by NN
};

/// Dual-path trapezoidal integration outward from the zero point:
/// x-then-y and y-then-x paths averaged, restricted to masked pixels;
/// result min-aligned to 0 over the mask.
DepthMap integrate_gradient(const GradientMap& grad, const Mask& mask,
                            std::pair<int, int> zero,
                            IntegrateReport* report = nullptr);

} // namespace fingeo::surface
