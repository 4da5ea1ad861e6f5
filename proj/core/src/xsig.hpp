#pragma once

// Internal helpers shared by preprocess and texture: oriented intensity
// signatures and peak spacing analysis.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "fingeo/grid.hpp"

namespace fingeo::detail {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Intensity profile along the ridge-normal direction through (cx, cy).
/// At each step t in [-half_len, half_len] the intensity is averaged over
/// [-half_width, half_width] along the ridge direction. Sample points leaving
/// the image (or the mask, when given) are skipped; steps with no valid
/// sample are NaN.
inline std::vector<float> oriented_signature(const GrayImage& image, double cx,
                                             double cy, double theta_deg,
                                             int half_len, int half_width,
                                             const Mask* mask = nullptr) {
    const double normal = deg2rad(theta_deg + 90.0);
    const double ridge = deg2rad(theta_deg);
    const double nx = std::cos(normal), ny = std::sin(normal);
    const double rx = std::cos(ridge), ry = std::sin(ridge);
    std::vector<float> sig(static_cast<size_t>(2 * half_len + 1),
                           std::numeric_limits<float>::quiet_NaN());
    for (int t = -half_len; t <= half_len; ++t) {
        double acc = 0.0;
        int n = 0;
        for (int s = -half_width; s <= half_width; ++s) {
            double px = cx + t * nx + s * rx;
            double py = cy + t * ny + s * ry;
            int ix = static_cast<int>(std::lround(px));
            int iy = static_cast<int>(std::lround(py));
            if (!image.in_bounds(ix, iy))
                continue;
            if (mask && !mask->at(ix, iy))
                continue;
            acc += image.sample(static_cast<float>(px), static_cast<float>(py));
            ++n;
        }
        if (n > 0)
            sig[static_cast<size_t>(t + half_len)] = static_cast<float>(acc / n);
    }
    return sig;
}

/// Local maxima of a signature with sub-sample parabolic refinement.
/// Positions are offsets relative to the signature start index.
inline std::vector<double> find_peaks(const std::vector<float>& sig) {
    std::vector<double> peaks;
    // Reference level separating ridges from valleys.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (float v : sig)
        if (std::isfinite(v)) {
            lo = std::min(lo, static_cast<double>(v));
            hi = std::max(hi, static_cast<double>(v));
        }
    if (!std::isfinite(lo) || hi - lo < 1e-4)
        return peaks;
    const double level = lo + 0.5 * (hi - lo);
    for (size_t i = 1; i + 1 < sig.size(); ++i) {
        float a = sig[i - 1], b = sig[i], c = sig[i + 1];
        if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
            continue;
        if (b > a && b >= c && b > level) {
            double denom = a - 2.0 * b + c;
            double frac = 0.0;
            if (std::abs(denom) > 1e-12)
                frac = 0.5 * (a - c) / denom;
            frac = std::clamp(frac, -0.5, 0.5);
            peaks.push_back(static_cast<double>(i) + frac);
        }
    }
    return peaks;
}

/// Mean spacing of consecutive peaks; empty optional with fewer than 2 peaks.
inline std::optional<double> mean_peak_spacing(const std::vector<double>& peaks) {
    if (peaks.size() < 2)
        return std::nullopt;
    return (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
}

} // namespace fingeo::detail
