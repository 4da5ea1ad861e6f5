#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fingeo/errors.hpp"

namespace fingeo {

// Internal length unit is pixels for both image axes and depth; conversion
// to millimeters happens only at reporting boundaries via to_millimeters().
inline constexpr float kDefaultPitchMm = 0.05f;
inline constexpr int kOrientationBins = 180;

/// 2D scalar intensity grid with physical pixel pitch. Intensities in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;        // row-major
    float pitch_mm = kDefaultPitchMm; // millimeters per pixel

    GrayImage() = default;
    GrayImage(int w, int h, float pitch = kDefaultPitchMm, float fill = 0.0f)
        : width(w), height(h),
          pixels(static_cast<size_t>(w) * static_cast<size_t>(h), fill),
          pitch_mm(pitch) {}

    float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }

    // Bilinear sample; coordinates clamped to the valid grid.
    float sample(float fx, float fy) const;

    void validate() const;
};

/// Boolean foreground grid.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;

    Mask() = default;
    Mask(int w, int h, bool fill = false)
        : width(w), height(h),
          bits(static_cast<size_t>(w) * static_cast<size_t>(h), fill ? 1 : 0) {}

    bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }

    /// |M|: number of foreground pixels.
    size_t count() const;
    /// Foreground centroid. Throws NoForegroundError on an empty mask.
    void centroid(double& cx, double& cy) const;
};

/// Shared storage for single-channel float grids.
struct FloatGrid {
    int width = 0;
    int height = 0;
    std::vector<float> v;

    FloatGrid() = default;
    FloatGrid(int w, int h, float fill = 0.0f)
        : width(w), height(h),
          v(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

    float at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }
    float sample(float fx, float fy) const;
};

/// Per-pixel dominant ridge direction in degrees, modulo 180.
struct OrientationField : FloatGrid {
    using FloatGrid::FloatGrid;
};

/// Pixels-per-ridge-cycle per pixel; 0 is the no-signal sentinel.
struct PeriodMap : FloatGrid {
    using FloatGrid::FloatGrid;
    static constexpr float kSentinel = 0.0f;
};

/// Surface height per pixel, min-aligned to zero within the mask.
struct DepthMap : FloatGrid {
    using FloatGrid::FloatGrid;
};

/// Local orientation agreement in [0,1].
struct CoherenceMap : FloatGrid {
    using FloatGrid::FloatGrid;
};

/// Per-pixel surface slope (dz/dx, dz/dy) in depth-units per pixel.
struct GradientMap {
    int width = 0;
    int height = 0;
    std::vector<float> gx;
    std::vector<float> gy;

    GradientMap() = default;
    GradientMap(int w, int h)
        : width(w), height(h),
          gx(static_cast<size_t>(w) * static_cast<size_t>(h), 0.0f),
          gy(static_cast<size_t>(w) * static_cast<size_t>(h), 0.0f) {}

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    float norm(int x, int y) const {
        return std::hypot(gx[idx(x, y)], gy[idx(x, y)]);
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height;
    }
};

/// Per-pixel probability distribution over kOrientationBins ridge angles.
struct OrientationDistribution {
    int width = 0;
    int height = 0;
    int n_bins = kOrientationBins;
    std::vector<float> probs; // pixel-major: (y*width + x)*n_bins + bin

    OrientationDistribution() = default;
    OrientationDistribution(int w, int h, int bins = kOrientationBins)
        : width(w), height(h), n_bins(bins),
          probs(static_cast<size_t>(w) * h * bins, 0.0f) {}

    float at(int bin, int x, int y) const {
        return probs[(static_cast<size_t>(y) * width + x) * n_bins + bin];
    }
    float& at(int bin, int x, int y) {
        return probs[(static_cast<size_t>(y) * width + x) * n_bins + bin];
    }

    /// Checks per-pixel normalization over the mask (sum = 1 within 1e-4).
    void validate_normalized(const Mask& mask) const;
};

// Dimension guards. Every cross-grid operation goes through these.
template <typename A, typename B>
void require_same_dims(const A& a, const B& b, const char* where) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionError(std::string(where) + ": grid dimensions differ");
}

/// Depth values scaled to millimeters by the pixel pitch.
DepthMap to_millimeters(const DepthMap& depth, float pitch_mm);
/// Gradient depth axis scaled to millimeters; pixel axis unchanged (mm/pixel).
GradientMap to_millimeters(const GradientMap& grad, float pitch_mm);

/// Mask eroded by `radius` pixels (8-neighborhood), used for margin removal.
Mask erode(const Mask& mask, int radius);

} // namespace fingeo
