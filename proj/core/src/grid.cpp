#include "fingeo/grid.hpp"

#include <algorithm>
#include <numeric>

namespace fingeo {

namespace {

float sample_grid(const std::vector<float>& v, int w, int h, float fx, float fy) {
    fx = std::clamp(fx, 0.0f, static_cast<float>(w - 1));
    fy = std::clamp(fy, 0.0f, static_cast<float>(h - 1));
    int x0 = std::min(static_cast<int>(fx), w - 2 >= 0 ? w - 2 : 0);
    int y0 = std::min(static_cast<int>(fy), h - 2 >= 0 ? h - 2 : 0);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    int x1 = std::min(x0 + 1, w - 1);
    int y1 = std::min(y0 + 1, h - 1);
    float tx = fx - x0;
    float ty = fy - y0;
    auto at = [&](int x, int y) { return v[static_cast<size_t>(y) * w + x]; };
    float top = at(x0, y0) * (1 - tx) + at(x1, y0) * tx;
    float bot = at(x0, y1) * (1 - tx) + at(x1, y1) * tx;
    return top * (1 - ty) + bot * ty;
}

} // namespace

float GrayImage::sample(float fx, float fy) const {
    return sample_grid(pixels, width, height, fx, fy);
}

float FloatGrid::sample(float fx, float fy) const {
    return sample_grid(v, width, height, fx, fy);
}

void GrayImage::validate() const {
    if (width < 8 || height < 8)
        throw DimensionError("GrayImage: width and height must be >= 8");
    if (pixels.size() != static_cast<size_t>(width) * height)
        throw DimensionError("GrayImage: pixel buffer size mismatch");
    if (!(pitch_mm > 0.0f))
        throw UnitError("GrayImage: pitch_mm must be positive");
    for (float p : pixels) {
        if (!std::isfinite(p) || p < 0.0f || p > 1.0f)
            throw FormatError("GrayImage: intensity outside [0,1]");
    }
}

size_t Mask::count() const {
    return static_cast<size_t>(
        std::count_if(bits.begin(), bits.end(), [](uint8_t b) { return b != 0; }));
}

void Mask::centroid(double& cx, double& cy) const {
    double sx = 0, sy = 0;
    size_t n = 0;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0)
        throw NoForegroundError("Mask::centroid: empty mask");
    cx = sx / n;
    cy = sy / n;
}

void OrientationDistribution::validate_normalized(const Mask& mask) const {
    require_same_dims(*this, mask, "OrientationDistribution::validate_normalized");
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (!mask.at(x, y))
                continue;
            double s = 0;
            for (int i = 0; i < n_bins; ++i)
                s += at(i, x, y);
            if (std::abs(s - 1.0) > 1e-4)
                throw FormatError("OrientationDistribution: probabilities not normalized");
        }
}

DepthMap to_millimeters(const DepthMap& depth, float pitch_mm) {
    if (!(pitch_mm > 0.0f))
        throw UnitError("to_millimeters: pitch_mm must be positive");
    DepthMap out = depth;
    for (float& z : out.v)
        z *= pitch_mm;
    return out;
}

GradientMap to_millimeters(const GradientMap& grad, float pitch_mm) {
    if (!(pitch_mm > 0.0f))
        throw UnitError("to_millimeters: pitch_mm must be positive");
    GradientMap out = grad;
    for (float& g : out.gx)
        g *= pitch_mm;
    for (float& g : out.gy)
        g *= pitch_mm;
    return out;
}

Mask erode(const Mask& mask, int radius) {
    Mask cur = mask;
    for (int it = 0; it < radius; ++it) {
        Mask next(cur.width, cur.height);
        for (int y = 0; y < cur.height; ++y)
            for (int x = 0; x < cur.width; ++x) {
                if (!cur.at(x, y))
                    continue;
                bool keep = true;
                for (int dy = -1; dy <= 1 && keep; ++dy)
                    for (int dx = -1; dx <= 1 && keep; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (!cur.in_bounds(nx, ny) || !cur.at(nx, ny))
                            keep = false;
                    }
                next.set(x, y, keep);
            }
        cur = std::move(next);
    }
    return cur;
}

} // namespace fingeo
