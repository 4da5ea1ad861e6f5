#include "fingeo/texture.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "xsig.hpp"

namespace fingeo::texture {

using detail::deg2rad;
using detail::rad2deg;

namespace {

// Summed-area table with one zero row/column of padding.
struct Integral {
    int w = 0, h = 0;
    std::vector<double> s;

    explicit Integral(int width, int height)
        : w(width), h(height), s(static_cast<size_t>(width + 1) * (height + 1), 0.0) {}

    double& at(int x, int y) { return s[static_cast<size_t>(y) * (w + 1) + x]; }
    double at(int x, int y) const { return s[static_cast<size_t>(y) * (w + 1) + x]; }

    void build(const std::vector<double>& grid) {
        for (int y = 1; y <= h; ++y)
            for (int x = 1; x <= w; ++x)
                at(x, y) = grid[static_cast<size_t>(y - 1) * w + (x - 1)] +
                           at(x - 1, y) + at(x, y - 1) - at(x - 1, y - 1);
    }

    // Inclusive box sum, clamped to the grid.
    double box(int x0, int y0, int x1, int y1) const {
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, w - 1);
        y1 = std::min(y1, h - 1);
        if (x0 > x1 || y0 > y1)
            return 0.0;
        return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
    }
};

} // namespace

OrientationEstimate estimate_orientation_field(const GrayImage& image,
                                               const Mask& mask, int block_px) {
    require_same_dims(image, mask, "estimate_orientation_field");
    if (block_px < 8)
        throw PreconditionError("estimate_orientation_field: block_px must be >= 8");
    const int w = image.width, h = image.height;
    const size_t n = static_cast<size_t>(w) * h;

    // Doubled-angle tensor components of the intensity derivatives,
    // zeroed outside the mask.
    std::vector<double> txx(n, 0.0), tyy(n, 0.0), txy(n, 0.0), mag(n, 0.0),
        cnt(n, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y))
                continue;
            // Fourth-order central differences: the second-order stencil
            // attenuates each axis by sin(w)/w, which skews the gradient
            // direction of short-period ridges; this one is accurate to
            // O(w^5) and keeps the direction nearly unbiased down to a
            // 5 px period.
            auto ix = [&](int xi) { return image.at(std::clamp(xi, 0, w - 1), y); };
            auto iy = [&](int yi) { return image.at(x, std::clamp(yi, 0, h - 1)); };
            double dx, dy;
            if (x >= 2 && x + 2 < w)
                dx = (8.0 * (ix(x + 1) - ix(x - 1)) - (ix(x + 2) - ix(x - 2))) / 12.0;
            else
                dx = (ix(x + 1) - ix(x - 1)) /
                     (std::min(x + 1, w - 1) - std::max(x - 1, 0));
            if (y >= 2 && y + 2 < h)
                dy = (8.0 * (iy(y + 1) - iy(y - 1)) - (iy(y + 2) - iy(y - 2))) / 12.0;
            else
                dy = (iy(y + 1) - iy(y - 1)) /
                     (std::min(y + 1, h - 1) - std::max(y - 1, 0));
            const size_t i = static_cast<size_t>(y) * w + x;
            txx[i] = dx * dx - dy * dy;
            txy[i] = 2.0 * dx * dy;
            mag[i] = dx * dx + dy * dy;
            cnt[i] = 1.0;
        }
    Integral ixx(w, h), ixy(w, h), imag(w, h), icnt(w, h);
    {
        // tyy is -txx; only three tables are needed.
        ixx.build(txx);
        ixy.build(txy);
        imag.build(mag);
        icnt.build(cnt);
    }

    OrientationEstimate out{OrientationField(w, h), CoherenceMap(w, h)};
    const int r = block_px / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y))
                continue;
            const double c = icnt.box(x - r, y - r, x + r, y + r);
            if (c <= 0)
                continue;
            const double sxx = ixx.box(x - r, y - r, x + r, y + r);
            const double sxy = ixy.box(x - r, y - r, x + r, y + r);
            const double smag = imag.box(x - r, y - r, x + r, y + r);
            const double res = std::hypot(sxx, sxy);
            if (smag < 1e-12 || res < 1e-12) {
                out.theta.at(x, y) = 0.0f; // flat block sentinel
                out.coherence.at(x, y) = 0.0f;
                continue;
            }
            double theta = 0.5 * rad2deg(std::atan2(sxy, sxx)) + 90.0;
            theta = std::fmod(theta, 180.0);
            if (theta < 0)
                theta += 180.0;
            out.theta.at(x, y) = static_cast<float>(theta);
            out.coherence.at(x, y) =
                static_cast<float>(std::clamp(res / smag, 0.0, 1.0));
        }
    return out;
}

DecodedOrientation decode_orientation(const OrientationDistribution& dist) {
    const int n_bins = dist.n_bins;
    DecodedOrientation out;
    out.field = OrientationField(dist.width, dist.height);
    std::vector<double> cos_tab(static_cast<size_t>(n_bins)),
        sin_tab(static_cast<size_t>(n_bins));
    for (int i = 0; i < n_bins; ++i) {
        const double a = deg2rad(360.0 * i / n_bins);
        cos_tab[static_cast<size_t>(i)] = std::cos(a);
        sin_tab[static_cast<size_t>(i)] = std::sin(a);
    }
    for (int y = 0; y < dist.height; ++y)
        for (int x = 0; x < dist.width; ++x) {
            double dc = 0, ds = 0;
            for (int i = 0; i < n_bins; ++i) {
                const double p = dist.at(i, x, y);
                dc += p * cos_tab[static_cast<size_t>(i)];
                ds += p * sin_tab[static_cast<size_t>(i)];
            }
            dc /= n_bins;
            ds /= n_bins;
            if (std::hypot(dc, ds) < 1e-9) {
                out.field.at(x, y) = 0.0f; // undefined-orientation sentinel
                ++out.undefined_count;
                continue;
            }
            double theta = 0.5 * rad2deg(std::atan2(ds, dc));
            if (theta < 0)
                theta += 180.0;
            if (theta >= 180.0)
                theta -= 180.0;
            out.field.at(x, y) = static_cast<float>(theta);
        }
    return out;
}

namespace {

// Weighted polynomial fit of peak spacing vs. spacing midpoint, evaluated at
// the window center. Kills the linear (and quadratic) chirp bias of a curved
// surface, where the period changes across the window.
double spacing_at_center(const std::vector<double>& mids,
                         const std::vector<double>& spacings, double sigma) {
    const size_t n = mids.size();
    int degree = n >= 5 ? 2 : (n >= 2 ? 1 : 0);
    // Weighted normal equations for sum w*(c0 + c1 t + c2 t^2 - s)^2.
    double m[3][3] = {{0}}, rhs[3] = {0};
    for (size_t k = 0; k < n; ++k) {
        const double t = mids[k];
        const double wgt = std::exp(-(t * t) / (2.0 * sigma * sigma));
        double pows[5] = {1, t, t * t, t * t * t, t * t * t * t};
        for (int i = 0; i <= degree; ++i) {
            for (int j = 0; j <= degree; ++j)
                m[i][j] += wgt * pows[i + j];
            rhs[i] += wgt * pows[i] * spacings[k];
        }
    }
    // Gaussian elimination on the (degree+1) system.
    const int d = degree + 1;
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col]))
                piv = r;
        if (std::abs(m[piv][col]) < 1e-12)
            return spacings[0];
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int r = 0; r < d; ++r) {
            if (r == col)
                continue;
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < d; ++c)
                m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    return rhs[0] / m[0][0];
}

} // namespace

PeriodMap estimate_period_map(const GrayImage& image, const Mask& mask,
                              const OrientationField& orientation, int window_px) {
    require_same_dims(image, mask, "estimate_period_map");
    require_same_dims(image, orientation, "estimate_period_map");
    if (window_px < 16)
        throw PreconditionError("estimate_period_map: window_px must be >= 16");
    const int half_len = window_px / 2;
    const int half_width = 4;
    PeriodMap out(image.width, image.height, PeriodMap::kSentinel);

    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double theta = orientation.at(x, y);
            auto sig = detail::oriented_signature(image, x, y, theta, half_len,
                                                  half_width, &mask);
            auto peaks = detail::find_peaks(sig);
            std::vector<double> mids, spacings;
            for (size_t k = 0; k + 1 < peaks.size(); ++k) {
                const double sp = peaks[k + 1] - peaks[k];
                if (sp <= 2.2 || sp >= 64.0)
                    continue; // below Nyquist-safe range or implausible
                mids.push_back(0.5 * (peaks[k] + peaks[k + 1]) - half_len);
                spacings.push_back(sp);
            }
            if (spacings.empty())
                continue;
            const double p = spacing_at_center(mids, spacings, half_len / 1.5);
            if (p > 2.0 && p < 64.0)
                out.at(x, y) = static_cast<float>(p);
        }
    return out;
}

GradientMap gradient_from_texture(const PeriodMap& period,
                                  const OrientationField& orientation,
                                  const Mask& mask, float p0, size_t* clamp_count) {
    require_same_dims(period, mask, "gradient_from_texture");
    require_same_dims(period, orientation, "gradient_from_texture");
    if (!(p0 > 0))
        throw UnitError("gradient_from_texture: p0 must be positive");
    constexpr double kMaxSlant = 16.0; // |g| clamp, slant < 86.4 degrees

    // Convexity anchor: period-maximum pixel, ties by distance to the mask
    // centroid, then row-major order.
    double ccx, ccy;
    mask.centroid(ccx, ccy);
    int ax = -1, ay = -1;
    double best_p = -1, best_d = 0;
    for (int y = 0; y < period.height; ++y)
        for (int x = 0; x < period.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double p = period.at(x, y);
            if (p <= PeriodMap::kSentinel)
                continue;
            const double d = (x - ccx) * (x - ccx) + (y - ccy) * (y - ccy);
            if (p > best_p || (p == best_p && d < best_d)) {
                best_p = p;
                best_d = d;
                ax = x;
                ay = y;
            }
        }
    if (ax < 0) {
        ax = static_cast<int>(std::lround(ccx));
        ay = static_cast<int>(std::lround(ccy));
    }

    GradientMap out(period.width, period.height);
    size_t clamped = 0;
    for (int y = 0; y < period.height; ++y)
        for (int x = 0; x < period.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double p = period.at(x, y);
            if (p <= PeriodMap::kSentinel)
                continue;
            if (p > p0) {
                ++clamped;
                continue;
            }
            const double ratio = p0 / p;
            double g = std::sqrt(std::max(0.0, ratio * ratio - 1.0));
            g = std::min(g, kMaxSlant);
            const double normal = deg2rad(orientation.at(x, y) + 90.0);
            double nx = std::cos(normal), ny = std::sin(normal);
            // Point the normal away from the anchor, then descend outward.
            const double dot = nx * (x - ax) + ny * (y - ay);
            if (dot < 0) {
                nx = -nx;
                ny = -ny;
            }
            out.gx[out.idx(x, y)] = static_cast<float>(-g * nx);
            out.gy[out.idx(x, y)] = static_cast<float>(-g * ny);
        }
    if (clamp_count)
        *clamp_count = clamped;
    return out;
}

} // namespace fingeo::texture
