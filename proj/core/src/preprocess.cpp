#include "fingeo/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

#include "xsig.hpp"

namespace fingeo::preprocess {

using detail::deg2rad;
using detail::rad2deg;

namespace {

constexpr int kHistBins = 256;

float otsu_threshold(const GrayImage& image) {
    std::array<size_t, kHistBins> hist{};
    for (float p : image.pixels) {
        int b = std::min(kHistBins - 1, static_cast<int>(p * kHistBins));
        ++hist[static_cast<size_t>(b)];
    }
    const double total = static_cast<double>(image.pixels.size());
    double sum_all = 0;
    for (int i = 0; i < kHistBins; ++i)
        sum_all += i * static_cast<double>(hist[i]);
    double sum_b = 0, w_b = 0;
    double best_var = -1.0;
    // The between-class variance is flat across the gap between two well
    // separated modes; take the midpoint of the maximal plateau.
    int best_first = kHistBins / 2, best_last = kHistBins / 2;
    for (int t = 0; t < kHistBins; ++t) {
        w_b += static_cast<double>(hist[t]);
        sum_b += t * static_cast<double>(hist[t]);
        if (w_b == 0)
            continue;
        double w_f = total - w_b;
        if (w_f == 0)
            break;
        double m_b = sum_b / w_b;
        double m_f = (sum_all - sum_b) / w_f;
        double var = w_b * w_f * (m_b - m_f) * (m_b - m_f);
        if (var > best_var + 1e-9) {
            best_var = var;
            best_first = t;
            best_last = t;
        } else if (var >= best_var - 1e-9) {
            best_last = t;
        }
    }
    return ((best_first + best_last) / 2 + 0.5f) / kHistBins;
}

// Largest 4-connected component of `fg`, by pixel count; ties by first seed
// in row-major order.
Mask largest_component(const Mask& fg) {
    const int w = fg.width, h = fg.height;
    std::vector<int32_t> label(static_cast<size_t>(w) * h, -1);
    int best_label = -1;
    size_t best_size = 0;
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            size_t i0 = static_cast<size_t>(y0) * w + x0;
            if (!fg.bits[i0] || label[i0] >= 0)
                continue;
            int lbl = next++;
            size_t size = 0;
            stack.push_back({x0, y0});
            label[i0] = lbl;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                ++size;
                const int nx[4] = {x - 1, x + 1, x, x};
                const int ny[4] = {y, y, y - 1, y + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h)
                        continue;
                    size_t ni = static_cast<size_t>(ny[k]) * w + nx[k];
                    if (fg.bits[ni] && label[ni] < 0) {
                        label[ni] = lbl;
                        stack.push_back({nx[k], ny[k]});
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best_label = lbl;
            }
        }
    Mask out(w, h);
    if (best_label < 0)
        return out;
    for (size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = label[i] == best_label ? 1 : 0;
    return out;
}

// Fills regions of the complement not reachable from the image border.
void fill_holes(Mask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<uint8_t> outside(static_cast<size_t>(w) * h, 0);
    std::vector<std::pair<int, int>> stack;
    auto push = [&](int x, int y) {
        size_t i = static_cast<size_t>(y) * w + x;
        if (!mask.bits[i] && !outside[i]) {
            outside[i] = 1;
            stack.push_back({x, y});
        }
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        if (x > 0) push(x - 1, y);
        if (x < w - 1) push(x + 1, y);
        if (y > 0) push(x, y - 1);
        if (y < h - 1) push(x, y + 1);
    }
    for (size_t i = 0; i < mask.bits.size(); ++i)
        if (!mask.bits[i] && !outside[i])
            mask.bits[i] = 1;
}

} // namespace

Mask segment(const GrayImage& image, std::optional<float> threshold) {
    const float t = threshold ? *threshold : otsu_threshold(image);
    Mask fg(image.width, image.height);
    for (size_t i = 0; i < image.pixels.size(); ++i)
        fg.bits[i] = image.pixels[i] > t ? 1 : 0;
    if (fg.count() < image.pixels.size() / 100)
        throw NoForegroundError("segment: foreground below 1% of pixels");
    Mask out = largest_component(fg);
    fill_holes(out);
    return out;
}

namespace {

// Per-tile clipped-histogram equalization mapping, stretched to the tile's
// occupied intensity range. Degenerate tiles map everything to 0.5.
struct TileMap {
    std::array<float, kHistBins> lut{};
    bool degenerate = true;

    void build(const std::array<double, kHistBins>& hist, double npix, float clip) {
        lut.fill(0.5f);
        degenerate = true;
        if (npix <= 0)
            return;
        int lo = -1, hi = -1;
        for (int i = 0; i < kHistBins; ++i)
            if (hist[i] > 0) {
                if (lo < 0)
                    lo = i;
                hi = i;
            }
        if (lo < 0 || lo == hi)
            return;
        degenerate = false;
        std::array<double, kHistBins> clipped{};
        const double cap = std::max(1.0, clip * npix / kHistBins);
        double excess = 0;
        for (int i = 0; i < kHistBins; ++i) {
            clipped[i] = std::min(hist[i], cap);
            excess += hist[i] - clipped[i];
        }
        const double redist = excess / kHistBins;
        double cdf = 0;
        std::array<double, kHistBins> cum{};
        for (int i = 0; i < kHistBins; ++i) {
            cdf += clipped[i] + redist;
            cum[i] = cdf;
        }
        const double cdf_lo = lo > 0 ? cum[lo - 1] : 0.0;
        const double cdf_hi = cum[hi];
        const double denom = cdf_hi - cdf_lo;
        if (denom <= 0) {
            degenerate = true;
            lut.fill(0.5f);
            return;
        }
        for (int i = 0; i < kHistBins; ++i)
            lut[i] = static_cast<float>(
                std::clamp((cum[i] - cdf_lo) / denom, 0.0, 1.0));
    }
};

} // namespace

GrayImage enhance(const GrayImage& image, const Mask& mask, int tile_px, float clip) {
    require_same_dims(image, mask, "enhance");
    if (tile_px < 8)
        throw PreconditionError("enhance: tile_px must be >= 8");
    const int w = image.width, h = image.height;
    const int tx_n = (w + tile_px - 1) / tile_px;
    const int ty_n = (h + tile_px - 1) / tile_px;
    std::vector<TileMap> tiles(static_cast<size_t>(tx_n) * ty_n);

    for (int ty = 0; ty < ty_n; ++ty)
        for (int tx = 0; tx < tx_n; ++tx) {
            std::array<double, kHistBins> hist{};
            double npix = 0;
            const int x0 = tx * tile_px, y0 = ty * tile_px;
            const int x1 = std::min(w, x0 + tile_px), y1 = std::min(h, y0 + tile_px);
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    if (!mask.at(x, y))
                        continue;
                    int b = std::min(kHistBins - 1,
                                     static_cast<int>(image.at(x, y) * kHistBins));
                    hist[static_cast<size_t>(b)] += 1;
                    npix += 1;
                }
            tiles[static_cast<size_t>(ty) * tx_n + tx].build(hist, npix, clip);
        }

    GrayImage out(w, h, image.pitch_mm);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) {
                out.at(x, y) = 0.0f;
                continue;
            }
            const int bin =
                std::min(kHistBins - 1, static_cast<int>(image.at(x, y) * kHistBins));
            // Bilinear blend of the four surrounding tile mappings.
            const double fx = (x + 0.5) / tile_px - 0.5;
            const double fy = (y + 0.5) / tile_px - 0.5;
            const int tx0 = std::clamp(static_cast<int>(std::floor(fx)), 0, tx_n - 1);
            const int ty0 = std::clamp(static_cast<int>(std::floor(fy)), 0, ty_n - 1);
            const int tx1 = std::min(tx0 + 1, tx_n - 1);
            const int ty1 = std::min(ty0 + 1, ty_n - 1);
            const double ax = std::clamp(fx - tx0, 0.0, 1.0);
            const double ay = std::clamp(fy - ty0, 0.0, 1.0);
            auto tile = [&](int tx, int ty) -> const TileMap& {
                return tiles[static_cast<size_t>(ty) * tx_n + tx];
            };
            double v = (1 - ax) * (1 - ay) * tile(tx0, ty0).lut[bin] +
                       ax * (1 - ay) * tile(tx1, ty0).lut[bin] +
                       (1 - ax) * ay * tile(tx0, ty1).lut[bin] +
                       ax * ay * tile(tx1, ty1).lut[bin];
            out.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    return out;
}

CenterRegion center_region(const Mask& mask) {
    const size_t n = mask.count();
    if (n == 0)
        throw NoForegroundError("center_region: empty mask");
    double cx, cy;
    mask.centroid(cx, cy);
    CenterRegion r;
    r.cx = static_cast<int>(std::lround(cx));
    r.cy = static_cast<int>(std::lround(cy));
    r.radius = std::sqrt(0.20 * static_cast<double>(n) / detail::kPi);
    return r;
}

float mean_ridge_period(const GrayImage& image, const CenterRegion& region,
                        const OrientationField& orientation) {
    require_same_dims(image, orientation, "mean_ridge_period");
    const int step = 16;
    const int half_len = 24;
    const int half_width = 6;
    double period_sum = 0;
    int good = 0, total = 0;
    for (int by = region.cy - static_cast<int>(region.radius);
         by <= region.cy + static_cast<int>(region.radius); by += step)
        for (int bx = region.cx - static_cast<int>(region.radius);
             bx <= region.cx + static_cast<int>(region.radius); bx += step) {
            const double dx = bx - region.cx, dy = by - region.cy;
            if (dx * dx + dy * dy > region.radius * region.radius)
                continue;
            if (!image.in_bounds(bx, by))
                continue;
            ++total;
            const double theta = orientation.at(bx, by);
            auto sig = detail::oriented_signature(image, bx, by, theta,
                                                  half_len, half_width);
            auto peaks = detail::find_peaks(sig);
            auto spacing = detail::mean_peak_spacing(peaks);
            if (!spacing)
                continue;
            period_sum += *spacing;
            ++good;
        }
    if (total == 0 || good * 2 <= total)
        throw NoRidgeSignalError("mean_ridge_period: no periodic signal detected");
    return static_cast<float>(period_sum / good);
}

RescaleResult rescale_to_period(const GrayImage& image, const Mask& mask,
                                float measured_period, float target_period) {
    require_same_dims(image, mask, "rescale_to_period");
    if (!(measured_period > 0))
        throw PreconditionError("rescale_to_period: measured period must be > 0");
    const float scale = target_period / measured_period;
    if (scale < 0.1f || scale > 10.0f)
        throw ImplausibleScaleError("rescale_to_period: scale factor " +
                                    std::to_string(scale) + " outside [0.1, 10]");
    const int nw = std::max(8, static_cast<int>(std::lround(image.width * scale)));
    const int nh = std::max(8, static_cast<int>(std::lround(image.height * scale)));
    RescaleResult res;
    res.scale_factor = scale;
    res.image = GrayImage(nw, nh, kDefaultPitchMm);
    res.mask = Mask(nw, nh);
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x) {
            const float sx = x / scale;
            const float sy = y / scale;
            res.image.at(x, y) = image.sample(sx, sy);
            const int mx = static_cast<int>(std::lround(sx));
            const int my = static_cast<int>(std::lround(sy));
            res.mask.set(x, y, mask.in_bounds(mx, my) && mask.at(mx, my));
        }
    return res;
}

namespace {

struct RowMid {
    double y;
    double x;
    double width;
};

std::vector<RowMid> row_midpoints(const Mask& mask) {
    std::vector<RowMid> mids;
    for (int y = 0; y < mask.height; ++y) {
        int left = -1, right = -1;
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                if (left < 0)
                    left = x;
                right = x;
            }
        if (left >= 0)
            mids.push_back({static_cast<double>(y), 0.5 * (left + right),
                            static_cast<double>(right - left + 1)});
    }
    return mids;
}

} // namespace

float estimate_yaw(const Mask& mask) {
    auto mids = row_midpoints(mask);
    if (mids.size() < 32)
        throw InsufficientContourError("estimate_yaw: fewer than 32 contour rows");
    // Narrow rows at the tip and base have midpoints pulled toward one
    // corner; fit only rows near full body width.
    {
        std::vector<double> widths;
        widths.reserve(mids.size());
        for (const auto& m : mids)
            widths.push_back(m.width);
        std::nth_element(widths.begin(), widths.begin() + widths.size() / 2,
                         widths.end());
        const double cutoff = 0.9 * widths[widths.size() / 2];
        std::vector<RowMid> body;
        for (const auto& m : mids)
            if (m.width >= cutoff)
                body.push_back(m);
        if (body.size() >= 32)
            mids = std::move(body);
    }
    // Least squares x = m*y + b.
    double sy = 0, sx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(mids.size());
    for (const auto& m : mids) {
        sy += m.y;
        sx += m.x;
        syy += m.y * m.y;
        sxy += m.y * m.x;
    }
    const double denom = n * syy - sy * sy;
    if (std::abs(denom) < 1e-12)
        throw InsufficientContourError("estimate_yaw: degenerate row range");
    const double slope = (n * sxy - sy * sx) / denom;
    return static_cast<float>(rad2deg(std::atan(slope)));
}

RotateResult rotate_upright(const GrayImage& image, const Mask& mask, float yaw_deg) {
    require_same_dims(image, mask, "rotate_upright");
    if (!(std::abs(yaw_deg) < 90.0f))
        throw PreconditionError("rotate_upright: |yaw| must be < 90");
    double cx, cy;
    mask.centroid(cx, cy);
    const double a = deg2rad(yaw_deg);
    const double ca = std::cos(a), sa = std::sin(a);
    // Forward map: p -> R(yaw)*(p - c) + c, which sends the centerline
    // direction (tan(yaw), 1) to vertical.
    auto fwd = [&](double x, double y, double& ox, double& oy) {
        const double dx = x - cx, dy = y - cy;
        ox = ca * dx - sa * dy + cx;
        oy = sa * dx + ca * dy + cy;
    };
    double minx = 1e30, miny = 1e30, maxx = -1e30, maxy = -1e30;
    const double cs[4][2] = {{0, 0},
                             {static_cast<double>(image.width - 1), 0},
                             {0, static_cast<double>(image.height - 1)},
                             {static_cast<double>(image.width - 1),
                              static_cast<double>(image.height - 1)}};
    for (const auto& c : cs) {
        double ox, oy;
        fwd(c[0], c[1], ox, oy);
        minx = std::min(minx, ox);
        maxx = std::max(maxx, ox);
        miny = std::min(miny, oy);
        maxy = std::max(maxy, oy);
    }
    const int ox0 = static_cast<int>(std::floor(minx));
    const int oy0 = static_cast<int>(std::floor(miny));
    const int nw = static_cast<int>(std::ceil(maxx)) - ox0 + 1;
    const int nh = static_cast<int>(std::ceil(maxy)) - oy0 + 1;

    RotateResult res;
    res.image = GrayImage(nw, nh, image.pitch_mm);
    res.mask = Mask(nw, nh);
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x) {
            // Inverse rotation back into the source frame.
            const double dx = (x + ox0) - cx, dy = (y + oy0) - cy;
            const double sx = ca * dx + sa * dy + cx;
            const double sy = -sa * dx + ca * dy + cy;
            if (sx < -0.5 || sy < -0.5 || sx > image.width - 0.5 ||
                sy > image.height - 0.5)
                continue;
            const int mx = static_cast<int>(std::lround(sx));
            const int my = static_cast<int>(std::lround(sy));
            res.mask.set(x, y, mask.in_bounds(mx, my) && mask.at(mx, my));
            res.image.at(x, y) =
                image.sample(static_cast<float>(sx), static_cast<float>(sy));
        }
    return res;
}

} // namespace fingeo::preprocess
