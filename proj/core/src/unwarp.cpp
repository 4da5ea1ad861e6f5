#include "fingeo/unwarp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace fingeo::unwarp {

ArcCoords arc_length_coords(const GradientMap& grad, const Mask& mask,
                            std::pair<int, int> zero) {
    require_same_dims(grad, mask, "arc_length_coords");
    const auto [cx, cy] = zero;
    if (!mask.in_bounds(cx, cy) || !mask.at(cx, cy))
        throw PreconditionError("arc_length_coords: zero point outside mask");
    const int w = grad.width, h = grad.height;
    for (size_t i = 0; i < grad.gx.size(); ++i)
        if (!std::isfinite(grad.gx[i]) || !std::isfinite(grad.gy[i]))
            throw UnwarpError("arc_length_coords: non-finite gradient");

    ArcCoords out;
    out.width = w;
    out.height = h;
    out.u = FloatGrid(w, h);
    out.v = FloatGrid(w, h);

    auto len_x = [&](int x, int y) {
        const double g = grad.gx[grad.idx(x, y)];
        return std::sqrt(1.0 + g * g);
    };
    auto len_y = [&](int x, int y) {
        const double g = grad.gy[grad.idx(x, y)];
        return std::sqrt(1.0 + g * g);
    };

    for (int y = 0; y < h; ++y) {
        double acc = 0.0;
        out.u.at(cx, y) = 0.0f;
        for (int x = cx + 1; x < w; ++x) {
            acc += 0.5 * (len_x(x - 1, y) + len_x(x, y));
            out.u.at(x, y) = static_cast<float>(acc);
        }
        acc = 0.0;
        for (int x = cx - 1; x >= 0; --x) {
            acc -= 0.5 * (len_x(x + 1, y) + len_x(x, y));
            out.u.at(x, y) = static_cast<float>(acc);
        }
    }
    for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        out.v.at(x, cy) = 0.0f;
        for (int y = cy + 1; y < h; ++y) {
            acc += 0.5 * (len_y(x, y - 1) + len_y(x, y));
            out.v.at(x, y) = static_cast<float>(acc);
        }
        acc = 0.0;
        for (int y = cy - 1; y >= 0; --y) {
            acc -= 0.5 * (len_y(x, y + 1) + len_y(x, y));
            out.v.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

namespace {

// Inverts a strictly increasing piecewise-linear sequence of samples at
// integer positions. Returns nullopt when the target lies outside the range.
std::optional<double> invert_monotone(const std::vector<double>& f, double target) {
    const int n = static_cast<int>(f.size());
    if (n < 2 || target < f[0] || target > f[n - 1])
        return std::nullopt;
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (f[static_cast<size_t>(mid)] <= target)
            lo = mid;
        else
            hi = mid;
    }
    const double f0 = f[static_cast<size_t>(lo)], f1 = f[static_cast<size_t>(hi)];
    if (f1 <= f0)
        return std::nullopt; // non-monotone segment
    return lo + (target - f0) / (f1 - f0);
}

} // namespace

UnwarpResult unwarp_image(const GrayImage& image, const Mask& mask,
                          const ArcCoords& coords, std::pair<int, int> zero) {
    require_same_dims(image, mask, "unwarp_image");
    require_same_dims(image, coords.u, "unwarp_image");
    const auto [cx, cy] = zero;
    const int w = image.width, h = image.height;
    if (!mask.in_bounds(cx, cy) || !mask.at(cx, cy))
        throw PreconditionError("unwarp_image: zero point outside mask");
    for (float f : coords.u.v)
        if (!std::isfinite(f))
            throw UnwarpError("unwarp_image: non-finite arc coordinates");
    for (float f : coords.v.v)
        if (!std::isfinite(f))
            throw UnwarpError("unwarp_image: non-finite arc coordinates");

    // Output canvas: union of the input extent and the mapped-mask bounding
    // box, so a zero-gradient unwarp is the exact identity.
    double minx = 0, maxx = w - 1, miny = 0, maxy = h - 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y))
                continue;
            minx = std::min(minx, static_cast<double>(cx + coords.u.at(x, y)));
            maxx = std::max(maxx, static_cast<double>(cx + coords.u.at(x, y)));
            miny = std::min(miny, static_cast<double>(cy + coords.v.at(x, y)));
            maxy = std::max(maxy, static_cast<double>(cy + coords.v.at(x, y)));
        }
    const int ox = static_cast<int>(std::floor(minx));
    const int oy = static_cast<int>(std::floor(miny));
    const int ow = static_cast<int>(std::ceil(maxx)) - ox + 1;
    const int oh = static_cast<int>(std::ceil(maxy)) - oy + 1;

    UnwarpResult res;
    res.image = GrayImage(ow, oh, image.pitch_mm);
    res.mask = Mask(ow, oh);
    res.offset_x = ox;
    res.offset_y = oy;

    // Samples u along a row at fractional y (linear blend of adjacent rows).
    auto u_row = [&](double fy, std::vector<double>& buf) {
        const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, h - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const double t = std::clamp(fy - y0, 0.0, 1.0);
        for (int x = 0; x < w; ++x)
            buf[static_cast<size_t>(x)] =
                (1 - t) * coords.u.at(x, y0) + t * coords.u.at(x, y1);
    };
    auto v_col = [&](double fx, std::vector<double>& buf) {
        const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, w - 1);
        const int x1 = std::min(x0 + 1, w - 1);
        const double t = std::clamp(fx - x0, 0.0, 1.0);
        for (int y = 0; y < h; ++y)
            buf[static_cast<size_t>(y)] =
                (1 - t) * coords.v.at(x0, y) + t * coords.v.at(x1, y);
    };

    std::vector<double> row_buf(static_cast<size_t>(w)), col_buf(static_cast<size_t>(h));
    for (int Y = 0; Y < oh; ++Y) {
        const double V = (Y + oy) - cy;
        for (int X = 0; X < ow; ++X) {
            const double U = (X + ox) - cx;
            // Alternate the two monotone 1D inversions; the cross-coupling
            // between u(x,y) and v(x,y) is weak, a few sweeps suffice.
            double fx = std::clamp(static_cast<double>(cx) + U, 0.0, w - 1.0);
            double fy = std::clamp(static_cast<double>(cy) + V, 0.0, h - 1.0);
            bool ok = true;
            for (int it = 0; it < 3 && ok; ++it) {
                u_row(fy, row_buf);
                auto sx = invert_monotone(row_buf, U);
                if (!sx) {
                    ok = false;
                    break;
                }
                fx = *sx;
                v_col(fx, col_buf);
                auto sy = invert_monotone(col_buf, V);
                if (!sy) {
                    ok = false;
                    break;
                }
                fy = *sy;
            }
            if (!ok)
                continue;
            const int mx = static_cast<int>(std::lround(fx));
            const int my = static_cast<int>(std::lround(fy));
            const bool inside = mask.in_bounds(mx, my) && mask.at(mx, my);
            res.mask.set(X, Y, inside);
            res.image.at(X, Y) =
                image.sample(static_cast<float>(fx), static_cast<float>(fy));
        }
    }
    return res;
}

} // namespace fingeo::unwarp
