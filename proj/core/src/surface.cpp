#include "fingeo/surface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace fingeo::surface {

namespace {

struct Neighbor {
    int x, y;
    double d2;
};

// K nearest masked pixels by expanding Chebyshev rings; a sqrt(2) ring margin
// guarantees true Euclidean ordering before truncation.
std::vector<Neighbor> nearest_masked(const Mask& mask, int cx, int cy, int k) {
    std::vector<Neighbor> found;
    const int rmax = std::max(mask.width, mask.height);
    int enough_ring = -1;
    for (int r = 0; r <= rmax; ++r) {
        if (enough_ring >= 0 && r > static_cast<int>(std::ceil(enough_ring * 1.4143)) + 1)
            break;
        bool any = false;
        auto visit = [&](int x, int y) {
            if (!mask.in_bounds(x, y))
                return;
            any = true;
            if (mask.at(x, y)) {
                const double dx = x - cx, dy = y - cy;
                found.push_back({x, y, dx * dx + dy * dy});
            }
        };
        if (r == 0) {
            visit(cx, cy);
        } else {
            for (int x = cx - r; x <= cx + r; ++x) {
                visit(x, cy - r);
                visit(x, cy + r);
            }
            for (int y = cy - r + 1; y <= cy + r - 1; ++y) {
                visit(cx - r, y);
                visit(cx + r, y);
            }
        }
        if (enough_ring < 0 && static_cast<int>(found.size()) >= k)
            enough_ring = r;
        if (!any && r > 0 && enough_ring >= 0)
            break;
    }
    std::sort(found.begin(), found.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.d2 != b.d2)
            return a.d2 < b.d2;
        if (a.y != b.y)
            return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(found.size()) > k)
        found.resize(static_cast<size_t>(k));
    return found;
}

// Solves the symmetric system m*x = rhs in place; returns false when a pivot
// collapses or the pivot spread exceeds the conditioning limit.
bool solve_sym(std::vector<double>& m, std::vector<double>& rhs, int n) {
    double max_pivot = 0, min_pivot = std::numeric_limits<double>::infinity();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col]))
                piv = r;
        const double p = std::abs(m[piv * n + col]);
        if (p < 1e-14)
            return false;
        max_pivot = std::max(max_pivot, p);
        min_pivot = std::min(min_pivot, p);
        if (max_pivot / min_pivot > 1e10)
            return false;
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(m[col * n + c], m[piv * n + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        for (int r = 0; r < n; ++r) {
            if (r == col)
                continue;
            const double f = m[r * n + col] / m[col * n + col];
            for (int c = col; c < n; ++c)
                m[r * n + c] -= f * m[col * n + c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int i = 0; i < n; ++i)
        rhs[i] /= m[i * n + i];
    return true;
}

} // namespace

DepthMap mls_smooth(const DepthMap& depth, const Mask& mask, int k_neighbors,
                    float epsilon_px, MlsReport* report, GradientMap* grad_out) {
    require_same_dims(depth, mask, "mls_smooth");
    if (k_neighbors < 6)
        throw PreconditionError("mls_smooth: k_neighbors must be >= 6");
    if (!(epsilon_px > 0))
        throw PreconditionError("mls_smooth: epsilon_px must be positive");

    DepthMap out(depth.width, depth.height);
    if (grad_out)
        *grad_out = GradientMap(depth.width, depth.height);
    size_t fallbacks = 0;
    const double inv_eps2 = 1.0 / (static_cast<double>(epsilon_px) * epsilon_px);

    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y))
                continue;
            auto nb = nearest_masked(mask, x, y, k_neighbors);
            // Basis centered at the query point: constant term = f(x,y),
            // linear terms = gradient at (x,y).
            auto fit = [&](bool quadric, std::vector<double>& coeff) {
                const int n = quadric ? 6 : 3;
                std::vector<double> m(static_cast<size_t>(n) * n, 0.0),
                    rhs(static_cast<size_t>(n), 0.0);
                for (const auto& p : nb) {
                    const double dx = p.x - x, dy = p.y - y;
                    const double w = std::exp(-p.d2 * inv_eps2);
                    double basis[6] = {dx * dx, dx * dy, dy * dy, dx, dy, 1.0};
                    const double* b = quadric ? basis : basis + 3;
                    const double z = depth.at(p.x, p.y);
                    for (int i = 0; i < n; ++i) {
                        for (int j = 0; j < n; ++j)
                            m[static_cast<size_t>(i) * n + j] += w * b[i] * b[j];
                        rhs[static_cast<size_t>(i)] += w * b[i] * z;
                    }
                }
                if (!solve_sym(m, rhs, n))
                    return false;
                coeff = rhs;
                return true;
            };

            std::vector<double> c;
            double fval, gx, gy;
            if (static_cast<int>(nb.size()) >= 6 && fit(true, c)) {
                fval = c[5];
                gx = c[3];
                gy = c[4];
            } else if (static_cast<int>(nb.size()) >= 3 && fit(false, c)) {
                ++fallbacks;
                fval = c[2];
                gx = c[0];
                gy = c[1];
            } else {
                ++fallbacks;
                fval = depth.at(x, y);
                gx = gy = 0.0;
            }
            out.at(x, y) = static_cast<float>(fval);
            if (grad_out) {
                grad_out->gx[grad_out->idx(x, y)] = static_cast<float>(gx);
                grad_out->gy[grad_out->idx(x, y)] = static_cast<float>(gy);
            }
        }
    if (report)
        report->plane_fallbacks = fallbacks;
    return out;
}

GradientMap depth_to_gradient(const DepthMap& depth, const Mask& mask) {
    require_same_dims(depth, mask, "depth_to_gradient");
    GradientMap out(depth.width, depth.height);
    auto masked = [&](int x, int y) { return mask.in_bounds(x, y) && mask.at(x, y); };
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const bool xp = masked(x + 1, y), xm = masked(x - 1, y);
            const bool yp = masked(x, y + 1), ym = masked(x, y - 1);
            double gx = 0, gy = 0;
            if (xp && xm)
                gx = 0.5 * (depth.at(x + 1, y) - depth.at(x - 1, y));
            else if (xp)
                gx = depth.at(x + 1, y) - depth.at(x, y);
            else if (xm)
                gx = depth.at(x, y) - depth.at(x - 1, y);
            if (yp && ym)
                gy = 0.5 * (depth.at(x, y + 1) - depth.at(x, y - 1));
            else if (yp)
                gy = depth.at(x, y + 1) - depth.at(x, y);
            else if (ym)
                gy = depth.at(x, y) - depth.at(x, y - 1);
            out.gx[out.idx(x, y)] = static_cast<float>(gx);
            out.gy[out.idx(x, y)] = static_cast<float>(gy);
        }
    return out;
}

std::pair<int, int> find_zero_point(const GradientMap& grad, const Mask& mask) {
    require_same_dims(grad, mask, "find_zero_point");
    if (mask.count() == 0)
        throw NoForegroundError("find_zero_point: empty mask");
    double ccx, ccy;
    mask.centroid(ccx, ccy);
    int bx = -1, by = -1;
    double best_g = std::numeric_limits<double>::infinity();
    double best_d = std::numeric_limits<double>::infinity();
    for (int y = 0; y < grad.height; ++y)
        for (int x = 0; x < grad.width; ++x) {
            if (!mask.at(x, y))
                continue;
            const double g = grad.norm(x, y);
            const double d = (x - ccx) * (x - ccx) + (y - ccy) * (y - ccy);
            if (g < best_g || (g == best_g && d < best_d)) {
                best_g = g;
                best_d = d;
                bx = x;
                by = y;
            }
        }
    return {bx, by};
}

DepthMap integrate_gradient(const GradientMap& grad, const Mask& mask,
                            std::pair<int, int> zero, IntegrateReport* report) {
    require_same_dims(grad, mask, "integrate_gradient");
    const auto [cx, cy] = zero;
    if (!mask.in_bounds(cx, cy) || !mask.at(cx, cy))
        throw PreconditionError("integrate_gradient: zero point outside mask");
    const int w = grad.width, h = grad.height;
    const size_t n = static_cast<size_t>(w) * h;

    // One pass per path order; `first_axis` selects x-then-y or y-then-x.
    auto run_path = [&](bool x_first, std::vector<double>& z,
                        std::vector<uint8_t>& reached) {
        z.assign(n, 0.0);
        reached.assign(n, 0);
        auto idx = [&](int x, int y) { return static_cast<size_t>(y) * w + x; };
        auto march = [&](int x0, int y0, int dx, int dy) {
            double acc = z[idx(x0, y0)];
            int x = x0, y = y0;
            while (true) {
                const int nx2 = x + dx, ny2 = y + dy;
                if (nx2 < 0 || ny2 < 0 || nx2 >= w || ny2 >= h || !mask.at(nx2, ny2))
                    break;
                const double g0 = dx != 0 ? grad.gx[idx(x, y)] : grad.gy[idx(x, y)];
                const double g1 =
                    dx != 0 ? grad.gx[idx(nx2, ny2)] : grad.gy[idx(nx2, ny2)];
                acc += 0.5 * (g0 + g1) * (dx + dy); // step is +/-1
                z[idx(nx2, ny2)] = acc;
                reached[idx(nx2, ny2)] = 1;
                x = nx2;
                y = ny2;
            }
        };
        reached[idx(cx, cy)] = 1;
        if (x_first) {
            march(cx, cy, 1, 0);
            march(cx, cy, -1, 0);
            for (int x = 0; x < w; ++x)
                if (reached[idx(x, cy)]) {
                    march(x, cy, 0, 1);
                    march(x, cy, 0, -1);
                }
        } else {
            march(cx, cy, 0, 1);
            march(cx, cy, 0, -1);
            for (int y = 0; y < h; ++y)
                if (reached[idx(cx, y)]) {
                    march(cx, y, 1, 0);
                    march(cx, y, -1, 0);
                }
        }
    };

    std::vector<double> z1, z2;
    std::vector<uint8_t> r1, r2;
    run_path(true, z1, r1);
    run_path(false, z2, r2);

    DepthMap out(w, h);
    std::vector<uint8_t> assigned(n, 0);
    for (size_t i = 0; i < n; ++i) {
        if (!mask.bits[i])
            continue;
        if (r1[i] && r2[i]) {
            out.v[i] = static_cast<float>(0.5 * (z1[i] + z2[i]));
            assigned[i] = 1;
        } else if (r1[i]) {
            out.v[i] = static_cast<float>(z1[i]);
            assigned[i] = 1;
        } else if (r2[i]) {
            out.v[i] = static_cast<float>(z2[i]);
            assigned[i] = 1;
        }
    }

    // Pixels isolated from both axis paths (concave masks): nearest-neighbor
    // fill by multi-source BFS.
    size_t filled = 0;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (assigned[static_cast<size_t>(y) * w + x])
                queue.push_back({x, y});
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        const int nx4[4] = {x - 1, x + 1, x, x};
        const int ny4[4] = {y, y, y - 1, y + 1};
        for (int k = 0; k < 4; ++k) {
            const int nx = nx4[k], ny = ny4[k];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                continue;
            const size_t i = static_cast<size_t>(ny) * w + nx;
            if (!mask.bits[i] || assigned[i])
                continue;
            out.v[i] = out.at(x, y);
            assigned[i] = 1;
            ++filled;
            queue.push_back({nx, ny});
        }
    }
    if (report)
        report->filled_pixels = filled;

    // Min-align to zero over the mask.
    float zmin = std::numeric_limits<float>::infinity();
    for (size_t i = 0; i < n; ++i)
        if (mask.bits[i])
            zmin = std::min(zmin, out.v[i]);
    if (std::isfinite(zmin))
        for (size_t i = 0; i < n; ++i)
            out.v[i] = mask.bits[i] ? out.v[i] - zmin : 0.0f;
    return out;
}

} // namespace fingeo::surface
