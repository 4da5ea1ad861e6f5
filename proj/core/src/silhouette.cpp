#include "fingeo/silhouette.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "xsig.hpp"

namespace fingeo::silhouette {

using detail::deg2rad;
using detail::rad2deg;

namespace {

// Subpixel boundary position between an outside pixel at `xo` and the
// adjacent inside pixel, by linear interpolation of the threshold crossing.
double refine_boundary(const GrayImage& image, int xi, int xo, int y,
                       float threshold) {
    if (!image.in_bounds(xo, y))
        return xi;
    const double vi = image.at(xi, y);
    const double vo = image.at(xo, y);
    if (std::abs(vi - vo) < 1e-9)
        return xi;
    const double t = (threshold - vo) / (vi - vo);
    if (t < 0.0 || t > 1.0)
        return xi;
    return xo + t * (xi - xo);
}

} // namespace

std::vector<RowContour> extract_contours(const Mask& mask, const GrayImage* image,
                                         float threshold) {
    std::vector<RowContour> rows;
    for (int y = 0; y < mask.height; ++y) {
        int left = -1, right = -1;
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                if (left < 0)
                    left = x;
                right = x;
            }
        if (left < 0 || right - left + 1 < 4)
            continue;
        RowContour rc;
        rc.row = y;
        rc.left = left;
        rc.right = right;
        if (image) {
            require_same_dims(*image, mask, "extract_contours");
            rc.left = refine_boundary(*image, left, left - 1, y, threshold);
            rc.right = refine_boundary(*image, right, right + 1, y, threshold);
        }
        rows.push_back(rc);
    }
    if (rows.size() < 32)
        throw InsufficientContourError("extract_contours: fewer than 32 usable rows");
    return rows;
}

std::vector<RowEllipse> fit_row_ellipses(const std::vector<RowContour>& front,
                                         const std::vector<RowContour>& right,
                                         const std::vector<RowContour>& left,
                                         FitReport* report) {
    std::map<int, const RowContour*> r_by_row, l_by_row;
    for (const auto& c : right)
        r_by_row[c.row] = &c;
    for (const auto& c : left)
        l_by_row[c.row] = &c;

    std::vector<RowEllipse> out;
    size_t common = 0, skipped = 0;
    for (const auto& f : front) {
        auto ri = r_by_row.find(f.row);
        auto li = l_by_row.find(f.row);
        if (ri == r_by_row.end() || li == l_by_row.end())
            continue;
        ++common;
        const double a = 0.5 * f.width();
        auto invert = [&](double d) {
            const double s = 2.0 * (0.5 * d) * (0.5 * d) - a * a;
            if (s < 0)
                throw DegenerateRowError("side view narrower than possible");
            return std::sqrt(s);
        };
        double b;
        try {
            b = 0.5 * (invert(ri->second->width()) + invert(li->second->width()));
        } catch (const DegenerateRowError&) {
            ++skipped;
            continue;
        }
        // Midpoint shifts: the +45 view shifts by +c_z/sqrt(2), the -45 view
        // by -c_z/sqrt(2).
        const double lr = ri->second->midpoint() - f.midpoint();
        const double ll = li->second->midpoint() - f.midpoint();
        const double cz = 0.5 * (std::sqrt(2.0) * lr - std::sqrt(2.0) * ll);
        out.push_back({f.row, a, b, cz, f.midpoint()});
    }
    if (common < 32)
        throw InsufficientContourError(
            "fit_row_ellipses: common row range shorter than 32 rows");
    if (skipped * 5 > common)
        throw ReconstructionError("fit_row_ellipses: more than 20% of rows skipped");
    if (report) {
        report->fitted_rows = out.size();
        report->skipped_rows = skipped;
    }
    return out;
}

double occlusion_angle(double a, double b) {
    if (!(a > 0) || !(b > 0))
        throw PreconditionError("occlusion_angle: axes must be positive");
    return rad2deg(std::atan((b * b) / (a * a)));
}

namespace {

// Depth profile of the cross-section ellipse (semi-axes a lateral, b depth,
// centered on the rotation axis) seen from a viewpoint rotated by `theta`
// about the vertical axis. Returns false outside the projected extent.
// The visible surface of a convex section is the upper envelope of the
// rotated ellipse, which is what stitching the unoccluded front arc with the
// newly visible back arc produces.
bool rotated_ellipse_depth(double a, double b, double theta_rad, double xprime,
                           double& depth) {
    const double c = std::cos(theta_rad), s = std::sin(theta_rad);
    // Quadratic form of the rotated ellipse: A x'^2 + 2B x'z' + C z'^2 = 1.
    const double A = (c * c) / (a * a) + (s * s) / (b * b);
    const double B = c * s * (1.0 / (a * a) - 1.0 / (b * b));
    const double C = (s * s) / (a * a) + (c * c) / (b * b);
    const double disc = B * B * xprime * xprime - C * (A * xprime * xprime - 1.0);
    if (disc < 0)
        return false;
    depth = (-B * xprime + std::sqrt(disc)) / C;
    return true;
}

void min_align(DepthMap& z, const Mask& m) {
    double zmin = std::numeric_limits<double>::infinity();
    for (int y = 0; y < z.height; ++y)
        for (int x = 0; x < z.width; ++x)
            if (m.at(x, y))
                zmin = std::min(zmin, static_cast<double>(z.at(x, y)));
    if (!std::isfinite(zmin))
        return;
    for (int y = 0; y < z.height; ++y)
        for (int x = 0; x < z.width; ++x)
            if (m.at(x, y))
                z.at(x, y) -= static_cast<float>(zmin);
            else
                z.at(x, y) = 0.0f;
}

} // namespace

ThreeViewDepths build_three_view_depths(const std::vector<RowEllipse>& ellipses,
                                        int width, int height,
                                        double view_angle_deg) {
    if (ellipses.empty())
        throw PreconditionError("build_three_view_depths: empty ellipse list");
    ThreeViewDepths out{DepthMap(width, height), DepthMap(width, height),
                        DepthMap(width, height), Mask(width, height),
                        Mask(width, height), Mask(width, height)};

    struct View {
        DepthMap* z;
        Mask* m;
        double theta;
    };
    View views[3] = {
        {&out.z_front, &out.m_front, 0.0},
        {&out.z_right, &out.m_right, deg2rad(view_angle_deg)},
        {&out.z_left, &out.m_left, -deg2rad(view_angle_deg)},
    };

    for (const auto& e : ellipses) {
        if (e.row < 0 || e.row >= height || !(e.a > 0) || !(e.b > 0))
            continue;
        for (auto& view : views) {
            const double s = std::sin(view.theta), c = std::cos(view.theta);
            // Ellipse center (0, c_z) in the section plane maps to lateral
            // offset c_z*sin and depth offset c_z*cos in the rotated frame.
            const double center_shift = e.c_z * s;
            const double half_span =
                std::sqrt(e.a * e.a * c * c + e.b * e.b * s * s);
            const int x0 = std::max(
                0, static_cast<int>(std::ceil(e.cx + center_shift - half_span)));
            const int x1 = std::min(
                width - 1,
                static_cast<int>(std::floor(e.cx + center_shift + half_span)));
            for (int x = x0; x <= x1; ++x) {
                const double xp = (x - e.cx) - center_shift;
                double depth;
                if (!rotated_ellipse_depth(e.a, e.b, view.theta, xp, depth))
                    continue;
                view.z->at(x, e.row) = static_cast<float>(depth + e.c_z * c);
                view.m->set(x, e.row, true);
            }
        }
    }
    for (auto& view : views)
        min_align(*view.z, *view.m);
    return out;
}

} // namespace fingeo::silhouette
