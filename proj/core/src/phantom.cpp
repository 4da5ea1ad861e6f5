#include "fingeo/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "xsig.hpp"

namespace fingeo::phantom {

using detail::deg2rad;
using detail::kPi;

void PhantomSpec::validate() const {
    if (!(rx > 0) || !(ry > 0) || !(rz > 0))
        throw PreconditionError("phantom: radii must be positive");
    if (!(p0 >= 4))
        throw PreconditionError("phantom: ridge period must be at least 4 px");
    const int cx = width / 2, cy = height / 2;
    if (cx - rx < 8 || (width - 1 - cx) - rx < 8 || cy - ry < 8 ||
        (height - 1 - cy) - ry < 8)
        throw PreconditionError("phantom: outline must fit with an 8 px margin");
    if (shape == Shape::Hemisphere && (rx != ry || ry != rz))
        throw PreconditionError("phantom: hemisphere requires equal radii");
}

namespace {

// Arc length from the apex along a radial ray for z = rz*sqrt(1 - k*t^2):
// integral of sqrt(1 + (dz/dt)^2) dt from 0 to r, composite trapezoid.
double radial_arc_length(double r, double k, double rz) {
    if (r <= 0)
        return 0.0;
    const int steps = std::max(32, static_cast<int>(std::ceil(4.0 * r)));
    auto integrand = [&](double t) {
        const double q2 = std::max(1e-12, 1.0 - k * t * t);
        const double dz = -rz * k * t / std::sqrt(q2);
        return std::sqrt(1.0 + dz * dz);
    };
    double acc = 0.5 * (integrand(0.0) + integrand(r));
    for (int i = 1; i < steps; ++i)
        acc += integrand(r * i / steps);
    return acc * r / steps;
}

} // namespace

PhantomBundle generate(const PhantomSpec& spec) {
    spec.validate();
    const int w = spec.width, h = spec.height;
    const int cx = w / 2, cy = h / 2;

    PhantomBundle b;
    b.image = GrayImage(w, h);
    b.mask = Mask(w, h);
    b.depth = DepthMap(w, h);
    b.gradient = GradientMap(w, h);
    b.period_truth = PeriodMap(w, h, PeriodMap::kSentinel);

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double q2 = 1.0 - (dx * dx) / (spec.rx * spec.rx) -
                              (dy * dy) / (spec.ry * spec.ry);
            if (q2 <= 0)
                continue;
            const double q = std::sqrt(q2);
            const size_t i = b.gradient.idx(x, y);
            b.mask.set(x, y, true);
            b.depth.at(x, y) = static_cast<float>(spec.rz * q);
            const double gx = -spec.rz * dx / (spec.rx * spec.rx * q);
            const double gy = -spec.rz * dy / (spec.ry * spec.ry * q);
            b.gradient.gx[i] = static_cast<float>(gx);
            b.gradient.gy[i] = static_cast<float>(gy);
            b.period_truth.at(x, y) =
                static_cast<float>(spec.p0 / std::sqrt(1.0 + gx * gx + gy * gy));

            const double r = std::hypot(dx, dy);
            double s;
            if (spec.shape == Shape::Hemisphere) {
                s = spec.rx * std::asin(std::min(1.0, r / spec.rx));
            } else {
                const double k = r > 0 ? (dx * dx / (spec.rx * spec.rx) +
                                          dy * dy / (spec.ry * spec.ry)) /
                                             (r * r)
                                       : 0.0;
                s = radial_arc_length(r, k, spec.rz);
            }
            b.image.at(x, y) =
                static_cast<float>(0.5 + 0.5 * std::cos(2.0 * kPi * s / spec.p0));
        }
    return b;
}

ThreeViewPhantom generate_three_views(const PhantomSpec& spec,
                                      double view_angle_deg) {
    spec.validate();
    if (spec.shape != Shape::Ellipsoid)
        throw PreconditionError("generate_three_views: ellipsoid shape required");
    const int w = spec.width, h = spec.height;
    const int cx = w / 2, cy = h / 2;

    ThreeViewPhantom out{Mask(w, h), Mask(w, h), Mask(w, h),
                         DepthMap(w, h), DepthMap(w, h), DepthMap(w, h)};
    struct View {
        Mask* m;
        DepthMap* z;
        double theta;
    };
    View views[3] = {
        {&out.m_front, &out.z_front, 0.0},
        {&out.m_right, &out.z_right, deg2rad(view_angle_deg)},
        {&out.m_left, &out.z_left, -deg2rad(view_angle_deg)},
    };

    for (int y = 0; y < h; ++y) {
        const double dy = y - cy;
        const double qy2 = 1.0 - (dy * dy) / (spec.ry * spec.ry);
        if (qy2 <= 0)
            continue;
        const double a = spec.rx * std::sqrt(qy2);
        const double bb = spec.rz * std::sqrt(qy2);
        for (auto& view : views) {
            const double c = std::cos(view.theta), s = std::sin(view.theta);
            const double A = (c * c) / (a * a) + (s * s) / (bb * bb);
            const double B = c * s * (1.0 / (a * a) - 1.0 / (bb * bb));
            const double C = (s * s) / (a * a) + (c * c) / (bb * bb);
            for (int x = 0; x < w; ++x) {
                const double xp = x - cx;
                const double disc = B * B * xp * xp - C * (A * xp * xp - 1.0);
                if (disc <= 0)
                    continue;
                view.m->set(x, y, true);
                view.z->at(x, y) =
                    static_cast<float>((-B * xp + std::sqrt(disc)) / C);
            }
        }
    }
    return out;
}

} // namespace fingeo::phantom
