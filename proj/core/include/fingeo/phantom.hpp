#pragma once

#include "fingeo/grid.hpp"

namespace fingeo::phantom {

enum class Shape { Hemisphere, Ellipsoid };

/// Analytic synthetic finger: a ridged dome with exact depth, gradient,
/// and period ground truth, projected orthographically into the grid.
struct PhantomSpec {
    Shape shape = Shape::Hemisphere;
    double rx = 64.0; // lateral semi-axis along x, px
    double ry = 64.0; // lateral semi-axis along y, px
    double rz = 64.0; // depth semi-axis, px
    double p0 = 10.0; // ridge period on the surface, px
    int width = 160;
    int height = 160;

    /// radii > 0, p0 >= 4, projected outline inside the grid with >= 8 px
    /// margin. Throws PreconditionError otherwise.
    void validate() const;
};

struct PhantomBundle {
    GrayImage image;
    Mask mask;
    DepthMap depth;
    GradientMap gradient;
    PeriodMap period_truth;
};

/// Top-view orthographic projection. Ridge intensity is
/// 0.5 + 0.5*cos(2*pi*s/p0) with s the surface arc length from the apex
/// along the radial direction; the projected period is p0*cos(slant).
/// The apex sits at the integer pixel (width/2, height/2).
PhantomBundle generate(const PhantomSpec& spec);

struct ThreeViewPhantom {
    Mask m_front, m_right, m_left;
    DepthMap z_front, z_right, z_left;
};

/// Analytic silhouettes and depth maps of the ellipsoid observed from
/// 0 and +/-view_angle_deg about the vertical axis, orthographic.
ThreeViewPhantom generate_three_views(const PhantomSpec& spec,
                                      double view_angle_deg = 45.0);

} // namespace fingeo::phantom
