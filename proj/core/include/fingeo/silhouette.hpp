#pragma once

#include <vector>

#include "fingeo/grid.hpp"

namespace fingeo::silhouette {

/// Per-row silhouette extent in pixel columns.
struct RowContour {
    int row = 0;
    double left = 0.0;
    double right = 0.0;

    double midpoint() const { return 0.5 * (left + right); }
    double width() const { return right - left + 1.0; }
};

/// Per-row cross-section ellipse: semi-major a (lateral), semi-minor b
/// (depth), center depth offset c_z, and the lateral center column cx.
struct RowEllipse {
    int row = 0;
    double a = 0.0;
    double b = 0.0;
    double c_z = 0.0;
    double cx = 0.0;
};

/// Leftmost/rightmost foreground columns per row; when an image is supplied
/// the boundary is refined to subpixel by interpolating the intensity
/// crossing at `threshold`. Rows narrower than 4 px are dropped.
std::vector<RowContour> extract_contours(const Mask& mask,
                                         const GrayImage* image = nullptr,
                                         float threshold = 0.5f);

struct FitReport {
    size_t fitted_rows = 0;
    size_t skipped_rows = 0; // side view narrower than geometrically possible
};

/// Inverts the 45-degree projection model per row:
/// a = d_F/2, b = sqrt(2*(d/2)^2 - a^2) averaged over both side views,
/// c_z from the side-view midpoint shifts relative to the front midpoint.
std::vector<RowEllipse> fit_row_ellipses(const std::vector<RowContour>& front,
                                         const std::vector<RowContour>& right,
                                         const std::vector<RowContour>& left,
                                         FitReport* report = nullptr);

/// Critical angle atan(b^2/a^2) separating occluded from visible arc, degrees.
double occlusion_angle(double a, double b);

struct ThreeViewDepths {
    DepthMap z_front, z_right, z_left;
    Mask m_front, m_right, m_left;
};

/// Rasterizes the per-row ellipse model as seen from the front and from
/// viewpoints rotated +/-view_angle_deg about the vertical axis; each depth
/// map is min-aligned to 0 within its mask.
ThreeViewDepths build_three_view_depths(const std::vector<RowEllipse>& ellipses,
                                        int width, int height,
                                        double view_angle_deg = 45.0);

} // namespace fingeo::silhouette
