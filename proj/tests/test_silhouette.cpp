#include <doctest.h>

#include <cmath>

#include "fingeo/silhouette.hpp"

using namespace fingeo;

namespace {

// Analytic contour with continuous full width `w` centered at `cx`,
// matching the pixel-count width convention (right - left + 1 = w).
silhouette::RowContour contour(int row, double cx, double w) {
    return {row, cx - 0.5 * (w - 1.0), cx + 0.5 * (w - 1.0)};
}

// Forward-projects per-row section ellipses (a lateral, b depth, center
// depth c_z) into front and +/-45 degree silhouette contours.
struct Projected {
    std::vector<silhouette::RowContour> front, right, left;
};

Projected project_rows(const std::vector<silhouette::RowEllipse>& rows) {
    Projected p;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const auto& e : rows) {
        p.front.push_back(contour(e.row, e.cx, 2.0 * e.a));
        const double half = std::sqrt((e.a * e.a + e.b * e.b) / 2.0);
        p.right.push_back(contour(e.row, e.cx + e.c_z * inv_sqrt2, 2.0 * half));
        p.left.push_back(contour(e.row, e.cx - e.c_z * inv_sqrt2, 2.0 * half));
    }
    return p;
}

Mask ellipse_mask(int w, int h, double cx, double cy, double a, double b) {
    Mask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = (x - cx) / a, v = (y - cy) / b;
            m.set(x, y, u * u + v * v < 1.0);
        }
    return m;
}

} // namespace

TEST_CASE("contours of a rasterized ellipse match analytic chords") {
    Mask m = ellipse_mask(160, 160, 79.5, 79.5, 50.0, 60.0);
    auto rows = silhouette::extract_contours(m);
    CHECK(rows.size() > 100);
    for (const auto& r : rows) {
        const double v = (r.row - 79.5) / 60.0;
        if (std::abs(v) > 0.95)
            continue;
        const double chord = 2.0 * 50.0 * std::sqrt(1.0 - v * v);
        CHECK(std::abs(r.width() - chord) <= 1.0);
        CHECK(r.midpoint() == doctest::Approx(79.5).epsilon(0.02));
    }
}

TEST_CASE("contours of a rectangle have constant width") {
    Mask m(64, 64);
    for (int y = 10; y < 54; ++y)
        for (int x = 20; x < 40; ++x)
            m.set(x, y, true);
    auto rows = silhouette::extract_contours(m);
    REQUIRE(rows.size() == 44);
    for (const auto& r : rows)
        CHECK(r.width() == doctest::Approx(20.0));
}

TEST_CASE("empty or sparse masks have insufficient contour") {
    Mask empty(64, 64);
    CHECK_THROWS_AS(silhouette::extract_contours(empty), InsufficientContourError);
    Mask narrow(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 30; x < 33; ++x) // all rows narrower than 4 px
            narrow.set(x, y, true);
    CHECK_THROWS_AS(silhouette::extract_contours(narrow), InsufficientContourError);
}

TEST_CASE("image intensities refine the boundary to subpixel") {
    Mask m(64, 64);
    GrayImage img(64, 64, kDefaultPitchMm, 0.0f);
    for (int y = 0; y < 64; ++y)
        for (int x = 20; x < 40; ++x) {
            m.set(x, y, true);
            img.at(x, y) = 1.0f;
        }
    // A half-intensity column just outside moves the crossing half a pixel out.
    for (int y = 0; y < 64; ++y)
        img.at(19, y) = 0.5f;
    auto rows = silhouette::extract_contours(m, &img, 0.75f);
    CHECK(rows.front().left == doctest::Approx(19.5));
    CHECK(rows.front().right == doctest::Approx(39.25)); // 1->0 crossing at 0.75
}

TEST_CASE("row ellipse inversion recovers the section from three views") {
    SUBCASE("circle sections") {
        std::vector<silhouette::RowEllipse> truth;
        for (int row = 0; row < 40; ++row)
            truth.push_back({row, 64.0, 64.0, 0.0, 80.0});
        auto p = project_rows(truth);
        CHECK(p.front.front().width() == doctest::Approx(128.0));
        CHECK(p.right.front().width() ==
              doctest::Approx(2.0 * std::sqrt((64.0 * 64.0 + 64.0 * 64.0) / 2.0)));
        auto fitted = silhouette::fit_row_ellipses(p.front, p.right, p.left);
        REQUIRE(fitted.size() == 40);
        for (const auto& e : fitted) {
            CHECK(e.a == doctest::Approx(64.0).epsilon(1e-9));
            CHECK(e.b == doctest::Approx(64.0).epsilon(1e-9));
            CHECK(e.c_z == doctest::Approx(0.0));
        }
    }
    SUBCASE("elongated sections with a depth offset") {
        std::vector<silhouette::RowEllipse> truth;
        for (int row = 0; row < 40; ++row)
            truth.push_back({row, 60.0, 45.0, 7.5, 80.0});
        auto p = project_rows(truth);
        CHECK(p.right.front().width() == doctest::Approx(106.066).epsilon(1e-4));
        silhouette::FitReport report;
        auto fitted = silhouette::fit_row_ellipses(p.front, p.right, p.left, &report);
        CHECK(report.fitted_rows == 40);
        CHECK(report.skipped_rows == 0);
        for (const auto& e : fitted) {
            CHECK(std::abs(e.a - 60.0) / 60.0 <= 1e-6);
            CHECK(std::abs(e.b - 45.0) <= 0.1);
            CHECK(e.c_z == doctest::Approx(7.5).epsilon(1e-6));
        }
    }
    SUBCASE("fewer than 32 common rows") {
        std::vector<silhouette::RowEllipse> truth;
        for (int row = 0; row < 20; ++row)
            truth.push_back({row, 30.0, 30.0, 0.0, 64.0});
        auto p = project_rows(truth);
        CHECK_THROWS_AS(silhouette::fit_row_ellipses(p.front, p.right, p.left),
                        InsufficientContourError);
    }
    SUBCASE("impossible side views are rejected in bulk") {
        std::vector<silhouette::RowEllipse> truth;
        for (int row = 0; row < 40; ++row)
            truth.push_back({row, 40.0, 30.0, 0.0, 64.0});
        auto p = project_rows(truth);
        // Shrink every side view below the geometric minimum a/sqrt(2).
        for (auto& r : p.right)
            r = contour(r.row, r.midpoint(), 40.0);
        for (auto& r : p.left)
            r = contour(r.row, r.midpoint(), 40.0);
        CHECK_THROWS_AS(silhouette::fit_row_ellipses(p.front, p.right, p.left),
                        ReconstructionError);
    }
}

TEST_CASE("occlusion angle") {
    CHECK(silhouette::occlusion_angle(10.0, 10.0) == doctest::Approx(45.0));
    CHECK(silhouette::occlusion_angle(2.0, 1.0) ==
          doctest::Approx(std::atan(0.25) * 180.0 / 3.14159265358979).epsilon(1e-6));
    double prev = 0.0;
    for (double b = 0.5; b <= 4.0; b += 0.5) {
        const double th = silhouette::occlusion_angle(2.0, b);
        CHECK(th > prev);
        prev = th;
    }
    CHECK_THROWS_AS(silhouette::occlusion_angle(0.0, 1.0), PreconditionError);
}

TEST_CASE("three-view depths of circular sections") {
    std::vector<silhouette::RowEllipse> rows;
    for (int row = 40; row < 120; ++row)
        rows.push_back({row, 30.0, 30.0, 0.0, 64.0});
    auto d = silhouette::build_three_view_depths(rows, 128, 160);

    SUBCASE("center column reaches the apex height above the rim") {
        float zmin = 1e9f, zmax = -1e9f;
        for (int y = 0; y < 160; ++y)
            for (int x = 0; x < 128; ++x)
                if (d.m_front.at(x, y)) {
                    zmin = std::min(zmin, d.z_front.at(x, y));
                    zmax = std::max(zmax, d.z_front.at(x, y));
                }
        CHECK(zmin == 0.0f); // min-aligned
        CHECK(d.z_front.at(64, 80) == zmax);
        // Apex of the circle profile: 30 * sqrt(1 - x'^2/a^2) at x' = 0.
        CHECK(zmax <= 30.0f);
        CHECK(zmax >= 20.0f);
    }
    SUBCASE("rotating a circle changes nothing") {
        CHECK(d.m_right.bits == d.m_front.bits);
        CHECK(d.m_left.bits == d.m_front.bits);
        for (size_t i = 0; i < d.z_front.v.size(); ++i) {
            CHECK(std::abs(d.z_right.v[i] - d.z_front.v[i]) <= 1e-3f);
            CHECK(std::abs(d.z_left.v[i] - d.z_front.v[i]) <= 1e-3f);
        }
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(silhouette::build_three_view_depths({}, 128, 160),
                        PreconditionError);
    }
}
