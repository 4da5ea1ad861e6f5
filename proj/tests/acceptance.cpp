// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fingeo/lossmath.hpp"
#include "fingeo/metrics.hpp"
#include "fingeo/phantom.hpp"
#include "fingeo/preprocess.hpp"
#include "fingeo/silhouette.hpp"
#include "fingeo/surface.hpp"
#include "fingeo/texture.hpp"
#include "fingeo/unwarp.hpp"

namespace fs = std::filesystem;
using namespace fingeo;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool ok,
            const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << " ("
              << name << "): " << detail << "\n";
    if (!ok)
        ++failures;
}

Mask radius_mask(const Mask& base, double cx, double cy, double rmax) {
    Mask out(base.width, base.height);
    for (int y = 0; y < base.height; ++y)
        for (int x = 0; x < base.width; ++x)
            out.set(x, y, base.at(x, y) && std::hypot(x - cx, y - cy) <= rmax);
    return out;
}

// Mean estimated period over an annulus around (cx, cy); NaN when empty.
// With axis_sectors, only pixels within 15 degrees of a coordinate axis
// count, where the row/column arc-length parameterization is exact.
double ring_period(const PeriodMap& period, const Mask& mask, double cx,
                   double cy, double radius, bool axis_sectors = false) {
    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < period.height; ++y)
        for (int x = 0; x < period.width; ++x) {
            if (!mask.at(x, y) || period.at(x, y) <= 0.0f)
                continue;
            const double dx = x - cx, dy = y - cy;
            if (std::abs(std::hypot(dx, dy) - radius) > 1.5)
                continue;
            if (axis_sectors) {
                const double ang =
                    std::atan2(std::abs(dy), std::abs(dx)) * 180.0 / M_PI;
                if (ang > 15.0 && ang < 75.0)
                    continue;
            }
            sum += period.at(x, y);
            ++n;
        }
    return n ? sum / n : std::nan("");
}

silhouette::RowContour contour(int row, double cx, double w) {
    return {row, cx - 0.5 * (w - 1.0), cx + 0.5 * (w - 1.0)};
}

bool files_identical(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb)
        return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(a))
        names.push_back(e.path().filename());
    size_t count_b = 0;
    for (const auto& e : fs::directory_iterator(b)) {
        (void)e;
        ++count_b;
    }
    if (names.size() != count_b || names.empty())
        return false;
    for (const auto& n : names)
        if (!files_identical(a / n, b / n))
            return false;
    return true;
}

void criterion_1() {
    phantom::PhantomSpec spec;
    auto b = phantom::generate(spec);
    const auto t0 = std::chrono::steady_clock::now();
    auto zero = surface::find_zero_point(b.gradient, b.mask);
    auto z = surface::integrate_gradient(b.gradient, b.mask, zero);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const float pitch = kDefaultPitchMm;
    const float inner =
        pitch * metrics::rmse(z, b.depth, erode(b.mask, 3), metrics::RmseKind::Depth);
    const float full =
        pitch * metrics::rmse(z, b.depth, b.mask, metrics::RmseKind::Depth);
    const bool ok = inner <= 0.02f && full >= 10.0f * inner && secs < 1.0;
    std::ostringstream d;
    d << "hemisphere depth rmse " << inner << " mm margin-excluded, " << full
      << " mm with margin, " << secs << " s";
    report(1, "integration precision", ok, d.str());
}

void criterion_2() {
    const int n = 128;
    Mask mask(n, n, true);
    Mask inner = erode(mask, 3);
    std::vector<double (*)(double, double)> fields = {
        +[](double x, double y) { return 0.3 * x - 0.2 * y + 7.0; },
        +[](double x, double y) { return 0.002 * x * x - 0.001 * x * y + 40.0; },
        +[](double x, double y) {
            return 5e-6 * x * x * x + 3e-6 * y * y * y - 4e-6 * x * x * y +
                   0.004 * x * y + 0.1 * y;
        },
    };
    float worst = 0.0f;
    for (auto f : fields) {
        DepthMap z(n, n);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                z.at(x, y) = static_cast<float>(f(x, y));
        auto g = surface::depth_to_gradient(z, mask);
        auto zero = surface::find_zero_point(g, mask);
        auto back = surface::integrate_gradient(g, mask, zero);
        worst = std::max(worst,
                         metrics::rmse(back, z, inner, metrics::RmseKind::Depth));
    }
    std::ostringstream d;
    d << "worst polynomial round-trip rmse " << worst << " px";
    report(2, "gradient/depth round trip", worst <= 1e-3f, d.str());
}

void criterion_3() {
    phantom::PhantomSpec spec;
    auto b = phantom::generate(spec);
    const double R = 64.0, p0 = 10.0, cx = 80.0, cy = 80.0;

    auto raw_orient = texture::estimate_orientation_field(b.image, b.mask);
    auto raw_period = texture::estimate_period_map(b.image, b.mask, raw_orient.theta);
    const double raw60 = ring_period(raw_period, b.mask, cx, cy, 0.866 * R);

    auto zero = surface::find_zero_point(b.gradient, b.mask);
    auto coords = unwarp::arc_length_coords(b.gradient, b.mask, zero);
    auto unw = unwarp::unwarp_image(b.image, b.mask, coords, zero);
    const double ax = zero.first - unw.offset_x;
    const double ay = zero.second - unw.offset_y;
    auto orient = texture::estimate_orientation_field(unw.image, unw.mask);
    auto period = texture::estimate_period_map(unw.image, unw.mask, orient.theta);

    bool ok = std::abs(raw60 - 5.0) <= 0.3;
    std::ostringstream d;
    d << "raw period at 60-degree slant " << raw60 << " px; unwarped";
    for (double s : {12.0, 24.0, 36.0, 48.0, 60.0}) {
        const double p = ring_period(period, unw.mask, ax, ay, s, true);
        d << " " << p;
        ok = ok && std::isfinite(p) && std::abs(p - p0) <= 0.05 * p0;
    }
    d << " px at arc radii 12..60";
    report(3, "unwarp removes foreshortening", ok, d.str());
}

void criterion_4() {
    phantom::PhantomSpec spec;
    auto b = phantom::generate(spec);
    auto coords = unwarp::arc_length_coords(b.gradient, b.mask, {80, 80});
    const double expected = 64.0 * std::asin(0.5);
    const double got = coords.u.at(80 + 32, 80);
    std::ostringstream d;
    d << "u(r=32) = " << got << " px, expected " << expected;
    report(4, "arc-length exactness", std::abs(got - expected) <= 0.05, d.str());
}

void criterion_5() {
    phantom::PhantomSpec spec;
    spec.shape = phantom::Shape::Ellipsoid;
    spec.rx = 60.0;
    spec.rz = 45.0;
    auto views = phantom::generate_three_views(spec);

    // Forward-project the analytic per-row sections into subpixel contours.
    std::vector<silhouette::RowEllipse> truth;
    std::vector<silhouette::RowContour> front, right, left;
    for (int y = 0; y < 160; ++y) {
        const double q2 = 1.0 - (y - 80.0) * (y - 80.0) / (64.0 * 64.0);
        if (q2 <= 0.01)
            continue;
        const double a = 60.0 * std::sqrt(q2), b = 45.0 * std::sqrt(q2);
        truth.push_back({y, a, b, 0.0, 80.0});
        front.push_back(contour(y, 80.0, 2.0 * a));
        const double half = std::sqrt((a * a + b * b) / 2.0);
        right.push_back(contour(y, 80.0, 2.0 * half));
        left.push_back(contour(y, 80.0, 2.0 * half));
    }
    auto fitted = silhouette::fit_row_ellipses(front, right, left);
    double worst_rel = 0.0;
    for (size_t i = 0; i < fitted.size(); ++i) {
        worst_rel = std::max(worst_rel,
                             std::abs(fitted[i].a - truth[i].a) / truth[i].a);
        worst_rel = std::max(worst_rel,
                             std::abs(fitted[i].b - truth[i].b) / truth[i].b);
    }

    auto built = silhouette::build_three_view_depths(fitted, 160, 160);
    Mask common(160, 160);
    for (int y = 0; y < 160; ++y)
        for (int x = 0; x < 160; ++x)
            common.set(x, y, built.m_front.at(x, y) && views.m_front.at(x, y));
    const float z_rmse = metrics::rmse(built.z_front, views.z_front,
                                       erode(common, 3), metrics::RmseKind::Depth);
    const bool ok =
        fitted.size() == truth.size() && worst_rel <= 0.02 && z_rmse <= 0.5f;
    std::ostringstream d;
    d << fitted.size() << " rows, worst a/b relative error " << worst_rel
      << ", front depth rmse " << z_rmse << " px";
    report(5, "silhouette inversion", ok, d.str());
}

void criterion_6() {
    bool ok = true;
    std::ostringstream d;

    OrientationDistribution onehot(6, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x)
            onehot.at(42, x, y) = 1.0f;
    Mask m6(6, 6, true);
    ok = ok && std::abs(loss::orientation_loss(onehot, onehot, m6, 1.0f)) <= 1e-5f;
    PeriodMap p6(6, 6, 9.0f);
    ok = ok && loss::period_loss(p6, p6, m6, 1.0f) <= 1e-6f;
    GradientMap g6(6, 6);
    ok = ok && loss::gradient_loss(g6, g6, m6, 1.0f, 0.5f) <= 1e-6f;

    GradientMap gw(1, 1);
    gw.gx[0] = 0.3f;
    gw.gy[0] = 0.4f; // norm 0.5
    const double w = loss::gradient_weight(gw, 0.5f).at(0, 0);
    ok = ok && std::abs(w - std::exp(-1.0)) <= 1e-6;
    d << "gradient_weight(0.5, 0.5) = " << w << "; ";

    loss::LossParams params;
    const float one = loss::total_loss(0.25f, 0.5f, 0.125f, params);
    const float two = loss::total_loss(0.5f, 1.0f, 0.25f, params);
    ok = ok && std::abs(two - 2.0f * one) <= 1e-6f * two;

    std::mt19937 rng(20260823);
    std::uniform_int_distribution<int> bin(0, kOrientationBins - 1);
    std::uniform_real_distribution<float> uni(0.01f, 1.0f);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    Mask m4(4, 4, true);
    int nonneg = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        OrientationDistribution t(4, 4), p(4, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                t.at(bin(rng), x, y) = 1.0f;
                float sum = 0.0f;
                for (int i = 0; i < p.n_bins; ++i) {
                    p.at(i, x, y) = uni(rng);
                    sum += p.at(i, x, y);
                }
                for (int i = 0; i < p.n_bins; ++i)
                    p.at(i, x, y) /= sum;
            }
        PeriodMap pt(4, 4, 10.0f), pp(4, 4);
        GradientMap gt(4, 4), gp(4, 4);
        for (int i = 0; i < 16; ++i) {
            pp.v[static_cast<size_t>(i)] = 10.0f + gauss(rng);
            gt.gx[static_cast<size_t>(i)] = gauss(rng);
            gt.gy[static_cast<size_t>(i)] = gauss(rng);
            gp.gx[static_cast<size_t>(i)] = gauss(rng);
            gp.gy[static_cast<size_t>(i)] = gauss(rng);
        }
        const float lo = loss::orientation_loss(p, t, m4, 1.0f);
        const float lp = loss::period_loss(pp, pt, m4, 1.0f);
        const float lg = loss::gradient_loss(gp, gt, m4, 1.0f, 0.5f);
        if (lo >= 0.0f && lp >= 0.0f && lg >= 0.0f &&
            loss::total_loss(lo, lp, lg, params) >= 0.0f)
            ++nonneg;
    }
    ok = ok && nonneg == 1000;
    d << nonneg << "/1000 random perturbations non-negative";
    report(6, "loss suite", ok, d.str());
}

void criterion_7() {
    Mask m(4, 4, true);
    OrientationField a(4, 4, 179.0f), b(4, 4, 1.0f);
    const float wrap = metrics::orientation_error(a, b, m);

    DepthMap truth(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            truth.at(x, y) = 0.1f * x + 0.2f * y;
    DepthMap pred = truth;
    for (float& v : pred.v)
        v += 5.0f;
    const float shifted = metrics::rmse(pred, truth, m, metrics::RmseKind::Depth);

    GradientMap gt(4, 4), gp(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            gt.gx[gt.idx(x, y)] = 0.1f * x;
            gp.gx[gp.idx(x, y)] = 0.1f * x + 0.03f * (x + y);
        }
    metrics::RmseOptions opts;
    opts.weighted = true;
    opts.sigma = 1e6f;
    opts.truth_gradient = &gt;
    const float weighted = metrics::rmse(gp, gt, m, opts);
    const float plain = metrics::rmse(gp, gt, m);

    const bool ok = std::abs(wrap - 2.0f) <= 1e-4f && shifted <= 1e-5f &&
                    std::abs(weighted - plain) <= 1e-4f * plain;
    std::ostringstream d;
    d << "wraparound error " << wrap << " deg, offset-invariant depth rmse "
      << shifted << ", weighted/unweighted ratio " << weighted / plain;
    report(7, "metric suite", ok, d.str());
}

void criterion_8() {
    phantom::PhantomSpec spec;
    auto b = phantom::generate(spec);
    auto orient = texture::estimate_orientation_field(b.image, b.mask);
    auto period = texture::estimate_period_map(b.image, b.mask, orient.theta);
    auto region = preprocess::center_region(b.mask);
    const float p0 = preprocess::mean_ridge_period(b.image, region, orient.theta);
    auto grad = texture::gradient_from_texture(period, orient.theta, b.mask, p0);
    auto zero = surface::find_zero_point(grad, b.mask);
    auto rough = surface::integrate_gradient(grad, b.mask, zero);
    auto depth = surface::mls_smooth(rough, b.mask);
    // Slant <= 50 degrees on the R = 64 hemisphere: radius <= 64 sin(50).
    Mask scored = radius_mask(b.mask, 80.0, 80.0, 64.0 * std::sin(50.0 * M_PI / 180.0));
    const float rmse_mm = kDefaultPitchMm * metrics::rmse(depth, b.depth, scored,
                                                          metrics::RmseKind::Depth);
    std::ostringstream d;
    d << "texture-only depth rmse " << rmse_mm << " mm over the low-slant region";
    report(8, "end-to-end texture pipeline", rmse_mm <= 0.3f, d.str());
}

void criterion_9() {
    const fs::path base = fs::temp_directory_path() / "fingeo_acceptance";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base / "in");
    const std::string cli = FINGEO_CLI_PATH;
    auto run = [&](const std::string& args) {
        return std::system((cli + " " + args + " >/dev/null 2>&1").c_str()) == 0;
    };
    bool ok = run("phantom --out-dir " + (base / "ph").string());
    for (const char* name : {"a.pgm", "b.pgm", "c.pgm", "d.pgm"})
        if (ok)
            fs::copy_file(base / "ph" / "image.pgm", base / "in" / name);
    for (const char* tag : {"run1", "run2"})
        ok = ok && run("pipeline --in " + (base / "in").string() + " --out-dir " +
                       (base / tag).string());
    ok = ok && run("pipeline --jobs 4 --in " + (base / "in").string() +
                   " --out-dir " + (base / "run4").string());
    ok = ok && dirs_identical(base / "run1", base / "run2") &&
         dirs_identical(base / "run1", base / "run4");
    report(9, "determinism", ok,
           "repeated pipeline runs (serial and --jobs 4) byte-identical");
    fs::remove_all(base, ec);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    return failures == 0 ? 0 : 1;
}
