#include <doctest.h>

#include <cmath>
#include <random>

#include "fingeo/phantom.hpp"
#include "fingeo/texture.hpp"

using namespace fingeo;

namespace {

constexpr double kPi = 3.14159265358979323846;

GrayImage grating(int w, int h, double period, double modulation_deg) {
    GrayImage img(w, h);
    const double c = std::cos(modulation_deg * kPi / 180.0);
    const double s = std::sin(modulation_deg * kPi / 180.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = static_cast<float>(
                0.5 + 0.45 * std::cos(2.0 * kPi * (x * c + y * s) / period));
    return img;
}

double angular_diff(double a, double b) {
    double d = std::abs(a - b);
    d = std::fmod(d, 180.0);
    return std::min(d, 180.0 - d);
}

} // namespace

TEST_CASE("orientation of a vertical grating is 90 degrees") {
    GrayImage img = grating(128, 128, 10.0, 0.0); // ridges along y
    Mask mask(128, 128, true);
    auto est = texture::estimate_orientation_field(img, mask);
    for (int y = 16; y < 112; y += 8)
        for (int x = 16; x < 112; x += 8) {
            CHECK(angular_diff(est.theta.at(x, y), 90.0) <= 1.0);
            CHECK(est.coherence.at(x, y) >= 0.95f);
        }
}

TEST_CASE("orientation follows a rotated grating") {
    GrayImage img = grating(128, 128, 10.0, 135.0); // ridges at 45 degrees
    Mask mask(128, 128, true);
    auto est = texture::estimate_orientation_field(img, mask);
    for (int y = 16; y < 112; y += 8)
        for (int x = 16; x < 112; x += 8)
            CHECK(angular_diff(est.theta.at(x, y), 45.0) <= 1.0);
}

TEST_CASE("white noise has low coherence") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<float> uni(0.0f, 1.0f);
    double sum = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        GrayImage img(32, 32);
        for (float& p : img.pixels)
            p = uni(rng);
        Mask mask(32, 32, true);
        auto est = texture::estimate_orientation_field(img, mask, 16);
        sum += est.coherence.at(16, 16);
    }
    CHECK(sum / trials <= 0.2);
}

TEST_CASE("flat block yields coherence 0") {
    GrayImage img(64, 64, kDefaultPitchMm, 0.5f);
    Mask mask(64, 64, true);
    auto est = texture::estimate_orientation_field(img, mask);
    CHECK(est.coherence.at(32, 32) == 0.0f);
    CHECK(est.theta.at(32, 32) == 0.0f);
}

TEST_CASE("decode_orientation") {
    SUBCASE("one-hot distribution decodes to its bin") {
        OrientationDistribution d(1, 1);
        d.at(30, 0, 0) = 1.0f;
        auto dec = texture::decode_orientation(d);
        CHECK(dec.field.at(0, 0) == doctest::Approx(30.0).epsilon(1e-6));
        CHECK(dec.undefined_count == 0);
    }
    SUBCASE("equal mass at bins 40 and 50 averages to 45") {
        OrientationDistribution d(1, 1);
        d.at(40, 0, 0) = 0.5f;
        d.at(50, 0, 0) = 0.5f;
        auto dec = texture::decode_orientation(d);
        CHECK(dec.field.at(0, 0) == doctest::Approx(45.0).epsilon(1e-6));
    }
    SUBCASE("uniform distribution is undefined") {
        OrientationDistribution d(1, 1);
        for (int i = 0; i < d.n_bins; ++i)
            d.at(i, 0, 0) = 1.0f / d.n_bins;
        auto dec = texture::decode_orientation(d);
        CHECK(dec.undefined_count == 1);
        CHECK(dec.field.at(0, 0) == 0.0f);
    }
    SUBCASE("positive scaling does not change the decoded angle") {
        OrientationDistribution d(1, 1);
        d.at(70, 0, 0) = 0.25f;
        d.at(80, 0, 0) = 0.75f;
        auto base = texture::decode_orientation(d);
        for (int i = 0; i < d.n_bins; ++i)
            d.at(i, 0, 0) *= 7.0f;
        auto scaled = texture::decode_orientation(d);
        CHECK(scaled.field.at(0, 0) ==
              doctest::Approx(base.field.at(0, 0)).epsilon(1e-6));
    }
    SUBCASE("one-hot field survives a decode/re-encode round trip") {
        OrientationDistribution d(2, 2);
        const int bins[4] = {0, 17, 89, 179};
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x)
                d.at(bins[y * 2 + x], x, y) = 1.0f;
        auto dec = texture::decode_orientation(d);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) {
                const int bin = static_cast<int>(
                    std::lround(dec.field.at(x, y) * d.n_bins / 180.0)) % d.n_bins;
                CHECK(bin == bins[y * 2 + x]);
            }
    }
}

TEST_CASE("period map of a uniform grating") {
    GrayImage img = grating(128, 128, 9.0, 0.0);
    Mask mask(128, 128, true);
    OrientationField orient(128, 128, 90.0f);
    auto period = texture::estimate_period_map(img, mask, orient);
    for (int y = 20; y < 108; y += 6)
        for (int x = 20; x < 108; x += 6) {
            REQUIRE(period.at(x, y) != PeriodMap::kSentinel);
            CHECK(std::abs(period.at(x, y) - 9.0) <= 0.3);
        }
}

TEST_CASE("period map of the hemisphere shows foreshortening") {
    phantom::PhantomSpec spec; // R = 64, p0 = 10, 160x160
    auto b = phantom::generate(spec);
    auto est = texture::estimate_orientation_field(b.image, b.mask);
    auto period = texture::estimate_period_map(b.image, b.mask, est.theta);
    const int cx = 80, cy = 80;
    REQUIRE(period.at(cx, cy) != PeriodMap::kSentinel);
    CHECK(std::abs(period.at(cx, cy) - 10.0) <= 0.5);
    // r = 0.866 R: slant 60 degrees, projected period p0/2.
    const int xr = cx + static_cast<int>(std::lround(0.866 * 64.0));
    REQUIRE(period.at(xr, cy) != PeriodMap::kSentinel);
    CHECK(std::abs(period.at(xr, cy) - 5.0) <= 0.3);
}

TEST_CASE("constant image yields only sentinels") {
    GrayImage img(64, 64, kDefaultPitchMm, 0.5f);
    Mask mask(64, 64, true);
    OrientationField orient(64, 64, 90.0f);
    auto period = texture::estimate_period_map(img, mask, orient);
    for (float p : period.v)
        CHECK(p == PeriodMap::kSentinel);
}

TEST_CASE("gradient_from_texture closed form and sign convention") {
    const int n = 32;
    Mask mask(n, n, true);
    OrientationField orient(n, n, 90.0f); // ridges along y, normal along x
    PeriodMap period(n, n, 5.0f);
    period.at(n / 2, n / 2) = 10.0f; // period maximum = convexity anchor

    SUBCASE("p = p0 gives zero slope; p = p0/2 gives -sqrt(3) outward") {
        auto g = texture::gradient_from_texture(period, orient, mask, 10.0f);
        const size_t anchor = g.idx(n / 2, n / 2);
        CHECK(g.gx[anchor] == doctest::Approx(0.0));
        CHECK(g.gy[anchor] == doctest::Approx(0.0));
        const size_t right = g.idx(n / 2 + 5, n / 2);
        CHECK(g.gx[right] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-6));
        CHECK(g.gy[right] == doctest::Approx(0.0));
        const size_t left = g.idx(n / 2 - 5, n / 2);
        CHECK(g.gx[left] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
    }
    SUBCASE("p above p0 clamps to zero slant and is counted") {
        period.at(3, 3) = 12.0f;
        size_t clamped = 0;
        auto g = texture::gradient_from_texture(period, orient, mask, 10.0f, &clamped);
        CHECK(clamped == 1);
        CHECK(g.gx[g.idx(3, 3)] == 0.0f);
        CHECK(g.gy[g.idx(3, 3)] == 0.0f);
    }
    SUBCASE("slant magnitude is monotone non-increasing in p") {
        double prev = 1e9;
        for (float p = 4.0f; p <= 10.0f; p += 0.5f) {
            PeriodMap pm(n, n, p);
            pm.at(n / 2, n / 2) = 10.0f;
            auto g = texture::gradient_from_texture(pm, orient, mask, 10.0f);
            const double mag = g.norm(5, n / 2);
            CHECK(mag <= prev + 1e-9);
            prev = mag;
        }
    }
    SUBCASE("p0 must be positive") {
        CHECK_THROWS_AS(texture::gradient_from_texture(period, orient, mask, 0.0f),
                        UnitError);
    }
}

TEST_CASE("texture gradient points radially on the hemisphere") {
    phantom::PhantomSpec spec;
    auto b = phantom::generate(spec);
    auto est = texture::estimate_orientation_field(b.image, b.mask);
    auto period = texture::estimate_period_map(b.image, b.mask, est.theta);
    auto grad = texture::gradient_from_texture(period, est.theta, b.mask, 10.0f);
    const int cx = 80, cy = 80;
    int checked = 0;
    for (int y = 0; y < 160; y += 3)
        for (int x = 0; x < 160; x += 3) {
            if (!b.mask.at(x, y))
                continue;
            const double slant_deg =
                std::atan(static_cast<double>(b.gradient.norm(x, y))) * 180.0 / kPi;
            if (slant_deg < 10.0 || slant_deg > 60.0)
                continue;
            const double mag = grad.norm(x, y);
            if (mag < 1e-6)
                continue;
            // The estimated slope should point toward the apex (inward).
            const double rx = x - cx, ry = y - cy;
            const double rn = std::hypot(rx, ry);
            const double dot = (grad.gx[grad.idx(x, y)] * rx +
                                grad.gy[grad.idx(x, y)] * ry) /
                               (mag * rn);
            const double dev = std::acos(std::clamp(-dot, -1.0, 1.0)) * 180.0 / kPi;
            CHECK(dev <= 5.0);
            ++checked;
        }
    CHECK(checked > 200);
}
