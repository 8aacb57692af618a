#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "ptai/augment/augment.hpp"
#include "ptai/core/error.hpp"

using namespace ptai;
using namespace ptai::augment;

namespace {

RasterImage blob(std::size_t n, double sigma) {
    RasterImage img(n, n);
    const double c = n / 2.0;
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double dx = x + 0.5 - c, dy = y + 0.5 - c;
            img.at(y, x) = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
        }
    return img;
}

double total(const RasterImage& img) {
    double s = 0;
    for (double v : img.pixels) s += v;
    return s;
}

double max_err(const RasterImage& a, const RasterImage& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
    return m;
}

}  // namespace

TEST_CASE("parameter sampling") {
    SUBCASE("identity draws nothing") {
        RngStream r(1);
        const auto p = sample_params(default_spec(AugKind::identity), r);
        CHECK(p.kind == AugKind::identity);
        CHECK(p.degrees == 0.0);
        CHECK(r.counter() == 0);
    }
    SUBCASE("rotation draws are reproducible and uniform") {
        RngStream a(3), b(3);
        CHECK(sample_params(default_spec(AugKind::rotation), a).degrees ==
              sample_params(default_spec(AugKind::rotation), b).degrees);
        RngStream r(4);
        double sum = 0, lo = 1e9, hi = -1e9;
        for (int i = 0; i < 10000; ++i) {
            const double d = sample_params(default_spec(AugKind::rotation), r).degrees;
            sum += d;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        CHECK(std::abs(sum / 1e4) < 3.0);
        CHECK(lo < -170.0);
        CHECK(hi > 170.0);
    }
    SUBCASE("names") {
        CHECK(parse_composite("rotation").size() == 1);
        const auto c = parse_composite("composite:rotation,noise");
        REQUIRE(c.size() == 2);
        CHECK(c[1].kind == AugKind::gaussian_noise);
        CHECK_THROWS_AS(parse_composite("sepia"), Error);
    }
    SUBCASE("ensemble weights") {
        const auto e = AugmentationEnsemble::two_element(parse_composite("rotation"), 3);
        CHECK(e.weights[0] == doctest::Approx(0.25));
        CHECK(e.weights[1] == doctest::Approx(0.75));
        RngStream r(1);
        CHECK(e.sample_entry(r)[0].kind == AugKind::rotation);
        CHECK(AugmentationEnsemble::identity_only().identity_only_ensemble());
    }
}

TEST_CASE("rotation") {
    const RasterImage b = blob(24, 4.0);
    CHECK(apply_rotation(b, 0.0) == b);

    RasterImage q(2, 2);
    q.pixels = {0.1, 0.2, 0.3, 0.4};  // [[a, b], [c, d]]
    CHECK(apply_rotation(q, 90.0).pixels == std::vector<double>{0.2, 0.4, 0.1, 0.3});

    const RasterImage back = apply_rotation(apply_rotation(b, 37.0), -37.0);
    double mae = 0;
    for (std::size_t i = 0; i < b.size(); ++i) mae += std::abs(back.pixels[i] - b.pixels[i]);
    CHECK(mae / b.size() < 0.05);
}

TEST_CASE("affine") {
    const RasterImage b = blob(16, 3.0);
    CHECK(max_err(apply_affine(b, 0, 0, 0, 1, 0), b) == 0.0);

    RasterImage dot(8, 8);
    dot.at(3, 1) = 1.0;
    const RasterImage moved = apply_affine(dot, 0, 0.5, 0, 1, 0);
    CHECK(moved.at(3, 5) == doctest::Approx(1.0));
    CHECK(total(moved) == doctest::Approx(1.0));

    RasterImage block(16, 16);
    for (std::size_t y = 7; y < 9; ++y)
        for (std::size_t x = 7; x < 9; ++x) block.at(y, x) = 1.0;
    const RasterImage big = apply_affine(block, 0, 0, 0, 2.0, 0);
    CHECK(total(big) == doctest::Approx(16.0).epsilon(0.15));
    CHECK(std::count_if(big.pixels.begin(), big.pixels.end(), [](double v) { return v > 0.5; }) == 16);

    try {
        apply_affine(b, 0, 0, 0, 1e-9, 0);
        FAIL("expected degenerate transform");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
    }
}

TEST_CASE("gaussian noise") {
    const RasterImage b = blob(8, 2.0);
    CHECK(apply_gaussian_noise(b, 0.0, 0.0, RngStream(1)) == b);
    const RasterImage zero(100, 1000);
    const RasterImage n = apply_gaussian_noise(zero, 0.0, 1.0, RngStream(2));
    double m = 0, m2 = 0;
    for (double v : n.pixels) {
        m += v;
        m2 += v * v;
    }
    m /= n.size();
    CHECK(std::abs(m) < 0.02);
    CHECK(std::abs(std::sqrt(m2 / n.size() - m * m) - 1.0) < 0.02);
    CHECK(apply_gaussian_noise(b, 0.0, 1.0, RngStream(3)) == apply_gaussian_noise(b, 0.0, 1.0, RngStream(3)));
}

TEST_CASE("resized crop") {
    const RasterImage b = blob(12, 3.0);
    CHECK(max_err(apply_resized_crop(b, 1.0, 1.0, 0.0, 0.0), b) < 1e-6);

    const RasterImage flat(10, 10, 1, 0.4);
    CHECK(max_err(apply_resized_crop(flat, 0.25, 1.0, 0.5, 0.5), flat) == 0.0);

    RasterImage checker(8, 8);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 0; x < 8; ++x) checker.at(y, x) = ((y / 4) + (x / 4)) % 2 ? 0.9 : 0.1;
    const RasterImage quarter = apply_resized_crop(checker, 0.25, 1.0, 0.0, 0.0);
    CHECK(max_err(quarter, RasterImage(8, 8, 1, 0.1)) == 0.0);
}

TEST_CASE("chains are deterministic") {
    const RasterImage b = blob(16, 3.0);
    const auto chain = parse_composite("composite:affine,noise");
    RngStream r1(8), r2(8);
    CHECK(apply_chain(chain, b, r1) == apply_chain(chain, b, r2));
}
