#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "ptai/core/error.hpp"
#include "ptai/ot/sliced.hpp"

using namespace ptai;
using namespace ptai::ot;

namespace {

Matrix gaussian(RngStream& r, std::size_t n, std::size_t d) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = r.normal();
    return m;
}

Matrix column(const std::vector<double>& v) { return Matrix(v.size(), 1, v); }

OtConfig cfg_with(std::size_t projections, int p = 2) {
    OtConfig c;
    c.num_projections = projections;
    c.order = p;
    return c;
}

}  // namespace

TEST_CASE("wasserstein_1d examples") {
    CHECK(wasserstein_1d(std::vector<double>{0, 1}, std::vector<double>{0, 1}, 2) == 0.0);
    CHECK(wasserstein_1d(std::vector<double>{0, 1}, std::vector<double>{2, 3}, 2) ==
          doctest::Approx(oracle::assignment_wasserstein(column({0, 1}), column({2, 3}), 2)));
    CHECK(wasserstein_1d(std::vector<double>{0, 1}, std::vector<double>{2, 3}, 2) == doctest::Approx(2.0));
    CHECK(wasserstein_1d(std::vector<double>{0, 0, 0}, std::vector<double>{3, 3, 3}, 1) == doctest::Approx(3.0));
    CHECK_THROWS_AS(wasserstein_1d(std::vector<double>{0, 1}, std::vector<double>{0}, 2), Error);
}

TEST_CASE("exact small solver") {
    RngStream r(3);
    const Matrix a = gaussian(r, 6, 3);
    CHECK(exact_wasserstein_small(EmpiricalDistribution(a), EmpiricalDistribution(a), 2) == 0.0);

    const Matrix x = gaussian(r, 4, 2), y = gaussian(r, 4, 2);
    for (int p : {1, 2})
        CHECK(std::abs(exact_wasserstein_small(EmpiricalDistribution(x), EmpiricalDistribution(y), p) -
                       oracle::assignment_wasserstein(x, y, p)) < 1e-12);

    try {
        exact_wasserstein_small(EmpiricalDistribution(gaussian(r, 11, 1)), EmpiricalDistribution(gaussian(r, 11, 1)), 2);
        FAIL("expected size-limit error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::size_limit);
    }
}

TEST_CASE("sliced wasserstein basics") {
    RngStream r(9);
    const Matrix a = gaussian(r, 20, 5), b = gaussian(r, 20, 5);
    CHECK(sliced_wasserstein(EmpiricalDistribution(a), EmpiricalDistribution(a), cfg_with(64), RngStream(1)) == 0.0);

    const Matrix x = gaussian(r, 9, 1), y = gaussian(r, 9, 1);
    std::vector<double> xs(x.data(), x.data() + 9), ys(y.data(), y.data() + 9);
    for (std::size_t L : {1, 7, 100})
        CHECK(std::abs(sliced_wasserstein(EmpiricalDistribution(x), EmpiricalDistribution(y), cfg_with(L),
                                          RngStream(L)) -
                       wasserstein_1d(xs, ys, 2)) < 1e-12);

    // seeded result is reproducible
    const double v1 = sliced_wasserstein(EmpiricalDistribution(a), EmpiricalDistribution(b), cfg_with(32), RngStream(4));
    const double v2 = sliced_wasserstein(EmpiricalDistribution(a), EmpiricalDistribution(b), cfg_with(32), RngStream(4));
    CHECK(v1 == v2);

    try {
        sliced_wasserstein(EmpiricalDistribution(a), EmpiricalDistribution(gaussian(r, 20, 4)), cfg_with(8), RngStream(1));
        FAIL("expected dimension error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_input);
    }
}

TEST_CASE("sliced point masses: E[(theta.v)^2] = |v|^2/d, checked by quadrature in 2D") {
    // Quadrature of cos^2 over the circle gives 1/2, the d = 2 value of 1/d.
    const int m = 100000;
    double q = 0.0;
    for (int i = 0; i < m; ++i) {
        const double t = 2 * M_PI * (i + 0.5) / m;
        q += std::cos(t) * std::cos(t);
    }
    CHECK(q / m == doctest::Approx(0.5).epsilon(1e-9));

    Matrix x(1, 2), y(1, 2);
    x(0, 0) = 1.0;
    y(0, 1) = 2.0;
    const double sw = sliced_wasserstein(EmpiricalDistribution(x), EmpiricalDistribution(y), cfg_with(4096), RngStream(2));
    CHECK(sw == doctest::Approx(std::sqrt(5.0 / 2.0)).epsilon(0.05));
}

TEST_CASE("sliced dependence") {
    RngStream r(21);
    const std::size_t n = 512;
    const Matrix x = gaussian(r, n, 2);
    OtConfig c = cfg_with(128);

    SUBCASE("constant z block sits at the noise floor") {
        const Matrix z(n, 2, 0.5);
        const double v = sliced_dependence(EmpiricalDistribution(hstack(x, z)), 2, c, RngStream(1));
        const Matrix zi = gaussian(r, n, 2);
        const double floor = sliced_dependence(EmpiricalDistribution(hstack(x, zi)), 2, c, RngStream(1));
        CHECK(v <= floor);
    }
    SUBCASE("dependent pairs exceed 5x the independent value") {
        const double dep = sliced_dependence(EmpiricalDistribution(hstack(x, x)), 2, c, RngStream(1));
        const double ind = sliced_dependence(EmpiricalDistribution(hstack(x, gaussian(r, n, 2))), 2, c, RngStream(1));
        CHECK(dep > 0.0);
        CHECK(dep > 5.0 * ind);
    }
    SUBCASE("row order does not matter") {
        const Matrix joint = hstack(x, gaussian(r, n, 2));
        auto perm = r.permutation(n);
        const Matrix shuffled = gather_rows(joint, perm);
        CHECK(sliced_dependence(EmpiricalDistribution(joint), 2, c, RngStream(5)) ==
              sliced_dependence(EmpiricalDistribution(shuffled), 2, c, RngStream(5)));
    }
    SUBCASE("fewer than two rows") {
        try {
            sliced_dependence(EmpiricalDistribution(Matrix(1, 4)), 2, c, RngStream(1));
            FAIL("expected degenerate error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::degenerate);
        }
    }
}

TEST_CASE("sliced correlation") {
    RngStream r(31);
    const Matrix x = gaussian(r, 512, 4);
    const OtConfig c = cfg_with(256);
    const auto self = sliced_correlation(x, x, c, RngStream(1));
    CHECK_FALSE(self.degenerate);
    CHECK(self.value >= 0.9);
    const auto collapsed = sliced_correlation(x, Matrix(512, 4, 0.0), c, RngStream(1));
    CHECK(collapsed.degenerate);
    CHECK(collapsed.value == 0.0);
}

TEST_CASE("sliced correlation calibration curve: SC(x, x) approaches 1") {
    RngStream r(41);
    double prev_gap = 1.0;
    for (std::size_t n : {64, 256, 1024}) {
        const Matrix x = gaussian(r, n, 4);
        double gap = 0.0;
        for (std::size_t L : {32, 128, 512}) gap = std::abs(1.0 - sliced_correlation(x, x, cfg_with(L), RngStream(n + L)).value);
        MESSAGE("n=" << n << " |1 - SC| at L=512: " << gap);
        CHECK(gap < 0.15);
        prev_gap = gap;
    }
    CHECK(prev_gap < 0.1);
}
