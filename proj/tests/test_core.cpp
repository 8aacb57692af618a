#include <cmath>
#include <vector>

#include "doctest.h"

#include "ptai/core/checksum.hpp"
#include "ptai/core/error.hpp"
#include "ptai/core/numeric.hpp"
#include "ptai/core/rng.hpp"

using namespace ptai;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::numerical;
}

}  // namespace

TEST_CASE("rng streams are reproducible and split independently") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream parent(42);
    const auto before = parent.counter();
    RngStream x = parent.split("x"), y = parent.split("y");
    CHECK(parent.counter() == before);
    CHECK(x.next_u64() != y.next_u64());
    CHECK(RngStream(1).split("k", 3).next_u64() == RngStream(1).split("k", 3).next_u64());
    CHECK(RngStream(1).split("k", 3).next_u64() != RngStream(1).split("k", 4).next_u64());
}

TEST_CASE("rng uniform and normal moments") {
    RngStream r(5);
    double su = 0, sn = 0, sn2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK_UNARY(u >= 0.0);
        CHECK_UNARY(u < 1.0);
        su += u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
    auto p = r.permutation(50);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(p[i] == i);
}

TEST_CASE("unit directions") {
    SUBCASE("1D rows are +-1") {
        RngStream r(7);
        const Matrix d = sample_unit_directions(r, 1, 1);
        CHECK(std::abs(d(0, 0)) == 1.0);
    }
    SUBCASE("rows have unit norm") {
        RngStream r(7);
        const Matrix d = sample_unit_directions(r, 1000, 3);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            const double n = std::sqrt(d(i, 0) * d(i, 0) + d(i, 1) * d(i, 1) + d(i, 2) * d(i, 2));
            CHECK(std::abs(n - 1.0) < 1e-12);
        }
    }
    SUBCASE("uniform on the circle") {
        RngStream r(7);
        const Matrix d = sample_unit_directions(r, 10000, 2);
        double mx = 0, my = 0;
        std::vector<int> hist(12, 0);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            mx += d(i, 0);
            my += d(i, 1);
            const double ang = std::atan2(d(i, 1), d(i, 0)) + M_PI;
            hist[std::min<std::size_t>(11, static_cast<std::size_t>(ang / (2 * M_PI) * 12))]++;
        }
        CHECK(std::hypot(mx / 1e4, my / 1e4) < 0.05);
        // chi-square over 12 bins, 11 dof; 0.999 quantile is 31.3
        double chi = 0;
        for (int h : hist) chi += (h - 10000.0 / 12) * (h - 10000.0 / 12) / (10000.0 / 12);
        CHECK(chi < 31.3);
    }
    SUBCASE("zero dimension") {
        RngStream r(7);
        CHECK(kind_of([&] { sample_unit_directions(r, 3, 0); }) == ErrorKind::invalid_dimension);
    }
}

TEST_CASE("argsort") {
    const std::vector<double> a{3.0, 1.0, 2.0};
    CHECK(argsort(a) == std::vector<std::size_t>{1, 2, 0});
    CHECK(argsort(std::vector<double>{}).empty());
    const std::vector<double> ties{2.0, 2.0, 1.0};
    CHECK(argsort(ties) == std::vector<std::size_t>{2, 0, 1});
    const std::vector<double> bad{1.0, NAN};
    CHECK(kind_of([&] { argsort(bad); }) == ErrorKind::invalid_input);
}

TEST_CASE("svd") {
    auto s = svd_full(Matrix::identity(3));
    CHECK(s.s == std::vector<double>{1, 1, 1});
    s = svd_full(Matrix::from_rows({{3, 0, 0}, {0, 2, 0}, {0, 0, 1}}));
    CHECK(s.s == std::vector<double>{3, 2, 1});

    RngStream r(11);
    Matrix a(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) a(i, j) = r.normal();
    s = svd_full(a);
    Matrix us = s.u;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) us(i, j) *= s.s[j];
    CHECK(max_abs_diff(matmul(us, s.vt), a) < 1e-10);

    Matrix bad = a;
    bad(2, 2) = INFINITY;
    CHECK(kind_of([&] { svd_full(bad); }) == ErrorKind::invalid_input);
}

TEST_CASE("crc32 matches the standard check value") {
    const std::string s = "123456789";
    const std::vector<std::uint8_t> bytes(s.begin(), s.end());
    CHECK(crc32(bytes) == 0xCBF43926u);
}

TEST_CASE("matrix helpers") {
    const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix b = Matrix::from_rows({{0, 1}, {1, 0}});
    CHECK(matmul(a, b) == Matrix::from_rows({{2, 1}, {4, 3}}));
    CHECK(matmul_nt(a, a) == matmul(a, transpose(a)));
    CHECK(matmul_tn(a, a) == matmul(transpose(a), a));
    const std::vector<std::size_t> idx{1, 1, 0};
    CHECK(gather_rows(a, idx) == Matrix::from_rows({{3, 4}, {3, 4}, {1, 2}}));
    CHECK(hstack(a, b).cols() == 4);
    CHECK(vstack(a, b).rows() == 4);
    CHECK(slice_cols(hstack(a, b), 2, 4) == b);
}
