#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "ptai/core/error.hpp"
#include "ptai/eval/metrics.hpp"
#include "ptai/eval/report.hpp"

using namespace ptai;
using namespace ptai::eval;
using fixture::gaussian;

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

std::vector<std::size_t> iota_sources(std::size_t n, std::size_t s) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < s; ++k) v.push_back(i);
    return v;
}

nn::ProbeHead constant_probe(std::size_t d, std::size_t k) {
    Matrix b(1, k);
    b(0, 0) = 1.0;
    return {nn::ProbeKind::linear, k, nn::Mlp({{Matrix(k, d), b}})};
}

}  // namespace

TEST_CASE("pair accuracy") {
    RngStream r(1);
    const Matrix x = gaussian(r, 40, 3);
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < 40; ++i) labels.push_back(i % 4);
    SUBCASE("identical views") {
        const Matrix w = gaussian(r, 4, 3);
        const nn::ProbeHead p{nn::ProbeKind::linear, 4, nn::Mlp({{w, Matrix(1, 4)}})};
        const auto acc = probe_pair_accuracy(p, nullptr, x, x, labels, iota_sources(40, 1));
        CHECK(acc.aug_acc == acc.clean_acc);
    }
    SUBCASE("constant prediction is chance level") {
        const auto acc = probe_pair_accuracy(constant_probe(3, 4), nullptr, x, x, labels, iota_sources(40, 1));
        CHECK(acc.clean_acc == doctest::Approx(25.0));
        CHECK(acc.aug_acc == doctest::Approx(25.0));
    }
    SUBCASE("adapter mapping views onto anchors") {
        // Two 1D blobs at -5 and 5. Views are the anchors shifted by +-20 in
        // a second coordinate that the adapter drops.
        Matrix clean(20, 2), aug(20, 2);
        std::vector<std::size_t> y;
        for (std::size_t i = 0; i < 20; ++i) {
            clean(i, 0) = (i % 2 ? 5.0 : -5.0) + 0.1 * r.normal();
            aug(i, 0) = clean(i, 0);
            aug(i, 1) = i % 3 ? 20.0 : -20.0;
            y.push_back(i % 2);
        }
        const auto adapter = fixture::linear_net(Matrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
        const nn::ProbeHead p{nn::ProbeKind::linear, 2, nn::Mlp({{Matrix::from_rows({{-1, 0}, {1, 0}}), Matrix(1, 2)}})};
        const auto acc = probe_pair_accuracy(p, &adapter, clean, aug, y, iota_sources(20, 1));
        CHECK(acc.clean_acc == 100.0);
        CHECK(acc.aug_acc == 100.0);
    }
    SUBCASE("label mismatch") {
        std::vector<std::size_t> short_labels(39, 0);
        CHECK(kind_of([&] { probe_pair_accuracy(constant_probe(3, 4), nullptr, x, x, short_labels, iota_sources(40, 1)); }) ==
              ErrorKind::invalid_input);
    }
}

TEST_CASE("structure report") {
    RngStream r(2);
    const Matrix x = gaussian(r, 60, 5);
    auto check_isometry = [](const StructureReport& s) {
        CHECK(std::abs(s.l1 - 1) < 1e-9);
        CHECK(std::abs(s.l2 - 1) < 1e-9);
        CHECK(std::abs(s.slope - 1) < 1e-9);
        CHECK(std::abs(s.intercept) < 1e-9);
        CHECK(std::abs(s.r2 - 1) < 1e-9);
        CHECK(s.rmsd < 1e-9);
        CHECK(s.nrmsd < 1e-9);
        CHECK(s.cvrmsd < 1e-9);
    };
    check_isometry(structure_report(fixture::identity_net(5), x, kDefaultPairBudget, RngStream(1)));
    const Matrix q = fixture::random_orthogonal(5, RngStream(3));
    check_isometry(structure_report(fixture::linear_net(q), x, kDefaultPairBudget, RngStream(1)));
    CHECK(structure_report(x, x, kDefaultPairBudget, RngStream(1)).pair_count == 60 * 59 / 2);

    const auto s2 = structure_report(x, 2.0 * x, kDefaultPairBudget, RngStream(1));
    double ms = 0;
    for (std::size_t i = 0; i < 60; ++i)
        for (std::size_t j = i + 1; j < 60; ++j) ms += oracle::sqdist(x, i, x, j);
    CHECK(std::abs(s2.slope - 2) < 1e-9);
    CHECK(std::abs(s2.r2 - 1) < 1e-9);
    CHECK(std::abs(s2.rmsd - std::sqrt(ms / (60 * 59 / 2))) < 1e-9);

    const auto sampled = structure_report(x, x, 500, RngStream(1));
    CHECK(sampled.pair_count == 500);
    CHECK(kind_of([] { structure_report(Matrix(5, 2, 1.0), Matrix(5, 2, 1.0), 100, RngStream(1)); }) ==
          ErrorKind::degenerate);
}

TEST_CASE("collision rate") {
    const Matrix clean = Matrix::from_rows({{0.0}, {10.0}});
    const std::vector<std::size_t> labels{0, 1}, src{0};
    CHECK(collision_rate(clean, labels, Matrix(1, 1, 7.0), src) == 1.0);
    CHECK(collision_rate(clean, labels, Matrix(1, 1, 4.0), src) == 0.0);
    CHECK(collision_rate(clean, labels, Matrix(1, 1, 5.0), src) == 0.0);  // ties do not collide

    RngStream r(4);
    const Matrix x = gaussian(r, 30, 3);
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < 30; ++i) y.push_back(i % 3);
    CHECK(collision_rate(x, y, x, iota_sources(30, 1)) == 0.0);

    const Matrix noisy = fixture::repeat_rows(x, 2) + gaussian(r, 60, 3, 0.8);
    CHECK(collision_rate(x, y, noisy, iota_sources(30, 2)) == oracle::collision(x, y, noisy, iota_sources(30, 2)));

    const Matrix three = gaussian(r, 3, 3);
    const std::vector<std::size_t> one_class{0, 0, 0};
    CHECK(kind_of([&] { collision_rate(three, one_class, three, iota_sources(3, 1)); }) == ErrorKind::invalid_input);
}

TEST_CASE("rigid alignment") {
    RngStream r(5);
    const Matrix src = gaussian(r, 50, 8);
    SUBCASE("identity") {
        const auto a = rigid_align(src, src);
        CHECK(max_abs_diff(a.q, Matrix::identity(8)) < 1e-10);
        for (double b : a.b) CHECK(std::abs(b) < 1e-10);
        CHECK(a.residual < 1e-10);
    }
    SUBCASE("planted motion") {
        const Matrix q = fixture::random_orthogonal(8, RngStream(6));
        std::vector<double> t(8);
        for (auto& v : t) v = 3.0 * r.normal();
        Matrix target = matmul_nt(src, q);
        for (std::size_t i = 0; i < 50; ++i)
            for (std::size_t c = 0; c < 8; ++c) target(i, c) += t[c];
        const auto a = rigid_align(src, target);
        CHECK(max_abs_diff(a.q, q) < 1e-8);
        for (std::size_t c = 0; c < 8; ++c) CHECK(std::abs(a.b[c] - t[c]) < 1e-8);
        CHECK(a.residual < 1e-8);
        CHECK(max_abs_diff(a.apply(src), target) < 1e-8);
    }
    SUBCASE("isotropic noise") {
        const double sigma = 0.1;
        const Matrix target = src + gaussian(r, 50, 8, sigma);
        const auto a = rigid_align(src, target);
        // The fit absorbs d(d-1)/2 + d degrees of freedom.
        const double expect = sigma * std::sqrt(50.0 * 8.0);
        CHECK(a.residual == doctest::Approx(expect).epsilon(0.2));
    }
}

TEST_CASE("aligned collision rate") {
    RngStream r(7);
    Matrix clean = gaussian(r, 40, 3, 0.2);
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < 40; ++i) {
        y.push_back(i % 2);
        clean(i, 0) += i % 2 ? 4.0 : -4.0;
    }
    const auto src = iota_sources(40, 1);
    SUBCASE("identity") {
        const auto c = aligned_collision_rate(clean, y, clean, src);
        CHECK(c.cr_raw == 0.0);
        CHECK(c.cr_aligned == 0.0);
    }
    SUBCASE("exact rigid motion") {
        const Matrix q = fixture::random_orthogonal(3, RngStream(8));
        Matrix moved = matmul_nt(clean, q);
        for (std::size_t i = 0; i < 40; ++i) moved(i, 1) += 6.0;
        const auto c = aligned_collision_rate(clean, y, moved, src);
        CHECK(c.cr_raw > 0.0);
        CHECK(c.cr_aligned == 0.0);
        CHECK(c.residual < 1e-8);
    }
    SUBCASE("single augmented row") {
        const std::vector<std::size_t> one{0};
        CHECK(kind_of([&] { aligned_collision_rate(clean, y, gather_rows(clean, one), one); }) == ErrorKind::degenerate);
    }
}

TEST_CASE("report json") {
    PairAccuracy acc{91.25, 88.5, nn::ProbeKind::linear, "waco"};
    StructureReport s;
    s.r2 = 0.5;
    CollisionReport c;
    const auto j = evaluation_report(acc, s, c);
    CHECK(j["pair"] == "91.25/88.50");
    CHECK(j.contains("r2"));
    CHECK(j.contains("cr_aligned"));
    const auto ec = evaluation_report(acc, std::nullopt, std::nullopt);
    CHECK_FALSE(ec.contains("r2"));
    CHECK_FALSE(ec.contains("cr_raw"));
    CHECK(number_or_null(NAN).is_null());
}
