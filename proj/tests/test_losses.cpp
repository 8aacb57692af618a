#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "ptai/core/error.hpp"
#include "ptai/losses/gradcheck.hpp"
#include "ptai/losses/losses.hpp"

using namespace ptai;
using namespace ptai::losses;
using fixture::batch;
using fixture::gaussian;

namespace {

LossConfig config(LossKind kind, std::size_t s) {
    LossConfig c;
    c.kind = kind;
    c.s = s;
    return c;
}

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

TEST_CASE("loss names") {
    CHECK(parse_loss_kind("waco-recon") == LossKind::waco_recon);
    CHECK(parse_loss_kind("waco_recon") == LossKind::waco_recon);
    CHECK(std::string(to_string(LossKind::hsic)) == "hsic");
    CHECK(kind_of([] { parse_loss_kind("triplet"); }) == ErrorKind::invalid_config);
}

TEST_CASE("mawa") {
    RngStream r(1);
    SUBCASE("identity adapter on identical views is zero") {
        const Matrix x = gaussian(r, 8, 3);
        CHECK(mawa_loss(fixture::identity_net(3), batch(x, fixture::repeat_rows(x, 2), 2)).loss == 0.0);
    }
    SUBCASE("hand example: one input, one view") {
        // E(v) = 2 relu(v): E(1) = 2, E(-1) = 0.
        const nn::Mlp e({{Matrix(1, 1, 1.0), Matrix(1, 1)}, {Matrix(1, 1, 2.0), Matrix(1, 1)}});
        const auto res = mawa_loss(e, batch(Matrix(1, 1, 1.0), Matrix(1, 1, -1.0), 1));
        CHECK(res.loss == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("no views reduces to anchor MSE") {
        const Matrix x = gaussian(r, 6, 2);
        const auto net = nn::make_adapter(2, 5, 2, RngStream(3));
        const Matrix y = nn::mlp_forward(net, x);
        double mse = 0.0;
        for (std::size_t i = 0; i < 6; ++i) mse += oracle::sqdist(y, i, x, i);
        CHECK(mawa_loss(net, batch(x, Matrix(0, 2), 0)).loss == doctest::Approx(mse / 6));
    }
    SUBCASE("output width must match the input") {
        const Matrix x = gaussian(r, 4, 3);
        CHECK(kind_of([&] { mawa_loss(nn::make_adapter(3, 4, 2, RngStream(1)), batch(x, x, 1)); }) ==
              ErrorKind::invalid_config);
    }
}

TEST_CASE("waco") {
    RngStream r(2);
    const Matrix x = gaussian(r, 512, 4);
    LossConfig c = config(LossKind::waco, 1);
    c.ot.num_projections = 256;
    SUBCASE("identity adapter and identity views") {
        const auto res = waco_loss(fixture::identity_net(4), batch(x, x, 1), c, RngStream(4));
        CHECK_FALSE(res.collapsed);
        CHECK(res.loss <= -0.9);
    }
    SUBCASE("constant adapter collapses") {
        nn::Mlp k({{Matrix(3, 4), Matrix(1, 3)}, {Matrix(2, 3), Matrix(1, 2, 0.7)}});
        const auto res = waco_loss(k, batch(x, x, 1), c, RngStream(4));
        CHECK(res.collapsed);
        CHECK(res.loss == 0.0);
        CHECK_FALSE(res.warnings.empty());
    }
}

TEST_CASE("waco with reconstruction") {
    RngStream r(3);
    const Matrix x = gaussian(r, 32, 3);
    const Matrix aug = x + gaussian(r, 32, 3, 0.1);
    const auto b = batch(x, aug, 1);
    const auto enc = nn::make_adapter(3, 8, 3, RngStream(5));
    const auto dec = nn::make_decoder(enc, 3, RngStream(6));
    LossConfig c = config(LossKind::waco_recon, 1);

    SUBCASE("beta = 0 is the reconstruction MSE") {
        c.beta = 0.0;
        const Matrix rec = nn::mlp_forward(dec, nn::mlp_forward(enc, x));
        double mse = 0.0;
        for (std::size_t i = 0; i < 32; ++i) mse += oracle::sqdist(rec, i, x, i);
        CHECK(waco_recon_loss(enc, dec, b, c, RngStream(1)).loss == doctest::Approx(mse / 32));
    }
    SUBCASE("alpha = 0 is beta times waco") {
        c.alpha = 0.0;
        c.beta = 2.5;
        LossConfig w = c;
        w.kind = LossKind::waco;
        CHECK(waco_recon_loss(enc, dec, b, c, RngStream(1)).loss ==
              doctest::Approx(2.5 * waco_loss(enc, b, w, RngStream(1)).loss));
    }
    SUBCASE("perfect autoencoder adds nothing") {
        LossConfig w = c;
        w.kind = LossKind::waco;
        const auto id = fixture::identity_net(3);
        CHECK(waco_recon_loss(id, id, b, c, RngStream(1)).loss ==
              doctest::Approx(waco_loss(id, b, w, RngStream(1)).loss).epsilon(1e-14));
    }
    SUBCASE("raw inputs required") {
        auto nb = b;
        nb.raw.reset();
        CHECK(kind_of([&] { waco_recon_loss(enc, dec, nb, c, RngStream(1)); }) == ErrorKind::invalid_config);
    }
}

TEST_CASE("simclr") {
    SUBCASE("orthogonal embeddings give log 3") {
        const Matrix clean = Matrix::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}});
        const Matrix aug = Matrix::from_rows({{0, 0, 1, 0}, {0, 0, 0, 1}});
        LossConfig c = config(LossKind::simclr, 1);
        c.temperature = 0.5;
        CHECK(simclr_loss(fixture::identity_net(4), batch(clean, aug, 1), c).loss ==
              doctest::Approx(std::log(3.0)).epsilon(1e-12));
    }
    SUBCASE("perfect separation tends to zero") {
        const Matrix clean = Matrix::from_rows({{1, 0}, {-1, 0}});
        LossConfig c = config(LossKind::simclr, 1);
        c.temperature = 0.02;
        CHECK(simclr_loss(fixture::identity_net(2), batch(clean, clean, 1), c).loss < 1e-20);
    }
    SUBCASE("no views is rejected") {
        const Matrix clean = Matrix::from_rows({{1, 0}, {-1, 0}});
        CHECK(kind_of([&] { simclr_loss(fixture::identity_net(2), batch(clean, Matrix(0, 2), 0), config(LossKind::simclr, 0)); }) ==
              ErrorKind::invalid_config);
    }
}

TEST_CASE("hsic") {
    RngStream r(4);
    SUBCASE("estimator matches the naive loop") {
        const Matrix a = gaussian(r, 5, 3), b = gaussian(r, 5, 2);
        for (double bw : {0.5, 1.0, 2.0})
            CHECK(std::abs(hsic_value(a, b, bw, 1.3 * bw) - oracle::hsic(a, b, bw, 1.3 * bw)) < 1e-10);
    }
    SUBCASE("loss is the negated estimator over anchors and encoded rows") {
        const Matrix x = gaussian(r, 3, 2);
        const Matrix aug = fixture::repeat_rows(x, 2) + gaussian(r, 6, 2, 0.2);
        const auto b = batch(x, aug, 2);
        const auto net = nn::make_adapter(2, 6, 3, RngStream(9));
        const Matrix views = vstack(x, aug);
        const Matrix anchors = vstack(x, fixture::repeat_rows(x, 2));
        const Matrix z = nn::mlp_forward(net, views);
        const double expect = -oracle::hsic(anchors, z, median_pairwise_distance(anchors), median_pairwise_distance(z));
        CHECK(std::abs(hsic_loss(net, b, config(LossKind::hsic, 2)).loss - expect) < 1e-10);
    }
    SUBCASE("constant encodings give exactly zero") {
        const Matrix x = gaussian(r, 4, 2);
        nn::Mlp k({{Matrix(3, 2), Matrix(1, 3)}, {Matrix(2, 3), Matrix(1, 2, 0.3)}});
        LossConfig c = config(LossKind::hsic, 1);
        c.hsic_bandwidth.median_heuristic = false;
        CHECK(hsic_loss(k, batch(x, x, 1), c).loss == 0.0);
    }
    SUBCASE("duplicate rows fall back to the fixed bandwidth with a warning") {
        const Matrix x(4, 2, 1.0);
        const auto res = hsic_loss(fixture::identity_net(2), batch(x, x, 1), config(LossKind::hsic, 1));
        CHECK_FALSE(res.warnings.empty());
        CHECK(std::isfinite(res.loss));
    }
}

TEST_CASE("gradient checks") {
    for (auto kind : {LossKind::mawa, LossKind::waco, LossKind::waco_recon, LossKind::simclr, LossKind::hsic}) {
        CAPTURE(to_string(kind));
        GradCheckOptions o;
        o.seed = 3;
        const auto res = check_gradients(kind, o);
        CHECK(res.passed);
        CHECK(res.max_rel_error < 1e-4);
        CHECK(res.parameters_checked > 0);
        o.flip_sign = true;
        CHECK_FALSE(check_gradients(kind, o).passed);
    }
    CHECK(relative_error(1.0, 1.0) == 0.0);
    CHECK(relative_error(0.0, 1e-9) == doctest::Approx(1e-3));
}
