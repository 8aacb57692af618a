#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"

#include "ptai/core/error.hpp"
#include "ptai/data/batch.hpp"
#include "ptai/data/formats.hpp"
#include "ptai/data/shapes.hpp"

using namespace ptai;
using namespace ptai::data;
namespace fs = std::filesystem;

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

FeatureDataset seeded_features(std::size_t n, std::size_t d, std::size_t s_file) {
    RngStream r(77);
    FeatureDataset ds;
    ds.clean = fixture::gaussian(r, n, d);
    ds.aug = fixture::gaussian(r, n * s_file, d);
    // values representable in float32 so the round trip is exact
    for (std::size_t i = 0; i < ds.clean.size(); ++i) ds.clean.data()[i] = float(ds.clean.data()[i]);
    for (std::size_t i = 0; i < ds.aug.size(); ++i) ds.aug.data()[i] = float(ds.aug.data()[i]);
    for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(static_cast<std::uint32_t>(i % 3));
    ds.classes = 3;
    ds.s_file = s_file;
    ds.metadata = R"({"augmentation":"rotation","source":"test"})";
    return ds;
}

void put_be32(std::ofstream& f, std::uint32_t v) {
    const char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
    f.write(b, 4);
}

// Hand-written IDX pair: `n` images of 3x2 pixels with value 255 * (i odd).
void write_idx_fixture(const fs::path& images, const fs::path& labels, std::uint32_t n, std::uint32_t n_labels) {
    std::ofstream fi(images, std::ios::binary), fl(labels, std::ios::binary);
    put_be32(fi, 0x00000803);
    put_be32(fi, n);
    put_be32(fi, 3);
    put_be32(fi, 2);
    for (std::uint32_t i = 0; i < n; ++i)
        for (int p = 0; p < 6; ++p) fi.put(char(i % 2 ? 255 : 0));
    put_be32(fl, 0x00000801);
    put_be32(fl, n_labels);
    for (std::uint32_t i = 0; i < n_labels; ++i) fl.put(char(i % 2));
}

}  // namespace

TEST_CASE("aift round trip and corruption") {
    const auto ds = seeded_features(7, 5, 3);
    const auto bytes = encode_aift(ds);
    CHECK(decode_aift(bytes) == ds);
    CHECK(encode_aift(decode_aift(bytes)) == bytes);

    const auto path = fs::temp_directory_path() / "ptai_test.aift";
    save_aift(ds, path);
    CHECK(load_aift(path) == ds);
    fs::remove(path);

    for (std::size_t cut : {std::size_t(0), std::size_t(3), std::size_t(30), bytes.size() - 1}) {
        const std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + cut);
        CHECK(kind_of([&] { decode_aift(t); }) == ErrorKind::corrupt_file);
    }
    auto flipped = bytes;
    flipped[bytes.size() - 10] ^= 0x40;
    try {
        decode_aift(flipped);
        FAIL("expected CRC failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::corrupt_file);
        CHECK(std::string(e.what()).find("CRC") != std::string::npos);
    }
    auto magic = bytes;
    magic[1] = 'Z';
    CHECK(kind_of([&] { decode_aift(magic); }) == ErrorKind::corrupt_file);
}

TEST_CASE("idx fixtures") {
    const auto dir = fs::temp_directory_path() / "ptai_idx_test";
    fs::create_directories(dir);
    write_idx_fixture(dir / "i.idx", dir / "l.idx", 4, 4);
    const auto ds = load_idx(dir / "i.idx", dir / "l.idx");
    REQUIRE(ds.size() == 4);
    for (const auto& img : ds.images) {
        CHECK(img.height == 3);
        CHECK(img.width == 2);
    }
    for (double v : ds.images[1].pixels) CHECK(v == 1.0);
    for (double v : ds.images[0].pixels) CHECK(v == 0.0);
    CHECK(ds.labels == std::vector<std::uint32_t>{0, 1, 0, 1});

    save_idx(ds, dir / "i2.idx", dir / "l2.idx");
    const auto again = load_idx(dir / "i2.idx", dir / "l2.idx");
    CHECK(again.labels == ds.labels);
    for (std::size_t i = 0; i < 4; ++i) CHECK(again.images[i] == ds.images[i]);

    write_idx_fixture(dir / "i3.idx", dir / "l3.idx", 4, 3);
    CHECK(kind_of([&] { load_idx(dir / "i3.idx", dir / "l3.idx"); }) == ErrorKind::format);
    CHECK(kind_of([&] { load_idx(dir / "l.idx", dir / "i.idx"); }) == ErrorKind::format);
    fs::remove_all(dir);
}

TEST_CASE("procedural shapes") {
    SUBCASE("balanced labels") {
        const auto ds = gen_shapes(10, 4, 28, 0.05, RngStream(1), Split::train);
        CHECK(ds.size() == 40);
        std::vector<int> count(4, 0);
        for (auto l : ds.labels) count[l]++;
        CHECK(count == std::vector<int>{10, 10, 10, 10});
    }
    SUBCASE("no jitter, identical class members") {
        const auto ds = gen_shapes(5, 8, 20, 0.0, RngStream(1), Split::train);
        for (std::size_t i = 0; i < ds.size(); ++i)
            for (std::size_t j = 0; j < ds.size(); ++j)
                if (ds.labels[i] == ds.labels[j]) CHECK(ds.images[i] == ds.images[j]);
                else CHECK_FALSE(ds.images[i] == ds.images[j]);
    }
    SUBCASE("nearest centroid separates the classes") {
        const auto tr = gen_shapes(50, 8, 28, 0.05, RngStream(2), Split::train);
        const auto te = gen_shapes(25, 8, 28, 0.05, RngStream(3), Split::test);
        const Matrix xtr = flatten(tr.images), xte = flatten(te.images);
        Matrix centroid(8, xtr.cols());
        for (std::size_t i = 0; i < tr.size(); ++i)
            for (std::size_t c = 0; c < xtr.cols(); ++c) centroid(tr.labels[i], c) += xtr(i, c) / 50.0;
        std::size_t ok = 0;
        for (std::size_t i = 0; i < te.size(); ++i) {
            std::size_t best = 0;
            double bd = 1e300;
            for (std::size_t k = 0; k < 8; ++k) {
                double d = 0;
                for (std::size_t c = 0; c < xte.cols(); ++c) d += (xte(i, c) - centroid(k, c)) * (xte(i, c) - centroid(k, c));
                if (d < bd) bd = d, best = k;
            }
            ok += best == te.labels[i];
        }
        CHECK(double(ok) / te.size() >= 0.95);
    }
    SUBCASE("limits") {
        CHECK(kind_of([] { gen_shapes(2, 9, 28, 0.05, RngStream(1), Split::train); }) == ErrorKind::unsupported);
        CHECK(kind_of([] { gen_shapes(2, 4, 8, 0.05, RngStream(1), Split::train); }) == ErrorKind::invalid_config);
    }
}

TEST_CASE("batches") {
    SUBCASE("identity ensemble repeats the clean rows") {
        const auto ds = gen_shapes(3, 2, 16, 0.05, RngStream(1), Split::train);
        const std::vector<std::size_t> idx{0, 3, 5};
        const auto b = make_batch(ds, idx, augment::AugmentationEnsemble::identity_only(), 1, RngStream(2));
        CHECK(b.augmented == b.clean);
        CHECK(b.labels == std::vector<std::size_t>{ds.labels[0], ds.labels[3], ds.labels[5]});
    }
    SUBCASE("image batches are reproducible") {
        const auto ds = gen_shapes(3, 2, 16, 0.05, RngStream(1), Split::train);
        const std::vector<std::size_t> idx{1, 2, 4};
        const auto e = augment::AugmentationEnsemble::two_element(augment::parse_composite("rotation"), 2);
        const auto a = make_batch(ds, idx, e, 2, RngStream(9));
        const auto b = make_batch(ds, idx, e, 2, RngStream(9));
        CHECK(a.augmented == b.augmented);
        CHECK_FALSE(a.augmented == make_batch(ds, idx, e, 2, RngStream(10)).augmented);
        const auto p = RandomProjection::gaussian(256, 12, RngStream(4));
        CHECK(make_batch(ds, idx, e, 2, RngStream(9), &p).augmented == p.apply(a.augmented));
    }
    SUBCASE("stored views are used without replacement") {
        const auto ds = seeded_features(5, 3, 3);
        const std::vector<std::size_t> idx{0, 1, 2, 3, 4};
        const auto b = make_batch(ds, idx, 3, RngStream(1));
        for (std::size_t i = 0; i < 5; ++i) {
            std::set<std::vector<double>> got, want;
            for (std::size_t k = 0; k < 3; ++k) {
                const auto g = b.augmented.row(i * 3 + k), w = ds.aug.row(i * 3 + k);
                got.insert(std::vector<double>(g.begin(), g.end()));
                want.insert(std::vector<double>(w.begin(), w.end()));
            }
            CHECK(got == want);
        }
        CHECK(kind_of([&] { make_batch(ds, idx, 4, RngStream(1)); }) == ErrorKind::insufficient_augmentations);
    }
}
