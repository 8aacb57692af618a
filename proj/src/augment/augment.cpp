#include "ptai/augment/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ptai/core/error.hpp"

namespace ptai::augment {

const char* to_string(AugKind kind) noexcept {
    switch (kind) {
        case AugKind::identity: return "identity";
        case AugKind::rotation: return "rotation";
        case AugKind::affine: return "affine";
        case AugKind::gaussian_noise: return "noise";
        case AugKind::resized_crop: return "crop";
    }
    return "?";
}

namespace {

void check_interval(const Interval& iv, const char* what) {
    require(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo <= iv.hi, ErrorKind::invalid_config,
            std::string("augmentation: invalid interval for ") + what);
}

// Exact values at quarter turns so 90-degree rotations permute pixels exactly.
std::pair<double, double> cos_sin_degrees(double degrees) {
    const double r = std::fmod(degrees, 360.0);
    const double q = r / 90.0;
    if (q == std::floor(q)) {
        switch ((static_cast<int>(q) % 4 + 4) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double rad = degrees * std::numbers::pi / 180.0;
    return {std::cos(rad), std::sin(rad)};
}

// Bilinear sample at pixel-index coordinates (pixel centers on integers);
// neighbours outside the image contribute zero.
double sample_zero(const RasterImage& img, double sx, double sy, std::size_t c) {
    const double fx0 = std::floor(sx), fy0 = std::floor(sy);
    const double fx = sx - fx0, fy = sy - fy0;
    const long x0 = static_cast<long>(fx0), y0 = static_cast<long>(fy0);
    auto pix = [&](long y, long x) {
        if (x < 0 || y < 0 || x >= static_cast<long>(img.width) || y >= static_cast<long>(img.height)) return 0.0;
        return img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
    };
    double v = 0.0;
    if (fx < 1.0 && fy < 1.0) v += (1 - fx) * (1 - fy) * pix(y0, x0);
    if (fx > 0.0 && fy < 1.0) v += fx * (1 - fy) * pix(y0, x0 + 1);
    if (fx < 1.0 && fy > 0.0) v += (1 - fx) * fy * pix(y0 + 1, x0);
    if (fx > 0.0 && fy > 0.0) v += fx * fy * pix(y0 + 1, x0 + 1);
    return v;
}

// Bilinear sample with coordinates clamped to [lo, hi] per axis.
double sample_clamped(const RasterImage& img, double sx, double sy, std::size_t c, double x_lo, double x_hi,
                      double y_lo, double y_hi) {
    sx = std::clamp(sx, x_lo, x_hi);
    sy = std::clamp(sy, y_lo, y_hi);
    const std::size_t x0 = static_cast<std::size_t>(std::floor(sx));
    const std::size_t y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
    const double fx = sx - double(x0), fy = sy - double(y0);
    // lerp form: constant neighbourhoods reproduce their value exactly
    const double top = img.at(y0, x0, c) + fx * (img.at(y0, x1, c) - img.at(y0, x0, c));
    const double bottom = img.at(y1, x0, c) + fx * (img.at(y1, x1, c) - img.at(y1, x0, c));
    return top + fy * (bottom - top);
}

// Output pixel p samples the source at A^{-1}(p - t), all about the center.
RasterImage warp(const RasterImage& img, const double inv[2][2], double tx, double ty) {
    RasterImage out(img.height, img.width, img.channels);
    const double cx = 0.5 * double(img.width), cy = 0.5 * double(img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) {
            const double u = double(x) + 0.5 - cx - tx, v = double(y) + 0.5 - cy - ty;
            const double su = inv[0][0] * u + inv[0][1] * v, sv = inv[1][0] * u + inv[1][1] * v;
            const double sx = su + cx - 0.5, sy = sv + cy - 0.5;
            for (std::size_t c = 0; c < img.channels; ++c)
                out.at(y, x, c) = std::clamp(sample_zero(img, sx, sy, c), 0.0, 1.0);
        }
    return out;
}

void check_image(const RasterImage& img) {
    require(img.height > 0 && img.width > 0 && img.channels > 0 &&
                img.pixels.size() == img.height * img.width * img.channels,
            ErrorKind::invalid_input, "augmentation: malformed image");
}

}  // namespace

void AugmentationSpec::validate() const {
    check_interval(rotation_degrees, "rotation degrees");
    check_interval(affine_degrees, "affine degrees");
    check_interval(affine_scale, "affine scale");
    check_interval(shear_degrees, "shear");
    check_interval(crop_scale, "crop scale");
    check_interval(crop_ratio, "crop ratio");
    require(translate_x >= 0.0 && translate_y >= 0.0, ErrorKind::invalid_config, "augmentation: negative translate");
    require(affine_scale.lo > 0.0, ErrorKind::invalid_config, "augmentation: affine scale must be positive");
    require(noise_std >= 0.0, ErrorKind::invalid_config, "augmentation: noise std must be >= 0");
    require(crop_scale.lo > 0.0 && crop_scale.hi <= 1.0, ErrorKind::invalid_config,
            "augmentation: crop scale must lie in (0, 1]");
    require(crop_ratio.lo > 0.0, ErrorKind::invalid_config, "augmentation: crop ratio must be positive");
}

AugmentationSpec default_spec(AugKind kind) {
    AugmentationSpec s;
    s.kind = kind;
    return s;
}

Composite parse_composite(const std::string& name) {
    auto one = [](const std::string& n) {
        if (n == "identity") return default_spec(AugKind::identity);
        if (n == "rotation") return default_spec(AugKind::rotation);
        if (n == "affine") return default_spec(AugKind::affine);
        if (n == "noise") return default_spec(AugKind::gaussian_noise);
        if (n == "crop") return default_spec(AugKind::resized_crop);
        fail(ErrorKind::invalid_config, "unknown augmentation '" + n + "'");
    };
    const std::string prefix = "composite:";
    if (name.rfind(prefix, 0) != 0) return {one(name)};
    Composite chain;
    std::stringstream ss(name.substr(prefix.size()));
    std::string part;
    while (std::getline(ss, part, ',')) chain.push_back(one(part));
    require(!chain.empty(), ErrorKind::invalid_config, "empty composite augmentation");
    return chain;
}

std::string describe(const Composite& chain) {
    if (chain.size() == 1) return to_string(chain.front().kind);
    std::string out = "composite:";
    for (std::size_t i = 0; i < chain.size(); ++i) out += (i ? "," : "") + std::string(to_string(chain[i].kind));
    return out;
}

AugmentationEnsemble AugmentationEnsemble::two_element(Composite t, std::size_t s) {
    AugmentationEnsemble e;
    e.entries = {Composite{default_spec(AugKind::identity)}, std::move(t)};
    e.weights = {1.0 / double(s + 1), double(s) / double(s + 1)};
    return e;
}

AugmentationEnsemble AugmentationEnsemble::identity_only() {
    return AugmentationEnsemble{{Composite{default_spec(AugKind::identity)}}, {1.0}};
}

void AugmentationEnsemble::validate() const {
    require(!entries.empty() && entries.size() == weights.size(), ErrorKind::invalid_config,
            "ensemble: entries and weights must be non-empty and equal in number");
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0 && std::isfinite(w), ErrorKind::invalid_config, "ensemble: weights must be >= 0");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorKind::invalid_config, "ensemble: weights must sum to 1");
    for (const auto& chain : entries) {
        require(!chain.empty(), ErrorKind::invalid_config, "ensemble: empty composite entry");
        for (const auto& spec : chain) spec.validate();
    }
}

bool AugmentationEnsemble::identity_only_ensemble() const {
    for (const auto& chain : entries)
        for (const auto& spec : chain)
            if (spec.kind != AugKind::identity) return false;
    return true;
}

const Composite& AugmentationEnsemble::sample_entry(RngStream& rng) const {
    if (entries.size() == 1) return entries.front();
    if (entries.size() == 2) return entries[1];
    double total = 0.0;
    for (std::size_t i = 1; i < entries.size(); ++i) total += weights[i];
    if (!(total > 0.0)) return entries.front();
    double u = rng.uniform() * total;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (u < weights[i]) return entries[i];
        u -= weights[i];
    }
    return entries.back();
}

AugmentationParams sample_params(const AugmentationSpec& spec, RngStream& rng, std::size_t height,
                                 std::size_t width) {
    AugmentationParams p;
    p.kind = spec.kind;
    switch (spec.kind) {
        case AugKind::identity: break;
        case AugKind::rotation: p.degrees = rng.uniform(spec.rotation_degrees.lo, spec.rotation_degrees.hi); break;
        case AugKind::affine:
            p.degrees = rng.uniform(spec.affine_degrees.lo, spec.affine_degrees.hi);
            p.translate_x = rng.uniform(-spec.translate_x, spec.translate_x);
            p.translate_y = rng.uniform(-spec.translate_y, spec.translate_y);
            p.scale = rng.uniform(spec.affine_scale.lo, spec.affine_scale.hi);
            p.shear = rng.uniform(spec.shear_degrees.lo, spec.shear_degrees.hi);
            break;
        case AugKind::gaussian_noise:
            p.noise_mean = spec.noise_mean;
            p.noise_std = spec.noise_std;
            p.noise_seed = rng.next_u64();
            break;
        case AugKind::resized_crop: {
            const double h = height ? double(height) : 1.0, w = width ? double(width) : 1.0;
            const double area = h * w;
            const double log_lo = std::log(spec.crop_ratio.lo), log_hi = std::log(spec.crop_ratio.hi);
            for (int attempt = 0; attempt < 100; ++attempt) {
                const double scale = rng.uniform(spec.crop_scale.lo, spec.crop_scale.hi);
                const double aspect = std::exp(rng.uniform(log_lo, log_hi));
                const double cw = std::sqrt(scale * area * aspect), ch = std::sqrt(scale * area / aspect);
                if (cw <= w && ch <= h) {
                    p.crop_scale = scale;
                    p.crop_aspect = aspect;
                    p.offset_u = rng.uniform();
                    p.offset_v = rng.uniform();
                    return p;
                }
            }
            // Center crop of the largest box whose aspect is within range.
            const double in_ratio = w / h;
            double cw = w, ch = h;
            if (in_ratio < spec.crop_ratio.lo) ch = w / spec.crop_ratio.lo;
            else if (in_ratio > spec.crop_ratio.hi) cw = h * spec.crop_ratio.hi;
            p.crop_scale = cw * ch / area;
            p.crop_aspect = cw / ch;
            p.offset_u = p.offset_v = 0.5;
            break;
        }
    }
    return p;
}

RasterImage apply_rotation(const RasterImage& img, double degrees) {
    check_image(img);
    require(std::isfinite(degrees), ErrorKind::invalid_input, "rotation: non-finite angle");
    const auto [c, s] = cos_sin_degrees(degrees);
    const double inv[2][2] = {{c, -s}, {s, c}};
    return warp(img, inv, 0.0, 0.0);
}

RasterImage apply_affine(const RasterImage& img, double degrees, double translate_x, double translate_y,
                         double scale, double shear_degrees) {
    check_image(img);
    require(std::abs(scale) >= 1e-6, ErrorKind::degenerate, "affine: scale too close to 0");
    const auto [c, s] = cos_sin_degrees(degrees);
    const double k = std::tan(shear_degrees * std::numbers::pi / 180.0);
    // Forward A = R * Shear * (scale I), with R = [[c, s], [-s, c]].
    const double a00 = scale * c, a01 = scale * (c * k + s);
    const double a10 = -scale * s, a11 = scale * (-s * k + c);
    const double det = a00 * a11 - a01 * a10;
    const double inv[2][2] = {{a11 / det, -a01 / det}, {-a10 / det, a00 / det}};
    return warp(img, inv, translate_x * double(img.width), translate_y * double(img.height));
}

RasterImage apply_gaussian_noise(const RasterImage& img, double mean, double stddev, RngStream rng) {
    check_image(img);
    require(stddev >= 0.0, ErrorKind::invalid_input, "noise: std must be >= 0");
    RasterImage out = img;
    if (stddev == 0.0 && mean == 0.0) return out;
    for (double& v : out.pixels) v += mean + stddev * rng.normal();
    return out;
}

RasterImage apply_resized_crop(const RasterImage& img, double scale_frac, double aspect, double offset_u,
                               double offset_v) {
    check_image(img);
    require(scale_frac > 0.0 && aspect > 0.0, ErrorKind::invalid_input, "crop: scale and aspect must be positive");
    const double w = double(img.width), h = double(img.height);
    const double cw = std::min(w, std::sqrt(scale_frac * w * h * aspect));
    const double ch = std::min(h, std::sqrt(scale_frac * w * h / aspect));
    const double x0 = std::clamp(offset_u, 0.0, 1.0) * (w - cw);
    const double y0 = std::clamp(offset_v, 0.0, 1.0) * (h - ch);
    // Samples stay inside the crop window, replicating its border pixels.
    const double x_lo = std::max(0.0, x0), x_hi = std::max(x_lo, std::min(w - 1.0, x0 + cw - 1.0));
    const double y_lo = std::max(0.0, y0), y_hi = std::max(y_lo, std::min(h - 1.0, y0 + ch - 1.0));
    RasterImage out(img.height, img.width, img.channels);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) {
            const double sx = x0 + (double(x) + 0.5) * cw / w - 0.5;
            const double sy = y0 + (double(y) + 0.5) * ch / h - 0.5;
            for (std::size_t c = 0; c < img.channels; ++c)
                out.at(y, x, c) = sample_clamped(img, sx, sy, c, x_lo, x_hi, y_lo, y_hi);
        }
    return out;
}

RasterImage apply(const AugmentationParams& p, const RasterImage& img) {
    switch (p.kind) {
        case AugKind::identity: return img;
        case AugKind::rotation: return apply_rotation(img, p.degrees);
        case AugKind::affine: return apply_affine(img, p.degrees, p.translate_x, p.translate_y, p.scale, p.shear);
        case AugKind::gaussian_noise: return apply_gaussian_noise(img, p.noise_mean, p.noise_std, RngStream(p.noise_seed));
        case AugKind::resized_crop:
            return apply_resized_crop(img, p.crop_scale, p.crop_aspect, p.offset_u, p.offset_v);
    }
    return img;
}

RasterImage apply_chain(const Composite& chain, const RasterImage& img, RngStream& rng) {
    RasterImage out = img;
    for (const auto& spec : chain) out = apply(sample_params(spec, rng, out.height, out.width), out);
    return out;
}

}  // namespace ptai::augment
