#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptai/augment/image.hpp"
#include "ptai/core/rng.hpp"

namespace ptai::augment {

enum class AugKind { identity, rotation, affine, gaussian_noise, resized_crop };

const char* to_string(AugKind kind) noexcept;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// One augmentation family with its parameter distribution. Defaults follow
/// the standard table: rotation (-180, 180); affine degrees (-30, 30),
/// translate (0.2, 0.2), scale (0.8, 1.2), shear (-15, 15); noise N(0, 1);
/// crop scale (0.5, 0.7), aspect (0.75, 1.33).
struct AugmentationSpec {
    AugKind kind = AugKind::identity;
    Interval rotation_degrees{-180.0, 180.0};
    Interval affine_degrees{-30.0, 30.0};
    double translate_x = 0.2;
    double translate_y = 0.2;
    Interval affine_scale{0.8, 1.2};
    Interval shear_degrees{-15.0, 15.0};
    double noise_mean = 0.0;
    double noise_std = 1.0;
    Interval crop_scale{0.5, 0.7};
    Interval crop_ratio{0.75, 1.33};

    void validate() const;
};

/// Concrete draw for one application of a spec.
struct AugmentationParams {
    AugKind kind = AugKind::identity;
    double degrees = 0.0;
    double translate_x = 0.0;  // fraction of width
    double translate_y = 0.0;  // fraction of height
    double scale = 1.0;
    double shear = 0.0;        // degrees
    double noise_mean = 0.0;
    double noise_std = 0.0;
    std::uint64_t noise_seed = 0;
    double crop_scale = 1.0;   // area fraction
    double crop_aspect = 1.0;  // width / height
    double offset_u = 0.0;     // position of the crop within the free space, [0, 1]
    double offset_v = 0.0;
};

/// Chain of specs applied in order; a single spec is a chain of one.
using Composite = std::vector<AugmentationSpec>;

/// Weighted set of (possibly composite) augmentations. Entry 0 is the
/// identity by convention; it is realized by the clean view of each input, so
/// augmented samples are drawn from the remaining entries.
struct AugmentationEnsemble {
    std::vector<Composite> entries;
    std::vector<double> weights;

    /// {identity, t} with weights (1/(s+1), s/(s+1)).
    static AugmentationEnsemble two_element(Composite t, std::size_t s);
    static AugmentationEnsemble identity_only();

    void validate() const;
    bool identity_only_ensemble() const;
    /// Draws a non-identity entry (or the identity when no other exists).
    const Composite& sample_entry(RngStream& rng) const;
};

AugmentationSpec default_spec(AugKind kind);
/// Names: identity, rotation, affine, noise, crop, composite:<a>,<b>,...
Composite parse_composite(const std::string& name);
std::string describe(const Composite& chain);

AugmentationParams sample_params(const AugmentationSpec& spec, RngStream& rng, std::size_t height = 0,
                                 std::size_t width = 0);

RasterImage apply_rotation(const RasterImage& img, double degrees);
RasterImage apply_affine(const RasterImage& img, double degrees, double translate_x, double translate_y,
                         double scale, double shear_degrees);
RasterImage apply_gaussian_noise(const RasterImage& img, double mean, double stddev, RngStream rng);
RasterImage apply_resized_crop(const RasterImage& img, double scale_frac, double aspect, double offset_u,
                               double offset_v);

RasterImage apply(const AugmentationParams& params, const RasterImage& img);
/// Samples parameters for each element of the chain and applies them in order.
RasterImage apply_chain(const Composite& chain, const RasterImage& img, RngStream& rng);

}  // namespace ptai::augment
