#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ptai {

/// Counter-based splittable random stream.
///
/// Output i of a stream is a pure function of (key, i), so identical seeds and
/// call sequences reproduce bit-identical values on every platform. Child
/// streams are derived by hashing a label into the key; they never share state
/// with the parent, and splitting does not advance the parent counter.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    RngStream split(std::string_view label) const;
    RngStream split(std::uint64_t index) const;
    /// Convenience for (epoch, step, purpose) style keys.
    RngStream split(std::string_view label, std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (one variate per two uniforms).
    double normal();
    /// Uniform integer in [0, n), rejection-sampled.
    std::size_t below(std::size_t n);
    /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n);

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    RngStream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ptai
