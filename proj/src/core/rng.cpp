#include "ptai/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ptai/core/error.hpp"

namespace ptai {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

RngStream RngStream::split(std::string_view label) const {
    return RngStream(mix64(key_ ^ mix64(fnv1a(label))), 0);
}

RngStream RngStream::split(std::uint64_t index) const {
    return RngStream(mix64(key_ + mix64(index ^ 0xD6E8FEB86659FD93ULL)), 0);
}

RngStream RngStream::split(std::string_view label, std::uint64_t index) const {
    return split(label).split(index);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t c = counter_++;
    return mix64(mix64(key_ + c * kGolden) ^ key_);
}

double RngStream::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::below(std::size_t n) {
    require(n > 0, ErrorKind::invalid_input, "below(0)");
    const std::uint64_t bound = std::uint64_t(n);
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % bound);
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return std::size_t(v % bound);
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[below(i)]);
    return p;
}

}  // namespace ptai
