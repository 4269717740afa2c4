#pragma once
/*
Counter-based random streams.

A Stream is identified by a 64-bit key and produces the splitmix64 finalizer
applied to key + counter * golden_gamma. Substreams are derived by hashing the
parent key with an index, so stream contents depend only on (seed, indices) and
never on the order in which streams are consumed.
*/

#include <cstdint>
#include <string_view>

namespace usrt {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// FNV-1a, used to fold configuration strings into stream keys.
constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) {
    return mix64(parent ^ mix64(index + kGoldenGamma));
}

class Stream {
public:
    constexpr explicit Stream(std::uint64_t key) : key_(mix64(key)) {}

    constexpr Stream substream(std::uint64_t index) const { return Stream(derive_key(key_, index)); }

    constexpr std::uint64_t next_u64() {
        ++counter_;
        return mix64(key_ + counter_ * kGoldenGamma);
    }

    // Uniform on the open interval (0,1): 53-bit midpoint grid, never 0 or 1.
    constexpr double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    constexpr bool bernoulli(double p) { return uniform() < p; }

    constexpr std::uint64_t key() const { return key_; }
    constexpr std::uint64_t position() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace usrt
