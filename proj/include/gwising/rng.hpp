#pragma once

#include <cstdint>
#include <random>

namespace gwising {

inline constexpr std::uint64_t kSeedGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer. Used as the seed-mixing function everywhere.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// Derived seed of replica `index` under a base seed:
//   mix64(base + (index+1) * 0x9E3779B97F4A7C15).
// Fixed here once; every ensemble runner uses it, so replica streams are
// independent and a (base seed, replica index) pair is fully reproducible.
inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base + (index + 1) * kSeedGamma);
}

// Deterministic uniform stream. mt19937_64 is fully specified by the
// standard, and uniforms are produced by explicit bit manipulation rather
// than std::uniform_real_distribution, so identical seeds give identical
// draw sequences on every platform.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    // in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::uint64_t bits() { return gen_(); }

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace gwising
