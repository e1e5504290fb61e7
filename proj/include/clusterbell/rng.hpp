#pragma once

#include <cstdint>

namespace clusterbell::rng {

/// SplitMix64 finalizer: bijective 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

/// Counter-based random number generator. Every draw is a pure function of
/// (seed, stream, counter), so trials can be evaluated in any order and on
/// any number of threads with bit-identical results.
///
/// Construction is SplitMix64 with a per-stream derived seed: the k-th draw
/// of a stream is mix64(stream_seed + k * golden_gamma).
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : key_(mix64(seed + kGamma)) {}

    std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
        const std::uint64_t stream_seed = mix64(key_ ^ (stream * kGamma + kStreamSalt));
        return mix64(stream_seed + counter * kGamma);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t counter) const {
        return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    static constexpr std::uint64_t kStreamSalt = 0xa0761d6478bd642fULL;

    std::uint64_t key_;
};

}  // namespace clusterbell::rng
