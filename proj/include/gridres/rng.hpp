#pragma once

#include <cstdint>
#include <random>

namespace gridres {

/// Seeded uniform source on the open interval (0, 1).
///
/// Draws come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard, mapped as ((x >> 11) + 0.5) * 2^-53. The mapping is spelled out
/// here instead of using std::uniform_real_distribution, whose algorithm is
/// implementation-defined, so the same seed yields the same draws on every
/// platform.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    double draw() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential variate with the given mean (inverse-CDF on draw()).
    double exponential(double mean);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent child seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for replica `index` of a run with `master` seed:
/// splitmix64(master ^ splitmix64(index + 1)). Depends only on the pair, never
/// on how replicas are scheduled.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index);

}  // namespace gridres
