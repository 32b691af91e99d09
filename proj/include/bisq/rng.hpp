#ifndef BISQ_RNG_HPP
#define BISQ_RNG_HPP

#include <cstdint>

namespace bisq {

// 64-bit seed; identical seed + identical parameters must reproduce runs
// bit-exactly, so all randomness below is hand-rolled (no std::
// distributions, whose output is implementation-defined).
struct Seed {
    std::uint64_t value = 0;
};

// Counter-based generator (splitmix64 core). Streams derived via split()
// are independent for distinct tags and do not advance the parent, which
// keeps sub-streams replayable regardless of evaluation order.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9E3779B97F4A7C15ull)) {}
    explicit Rng(Seed seed) : Rng(seed.value) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // uniform in [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform in [0, bound), bound >= 1; unbiased via rejection
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = -bound % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    Rng split(std::uint64_t tag) const {
        return Rng(mix(state_ ^ mix(tag ^ 0xD1B54A32D192ED03ull)));
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace bisq

#endif
