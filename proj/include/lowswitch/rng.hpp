#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace lowswitch {

// splitmix64 finalizer, used both for seeding and for deriving substreams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

// Deterministic random stream. All draws go through explicitly written
// conversions so that identical seeds give identical sequences on every
// platform; std::uniform_*_distribution is avoided on purpose.
//
// Single-writer contract: a stream must not be shared across concurrent
// consumers. Derive substreams instead.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : Rng(mix64(seed), FromMixed{}) {}

    // Independent stream addressed by up to three labels, e.g.
    // (phase, round, machine). Consuming the parent stream does not
    // affect substreams and vice versa.
    [[nodiscard]] Rng substream(std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) const {
        return Rng(mix64(mix64(mix64(root_, a), b), c), FromMixed{});
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1); 53-bit resolution, never returns 1.0.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Unbiased via rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n == 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    // Index sampled from a probability vector by inverse CDF. A point-mass
    // row always yields its support index regardless of the uniform drawn.
    int categorical(std::span<const double> probs) {
        const double u = uniform01();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    bool bernoulli(double p) { return uniform01() < p; }

  private:
    struct FromMixed {};
    Rng(std::uint64_t mixed, FromMixed) : engine_(mixed), root_(mixed) {}

    std::mt19937_64 engine_;
    std::uint64_t root_ = 0;
};

}  // namespace lowswitch
