#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace soda {

// Counter-based deterministic generator built on the splitmix64 finalizer:
// output(i) = mix(base + i * GAMMA). Substreams are derived from a (seed,
// stream) pair, so replicate r of a benchmark draws from Rng(seed, r) and is
// reproducible independently of any other replicate.
class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) {
        // Two finalizer rounds decorrelate (seed, stream) pairs.
        state_ = mix(mix(seed + GAMMA) ^ (stream + GOLDEN));
    }

    uint64_t next_u64() {
        state_ += GAMMA;
        return mix(state_);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double chi_squared_1() {
        const double z = normal();
        return z * z;
    }

    // Uniform index in [0, n); modulo bias is negligible for n << 2^64.
    uint64_t index(uint64_t n) { return next_u64() % n; }

    bool bernoulli(double prob) { return uniform() < prob; }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static constexpr uint64_t GAMMA = 0x9E3779B97F4A7C15ull;
    static constexpr uint64_t GOLDEN = 0xBF58476D1CE4E5B9ull;

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint64_t state_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace soda
