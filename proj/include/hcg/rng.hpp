#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hcg {

// Deterministic pseudo-random stream shared by the synthetic generator and the
// random-upload baseline.
//
// All draws derive from std::mt19937_64, whose output sequence is pinned
// bit-for-bit by the standard, so a seed reproduces the same stream on every
// platform and compiler. The derived draws are likewise fixed here rather than
// delegated to std::uniform_*_distribution (whose algorithms are
// implementation-defined):
//   - next_double(): top 53 bits of one 64-bit word, scaled to [0, 1)
//   - below(n):      modulo reduction of one 64-bit word
//   - categorical(): CDF walk over the weights using one next_double()
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

    // Index into `weights` drawn proportionally to the (unnormalized) weights.
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace hcg
