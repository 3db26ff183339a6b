#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace dca {

// Derives an independent stream seed from (seed, tag). Used so that each
// component (classifier kind, tree index, loop iteration) draws from its own
// stream and adding one component never perturbs the others.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled draws. The engine's output sequence is fixed by
// the standard; std::shuffle / std::*_distribution are not, so we avoid them
// to keep results identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform index in [0, n).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) {
            throw std::invalid_argument("Rng::uniform_index: n must be positive");
        }
        return static_cast<std::size_t>(next_u64() % n);
    }

    // Uniform real in [0, 1) with 53-bit resolution.
    double uniform_real() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller.
    double normal() {
        const double u1 = 1.0 - uniform_real();  // (0, 1]
        const double u2 = uniform_real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[uniform_index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dca
