#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kinising {

/// Deterministic random stream built on std::mt19937_64, whose output
/// sequence is fully specified by the standard. The value mappings
/// below are hand-rolled (the std::*_distribution classes are not
/// portable across implementations), so identical seeds reproduce
/// bit-identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1): top 53 bits of one generator output.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n): floor(n * uniform()), clamped.
    int uniform_index(int n) {
        const int k = static_cast<int>(static_cast<double>(n) * uniform());
        return k >= n ? n - 1 : k;
    }

    /// Exponential with the given mean: -ln(1 - u) * mean. Consumes one draw.
    double exponential(double mean) {
        return -std::log(1.0 - uniform()) * mean;
    }

    /// Standard normal by Box-Muller; consumes exactly two draws, the
    /// sine branch is discarded.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace kinising
