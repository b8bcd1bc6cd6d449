/**
 * @file rng.hpp
 * @brief Seed-deterministic uniform sampling. Raw mt19937_64 draws are mapped to
 *        doubles explicitly so results are identical across standard libraries
 *        (std::uniform_real_distribution is implementation-defined).
 */

#ifndef LZSETKIT_RNG_HPP
#define LZSETKIT_RNG_HPP

#include <cstdint>
#include <random>

#include "lzsetkit/types.hpp"

namespace lzsetkit {

class UniformRng {
  public:
    explicit UniformRng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    /// Uniform draw in [0, 1) with 53 random bits.
    double next01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform draw in [-1, 1].
    double sym() { return 2.0 * next01() - 1.0; }

    /// Vector of n uniform draws in [-1, 1].
    Vector sym_vector(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v(i) = sym();
        return v;
    }

    /// Independent stream for sub-task k; stable under any evaluation order, so
    /// parallel sampling loops stay deterministic.
    UniformRng split(std::uint64_t k) const {
        return UniformRng(seed_ ^ (0x9e3779b97f4a7c15ULL * (k + 0x632be59bd9b4e019ULL)));
    }

    /// The seed this stream was constructed with.
    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace lzsetkit

#endif  // LZSETKIT_RNG_HPP
