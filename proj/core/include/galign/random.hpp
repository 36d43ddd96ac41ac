#pragma once

#include <cstdint>
#include <random>

namespace galign {

/// Seeded random stream. All samplers are built on top of the raw 64-bit
/// output of mt19937_64 (never on std:: distributions, whose sequences are
/// implementation-defined), so a seed pins the exact sample sequence.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    // Standard normal (Box-Muller; consumes two uniforms per call).
    double normal();

    // von Mises(mu, kappa) via Best-Fisher rejection; kappa ~ 0 degrades to
    // the uniform circle. Returns an angle in [0, 2*pi).
    double von_mises(double mu, double kappa);

    /// Derives an independent child seed from a parent seed and up to two
    /// tags (e.g. specimen id and step index). Used to give every parallel
    /// work item its own stream so execution order never affects results.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

private:
    std::mt19937_64 eng_;
};

}  // namespace galign
