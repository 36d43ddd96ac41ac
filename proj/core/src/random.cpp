#include "galign/random.hpp"

#include <cmath>

#include "galign/manifold.hpp"

namespace galign {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
    // Rejection against the largest multiple of n below 2^64 keeps the draw
    // unbiased for any n.
    const std::uint64_t limit = n * (~0ULL / n);
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % n;
}

double RandomStream::normal() {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RandomStream::von_mises(double mu, double kappa) {
    if (kappa < 1e-8) return uniform(0.0, kTwoPi);

    // Best & Fisher (1979) wrapped-Cauchy envelope rejection.
    const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
    const double r = (1.0 + b * b) / (2.0 * b);

    for (;;) {
        const double u1 = uniform();
        const double z = std::cos(kPi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = uniform();
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double u3 = uniform();
            const double theta = (u3 < 0.5 ? -1.0 : 1.0) * std::acos(f);
            return canonical_angle(mu + theta);
        }
    }
}

std::uint64_t RandomStream::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = splitmix64(seed);
    x = splitmix64(x ^ (a + 0x9e3779b97f4a7c15ULL));
    x = splitmix64(x ^ (b + 0x7f4a7c159e3779b9ULL));
    return x;
}

}  // namespace galign
