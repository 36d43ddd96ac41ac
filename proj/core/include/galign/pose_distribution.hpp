#pragma once

#include <string>
#include <utility>
#include <vector>

#include "galign/manifold.hpp"
#include "galign/random.hpp"

namespace galign {

enum class FactorDistKind : int {
    VonMises,       // circular factors; spread = kappa >= 0
    WrappedNormal,  // circular factors; spread = sigma >= 0
    Uniform,        // whole factor range
    PointMass,      // deterministic at `center`
    Normal,         // LogScale factor; spread = sigma >= 0, clamped to bounds
};

struct FactorDist {
    FactorDistKind kind = FactorDistKind::Uniform;
    double center = 0.0;
    double spread = 0.0;
};

/// Sampling spec over a group manifold: either independent per-factor
/// distributions or a finite mixture of such specs. Parameters are validated
/// at construction; sampling is deterministic given a RandomStream.
class PoseDistribution {
public:
    static PoseDistribution independent(const Manifold& m, std::vector<FactorDist> factors);
    static PoseDistribution mixture(std::vector<std::pair<double, PoseDistribution>> components);

    // Per-factor specs joined by '*': "vonmises:<mu>:<kappa>",
    // "wrappednormal:<mu>:<sigma>", "uniform", "delta:<c>", "normal:<u>:<sigma>".
    // Mixtures: "mixture:<w>~<spec>|<w>~<spec>|...".
    static PoseDistribution parse(const Manifold& m, const std::string& spec);
    std::string spec_string() const;

    const Manifold& manifold() const { return manifold_; }
    Element sample(RandomStream& rng) const;

private:
    PoseDistribution() = default;
    Manifold manifold_;
    std::vector<FactorDist> factors_;                               // empty if mixture
    std::vector<std::pair<double, PoseDistribution>> components_;   // empty if simple
};

/// Fréchet variance (about the mean) of a von Mises distribution with the
/// given concentration, in radians^2. kappa = 0 gives the uniform-circle
/// value pi^2/3; large kappa behaves like 1/kappa.
double von_mises_variance(double kappa);

/// Inverse of von_mises_variance: the concentration whose variance equals
/// `target`. Targets at or above pi^2/3 map to 0 (uniform).
double kappa_for_variance(double target);

}  // namespace galign
