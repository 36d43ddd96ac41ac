#pragma once

#include <optional>
#include <span>
#include <vector>

#include "galign/manifold.hpp"

namespace galign {

/// Non-empty set of group elements on one manifold with normalized
/// nonnegative weights (uniform by default).
class WeightedPoseSample {
public:
    explicit WeightedPoseSample(std::vector<Element> elements, std::vector<double> weights = {});

    const Manifold& manifold() const { return manifold_; }
    std::size_t size() const { return elements_.size(); }
    std::span<const Element> elements() const { return elements_; }
    std::span<const double> weights() const { return weights_; }

private:
    Manifold manifold_;
    std::vector<Element> elements_;
    std::vector<double> weights_;
};

struct FrechetOptions {
    std::optional<Element> init;  // explicit start disables the cut-scan seeding
    double tol = 1e-9;            // tangent-mean norm stopping threshold
    int max_iter = 200;
};

struct FrechetSummary {
    Element mean;
    double variance = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Weighted mean squared geodesic distance to g.
double frechet_functional(const WeightedPoseSample& sample, const Element& g);

/// Weighted average of squared geodesic distances to `mean`.
double frechet_variance(const WeightedPoseSample& sample, const Element& mean);

/// Karcher gradient descent: mu <- exp_mu(weighted mean of log_mu(.)),
/// stopped when the tangent mean norm drops below tol. The product metric
/// separates over factors, so each factor descends independently; discrete
/// factors are minimized exactly over their lattice and the flat scale
/// factor closes in one step. Circular factors are seeded by an exact
/// O(n log n) chart scan that locates the global basin; tied minimizers are
/// broken to the smallest canonical coordinate (lexicographic on products).
FrechetSummary frechet_mean(const WeightedPoseSample& sample, const FrechetOptions& opts = {});

/// Independent verification oracle: exhaustive evaluation of the Fréchet
/// functional on a uniform grid (full cartesian product across factors),
/// O(grid_points^factors * n). Shares no code with the Karcher path.
FrechetSummary frechet_mean_oracle(const WeightedPoseSample& sample, int grid_points);

/// Five-term accounting of a two-component mixture's Fréchet variance:
///   sigma2_next = kept_term + updated_term + drift_kept + drift_updated + residual
/// with kept_term = (1-alpha)*Var(kept), updated_term = alpha*Var(updated),
/// drift terms the weighted squared distances of the component means to the
/// mixture mean, and residual the exact remainder (zero on flat geometry
/// when no mass wraps). The mixture variance is always measured on the
/// concatenated weighted sample, never via the recurrence being tested.
struct MixtureDecomposition {
    double sigma2_next = 0.0;
    double kept_term = 0.0;
    double updated_term = 0.0;
    double drift_kept = 0.0;
    double drift_updated = 0.0;
    double residual = 0.0;
    double sigma2_kept = 0.0;
    double sigma2_updated = 0.0;
    Element mu_next, mu_kept, mu_updated;
    double alpha = 0.0;
};

MixtureDecomposition mixture_decomposition(const WeightedPoseSample& kept,
                                           const WeightedPoseSample& updated, double alpha);

}  // namespace galign
