#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "galign/geometry.hpp"

namespace galign {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Reduce an angle to the canonical range [0, 2*pi).
double canonical_angle(double theta);

enum class FactorKind : std::uint8_t {
    SO2,       // planar rotations, angle in [0, 2*pi)
    Cyclic,    // order-n rotation subgroup, index in {0..n-1}
    LogScale,  // uniform scaling, coordinate u = log s, nominally bounded
};

struct Factor {
    FactorKind kind = FactorKind::SO2;
    int order = 1;          // Cyclic only
    double log_min = 0.0;   // LogScale only
    double log_max = 0.0;
    bool operator==(const Factor&) const = default;
};

/// A flat product of one-dimensional abelian group factors. A single factor
/// is the common case; two factors (rotation x scale) cover the roto-scale
/// setting. The metric is the weighted product metric d^2 = sum_i w_i d_i^2
/// with strictly positive per-factor weights (default 1), which is
/// bi-invariant on all supported factors.
class Manifold {
public:
    static constexpr int kMaxFactors = 4;

    Manifold() { factors_[0] = Factor{}; weights_[0] = 1.0; }

    static Manifold so2();
    static Manifold cyclic(int order);
    static Manifold log_scale(double s_min, double s_max);
    static Manifold product(std::span<const Factor> factors, std::span<const double> weights = {});

    // Grammar: "so2" | "c<order>" | "logscale:<s_min>:<s_max>", factors joined
    // by '*', optional metric weights suffix "@w1,w2,...".
    static Manifold parse(const std::string& spec);
    std::string spec_string() const;

    int factor_count() const { return count_; }
    const Factor& factor(int i) const { return factors_[static_cast<std::size_t>(i)]; }
    double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
    bool is_product() const { return count_ > 1; }

    // Squared metric diameter; infinite extent factors use their nominal
    // bounded range.
    double diameter_sq() const;

    bool operator==(const Manifold&) const = default;

private:
    std::array<Factor, kMaxFactors> factors_{};
    std::array<double, kMaxFactors> weights_{1.0, 1.0, 1.0, 1.0};
    int count_ = 1;
};

/// Tangent vector in the product chart: one real coordinate per factor.
struct Tangent {
    std::array<double, Manifold::kMaxFactors> v{};
    int n = 1;

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

/// A point on a group manifold. Coordinates are always stored canonically:
/// angles in [0, 2*pi), cyclic indices reduced mod n (kept as exact integer
/// doubles). Immutable value type.
class Element {
public:
    Element() = default;
    Element(const Manifold& m, std::span<const double> coords);

    const Manifold& manifold() const { return manifold_; }
    double coord(int i) const { return coords_[static_cast<std::size_t>(i)]; }
    std::span<const double> coords() const {
        return {coords_.data(), static_cast<std::size_t>(manifold_.factor_count())};
    }

    bool operator==(const Element&) const = default;

private:
    friend Element identity(const Manifold&);
    Manifold manifold_;
    std::array<double, Manifold::kMaxFactors> coords_{};
};

Element identity(const Manifold& m);
Element so2_element(double theta);
Element cyclic_element(int order, long long index);
Element log_scale_element(double s_min, double s_max, double u);

/// Group law. Coordinates are re-canonicalized; LogScale composition is the
/// exact flat translation (results may leave the nominal bounds, which are a
/// sampling convention rather than a wall -- see exp_map for clamping).
Element compose(const Element& g, const Element& h);
Element inverse(const Element& g);

/// Geodesic distance of the bi-invariant product metric.
double geodesic_distance(const Element& g, const Element& h);

/// Riemannian log at `base`. On circular factors the antipodal point (cut
/// locus) maps to +pi by convention so downstream iterations stay
/// deterministic. norm(log_map(b,g)) == geodesic_distance(b,g).
Tangent log_map(const Element& base, const Element& g);

/// Riemannian exp at `base`. Cyclic factors round to the nearest lattice
/// point; LogScale output is clamped to the nominal bounds.
Element exp_map(const Element& base, const Tangent& v);

double tangent_norm(const Manifold& m, const Tangent& v);

/// Homogeneous planar transform (rotation and/or uniform scale about the
/// origin) realizing the element: matrix(g.h) == matrix(g)*matrix(h).
Mat3 representation(const Element& g);

std::string to_string(const Element& g);

}  // namespace galign
