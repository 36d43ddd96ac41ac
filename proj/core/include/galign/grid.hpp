#pragma once

#include <vector>

#include "galign/manifold.hpp"

namespace galign {

/// Uniform finite subset of a manifold used for argmin scans, posteriors and
/// robustness evaluation. Always contains the identity element exactly.
struct GroupGrid {
    Manifold manifold;
    std::vector<Element> elements;  // ascending lexicographic coordinate order
    int identity_index = 0;
};

/// Cartesian grid with `resolution` cells per continuous factor (cyclic
/// factors enumerate their full lattice). Log-scale grids are snapped so the
/// zero coordinate is present exactly.
GroupGrid make_grid(const Manifold& m, int resolution);

/// Rotation x scale probe grid: `rotation_order` evenly spaced rotations
/// (always including 0) crossed with the given scale factors (stored as log
/// values). On a rotation-only manifold the scale list is ignored.
GroupGrid evaluation_grid(const Manifold& m, int rotation_order = 17,
                          const std::vector<double>& scales = {1.0, 1.125, 1.25});

}  // namespace galign
