#pragma once

#include <span>

#include "galign/canonicalizer.hpp"

namespace galign {

/// Nearest-template classifier behind a canonicalizer: undo the predicted
/// pose, then pick the class whose template point set is closest. With an
/// exact canonicalizer the prediction is constant along a specimen's orbit.
int toy_classify(const Specimen& x, const Canonicalizer& c, std::span<const PointSet> class_templates,
                 const GroupGrid& grid, bool refine = true);

/// Fraction of specimens classified correctly after transforming every one
/// of them by `g`.
double accuracy_under_transform(const Dataset& d, const Element& g, const Canonicalizer& c,
                                const GroupGrid& canon_grid, int workers, bool refine = true);

}  // namespace galign
