#pragma once

#include <cstdint>
#include <vector>

#include "galign/frechet.hpp"
#include "galign/geometry.hpp"
#include "galign/manifold.hpp"
#include "galign/pose_distribution.hpp"

namespace galign {

/// A synthetic labeled object: a 2-D point set with a known canonical form,
/// the pose it was generated at, and the composition of all re-alignment
/// corrections applied to it so far. The observed shape is materialized on
/// demand as rho(true_pose . correction^-1) applied to the canonical points,
/// so repeated corrections compose instead of resampling.
struct Specimen {
    std::int64_t id = 0;
    int class_label = 0;
    PointSet canonical_shape;
    Element true_pose;
    Element accumulated_correction;

    Element effective_pose() const { return compose(true_pose, inverse(accumulated_correction)); }
    PointSet observed() const { return mat3_apply(representation(effective_pose()), canonical_shape); }
};

struct DatasetSpec {
    int num_classes = 1;
    int per_class = 1;
    PoseDistribution pose_dist;
    std::uint64_t shape_seed = 0;
    int shape_points = 12;
    double shape_jitter = 0.0;      // per-point radial noise on canonical shapes
    double class_similarity = 0.0;  // in [0,1): fraction of shared structure across
                                    // class shapes (fine-grained family); 0 keeps
                                    // classes fully independent

    explicit DatasetSpec(PoseDistribution dist) : pose_dist(std::move(dist)) {}
};

/// Mutable dataset state: the specimen collection plus the re-alignment step
/// counter. Cardinality never changes after generation.
struct Dataset {
    Manifold manifold;
    int num_classes = 0;
    std::vector<Specimen> specimens;
    std::vector<PointSet> class_shapes;  // per-class base shapes
    std::uint64_t step_t = 0;
};

/// Deterministic synthetic dataset: one random asymmetric star-polyline base
/// shape per class, poses drawn i.i.d. from the spec's distribution, ids
/// sequential. The same spec always produces the same bits.
Dataset generate_dataset(const DatasetSpec& spec);

/// Left action of g: the observed shape becomes rho(g) applied to the old
/// observed shape.
Specimen transformed(const Specimen& s, const Element& g);

/// Effective poses of all specimens as a uniformly weighted sample.
WeightedPoseSample pose_sample(const Dataset& d);

/// Random star polyline with points on distinct rays; trivial stabilizer
/// almost surely. Unit-disc normalized (centroid at origin, max radius 1).
PointSet make_star_shape(RandomStream& rng, int points);

/// Shape with an exact m-fold rotational symmetry (as a point set), for
/// stabilizer and coset behavior tests.
PointSet make_symmetric_shape(RandomStream& rng, int fold, int points_per_sector);

}  // namespace galign
