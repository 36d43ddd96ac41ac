#include "galign/specimen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace galign {

namespace {

void normalize_to_unit_disc(PointSet& pts) {
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    double max_r = 0.0;
    for (auto& p : pts) {
        p.x -= cx;
        p.y -= cy;
        max_r = std::max(max_r, std::hypot(p.x, p.y));
    }
    if (max_r > 0.0)
        for (auto& p : pts) {
            p.x /= max_r;
            p.y /= max_r;
        }
}

}  // namespace

PointSet make_star_shape(RandomStream& rng, int points) {
    if (points < 3) throw std::invalid_argument("shapes need at least 3 points");
    // Rays with jittered angular spacing and independent radii; the sorted
    // angular gaps are distinct almost surely, so no rotation maps the set
    // to itself.
    std::vector<double> angles(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        angles[static_cast<std::size_t>(i)] =
            kTwoPi * (static_cast<double>(i) + 0.25 + 0.5 * rng.uniform()) / points;
    PointSet pts;
    pts.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double r = rng.uniform(0.35, 1.0);
        pts.push_back({r * std::cos(angles[static_cast<std::size_t>(i)]),
                       r * std::sin(angles[static_cast<std::size_t>(i)])});
    }
    normalize_to_unit_disc(pts);
    return pts;
}

PointSet make_symmetric_shape(RandomStream& rng, int fold, int points_per_sector) {
    if (fold < 2) throw std::invalid_argument("symmetry fold must be >= 2");
    PointSet sector;
    for (int i = 0; i < points_per_sector; ++i) {
        const double a = rng.uniform(0.0, kTwoPi / fold);
        const double r = rng.uniform(0.35, 1.0);
        sector.push_back({r * std::cos(a), r * std::sin(a)});
    }
    PointSet pts;
    for (int k = 0; k < fold; ++k) {
        const double rot = kTwoPi * k / fold;
        const double c = std::cos(rot), s = std::sin(rot);
        for (const auto& p : sector) pts.push_back({c * p.x - s * p.y, s * p.x + c * p.y});
    }
    // No centroid shift: it is already 0 by symmetry, and re-centering would
    // break the exact m-fold invariance of the coordinates.
    double max_r = 0.0;
    for (const auto& p : pts) max_r = std::max(max_r, std::hypot(p.x, p.y));
    for (auto& p : pts) {
        p.x /= max_r;
        p.y /= max_r;
    }
    return pts;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    if (spec.num_classes < 1 || spec.per_class < 1)
        throw std::invalid_argument("dataset needs at least one class and one specimen per class");

    if (!(spec.class_similarity >= 0.0 && spec.class_similarity < 1.0))
        throw std::invalid_argument("class similarity must lie in [0, 1)");

    Dataset d;
    d.manifold = spec.pose_dist.manifold();
    d.num_classes = spec.num_classes;

    // Optional shared coarse structure: every class shape is a pointwise
    // blend of one common base star with its own star, so classes look alike
    // globally and differ in detail.
    PointSet base;
    if (spec.class_similarity > 0.0) {
        RandomStream base_rng(RandomStream::derive(spec.shape_seed, 3, 0));
        base = make_star_shape(base_rng, spec.shape_points);
    }
    for (int c = 0; c < spec.num_classes; ++c) {
        RandomStream shape_rng(RandomStream::derive(spec.shape_seed, 0, static_cast<std::uint64_t>(c)));
        PointSet shape = make_star_shape(shape_rng, spec.shape_points);
        if (!base.empty()) {
            const double s = spec.class_similarity;
            for (std::size_t i = 0; i < shape.size(); ++i) {
                shape[i].x = s * base[i].x + (1.0 - s) * shape[i].x;
                shape[i].y = s * base[i].y + (1.0 - s) * shape[i].y;
            }
            normalize_to_unit_disc(shape);
        }
        d.class_shapes.push_back(std::move(shape));
    }

    const Element e0 = identity(d.manifold);
    std::int64_t next_id = 0;
    for (int c = 0; c < spec.num_classes; ++c) {
        for (int i = 0; i < spec.per_class; ++i) {
            Specimen s;
            s.id = next_id++;
            s.class_label = c;
            s.canonical_shape = d.class_shapes[static_cast<std::size_t>(c)];
            if (spec.shape_jitter > 0.0) {
                RandomStream jit(RandomStream::derive(spec.shape_seed, 2, static_cast<std::uint64_t>(s.id)));
                for (auto& p : s.canonical_shape) {
                    p.x += spec.shape_jitter * jit.normal();
                    p.y += spec.shape_jitter * jit.normal();
                }
            }
            RandomStream pose_rng(RandomStream::derive(spec.shape_seed, 1, static_cast<std::uint64_t>(s.id)));
            s.true_pose = spec.pose_dist.sample(pose_rng);
            s.accumulated_correction = e0;
            d.specimens.push_back(std::move(s));
        }
    }
    return d;
}

Specimen transformed(const Specimen& s, const Element& g) {
    Specimen out = s;
    out.true_pose = compose(g, s.true_pose);
    return out;
}

WeightedPoseSample pose_sample(const Dataset& d) {
    std::vector<Element> poses;
    poses.reserve(d.specimens.size());
    for (const auto& s : d.specimens) poses.push_back(s.effective_pose());
    return WeightedPoseSample(std::move(poses));
}

}  // namespace galign
