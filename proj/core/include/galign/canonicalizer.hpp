#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "galign/grid.hpp"
#include "galign/specimen.hpp"

namespace galign {

enum class CanonicalizerKind : int {
    Oracle,    // returns the exact residual pose of a specimen
    Noisy,     // oracle perturbed by per-specimen symmetric noise and a fixed bias
    Template,  // learned: scores poses against a running mean shape
    Identity,  // always predicts the identity (do-nothing baseline)
};

/// Pose predictor over a group manifold. Oracle/Noisy/Identity score an
/// analytic energy (squared geodesic distance to their target pose); the
/// Template variant scores the closest-point mismatch between the
/// back-transformed observed shape and a running template learned by
/// exponential moving average.
///
/// Noisy draws are keyed by (seed, specimen id, epoch): a snapshot of the
/// canonicalizer gives every specimen one fixed prediction, identical across
/// workers and evaluation order. The engine bumps `epoch` once per
/// re-alignment step to refresh the noise.
struct Canonicalizer {
    CanonicalizerKind kind = CanonicalizerKind::Oracle;
    Manifold manifold;

    // Noisy
    double noise_kappa = 100.0;
    Element bias;  // composes on the left of the true pose
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0;

    // Template (the scan grid is supplied per call; see BootstrapConfig)
    double temperature = 1.0;  // posterior softmax temperature (all variants)
    double ema_rate = 0.1;
    PointSet shape_template;   // empty until the first update
    bool per_class = false;
    std::vector<PointSet> class_shape_templates;

    static Canonicalizer oracle(const Manifold& m);
    static Canonicalizer noisy(const Manifold& m, double kappa, const Element& bias, std::uint64_t seed);
    static Canonicalizer template_scorer(const Manifold& m, double temperature = 0.05,
                                         double ema_rate = 0.1);
    static Canonicalizer identity_baseline(const Manifold& m);

    // "oracle" | "identity" | "noisy:<kappa>[:<bias coords ,-separated>]" |
    // "template[:<temperature>[:<ema_rate>]]"
    static Canonicalizer parse(const Manifold& m, const std::string& spec);
    std::string spec_string() const;
};

/// Target pose of the analytic variants: effective pose (Oracle), noise o
/// bias o effective pose (Noisy), identity (Identity). Hard error for
/// Template, whose prediction is only defined through the grid argmin.
Element predicted_pose(const Canonicalizer& c, const Specimen& x);

/// Scoring function over the group orbit. Lower is better; the Oracle score
/// has a strict minimum of exactly 0 at the specimen's residual pose.
double score(const Canonicalizer& c, const Element& g, const Specimen& x);

/// argmin of the score. Analytic variants return their target exactly;
/// Template scans the grid (ties to the smallest canonical coordinate) and,
/// when `refine` is set, polishes continuous factors by golden-section
/// coordinate descent to ~1e-6.
Element canonicalize(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid, bool refine = true);

/// softmax(-score/temperature) over the grid; sums to 1.
std::vector<double> posterior(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid);

/// Mean over the batch of -log posterior(identity | x): the cross-entropy of
/// the pose posterior against a point prior at the identity.
double prior_loss(const Canonicalizer& c, std::span<const Specimen> batch, const GroupGrid& grid);

/// Per-specimen -log posterior(identity | x), computed from raw scores.
double alignment_loss(const Canonicalizer& c, const Specimen& x, const GroupGrid& grid);

/// EMA step of the running template(s) toward the mean of already-aligned
/// shapes. Empty batch is a no-op. Hard error on non-Template variants.
void template_update(Canonicalizer& c, std::span<const PointSet> aligned_shapes,
                     std::span<const int> labels = {});
void template_update(Canonicalizer& c, std::span<const Specimen> canonicalized_batch);

/// One training pass: fold the dataset's current observed shapes into the
/// running template. The loop treats the progressively re-aligned dataset as
/// its canonical exemplar set, which anchors the template at the identity
/// pose (the dataset's majority mode) instead of letting it drift to an
/// arbitrary self-consistent orientation.
void template_pass(Canonicalizer& c, const Dataset& d);

}  // namespace galign
