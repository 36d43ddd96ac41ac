#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "galign/canonicalizer.hpp"
#include "galign/frechet.hpp"
#include "galign/specimen.hpp"

namespace galign {

enum class Selection : int {
    TopLoss,  // highest alignment loss first (ties by ascending id)
    Random,   // uniform without replacement; isolates the contraction
              // dynamics from the selection heuristic
};

struct BootstrapConfig {
    double alpha = 0.01;  // update fraction per step; ceil(alpha*n) specimens
    int interval = 5;     // template training passes between steps
    int steps = 0;
    Selection selection = Selection::TopLoss;
    std::uint64_t seed = 0;
    int grid_resolution = 64;
    bool refine = true;
    int workers = 1;

    // When set, the engine runs a Noisy canonicalizer whose concentration is
    // re-tuned before every step so that the re-aligned subset's variance
    // equals beta * sigma_t^2 (the constant-relative-improvement regime).
    std::optional<double> beta_control;

    double variance_floor = 1e-14;  // early stop once sigma^2 falls below
};

/// Statistics of one dataset state. Index 0 describes the initial dataset;
/// the step-only fields (decomposition terms, loss, update count) are NaN /
/// zero there.
struct StepRecord {
    std::uint64_t step = 0;
    Element mu;
    double sigma2 = 0.0;
    double sigma2_updated = 0.0;  // re-aligned subset, about its own mean
    double sigma2_kept = 0.0;     // untouched subset, about its own mean
    double drift_kept = 0.0;
    double drift_updated = 0.0;
    double residual = 0.0;
    double mean_loss = 0.0;
    int n_updated = 0;
    std::vector<std::int64_t> updated_ids;
};

struct Trajectory {
    Manifold manifold;
    std::vector<StepRecord> steps;
    std::string stop_reason = "completed";

    std::vector<double> sigma2_series() const;
};

/// One re-alignment step: canonicalize and score every specimen, select the
/// top ceil(alpha*n) by loss (ties by id; or uniformly at random), compose
/// the inverse predictions into the selected specimens' corrections, and
/// account for the resulting mixture. Unselected specimens are untouched.
StepRecord bootstrap_step(Dataset& d, const BootstrapConfig& cfg, Canonicalizer& canon,
                          const GroupGrid& grid);

/// Full loop: `interval` template passes then one step, `steps` times, with
/// early stop at the variance floor. Deterministic under (config, dataset).
Trajectory run_bootstrap(Dataset& d, const BootstrapConfig& cfg, Canonicalizer& canon);

/// One application of the mixture variance recurrence
/// (1-alpha)*sigma2 + alpha*sigma2_updated.
double predict_variance(double sigma2, double sigma2_updated, double alpha);

/// Per-step variance contraction factor 1 - alpha*(1 - beta); requires
/// alpha, beta in (0,1).
double contraction_rate(double alpha, double beta);

struct LambdaFit {
    double lambda_hat = 1.0;
    double r_squared = 1.0;
    int t_begin = 0;
    int t_end = 0;     // exclusive
    bool truncated = false;  // stopped before a zero variance
};

/// Log-linear least squares on (t, log sigma_t^2) over [begin, end); the
/// window is cut before the first nonpositive variance. Needs >= 3 usable
/// points.
LambdaFit estimate_lambda(std::span<const double> sigma2,
                          std::optional<std::pair<int, int>> window = {});

/// Five-term audit of the step between two consecutive dataset states: the
/// updated subset is identified by changed corrections, and the mixture
/// decomposition is recomputed from scratch. `drift_tol` flags mean drift.
struct StepAudit {
    MixtureDecomposition decomposition;
    int n_updated = 0;
    bool drift_flagged = false;
    double drift_tolerance = 0.0;
};

StepAudit audit_step(const Dataset& before, const Dataset& after, double drift_tol = 5e-3);

}  // namespace galign
