#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "galign/bootstrap.hpp"

namespace galign {

/// Resolved run configuration: a flat, typed key-value file with CLI
/// overrides on top. Serialization is canonical (fixed key order, shortest
/// round-trip numbers), so parse -> serialize -> parse is the identity and
/// every run can drop its resolved config next to its outputs.
///
/// Defaults follow the pinned operating point: alpha = 0.01, interval = 5,
/// probe grid of 17 rotations x scales {1, 1.125, 1.25}.
struct RunConfig {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir;  // empty: use $GALIGN_OUT, else "."
    bool plot = true;

    // dataset source (generate) / location (simulate, robustness)
    std::string dataset;
    std::string manifold = "so2";
    int classes = 5;
    int per_class = 20;
    std::string pose = "vonmises:0:1";
    int shape_points = 12;
    double shape_jitter = 0.0;
    double class_similarity = 0.0;

    // engine
    double alpha = 0.01;
    int interval = 5;
    int steps = 0;
    std::string selection = "toploss";  // "toploss" | "random"
    std::string canonicalizer = "oracle";
    std::optional<double> beta;
    int grid = 64;
    bool refine = true;

    // robustness probe grid
    int rotation_order = 17;
    std::string scales = "1,1.125,1.25";
    std::string template_in;  // saved template state for the template scorer

    static RunConfig parse_text(const std::string& text);
    static RunConfig parse_file(const std::string& path);
    std::string serialize() const;

    BootstrapConfig bootstrap() const;
    Selection selection_mode() const;
    std::vector<double> scale_list() const;
    std::string resolved_out_dir() const;

    bool operator==(const RunConfig&) const = default;
};

}  // namespace galign
