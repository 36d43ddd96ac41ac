#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "galign/bootstrap.hpp"
#include "galign/config.hpp"
#include "galign/specimen.hpp"

namespace galign {

// Versioned line-based dataset format. Deterministic: shortest round-trip
// numbers, fixed record order.
void write_dataset(const Dataset& d, const std::string& path);
Dataset read_dataset(const std::string& path);

// Trajectory CSV, schema v1:
//   step,mu_0[,mu_1..],sigma2,sigma2_updated,drift_kept,drift_updated,
//   residual,mean_loss,n_updated
// The first line is "# galign-trajectory v1"; readers reject other versions.
std::string trajectory_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
std::vector<std::vector<double>> read_trajectory_csv(const std::string& path);

// Saved template-scorer state (the running mean shape).
void write_template_state(const PointSet& shape, const std::string& path);
PointSet read_template_state(const std::string& path);

nlohmann::ordered_json run_manifest(const RunConfig& cfg, const Trajectory& traj);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace galign
