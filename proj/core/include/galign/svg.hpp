#pragma once

#include <string>
#include <vector>

namespace galign {
namespace svg {

struct Series {
    std::string label;
    std::string color = "#1f77b4";
    bool dashed = false;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained line chart; y may be drawn on a log10 scale (nonpositive
/// values are dropped from log plots). No timestamps or other run-varying
/// content: identical inputs give identical bytes.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series, bool log_y,
                       const std::vector<std::string>& annotations = {});

/// Polar plot of per-angle values in [0, 1] with the enclosed area shaded.
std::string polar_chart(const std::string& title, const std::vector<double>& angles_rad,
                        const std::vector<double>& values);

}  // namespace svg
}  // namespace galign
