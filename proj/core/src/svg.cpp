#include "galign/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "galign/manifold.hpp"

namespace galign {
namespace svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

constexpr double W = 820, H = 520;
constexpr double ML = 80, MR = 30, MT = 50, MB = 60;  // margins

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series, bool log_y,
                       const std::vector<std::string>& annotations) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = s.y[i];
            if (log_y && !(y > 0.0)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            const double ty = log_y ? std::log10(y) : y;
            ymin = std::min(ymin, ty);
            ymax = std::max(ymax, ty);
        }
    }
    if (!(xmin < xmax)) {
        xmin = 0;
        xmax = 1;
    }
    if (!(ymin < ymax)) {
        ymin -= 1;
        ymax += 1;
    }
    const double xr = xmax - xmin, yr = ymax - ymin;
    auto px = [&](double x) { return ML + (x - xmin) / xr * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / yr * (H - MT - MB); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " " << H
       << "\" font-family=\"monospace\" font-size=\"13\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << esc(title)
       << "</text>\n";

    // frame + ticks
    os << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << W - ML - MR << "\" height=\""
       << H - MT - MB << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + xr * i / 5.0;
        const double fy = ymin + yr * i / 5.0;
        os << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << H - MB << "\" x2=\"" << num(px(fx))
           << "\" y2=\"" << H - MB + 5 << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << num(px(fx)) << "\" y=\"" << H - MB + 20 << "\" text-anchor=\"middle\">"
           << num(fx) << "</text>\n";
        os << "<line x1=\"" << ML - 5 << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << ML << "\" y2=\""
           << num(py(fy)) << "\" stroke=\"#333\"/>\n";
        os << "<text x=\"" << ML - 8 << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
           << (log_y ? "1e" + num(fy) : num(fy)) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << esc(x_label)
       << "</text>\n";
    os << "<text x=\"20\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << H / 2 << ")\">" << esc(y_label) << "</text>\n";

    int legend_row = 0;
    for (const auto& s : series) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = s.y[i];
            if (log_y && !(y > 0.0)) continue;
            pts << num(px(s.x[i])) << "," << num(py(log_y ? std::log10(y) : y)) << " ";
        }
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << s.color
           << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        const double ly = MT + 16 + 18 * legend_row++;
        os << "<line x1=\"" << W - MR - 170 << "\" y1=\"" << ly << "\" x2=\"" << W - MR - 140
           << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        os << "<text x=\"" << W - MR - 134 << "\" y=\"" << ly + 4 << "\">" << esc(s.label)
           << "</text>\n";
    }
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        os << "<text x=\"" << ML + 10 << "\" y=\"" << MT + 18 + 18 * i << "\" fill=\"#444\">"
           << esc(annotations[i]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string polar_chart(const std::string& title, const std::vector<double>& angles_rad,
                        const std::vector<double>& values) {
    const double cx = W / 2, cy = (H + 20) / 2;
    const double R = std::min(W, H) / 2 - 70;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " " << H
       << "\" font-family=\"monospace\" font-size=\"13\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << esc(title)
       << "</text>\n";

    for (int ring = 1; ring <= 4; ++ring) {
        os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << num(R * ring / 4.0)
           << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
        os << "<text x=\"" << num(cx + 4) << "\" y=\"" << num(cy - R * ring / 4.0 - 3)
           << "\" fill=\"#888\">" << num(ring / 4.0) << "</text>\n";
    }
    for (std::size_t i = 0; i < angles_rad.size(); ++i) {
        const double a = angles_rad[i];
        os << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << num(cx + R * std::cos(a))
           << "\" y2=\"" << num(cy - R * std::sin(a)) << "\" stroke=\"#eee\"/>\n";
    }

    std::ostringstream pts;
    for (std::size_t i = 0; i < angles_rad.size(); ++i) {
        const double r = R * std::clamp(values[i], 0.0, 1.0);
        pts << num(cx + r * std::cos(angles_rad[i])) << "," << num(cy - r * std::sin(angles_rad[i]))
            << " ";
    }
    os << "<polygon points=\"" << pts.str()
       << "\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace svg
}  // namespace galign
