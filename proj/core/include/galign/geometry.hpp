#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace galign {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

using PointSet = std::vector<Point2>;

// 3x3 homogeneous planar transform, row-major.
using Mat3 = std::array<double, 9>;

inline Mat3 mat3_identity() {
    return {1, 0, 0, 0, 1, 0, 0, 0, 1};
}

inline Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[3 * i + j] = a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j];
    return r;
}

inline Point2 mat3_apply(const Mat3& m, const Point2& p) {
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

inline PointSet mat3_apply(const Mat3& m, const PointSet& pts) {
    PointSet out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(mat3_apply(m, p));
    return out;
}

inline double squared_dist(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Symmetric mean closest-point squared distance between two point sets.
// Zero iff the sets coincide; grows with misalignment in both rotation and
// scale, which makes it usable as an energy over roto-scale poses.
inline double chamfer_distance(const PointSet& a, const PointSet& b) {
    if (a.empty() || b.empty()) return 0.0;
    double fwd = 0.0;
    for (const auto& p : a) {
        double best = squared_dist(p, b[0]);
        for (std::size_t j = 1; j < b.size(); ++j) best = std::min(best, squared_dist(p, b[j]));
        fwd += best;
    }
    double bwd = 0.0;
    for (const auto& q : b) {
        double best = squared_dist(q, a[0]);
        for (std::size_t i = 1; i < a.size(); ++i) best = std::min(best, squared_dist(q, a[i]));
        bwd += best;
    }
    return fwd / static_cast<double>(a.size()) + bwd / static_cast<double>(b.size());
}

}  // namespace galign
