#include "galign/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace galign {

namespace {

std::vector<double> factor_grid(const Factor& f, int resolution) {
    std::vector<double> g;
    switch (f.kind) {
        case FactorKind::SO2:
            for (int j = 0; j < resolution; ++j) g.push_back(kTwoPi * j / resolution);
            break;
        case FactorKind::Cyclic:
            for (int k = 0; k < f.order; ++k) g.push_back(static_cast<double>(k));
            break;
        case FactorKind::LogScale: {
            if (f.log_max - f.log_min < 1e-300) {
                g.push_back(0.0);
                break;
            }
            for (int j = 0; j < resolution; ++j)
                g.push_back(f.log_min + (f.log_max - f.log_min) * j / (resolution - 1));
            // Snap the nearest cell onto the identity coordinate.
            std::size_t nearest = 0;
            for (std::size_t j = 1; j < g.size(); ++j)
                if (std::fabs(g[j]) < std::fabs(g[nearest])) nearest = j;
            g[nearest] = 0.0;
            break;
        }
    }
    return g;
}

GroupGrid assemble(const Manifold& m, const std::vector<std::vector<double>>& grids) {
    GroupGrid out;
    out.manifold = m;
    const int nf = m.factor_count();
    std::vector<std::size_t> idx(static_cast<std::size_t>(nf), 0);
    std::array<double, Manifold::kMaxFactors> c{};
    int identity_at = -1;
    for (;;) {
        bool is_identity = true;
        for (int fi = 0; fi < nf; ++fi) {
            c[static_cast<std::size_t>(fi)] = grids[static_cast<std::size_t>(fi)][idx[static_cast<std::size_t>(fi)]];
            if (c[static_cast<std::size_t>(fi)] != 0.0) is_identity = false;
        }
        if (is_identity) identity_at = static_cast<int>(out.elements.size());
        out.elements.emplace_back(m, std::span<const double>{c.data(), static_cast<std::size_t>(nf)});
        int fi = nf - 1;
        for (; fi >= 0; --fi) {
            if (++idx[static_cast<std::size_t>(fi)] < grids[static_cast<std::size_t>(fi)].size()) break;
            idx[static_cast<std::size_t>(fi)] = 0;
        }
        if (fi < 0) break;
    }
    if (identity_at < 0) throw std::logic_error("grid construction lost the identity element");
    out.identity_index = identity_at;
    return out;
}

}  // namespace

GroupGrid make_grid(const Manifold& m, int resolution) {
    if (resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");
    std::vector<std::vector<double>> grids;
    for (int fi = 0; fi < m.factor_count(); ++fi) grids.push_back(factor_grid(m.factor(fi), resolution));
    return assemble(m, grids);
}

GroupGrid evaluation_grid(const Manifold& m, int rotation_order, const std::vector<double>& scales) {
    if (rotation_order < 1) throw std::invalid_argument("rotation order must be >= 1");
    std::vector<std::vector<double>> grids;
    for (int fi = 0; fi < m.factor_count(); ++fi) {
        const Factor& f = m.factor(fi);
        switch (f.kind) {
            case FactorKind::SO2: {
                std::vector<double> g;
                for (int j = 0; j < rotation_order; ++j) g.push_back(kTwoPi * j / rotation_order);
                grids.push_back(std::move(g));
                break;
            }
            case FactorKind::Cyclic:
                grids.push_back(factor_grid(f, rotation_order));
                break;
            case FactorKind::LogScale: {
                std::vector<double> g;
                bool has_identity = false;
                for (double s : scales) {
                    if (!(s > 0.0)) throw std::invalid_argument("scale factors must be positive");
                    has_identity = has_identity || s == 1.0;
                    g.push_back(s == 1.0 ? 0.0 : std::log(s));
                }
                if (g.empty() || !has_identity)
                    throw std::invalid_argument("scale list must contain 1 (the identity)");
                grids.push_back(std::move(g));
                break;
            }
        }
    }
    return assemble(m, grids);
}

}  // namespace galign
