#include "galign/classifier.hpp"

#include <stdexcept>

#include "galign/util.hpp"

namespace galign {

int toy_classify(const Specimen& x, const Canonicalizer& c, std::span<const PointSet> class_templates,
                 const GroupGrid& grid, bool refine) {
    if (class_templates.empty()) throw std::invalid_argument("classifier needs class templates");
    const Element g = canonicalize(c, x, grid, refine);
    const PointSet aligned = mat3_apply(representation(inverse(g)), x.observed());
    int best = 0;
    double best_d = chamfer_distance(aligned, class_templates[0]);
    for (std::size_t k = 1; k < class_templates.size(); ++k) {
        const double d = chamfer_distance(aligned, class_templates[k]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

double accuracy_under_transform(const Dataset& d, const Element& g, const Canonicalizer& c,
                                const GroupGrid& canon_grid, int workers, bool refine) {
    if (d.specimens.empty()) return 0.0;
    std::vector<int> hits(d.specimens.size(), 0);
    parallel_for(d.specimens.size(), workers, [&](std::size_t i) {
        const Specimen probe = transformed(d.specimens[i], g);
        const int pred = toy_classify(probe, c, d.class_shapes, canon_grid, refine);
        hits[i] = (pred == d.specimens[i].class_label) ? 1 : 0;
    });
    long total = 0;
    for (int h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(d.specimens.size());
}

}  // namespace galign
