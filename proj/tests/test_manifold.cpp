#include <doctest.h>

#include <cmath>
#include <vector>

#include "galign/manifold.hpp"
#include "galign/pose_distribution.hpp"
#include "galign/random.hpp"
#include "galign/util.hpp"

using namespace galign;

namespace {

std::vector<Manifold> all_manifolds() {
    return {Manifold::so2(), Manifold::cyclic(17), Manifold::log_scale(0.8, 1.25),
            Manifold::parse("so2*logscale:0.8:1.25"),
            Manifold::parse("so2*logscale:0.8:1.25@1,0.5")};
}

Element random_element(const Manifold& m, RandomStream& rng) {
    std::vector<double> c;
    for (int i = 0; i < m.factor_count(); ++i) {
        const Factor& f = m.factor(i);
        switch (f.kind) {
            case FactorKind::SO2: c.push_back(rng.uniform(0.0, kTwoPi)); break;
            case FactorKind::Cyclic: c.push_back(static_cast<double>(rng.uniform_index(f.order))); break;
            case FactorKind::LogScale: c.push_back(rng.uniform(f.log_min, f.log_max)); break;
        }
    }
    return Element(m, c);
}

}  // namespace

TEST_SUITE_BEGIN("manifold");

TEST_CASE("composition follows the group law") {
    const Element q = so2_element(kPi / 2);
    CHECK(compose(q, q).coord(0) == doctest::Approx(kPi).epsilon(1e-15));

    const Element a = cyclic_element(4, 3);
    const Element b = cyclic_element(4, 2);
    CHECK(compose(a, b).coord(0) == 1.0);

    const Manifold rs = Manifold::parse("so2*logscale:0.8:1.25");
    const std::vector<double> coords = {kPi / 4, std::log(1.25)};
    const Element g(rs, coords);
    const Element same = compose(g, identity(rs));
    CHECK(same == g);

    CHECK_THROWS_AS(compose(so2_element(0.0), cyclic_element(4, 1)), std::invalid_argument);
}

TEST_CASE("inverse composes to the identity") {
    RandomStream rng(7);
    for (const auto& m : all_manifolds()) {
        for (int i = 0; i < 100; ++i) {
            const Element g = random_element(m, rng);
            CHECK(geodesic_distance(compose(g, inverse(g)), identity(m)) < 1e-12);
        }
    }
    CHECK(inverse(cyclic_element(17, 5)).coord(0) == 12.0);
    CHECK(inverse(log_scale_element(0.5, 2.0, 0.3)).coord(0) == -0.3);
}

TEST_CASE("geodesic distance basics") {
    CHECK(geodesic_distance(so2_element(0.0), so2_element(3 * kPi / 2)) ==
          doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(geodesic_distance(log_scale_element(0.5, 2.0, 0.0), log_scale_element(0.5, 2.0, std::log(1.25))) ==
          doctest::Approx(std::log(1.25)));
    RandomStream rng(11);
    for (const auto& m : all_manifolds()) {
        for (int i = 0; i < 100; ++i) {
            const Element g = random_element(m, rng);
            CHECK(geodesic_distance(g, g) == 0.0);
        }
    }
}

TEST_CASE("metric axioms hold on random triples") {
    RandomStream rng(13);
    for (const auto& m : all_manifolds()) {
        for (int i = 0; i < 1000; ++i) {
            const Element a = random_element(m, rng);
            const Element b = random_element(m, rng);
            const Element c = random_element(m, rng);
            const double dab = geodesic_distance(a, b);
            CHECK(dab == geodesic_distance(b, a));
            CHECK(dab <= geodesic_distance(a, c) + geodesic_distance(c, b) + 1e-12);
            CHECK(dab >= 0.0);
        }
    }
}

TEST_CASE("distances are translation invariant") {
    RandomStream rng(17);
    for (const auto& m : all_manifolds()) {
        for (int i = 0; i < 1000; ++i) {
            const Element a = random_element(m, rng);
            const Element g = random_element(m, rng);
            const Element h = random_element(m, rng);
            CHECK(std::fabs(geodesic_distance(compose(a, g), compose(a, h)) -
                            geodesic_distance(g, h)) < 1e-12);
        }
    }
}

TEST_CASE("log and exp are inverse and norm-consistent") {
    CHECK(log_map(so2_element(0.0), so2_element(kPi / 2))[0] == doctest::Approx(kPi / 2));
    CHECK(log_map(so2_element(0.0), so2_element(7 * kPi / 4))[0] == doctest::Approx(-kPi / 4));

    RandomStream rng(19);
    for (const auto& m : all_manifolds()) {
        for (int i = 0; i < 1000; ++i) {
            const Element base = random_element(m, rng);
            const Element g = random_element(m, rng);
            const Tangent v = log_map(base, g);
            CHECK(tangent_norm(m, v) == doctest::Approx(geodesic_distance(base, g)).epsilon(1e-12));
            CHECK(geodesic_distance(exp_map(base, v), g) < 1e-10);
        }
    }
}

TEST_CASE("cut locus resolves to the positive sign") {
    const Tangent v = log_map(so2_element(kPi / 2), so2_element(3 * kPi / 2));
    CHECK(v[0] == doctest::Approx(kPi));
    // even-order lattice has an antipode too
    const Tangent w = log_map(cyclic_element(4, 0), cyclic_element(4, 2));
    CHECK(w[0] == doctest::Approx(kPi));
}

TEST_CASE("exp wraps and clamps") {
    Tangent full;
    full[0] = kPi;
    CHECK(exp_map(so2_element(kPi), full).coord(0) == 0.0);

    Tangent half;
    half[0] = 0.5;
    const Element base = log_scale_element(0.8, 1.25, 0.0);
    CHECK(exp_map(base, half).coord(0) == doctest::Approx(std::log(1.25)));  // clamped
    half[0] = 0.1;
    CHECK(exp_map(base, half).coord(0) == doctest::Approx(0.1));
}

TEST_CASE("cyclic exp snaps to the lattice") {
    Tangent v;
    v[0] = 0.9 * kTwoPi / 17;  // nearest lattice point is one step
    CHECK(exp_map(cyclic_element(17, 3), v).coord(0) == 4.0);
}

TEST_CASE("representation is a homomorphism") {
    RandomStream rng(23);
    for (const auto& m : all_manifolds()) {
        for (int i = 0; i < 1000; ++i) {
            const Element g = random_element(m, rng);
            const Element h = random_element(m, rng);
            const Mat3 lhs = representation(compose(g, h));
            const Mat3 rhs = mat3_mul(representation(g), representation(h));
            for (int k = 0; k < 9; ++k) CHECK(lhs[k] == doctest::Approx(rhs[k]).epsilon(1e-12));
        }
        const Mat3 id = representation(identity(m));
        const Mat3 expect = mat3_identity();
        for (int k = 0; k < 9; ++k) CHECK(id[k] == expect[k]);
    }
}

TEST_CASE("cyclic subgroup embeds isometrically in the circle") {
    const int n = 17;
    for (int k1 = 0; k1 < n; ++k1) {
        for (int k2 = 0; k2 < n; ++k2) {
            const double dc = geodesic_distance(cyclic_element(n, k1), cyclic_element(n, k2));
            const double ds = geodesic_distance(so2_element(kTwoPi * k1 / n), so2_element(kTwoPi * k2 / n));
            CHECK(dc == doctest::Approx(ds).epsilon(1e-13));
        }
    }
}

TEST_CASE("manifold spec strings round-trip") {
    for (const auto& spec : {"so2", "c17", "logscale:0.8:1.25", "so2*logscale:0.8:1.25",
                             "so2*logscale:0.8:1.25@1,0.5"}) {
        const Manifold m = Manifold::parse(spec);
        CHECK(Manifold::parse(m.spec_string()) == m);
    }
    CHECK_THROWS_AS(Manifold::parse("so3"), ConfigError);
    CHECK_THROWS_AS(Manifold::parse("logscale:1.5:2"), ConfigError);  // s_min > 1
    CHECK_THROWS_AS(Manifold::parse("c0"), ConfigError);
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("sampling");

TEST_CASE("uniform circle draws have vanishing resultant") {
    const Manifold m = Manifold::so2();
    const PoseDistribution dist = PoseDistribution::parse(m, "uniform");
    RandomStream rng(101);
    double sx = 0, sy = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double theta = dist.sample(rng).coord(0);
        sx += std::cos(theta);
        sy += std::sin(theta);
    }
    CHECK(std::hypot(sx, sy) / n < 0.02);
}

TEST_CASE("von Mises draws concentrate at the requested mean") {
    const Manifold m = Manifold::so2();
    const PoseDistribution dist = PoseDistribution::parse(m, "vonmises:1:50");
    RandomStream rng(103);
    double sx = 0, sy = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double theta = dist.sample(rng).coord(0);
        sx += std::cos(theta);
        sy += std::sin(theta);
    }
    CHECK(std::fabs(std::atan2(sy, sx) - 1.0) < 0.01);
}

TEST_CASE("two-atom mixture splits evenly") {
    const Manifold m = Manifold::so2();
    const PoseDistribution dist =
        PoseDistribution::parse(m, "mixture:0.5~delta:0|0.5~delta:3.141592653589793");
    RandomStream rng(107);
    int at_zero = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (dist.sample(rng).coord(0) == 0.0) ++at_zero;
    CHECK(std::fabs(at_zero / static_cast<double>(n) - 0.5) < 0.02);
}

TEST_CASE("sampling is deterministic under a seed") {
    const Manifold m = Manifold::parse("so2*logscale:0.8:1.25");
    const PoseDistribution dist = PoseDistribution::parse(m, "vonmises:0:2*normal:0:0.1");
    RandomStream a(5), b(5);
    for (int i = 0; i < 200; ++i) CHECK(dist.sample(a) == dist.sample(b));
}

TEST_CASE("invalid distribution parameters are rejected at construction") {
    const Manifold m = Manifold::so2();
    CHECK_THROWS_AS(PoseDistribution::parse(m, "vonmises:0:-1"), ConfigError);
    CHECK_THROWS_AS(PoseDistribution::parse(m, "mixture:0.7~delta:0|0.5~delta:1"), ConfigError);
    CHECK_THROWS_AS(PoseDistribution::parse(m, "normal:0:0.1"), ConfigError);  // flat law on a circle
    CHECK_THROWS_AS(PoseDistribution::parse(m, "nonsense"), ConfigError);
}

TEST_CASE("circular variance helpers invert each other") {
    CHECK(von_mises_variance(0.0) == doctest::Approx(kPi * kPi / 3.0));
    CHECK(von_mises_variance(200.0) == doctest::Approx(1.0 / 200.0).epsilon(0.02));
    for (double target : {2.5, 1.0, 0.3, 0.05, 1e-3, 1e-6}) {
        const double kappa = kappa_for_variance(target);
        CHECK(von_mises_variance(kappa) == doctest::Approx(target).epsilon(1e-6));
    }
    CHECK(kappa_for_variance(4.0) == 0.0);  // above the uniform limit
}

TEST_CASE("sampled von Mises variance matches the quadrature") {
    const Manifold m = Manifold::so2();
    RandomStream rng(109);
    for (double kappa : {2.0, 20.0, 2000.0}) {
        double acc = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double theta = rng.von_mises(0.0, kappa);
            double d = std::fabs(theta);
            d = std::min(d, kTwoPi - d);
            acc += d * d;
        }
        CHECK(acc / n == doctest::Approx(von_mises_variance(kappa)).epsilon(0.02));
    }
    (void)m;
}

TEST_SUITE_END();
