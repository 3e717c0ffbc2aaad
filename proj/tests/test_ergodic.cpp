#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "denjoy/ergodic.hpp"

using namespace denjoy;

namespace {

// Stationary measure of the PSL pair, solved once: a coarse Cesaro average, then plain
// diffusion until the residual stops improving.
const StationaryReport& psl_stationary() {
    static const StationaryReport r = solve_stationary(psl_pair(), MeasureCDF::lebesgue(), 1e-3, 100000, 3000);
    return r;
}

double lip_err(const Diffeo& a, const Diffeo& b) {
    double e = 0.0;
    for (double x : linspace(0.0, 1.0, 101)) e = std::max(e, circle_dist(a(x), b(x)));
    return e;
}

// random piecewise-linear test function on the circle, 8 nodes
std::function<double(double)> random_pl(Rng& rng) {
    std::vector<double> ys(9);
    for (auto& y : ys) y = rng.uniform() * 2 - 1;
    ys.back() = ys.front();
    return [ys](double x) {
        const double t = frac(x) * 8;
        const int i = std::min(int(t), 7);
        return ys[std::size_t(i)] + (t - i) * (ys[std::size_t(i) + 1] - ys[std::size_t(i)]);
    };
}

}  // namespace

TEST(GeneratorMeasure, Validation) {
    EXPECT_THROW(GeneratorMeasure::make({rotation(0.1)}, {0.5}), config_error);
    EXPECT_THROW(GeneratorMeasure::make({rotation(0.1), rotation(0.2)}, {1.0, 0.0}), config_error);
    EXPECT_THROW(GeneratorMeasure::make({rotation(0.1), affine(1.0, 0.0)}, {0.5, 0.5}), config_error);
    EXPECT_FALSE(rotation_measure().symmetric);
    EXPECT_TRUE(symmetric_rotation_measure().symmetric);
    const auto psl = psl_pair();
    EXPECT_TRUE(psl.symmetric);
    ASSERT_EQ(psl.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(psl.weights[i], 0.25);
        EXPECT_EQ(psl.inverse_index[std::size_t(psl.inverse_index[i])], int(i));
    }
    // unequal inverse weights break symmetry
    const auto f = north_south(4.0);
    EXPECT_FALSE(GeneratorMeasure::make({f, f.inverse()}, {0.3, 0.7}).symmetric);
}

TEST(GeneratorMeasure, NorthSouthFixedPoints) {
    const auto g = north_south(100.0, 0.2);
    EXPECT_NEAR(circle_dist(g(0.2), 0.2), 0.0, 1e-14);
    EXPECT_NEAR(circle_dist(g(0.7), 0.7), 0.0, 1e-14);
    EXPECT_NEAR(g.deriv(0.2), 0.01, 1e-12);
    EXPECT_NEAR(g.deriv(0.7), 100.0, 1e-9);
}

TEST(GeneratorMeasure, LeftProductMatchesComposition) {
    const auto mu = psl_pair();
    const auto w = sample_word(mu.law(), 12, 4).word;
    std::vector<Letter> letters;
    for (int k : w) letters.push_back({mu.generators[std::size_t(k)], 1});
    const auto direct = word(letters);
    const auto fast = left_product(mu.generators, w, w.size());
    EXPECT_LT(lip_err(direct, fast), 1e-9);
}

TEST(Measure, Constructors) {
    const auto L = MeasureCDF::lebesgue(256);
    EXPECT_DOUBLE_EQ(L.total_mass(), 1.0);
    EXPECT_DOUBLE_EQ(L.cdf(0.3), 0.3);
    EXPECT_DOUBLE_EQ(L.quantile(0.25), 0.25);
    const auto d = MeasureCDF::dirac(0.4, 256);
    EXPECT_DOUBLE_EQ(d.cdf_left(0.4), 0.0);
    EXPECT_DOUBLE_EQ(d.cdf(0.4), 1.0);
    EXPECT_DOUBLE_EQ(d.mass(0.4, 0.4), 1.0);
    EXPECT_THROW(MeasureCDF(100, true), config_error);
    EXPECT_THROW(MeasureCDF::from_parts({0.0, 0.6, 0.5}, {}, true), domain_error);
    EXPECT_THROW(MeasureCDF::from_parts({0.0, 0.5, 0.9}, {}, true), domain_error);
    const auto m = MeasureCDF::from_parts({0.0, 0.25, 0.5}, {{0.75, 0.5}}, true);
    EXPECT_DOUBLE_EQ(m.cdf(0.75), 0.875);
    EXPECT_DOUBLE_EQ(m.cdf_left(0.75), 0.375);
    EXPECT_DOUBLE_EQ(m.lifted(1.75), 1.875);
    EXPECT_DOUBLE_EQ(m.lifted_inverse(1.5), 1.75);
}

TEST(Measure, LightAtomsFoldIntoTheGrid) {
    std::vector<double> F(17);
    for (int i = 0; i <= 16; ++i) F[std::size_t(i)] = (1.0 - 2e-7) * i / 16;
    const auto m = MeasureCDF::from_parts(F, {{0.3, 1e-7}, {0.31, 1e-7}}, true);
    EXPECT_EQ(m.atoms().size(), 2u);
    const auto pushed = pushforward(m, identity_circle());
    EXPECT_TRUE(pushed.atoms().empty());
    EXPECT_NEAR(pushed.total_mass(), 1.0, 1e-15);
    EXPECT_NEAR(pushed.cdf(0.3125) - pushed.cdf(0.25), 1.0 / 16 + 2e-7 - 2e-7 / 16, 1e-15);
}

TEST(Diffuse, Identity) {
    const auto id = GeneratorMeasure::make({identity_circle()}, {1.0});
    const auto nu = MeasureCDF::from_parts({0.0, 0.1, 0.3, 0.35, 0.5}, {{0.2, 0.5}}, true);
    EXPECT_EQ(sup_cdf_distance(diffuse(nu, id), nu), 0.0);
    const auto r = solve_stationary(id, nu, 1e-9, 10);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(sup_cdf_distance(r.measure, nu), 0.0);
}

TEST(Diffuse, RotationPreservesLebesgue) {
    const auto L = MeasureCDF::lebesgue();
    EXPECT_LT(sup_cdf_distance(diffuse(L, rotation_measure()), L), 1e-12);
    EXPECT_LT(sup_cdf_distance(diffuse(L, symmetric_rotation_measure()), L), 1e-12);
}

TEST(Diffuse, PointMassSplits) {
    const auto f = north_south(4.0), g = north_south(4.0, 0.25);
    const auto mu = GeneratorMeasure::make({f, g}, {0.5, 0.5});
    const auto out = diffuse(MeasureCDF::dirac(0.3), mu);
    ASSERT_EQ(out.atoms().size(), 2u);
    EXPECT_EQ(out.continuous_mass(), 0.0);
    const double a = f(0.3), b = g(0.3);
    EXPECT_DOUBLE_EQ(out.mass(a, a), 0.5);
    EXPECT_DOUBLE_EQ(out.mass(b, b), 0.5);
}

TEST(Diffuse, MassConservationAndMonotonicity) {
    const auto mu = psl_pair();
    const Diffusion D(mu, 1024);
    MeasureCDF nu = MeasureCDF::mix(MeasureCDF::lebesgue(1024), 0.5, MeasureCDF::dirac(0.123, 1024), 0.5);
    for (int n = 0; n < 200; ++n) {
        nu = D(nu);
        ASSERT_NEAR(nu.total_mass(), 1.0, 1e-12) << n;
        const auto& F = nu.grid_cdf();
        for (std::size_t i = 1; i < F.size(); ++i) ASSERT_GE(F[i], F[i - 1]);
        for (const auto& a : nu.atoms()) ASSERT_GT(a.mass, 0.0);
    }
    const Diffusion E(interval_escape_pair(), 1024);
    MeasureCDF iv = MeasureCDF::mix(MeasureCDF::lebesgue(1024, false), 0.5, MeasureCDF::dirac(0.5, 1024, false), 0.5);
    for (int n = 0; n < 200; ++n) {
        iv = E(iv);
        ASSERT_NEAR(iv.total_mass(), 1.0, 1e-12) << n;
    }
}

TEST(Diffuse, Duality) {
    const auto mu = psl_pair();
    const auto& nu = psl_stationary().measure;
    const auto mixed = MeasureCDF::mix(nu, 0.7, MeasureCDF::dirac(0.42), 0.3);
    const auto pushed = diffuse(mixed, mu);
    Rng rng = Rng::substream(17, 0);
    for (int k = 0; k < 10; ++k) {
        const auto psi = random_pl(rng);
        const double lhs = integrate(mixed, [&](double x) { return diffusion_operator(mu, psi, x); });
        const double rhs = integrate(pushed, psi);
        EXPECT_NEAR(lhs, rhs, 1e-6) << k;
    }
}

TEST(Stationary, RotationFromAPointMass) {
    const auto r = solve_stationary(rotation_measure(), MeasureCDF::dirac(0.3), 2.5e-4, 100000);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(sup_cdf_distance(r.measure, MeasureCDF::lebesgue()), 1e-3);
    EXPECT_NEAR(r.residual, stationarity_residual(rotation_measure(), r.measure), 1e-15);
}

TEST(Stationary, NorthSouthConcentratesAtFixedPoints) {
    const auto f = north_south(4.0, 0.1);
    const auto mu = GeneratorMeasure::symmetrized({f}, {1.0});
    const auto r = solve_stationary(mu, MeasureCDF::lebesgue(), 1e-4, 100000);
    ASSERT_TRUE(r.converged);
    const auto& nu = r.measure;
    const double near = nu.lifted(0.2) - nu.lifted_left(0.0) + nu.lifted(0.7) - nu.lifted_left(0.5);
    EXPECT_GE(near, 0.8);
}

TEST(Stationary, PslResidualReverified) {
    const auto& r = psl_stationary();
    ASSERT_TRUE(r.converged);
    const double again = sup_cdf_distance(diffuse(r.measure, psl_pair()), r.measure);
    EXPECT_EQ(again, r.residual);
    EXPECT_LT(again, 1e-6);
    EXPECT_TRUE(r.measure.atoms().empty());
}

TEST(Stationary, Uniqueness) {
    const auto mu = psl_pair();
    const auto u = check_uniqueness(mu, MeasureCDF::lebesgue(), MeasureCDF::dirac(0.3), 1e-3, 1e-3, 100000, 3000);
    EXPECT_TRUE(u.conclusive);
    EXPECT_TRUE(u.unique) << u.distance;
    EXPECT_LT(u.distance, 1e-3);
    // no uniqueness for the identity: the seeds come back unchanged
    const auto id = GeneratorMeasure::make({identity_circle()}, {1.0});
    const auto a = MeasureCDF::dirac(0.1), b = MeasureCDF::lebesgue();
    const auto v = check_uniqueness(id, a, b, 1e-3, 1e-9, 10);
    EXPECT_TRUE(v.conclusive);
    EXPECT_FALSE(v.unique);
    EXPECT_DOUBLE_EQ(v.distance, sup_cdf_distance(a, b));
}

TEST(Stationary, Rejects) {
    EXPECT_THROW(solve_stationary(psl_pair(), MeasureCDF::lebesgue(), 0.0, 10), config_error);
    const auto r = solve_stationary(psl_pair(), MeasureCDF::dirac(0.3), 1e-9, 5);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 5);
}

TEST(Arcs, AlphaNu) {
    const auto L = MeasureCDF::lebesgue();
    for (double d : {0.5, 0.2, 0.05, 0.01}) EXPECT_NEAR(alpha_nu(L, d), 1 - d, 1e-12);
    const auto half = MeasureCDF::mix(L, 0.5, MeasureCDF::dirac(0.3), 0.5);
    for (double d : {0.2, 0.05, 0.01}) EXPECT_NEAR(alpha_nu(half, d), (1 - d) / 2, 1e-12);
    const auto& nu = psl_stationary().measure;
    double prev = 0.0;
    for (double d : {0.5, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01}) {
        const double a = alpha_nu(nu, d);
        EXPECT_GT(a, prev) << d;
        prev = a;
    }
    EXPECT_GT(prev, 0.95);
    EXPECT_THROW(alpha_nu(L, 0.0), domain_error);
}

TEST(Arcs, SmallestArc) {
    const auto L = MeasureCDF::lebesgue(1024);
    EXPECT_NEAR(smallest_arc(L, 0.3).length, 0.3, 1e-12);
    const auto d = MeasureCDF::dirac(0.999, 1024);
    EXPECT_NEAR(smallest_arc(d, 0.95).length, 0.0, 1e-15);
    const auto two = MeasureCDF::mix(MeasureCDF::dirac(0.95, 1024), 0.5, MeasureCDF::dirac(0.05, 1024), 0.5);
    const auto a = smallest_arc(two, 1.0);
    EXPECT_NEAR(a.length, 0.1, 1e-12);  // across 0
    EXPECT_NEAR(a.start, 0.95, 1e-12);
    EXPECT_NEAR(max_arc_mass(two, 0.1), 1.0, 1e-15);
    EXPECT_NEAR(max_arc_mass(two, 0.05), 0.5, 1e-15);
}

TEST(Collapse, PslPair) {
    const auto r = dirac_collapse(psl_pair(), psl_stationary().measure, 200, 100, 0.05, 4);
    EXPECT_GE(r.fraction, 0.95);
    ASSERT_EQ(r.checkpoints.back(), 100);
    EXPECT_GT(r.median_max_mass.back(), 0.95);
    EXPECT_GE(r.median_max_mass.back(), r.median_max_mass.front());
}

TEST(Collapse, RotationNeverCollapses) {
    const auto r = dirac_collapse(rotation_measure(), MeasureCDF::lebesgue(), 50, 100, 0.05, 4);
    EXPECT_EQ(r.fraction, 0.0);
    for (double m : r.median_max_mass) EXPECT_NEAR(m, 0.05, 1e-9);
}

TEST(Collapse, ContractionTowardTheAttractor) {
    const auto f = north_south(4.0, 0.2);
    const auto mu = GeneratorMeasure::make({f}, {1.0});
    const auto nu = MeasureCDF::dirac(0.2);
    const auto r = dirac_collapse(mu, nu, 5, 20, 0.05);
    EXPECT_EQ(r.fraction, 1.0);
    // a non-stationary measure is refused
    EXPECT_THROW(dirac_collapse(mu, MeasureCDF::lebesgue(), 5, 20, 0.05), precondition_error);
    // Lebesgue pushed forward by f^20 sits next to the attractor
    const auto pushed = pushforward(MeasureCDF::lebesgue(), left_product({f}, std::vector<int>(20, 0), 20));
    const auto arc = smallest_arc(pushed, 0.95);
    EXPECT_LT(arc.length, 1e-3);
    EXPECT_LT(circle_dist(arc.start, 0.2), 1e-3);
}

TEST(Contraction, Rotation) {
    const auto r = contraction_coefficient(rotation(golden));
    EXPECT_NEAR(r.c, 0.5, r.grid_step);
}

TEST(Contraction, NorthSouthAndWitnesses) {
    const auto h = north_south(100.0, 0.3);
    const auto r = contraction_coefficient(h);
    EXPECT_LE(r.c, 0.1);
    const double step = r.grid_step;
    EXPECT_LE(r.I.length, r.c + step);
    EXPECT_LE(r.J.length, r.c + step);
    // the closed complement of I, [I.end, I.start + 1], lands on J
    EXPECT_LT(circle_dist(h(r.I.start + r.I.length), r.J.start), 1e-12);
    EXPECT_LT(circle_dist(h(r.I.start), r.J.start + r.J.length), 1e-12);
    // iterates contract monotonically
    double prev = 1.0;
    for (int n = 1; n <= 6; ++n) {
        const double c = contraction_coefficient(left_product({north_south(2.0)}, std::vector<int>(std::size_t(n), 0), std::size_t(n))).c;
        EXPECT_LT(c, prev) << n;
        prev = c;
    }
}

TEST(Contraction, InverseSymmetry) {
    const auto mu = psl_pair();
    for (int t = 0; t < 100; ++t) {
        const auto w = sample_word(mu.law(), 1 + t % 30, trial_seed(31, std::uint64_t(t))).word;
        const auto h = left_product(mu.generators, w, w.size());
        const double step = 1.0 / default_grid;
        EXPECT_NEAR(contraction_coefficient(h).c, contraction_coefficient(h.inverse()).c, 2 * step) << t;
    }
}

TEST(Contraction, PslAlongWords) {
    const auto s = contraction_along_words(psl_pair(), 200, 100, 5);
    ASSERT_EQ(s.checkpoints.size(), 4u);
    EXPECT_LT(s.median.back(), 0.05);
    EXPECT_TRUE(s.nonincreasing);
    const auto rot = contraction_along_words(rotation_measure(), 5, 50, 5);
    for (double m : rot.median) EXPECT_NEAR(m, 0.5, 1.0 / default_grid);
}

TEST(DEta, Membership) {
    for (double eta : {0.05, 0.1, 0.2}) EXPECT_FALSE(d_eta_membership(rotation(golden), eta).member);
    const auto g = north_south(100.0, 0.4);
    const auto r = d_eta_membership(g, 0.1);
    ASSERT_TRUE(r.member);
    EXPECT_LT(r.sup_deriv, 1.0);
    EXPECT_LE(r.J.length, 0.1);
    EXPECT_THROW(d_eta_membership(g, 0.25), domain_error);
    // monotone in eta while the separation constraint can still be met
    bool seen = false;
    for (double eta : {0.01, 0.02, 0.05, 0.08, 0.1, 0.12, 0.15}) {
        const auto m = d_eta_membership(g, eta);
        if (seen) {
            EXPECT_TRUE(m.member || m.size_and_separation_ok == 0) << eta;
        }
        seen = seen || m.member;
    }
    EXPECT_TRUE(seen);
}

TEST(MorseSmale, NorthSouth) {
    const auto r = morse_smale_check(north_south(100.0, 0.1), 0.1);
    EXPECT_TRUE(r.premise);
    ASSERT_TRUE(r.two_hyperbolic);
    for (const auto& p : r.inventory) {
        if (p.kind == FixedKind::contracting) {
            EXPECT_NEAR(p.x, 0.1, 1e-12);
            EXPECT_NEAR(p.derivative, 0.01, 1e-10);
            EXPECT_EQ(p.topology, Topology::attracting);
        } else {
            EXPECT_NEAR(p.x, 0.6, 1e-12);
            EXPECT_NEAR(p.derivative, 100.0, 1e-8);
            EXPECT_EQ(p.topology, Topology::repelling);
        }
    }
    EXPECT_TRUE(fixed_point_inventory(rotation(golden)).empty());
}

TEST(MorseSmale, HuntedWords) {
    const auto mu = psl_pair();
    int premise = 0;
    for (int t = 0; t < 100; ++t) {
        const auto w = sample_word(mu.law(), 10 + t % 31, trial_seed(41, std::uint64_t(t))).word;
        const auto r = morse_smale_check(left_product(mu.generators, w, w.size()), 0.05);
        EXPECT_TRUE(r.ok()) << t;
        premise += r.premise;
    }
    EXPECT_GE(premise, 10);
}

TEST(MorseSmale, StrongRepellerIsFound) {
    // the displacement jumps by almost a full turn across the repelling cell
    const auto h = north_south(1e8, 0.3);
    const auto inv = fixed_point_inventory(h, 256);
    ASSERT_EQ(inv.size(), 2u);
}

TEST(Lyapunov, Rotation) {
    const auto mu = rotation_measure();
    const auto r = lyapunov_exponent(mu, MeasureCDF::lebesgue(), 100, 100);
    EXPECT_EQ(r.quadrature, 0.0);
    EXPECT_EQ(r.birkhoff_mean, 0.0);
    EXPECT_TRUE(r.agree);
}

TEST(Lyapunov, PslIsNegative) {
    const auto r = lyapunov_exponent(psl_pair(), psl_stationary().measure, 300, 1000, 3);
    EXPECT_LT(r.quadrature, 0.0);
    EXPECT_LT(r.ci99_hi(), 0.0);
    EXPECT_TRUE(r.agree) << r.quadrature << " vs " << r.birkhoff_mean << " +- " << r.birkhoff_se;
    EXPECT_LT(r.quadrature_error, 1e-4);
}

TEST(Lyapunov, SignsAgreeAcrossScenarios) {
    struct Case {
        GeneratorMeasure mu;
        MeasureCDF nu;
    };
    const auto ns = GeneratorMeasure::symmetrized({north_south(4.0, 0.1)}, {1.0});
    const std::vector<Case> cases = {
        {rotation_measure(), MeasureCDF::lebesgue()},
        {symmetric_rotation_measure(), MeasureCDF::lebesgue()},
        {psl_pair(), psl_stationary().measure},
        {ns, solve_stationary(ns, MeasureCDF::lebesgue(), 1e-4, 100000, 2000).measure},
    };
    for (const auto& c : cases) {
        const auto r = lyapunov_exponent(c.mu, c.nu, 200, 500, 9);
        const int sq = (r.quadrature > 1e-9) - (r.quadrature < -1e-9);
        const int sb = r.ci99_lo() > 0 ? 1 : r.ci99_hi() < 0 ? -1 : 0;
        EXPECT_EQ(sq, sb) << r.quadrature << " " << r.birkhoff_mean << " +- " << r.birkhoff_se;
    }
    EXPECT_THROW(lyapunov_exponent(psl_pair(), MeasureCDF::dirac(0.3), 10, 10), precondition_error);
}

TEST(Escape, FleesToTheEndpoints) {
    const auto mu = interval_escape_pair();
    EXPECT_TRUE(mu.symmetric);
    const auto r = interval_escape(mu, MeasureCDF::dirac(0.5, default_grid, false), 10000);
    ASSERT_EQ(r.trace.size(), 10001u);
    EXPECT_EQ(r.trace.front(), 1.0);
    EXPECT_LT(r.final_mass, 0.1);
    EXPECT_TRUE(r.escaped);
    EXPECT_NEAR(r.final_mass + r.left_mass + r.right_mass, 1.0, 1e-12);
    // the walk in log-odds coordinates is a simple random walk: the middle keeps about
    // 9 sites of the lattice, each with mass ~ 1/sqrt(2 pi n)
    EXPECT_NEAR(r.trace[2500], 9.0 / std::sqrt(2 * pi * 2500), 0.03);
}

TEST(Escape, Preconditions) {
    const auto f = mobius_interval({1.0, 0.0, -1.0, 2.0});
    EXPECT_THROW(interval_escape(GeneratorMeasure::make({f, f.inverse()}, {0.3, 0.7}),
                                 MeasureCDF::dirac(0.5, 64, false), 10),
                 precondition_error);
    EXPECT_THROW(interval_escape(GeneratorMeasure::make({affine(1.0, 0.0)}, {1.0}), MeasureCDF::dirac(0.5, 64, false), 10),
                 precondition_error);
    EXPECT_THROW(interval_escape(psl_pair(), MeasureCDF::dirac(0.5, 64), 10), domain_error);
}

TEST(Escape, SymmetryIntegral) {
    const auto id = affine(1.0, 0.0);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
        const auto r = symmetry_integral_check(id, t);
        EXPECT_TRUE(r.holds && r.equality);
        EXPECT_NEAR(r.lhs, r.rhs, 1e-12);
    }
    const auto f = mobius_interval({1.0, 0.0, -1.0, 2.0});
    const auto half = symmetry_integral_check(f, 0.5);
    EXPECT_TRUE(half.holds);
    EXPECT_FALSE(half.equality);
    EXPECT_GT(half.lhs - half.rhs, 1e-3);
    for (double t : {0.0, 1.0}) EXPECT_TRUE(symmetry_integral_check(f, t).equality);
    // random maps x -> (1+c) x / (c x + 1) fixing 0 and 1
    Rng rng = Rng::substream(51, 0);
    for (int k = 0; k < 1000; ++k) {
        const double c = -0.9 + 4 * rng.uniform(), t = rng.uniform();
        const auto g = mobius_interval({1 + c, 0.0, c, 1.0});
        const auto r = symmetry_integral_check(g, t);
        EXPECT_TRUE(r.holds) << c << " " << t;
        EXPECT_EQ(r.equality, std::abs(g(t) - t) < 1e-9);
        if (!r.equality) {
            EXPECT_GT(r.lhs, r.rhs);
        }
    }
    EXPECT_THROW(symmetry_integral_check(affine(0.5, 0.25), 0.5), precondition_error);
}

TEST(Conjugation, RotationIsUnchanged) {
    const auto mu = symmetric_rotation_measure();
    const auto r = conjugate_by_cdf(mu, MeasureCDF::lebesgue());
    ASSERT_TRUE(r.ok);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        EXPECT_LT(lip_err(r.conjugated.generators[k], mu.generators[k]), 1e-12);
        EXPECT_NEAR(r.lipschitz[k], 1.0, 1e-9);
    }
}

TEST(Conjugation, PslLipschitzBounds) {
    const auto mu = psl_pair();
    const auto& nu = psl_stationary().measure;
    const auto r = conjugate_by_cdf(mu, nu);
    EXPECT_TRUE(r.ok);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        EXPECT_LE(r.lipschitz[k], r.bound[k] * 1.01);
        EXPECT_NEAR(r.bound[k], 4.0, 1e-12);
    }
    const auto lip = lip_inequality_check(mu, nu, 1000, 1e-9, 3);
    EXPECT_EQ(lip.checks, 4000);
    EXPECT_EQ(lip.violations, 0) << lip.worst;
}

TEST(Conjugation, InventoriesPreserved) {
    const auto mu = psl_pair();
    const auto& nu = psl_stationary().measure;
    const auto conj = conjugate_by_cdf(mu, nu).conjugated;
    int compared = 0;
    for (int t = 0; t < 40; ++t) {
        // free reduction; the identity has every point fixed
        std::vector<int> w;
        for (int k : sample_word(mu.law(), 1 + t % 8, trial_seed(61, std::uint64_t(t))).word) {
            if (!w.empty() && mu.inverse_index[std::size_t(w.back())] == k)
                w.pop_back();
            else
                w.push_back(k);
        }
        if (w.empty()) continue;
        const auto a = fixed_point_inventory(left_product(mu.generators, w, w.size()));
        const auto b = fixed_point_inventory(left_product(conj.generators, w, w.size()));
        ASSERT_EQ(a.size(), b.size()) << t;
        std::vector<Topology> ta, tb;
        for (const auto& p : a) ta.push_back(p.topology);
        for (const auto& p : b) tb.push_back(p.topology);
        std::sort(ta.begin(), ta.end());
        std::sort(tb.begin(), tb.end());
        EXPECT_EQ(ta, tb) << t;
        // contracting fixed points attract, in either picture
        for (const auto& p : a)
            if (p.kind != FixedKind::undecided) {
                EXPECT_EQ(p.kind == FixedKind::contracting, p.topology == Topology::attracting);
            }
        // and the conjugacy carries the fixed points across
        for (std::size_t i = 0; i < a.size() && a.size() == b.size(); ++i) {
            double best = 1.0;
            for (const auto& q : b) best = std::min(best, circle_dist(q.x, frac(nu.lifted(a[i].x))));
            EXPECT_LT(best, 1e-3) << t;
        }
        ++compared;
    }
    EXPECT_GE(compared, 30);
}

TEST(Conjugation, Preconditions) {
    EXPECT_THROW(conjugate_by_cdf(psl_pair(), MeasureCDF::dirac(0.3)), precondition_error);
    std::vector<double> F(9);
    for (int i = 0; i <= 8; ++i) F[std::size_t(i)] = std::min(1.0, i / 4.0);
    EXPECT_THROW(conjugate_by_cdf(psl_pair(), MeasureCDF::from_parts(F, {}, true)), precondition_error);
}
