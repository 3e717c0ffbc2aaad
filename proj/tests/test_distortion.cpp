#include <gtest/gtest.h>

#include <cmath>

#include "denjoy/distortion.hpp"
#include "denjoy/sacksteder.hpp"

using namespace denjoy;

namespace {
const Diffeo f_mob = mobius_interval({1.0, 0.0, -1.0, 4.0});  // x / (4 - x)
}

TEST(EllTau, AffineGeometricSeries) {
    const auto c = build_spring_example(SpringKind::affine);
    const auto gens = c.generators();
    for (double tau : {0.3, 0.6, 1.0}) {
        const auto w = sample_word(WordLaw::bernoulli({0.5, 0.5}), 400, 5).word;
        const auto s = ell_tau(gens, w, c.I, tau, 400);
        for (std::size_t n = 1; n < s.size(); ++n) ASSERT_GE(s[n], s[n - 1]);
        const double exact = std::pow(1.0 / 3.0, tau) / (1.0 - std::pow(3.0, -tau));
        EXPECT_NEAR(s.back(), exact, 1e-9) << tau;
    }
}

TEST(EllTau, DisjointImagesHaveTotalLengthAtMostOne) {
    const auto c = build_spring_example(SpringKind::mobius);
    const auto w = sample_word(WordLaw::bernoulli({0.5, 0.5}), 100, 2).word;
    EXPECT_LE(ell_tau(c.generators(), w, c.I, 1.0, 100).back(), 1.0);
}

TEST(EllTau, TruncationReportsLastValidStep) {
    GapSpec s;
    s.R = 10;
    s.min_mass_fraction = 0.0;
    const auto sys = build_circle_denjoy(s);
    const std::vector<int> w(20, 0);
    try {
        ell_tau(sys.generators(), w, sys.base_gap().interval(), 0.6, 20);
        FAIL();
    } catch (const truncation_error& e) {
        EXPECT_EQ(e.last_valid, 10);
    }
}

TEST(EllTau, UrnMeanBelowExpectationBound) {
    GapSpec s;
    s.R = 60;
    s.min_mass_fraction = 0.0;
    const auto sys = build_circle_denjoy(s);
    const auto I = sys.base_gap().interval();
    KahanSum mean;
    const int words = 200;
    for (int t = 0; t < words; ++t) {
        const auto w = sample_word(WordLaw::urn(2), 60, trial_seed(4, std::uint64_t(t))).word;
        mean.add(ell_tau(sys.generators(), w, I, 0.6, 60).back() / words);
    }
    EXPECT_LE(mean.value(), expectation_bound(sys.total_gap_mass(), 0.6, 2));
}

TEST(ExpectationBound, Values) {
    EXPECT_TRUE(std::isinf(expectation_bound(1.0, 0.5, 2)));
    EXPECT_TRUE(std::isinf(expectation_bound(1.0, 1.0 / 3.0, 3)));
    EXPECT_EQ(expectation_bound(0.7, 1.0, 2), 0.7);
    EXPECT_NEAR(expectation_bound(1.0, 0.75, 2), std::pow(std::riemann_zeta(3.0), 0.25), 1e-9);
    EXPECT_NEAR(expectation_bound(1.0, 0.75, 2), 1.04708, 1e-5);
    EXPECT_NEAR(expectation_bound(0.25, 0.6, 2), std::pow(0.25, 0.6) * std::pow(std::riemann_zeta(1.5), 0.4), 1e-9);
    // d = 3 against a long direct sum with an integral tail: C(k+2,2) ~ k^2/2
    KahanSum direct;
    const double p = 0.8 / 0.2;
    for (long k = 0; k < 200000; ++k) direct.add(std::pow((k + 1.0) * (k + 2.0) / 2.0, -p));
    EXPECT_NEAR(expectation_bound(1.0, 0.8, 3), std::pow(direct.value(), 0.2), 1e-9);
}

TEST(HolderConstants, LogDerivative) {
    EXPECT_EQ(log_deriv_holder_constant(rotation(0.3), 1.0, {0, 1}).constant, 0.0);
    EXPECT_EQ(log_deriv_holder_constant(affine(1.0 / 3.0, 0.0), 1.0, {0, 1}).constant, 0.0);
    EXPECT_NEAR(log_deriv_holder_constant(f_mob, 1.0, {0, 1}).constant, 2.0 / 3.0, 0.05 * 2.0 / 3.0);
    EXPECT_THROW(log_deriv_holder_constant(f_mob, 1.0, {0, 1}, 10), precondition_error);
}

TEST(Budget, LFormula) {
    const Interval I{0.2, 0.5};
    for (double C : {0.0, 0.5, 3.0})
        for (double M : {0.0, 0.4, 2.0}) {
            const auto b = Budget::make(0.7, C, M, I);
            EXPECT_NEAR(b.L * 2.0 * std::exp(std::exp2(0.7) * C * M), I.length(), 1e-15);
            EXPECT_LE(b.L, I.length() / 2);
        }
}

TEST(SchwartzControl, TrivialCases) {
    const Interval I{0.4, 0.5};
    const auto b = Budget::make(1.0, 1.0, 1.0, I);
    const std::vector<Diffeo> id{affine(1.0, 0.0)};
    const auto r = schwartz_control(id, {0, 0, 0}, I, b);
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.max_log_ratio, 0.0);
    const auto c = build_spring_example(SpringKind::affine);
    const auto w = sample_word(WordLaw::bernoulli({0.5, 0.5}), 30, 3).word;
    const auto r2 = schwartz_control(c.generators(), w, c.I, Budget::make(1.0, 0.0, 1.0, c.I));
    EXPECT_TRUE(r2.ok);
    EXPECT_NEAR(r2.max_log_ratio, 0.0, 1e-12);
}

TEST(SchwartzControl, ControlDomainViolationNamesStep) {
    const auto c = build_spring_example(SpringKind::affine);
    std::vector<std::optional<Interval>> control{Interval{0.0, 1.0}, Interval{0.5, 1.0}};
    const auto b = Budget::make(1.0, 0.0, 1.0, c.I);
    // g is applied at step 2 to f(I) = (1/9, 2/9), outside its control interval
    EXPECT_THROW(schwartz_control(c.generators(), {0, 1}, c.I, b, control), precondition_error);
}

TEST(SchwartzControl, DenjoyUrnWordPassesAndIsMonotone) {
    GapSpec s;
    s.R = 60;
    s.min_mass_fraction = 0.0;
    const auto sys = build_circle_denjoy(s);
    const auto I = sys.base_gap().interval();
    const double tau = 0.6;
    double C = 0.0;
    for (int j = 0; j < 2; ++j) C = std::max(C, holder_constant(sys, j, Modulus::power(tau), 4000, 5).constant);
    C *= budget_safety;
    int passes = 0;
    for (int t = 0; t < 10; ++t) {
        const auto w = sample_word(WordLaw::urn(2), 55, trial_seed(9, std::uint64_t(t))).word;
        const double M = ell_tau(sys.generators(), w, I, tau, 55).back();
        const auto b = Budget::make(tau, C, M, I);
        const auto r = schwartz_control(sys.generators(), w, I, b);
        EXPECT_TRUE(r.hypothesis_ok);
        if (!r.ok) continue;
        ++passes;
        const auto bigger = schwartz_control(sys.generators(), w, I, Budget{tau, 2 * C, 2 * M, I, b.L});
        EXPECT_TRUE(bigger.ok);
    }
    EXPECT_GE(passes, 8);
}

TEST(Detector, Examples) {
    const auto c = affine(1.0 / 3.0, 0.0);
    const auto cert = detect_hyperbolic_fixed_point(c, {0.0, 0.5});
    ASSERT_TRUE(cert);
    EXPECT_EQ(cert->fixed_point, 0.0);
    EXPECT_NEAR(cert->derivative, 1.0 / 3.0, 1e-15);
    EXPECT_FALSE(detect_hyperbolic_fixed_point(rotation(0.3), {0.0, 1.0}));
    // a parabolic fixed point is not certified
    EXPECT_FALSE(detect_hyperbolic_fixed_point(mobius_interval({-1.0, 2.0, -2.0, 3.0}), {0.5, 1.0}));
}

TEST(Detector, AffineOracleOnAllWordsOfLengthTen) {
    const auto c = build_spring_example(SpringKind::affine);
    const auto gens = c.generators();
    for (int bits = 0; bits < (1 << 10); ++bits) {
        std::vector<int> w(10);
        for (int k = 0; k < 10; ++k) w[std::size_t(k)] = (bits >> k) & 1;
        const auto cert = detect_hyperbolic_fixed_point(word_map(gens, w), {0.0, 1.0});
        ASSERT_TRUE(cert);
        ASSERT_NEAR(cert->fixed_point, affine_address_fixed_point(w), 1e-10);
        ASSERT_NEAR(cert->derivative * std::pow(3.0, 10), 1.0, 1e-14);
        ASSERT_LT(cert->residual, 1e-10);
    }
    // f g f
    const auto cert = detect_hyperbolic_fixed_point(word_map(gens, {0, 1, 0}), {0.0, 1.0});
    ASSERT_TRUE(cert);
    EXPECT_NEAR(cert->derivative, 1.0 / 27.0, 1e-16);
    EXPECT_NEAR(cert->fixed_point, (2.0 / 9.0) / (1.0 - 1.0 / 27.0), 1e-12);
}

TEST(C1Budget, AffinePair) {
    const auto c = build_spring_example(SpringKind::affine);
    const auto b = c1_budget(c.f, c.g, c.I, 1.0, 0.25);
    EXPECT_EQ(b.eps0, 1.0);  // derivative is constant
    EXPECT_LE(b.C_bar, 3.0 + 1e-12);
    const auto gens = c.generators();
    for (int t = 0; t < 20; ++t) {
        const auto w = sample_word(WordLaw::bernoulli({0.5, 0.5}), 1000, trial_seed(1, std::uint64_t(t))).word;
        EXPECT_TRUE(check_envelope(gens, w, linspace(c.I.lo, c.I.hi, 9), std::log(b.C_bar), 1.5).ok);
        EXPECT_TRUE(check_envelope(gens, w, linspace(c.I.lo, c.I.hi, 9), 0.0, 2.0).ok);
    }
}

TEST(C1Budget, MobiusPairEnvelopeAndPropagation) {
    const auto c = build_spring_example(SpringKind::mobius);
    const double eps = 0.25;
    const auto b = c1_budget(c.f, c.g, c.I, 1.0, eps);
    EXPECT_GT(b.eps0, 0.0);
    EXPECT_GT(b.eps1, 0.0);
    EXPECT_GT(b.eps1, b.eps0);  // the second ratio threshold is looser
    const auto gens = c.generators();
    const auto xs = linspace(c.I.lo, c.I.hi, 17);
    for (int t = 0; t < 30; ++t) {
        const auto w = sample_word(WordLaw::bernoulli({0.5, 0.5}), 1000, trial_seed(2, std::uint64_t(t))).word;
        const double logC = word_log_B(gens, w, c.I, eps) + std::log(b.C_bar);
        const auto env = check_envelope(gens, w, xs, logC, 2 - 2 * eps);
        ASSERT_TRUE(env.ok) << t << " at " << env.first_violation;
        const double C = std::exp(std::max(0.0, logC));
        const double x = 0.5;
        const auto p = c1_propagate(gens, C, eps, b.eps1, w, x, x + b.eps1 / (2 * C));
        EXPECT_TRUE(p.ok) << t;
        EXPECT_TRUE(c1_propagate(gens, C, eps, b.eps1, w, x, x).ok);
        EXPECT_THROW(c1_propagate(gens, C, eps, b.eps1, w, x, x + 2 * b.eps1 / C), precondition_error);
    }
}

TEST(Kopell, Variation) {
    EXPECT_NEAR(kopell_variation(affine(0.5, 0.0), 0.5).value, 0.0, 1e-15);
    EXPECT_NEAR(kopell_variation(f_mob, 0.9).value, 2.0 * std::log(4.0 / 3.1), 1e-9);
    EXPECT_THROW(kopell_variation(affine(1.0, 0.0), 0.5), precondition_error);
}

TEST(Kopell, RatioBoundHolds) {
    const auto r = kopell_check(f_mob, 0.9, 1000, 50, 3);
    EXPECT_TRUE(r.ok());
    EXPECT_LE(r.max_log_ratio, r.M);
    EXPECT_GT(r.max_log_ratio, 0.1 * r.M);
    const auto a = kopell_check(affine(0.5, 0.0), 0.5, 100, 50, 3);
    EXPECT_EQ(a.max_log_ratio, 0.0);
}

TEST(Grosero, Examples) {
    const auto id = grosero_bound(affine(1.0, 0.0), 1.0);
    EXPECT_EQ(id.max_displacement, 0.0);
    EXPECT_TRUE(id.ok);
    const auto bump = mobius_bump({0.0, 1.0}, 0.5);
    const auto r = grosero_bound(bump, 1.0);
    EXPECT_TRUE(r.ok);
    EXPECT_LE(r.max_displacement, r.C);
    EXPECT_THROW(grosero_bound(f_mob, 1.0), precondition_error);
}

TEST(Grosero, ShrinkingDomainsScaleAsPowerOfLength) {
    // g(x) = x + alpha x (L - x) has a fixed second derivative, so the bound scales as L^2
    const double alpha = 0.4;
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        const double L = std::ldexp(1.0, -k);
        Piece p{0.0, L, [=](double x) { return x + alpha * x * (L - x); },
                [=](double x) { return 1.0 + alpha * (L - 2 * x); }, {}};
        const auto g = piecewise({p}, false);
        const auto r = grosero_bound(g, 1.0);
        EXPECT_TRUE(r.ok);
        EXPECT_NEAR(r.max_displacement / (L * L), alpha / 4, 1e-6);
        if (k > 1) {
            EXPECT_NEAR(prev / r.max_displacement, 4.0, 1e-3);
        }
        prev = r.max_displacement;
    }
}

TEST(Cano, Series) {
    const auto a = cano_series(affine(1.0 / 3.0, 0.0), {1.0 / 3.0, 2.0 / 3.0}, 0.7, 200);
    const double e = 0.7 * 1.7;
    EXPECT_NEAR(a.partial_sums.back(), std::pow(1.0 / 3.0, e) / (1.0 - std::pow(3.0, -e)), 1e-12);
    EXPECT_TRUE(a.bounded_regime);
    EXPECT_TRUE(a.contracting);
    const auto g = cano_series(f_mob, {0.5, 0.6}, golden, 50);
    EXPECT_NEAR(g.exponent, 1.0, 1e-15);
    EXPECT_TRUE(g.bounded_regime);
    const auto one = cano_series(f_mob, {0.5, 0.6}, 1.0, 50);
    const auto lin = cano_series(f_mob, {0.5, 0.6}, golden, 50);
    EXPECT_LE(one.partial_sums.back(), lin.partial_sums.back() * lin.partial_sums.back());
    EXPECT_FALSE(cano_series(affine(2.0, 0.0, {0, 10}), {0.5, 0.6}, 0.5, 3).contracting);
}

TEST(TauD, Roots) {
    EXPECT_NEAR(tau_d(3), golden, 1e-12);
    EXPECT_NEAR(tau_d(4), 0.465571231876768, 1e-12);
    for (int d = 3; d <= 12; ++d) {
        const double t = tau_d(d);
        EXPECT_NEAR(t * std::pow(1 + t, d - 2), 1.0, 1e-12);
        EXPECT_GT(t, 1.0 / (d - 1));
    }
    EXPECT_THROW(tau_d(2), domain_error);
}
