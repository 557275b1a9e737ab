#include <gtest/gtest.h>

#include <cmath>

#include "degres/perturbations.hpp"
#include "degres/resonance.hpp"

using namespace degres;

namespace {

FrequencyProfile quad_profile(double nu = 1.0) { return families::CubicTwistOscillator{}.profile(0.0, 3.0, nu); }

double bessel_prime(int n, double x) { return 0.5 * (std::cyl_bessel_j(n - 1, x) - std::cyl_bessel_j(n + 1, x)); }

ResonanceSpec spec_at(int p, int q = 1, double I = 1.0)
{
    ResonanceSpec s;
    s.p = p;
    s.q = q;
    s.I = I;
    s.j = 2;
    s.bj = 1.0;
    return s;
}

} // namespace

TEST(FindResonanceLevels, DoubleRootOfQuadraticTwist)
{
    const auto r = find_resonance_levels(quad_profile(), 1, 1);
    ASSERT_EQ(r.levels.size(), 1u);
    const auto& l = r.levels[0];
    EXPECT_EQ(l.p, 1);
    EXPECT_EQ(l.q, 1);
    EXPECT_NEAR(l.I, 1.0, 1e-9);
    EXPECT_EQ(l.j, 2);
    EXPECT_NEAR(l.bj, 1.0, 1e-6);
    EXPECT_NEAR(l.s(), 1.0 / 3.0, 1e-15);
}

TEST(FindResonanceLevels, LinearFrequencyIsNonDegenerate)
{
    const FrequencyProfile prof{[](double I) { return I; }, 0.5, 2.0, 1.0};
    const auto r = find_resonance_levels(prof, 1, 1);
    ASSERT_EQ(r.levels.size(), 1u);
    EXPECT_NEAR(r.levels[0].I, 1.0, 1e-12);
    EXPECT_EQ(r.levels[0].j, 1);
    EXPECT_NEAR(r.levels[0].bj, 1.0, 1e-8);
}

TEST(FindResonanceLevels, NoRootBelowMinimumFrequency)
{
    const auto r = find_resonance_levels(quad_profile(), 2, 1);
    for (const auto& l : r.levels) EXPECT_FALSE(l.p == 2 && l.q == 1);
}

TEST(FindResonanceLevels, OnlyCoprimePairsAndSimpleRootsResidual)
{
    const FrequencyProfile prof{[](double I) { return I; }, 0.1, 3.5, 1.0};
    const auto r = find_resonance_levels(prof, 3, 3);
    for (const auto& l : r.levels) {
        EXPECT_EQ(std::gcd(l.p, l.q), 1);
        EXPECT_LT(std::abs(prof.omega(l.I) - prof.nu * l.q / l.p), 1e-12);
    }
    // q/p in {1, 2, 3, 1/2, 3/2, 1/3, 2/3}
    EXPECT_EQ(r.levels.size(), 7u);
}

TEST(FindResonanceLevels, DiscontinuityIsReportedNotReturned)
{
    const FrequencyProfile prof{[](double I) { return I < 1.0 ? 0.5 : 1.5; }, 0.0, 2.0, 1.0};
    const auto r = find_resonance_levels(prof, 1, 1);
    EXPECT_TRUE(r.levels.empty());
    EXPECT_FALSE(r.diagnostics.empty());
}

TEST(DegeneracyOrder, ExactPolynomials)
{
    auto d2 = degeneracy_order({[](double I) { return 1 + (I - 1) * (I - 1); }, 0, 3, 1}, 1.0);
    EXPECT_EQ(d2.j, 2);
    EXPECT_NEAR(d2.bj, 1.0, 1e-8);
    EXPECT_NEAR(d2.bj1, 0.0, 1e-6);

    auto d3 = degeneracy_order({[](double I) { return 1 + std::pow(I - 1, 3); }, 0, 3, 1}, 1.0);
    EXPECT_EQ(d3.j, 3);
    EXPECT_NEAR(d3.bj, 1.0, 1e-6);
    EXPECT_NEAR(d3.bj1, 0.0, 1e-5);

    auto d1 = degeneracy_order({[](double I) { return I; }, 0, 3, 1}, 1.0);
    EXPECT_EQ(d1.j, 1);
    EXPECT_NEAR(d1.bj, 1.0, 1e-10);
}

TEST(DegeneracyOrder, FailsAboveFourthOrder)
{
    try {
        degeneracy_order({[](double I) { return 1 + std::pow(I - 1, 6); }, 0, 3, 1}, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OrderTooHigh);
    }
}

TEST(DegeneracyOrder, RequiresInteriorPoint)
{
    EXPECT_THROW(degeneracy_order(quad_profile(), 0.0), Error);
}

TEST(AveragedCoefficients, SinThetaMinusPhi)
{
    PerturbationSpec pert = families::harmonic(1.0, 0.0);
    const auto c = compute_averaged_coefficients(pert, spec_at(1), 256);
    ASSERT_EQ(c.v_grid.size(), 256u);
    double err = 0.0;
    for (std::size_t i = 0; i < c.v_grid.size(); ++i) err = std::max(err, std::abs(c.A0[i] - std::sin(c.v_grid[i])));
    EXPECT_LT(err, 1e-10);
}

TEST(AveragedCoefficients, SubharmonicAveragesOut)
{
    const auto c = compute_averaged_coefficients(families::harmonic(1.0, 0.0), spec_at(2), 256);
    for (double a : c.A0) EXPECT_LT(std::abs(a), 1e-10);
}

TEST(AveragedCoefficients, ConstantIntegrand)
{
    PerturbationSpec pert;
    pert.F = [](double, double, double) { return 1.0; };
    const auto c = compute_averaged_coefficients(pert, spec_at(1), 64);
    EXPECT_NEAR(c.B0, 1.0, 1e-15);
    for (std::size_t i = 0; i < c.A0.size(); ++i) {
        EXPECT_NEAR(c.A0[i], 1.0, 1e-15);
        EXPECT_NEAR(c.A0_tilde[i], 0.0, 1e-15);
    }
}

TEST(AveragedCoefficients, RejectsBadNodeCounts)
{
    EXPECT_THROW(compute_averaged_coefficients(families::harmonic(1, 0), spec_at(1), 63), Error);
    EXPECT_THROW(compute_averaged_coefficients(families::harmonic(1, 0), spec_at(1), 66 - 1), Error);
    EXPECT_THROW(compute_averaged_coefficients(families::harmonic(1, 0), spec_at(1), 32), Error);
}

TEST(AveragedCoefficients, NonFiniteIntegrand)
{
    PerturbationSpec pert;
    pert.F = [](double, double theta, double) { return theta > 1.0 ? std::nan("") : 0.0; };
    try {
        compute_averaged_coefficients(pert, spec_at(1), 64);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
}

TEST(AveragedCoefficients, MeanSplitIsExact)
{
    const auto c = compute_averaged_coefficients(families::harmonic(0.7, 0.0, 0.25), spec_at(1), 128);
    EXPECT_LT(std::abs(fourier::mean(c.A0_tilde)), 1e-12);
    EXPECT_LT(std::abs(fourier::mean(c.P0_tilde)), 1e-12);
    for (std::size_t i = 0; i < c.A0.size(); ++i) EXPECT_NEAR(c.A0_tilde[i] + c.B0, c.A0[i], 4e-16 * (1 + std::abs(c.A0[i])));
}

TEST(AveragedCoefficients, MatchesBesselOracle)
{
    const double amp = 0.8, z = std::sqrt(2.0);
    for (int p = 1; p <= 3; ++p) {
        const auto c = compute_averaged_coefficients(families::cos_x_minus_phi(amp), spec_at(p), 128);
        for (std::size_t i = 0; i < c.v_grid.size(); i += 7) {
            const double v = c.v_grid[i];
            EXPECT_NEAR(c.A0[i], amp * p * std::cyl_bessel_j(p, z) * std::sin(p * v), 1e-10);
            EXPECT_NEAR(c.P0[i], amp * p * bessel_prime(p, z) / z * std::sin(p * v), 1e-8);
            EXPECT_NEAR(c.Q0[i], amp * bessel_prime(p, z) / z * std::cos(p * v), 1e-10);
        }
    }
}

TEST(AveragedCoefficients, QuadratureConvergesUnderRefinement)
{
    for (int p = 1; p <= 2; ++p) {
        const auto c1 = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), spec_at(p), 64);
        const auto c2 = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), spec_at(p), 128);
        for (std::size_t i = 0; i < c1.A0.size(); ++i) EXPECT_LT(std::abs(c1.A0[i] - c2.A0[2 * i]), 1e-10);
    }
}

TEST(ClassifyResonance, Examples)
{
    const int n = 256;
    auto make = [&](auto f) {
        return AveragedCoefficients::from_functions(1, n, f, [](double) { return 0.0; }, [](double) { return 0.0; });
    };
    EXPECT_EQ(classify_resonance(make([](double v) { return 0.5 * std::sin(v) + 2; })).kind, Passability::Passable);
    EXPECT_EQ(classify_resonance(make([](double v) { return std::sin(v); })).kind, Passability::NonPassable);
    const auto part = classify_resonance(make([](double v) { return std::sin(v) + 0.5; }));
    EXPECT_EQ(part.kind, Passability::PartiallyPassable);
    ASSERT_EQ(part.roots.size(), 2u);
    EXPECT_NEAR(part.roots[0], kPi + kPi / 6, 1e-10);
    EXPECT_NEAR(part.roots[1], kTwoPi - kPi / 6, 1e-10);
}

TEST(ClassifyResonance, TangencyIsAmbiguous)
{
    const auto c = AveragedCoefficients::from_functions(
        1, 256, [](double v) { return std::sin(v) + 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; });
    EXPECT_EQ(classify_resonance(c).kind, Passability::Ambiguous);
}

TEST(ClassifyResonance, InvariantUnderGridRefinement)
{
    for (int n : {64, 128, 512, 1024}) {
        auto make = [&](auto f) {
            return AveragedCoefficients::from_functions(2, n, f, [](double) { return 0.0; }, [](double) { return 0.0; });
        };
        EXPECT_EQ(classify_resonance(make([](double v) { return 0.5 * std::sin(2 * v) + 2; })).kind, Passability::Passable);
        EXPECT_EQ(classify_resonance(make([](double v) { return std::sin(2 * v); })).kind, Passability::NonPassable);
        EXPECT_EQ(classify_resonance(make([](double v) { return std::sin(2 * v) + 0.5; })).kind,
                  Passability::PartiallyPassable);
    }
}

TEST(HamiltonianIdentities, ConstructedHamiltonianPerturbationPasses)
{
    const auto c = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), spec_at(1), 2048);
    const auto r = verify_hamiltonian_identities(c);
    EXPECT_TRUE(r.pass()) << r.identity_residual << " " << r.abs_B0 << " " << r.abs_B1;
}

TEST(HamiltonianIdentities, DissipativeShiftFails)
{
    const auto c = compute_averaged_coefficients(families::harmonic(1.0, 1.0, 0.1), spec_at(1), 128);
    const auto r = verify_hamiltonian_identities(c);
    EXPECT_NEAR(r.abs_B0, 0.1, 1e-12);
    EXPECT_FALSE(r.pass());
}

TEST(HamiltonianIdentities, IdentityPartFromSamples)
{
    const auto c = AveragedCoefficients::from_functions(
        1, 256, [](double) { return 0.0; }, [](double v) { return std::sin(v); }, [](double v) { return std::cos(v); });
    const auto r = verify_hamiltonian_identities(c);
    EXPECT_LT(r.identity_residual, 1e-12);
    EXPECT_TRUE(r.identity_pass());
}

TEST(HarmonicReduction, ExampleValues)
{
    const auto c = AveragedCoefficients::from_functions(
        1, 256, [](double v) { return 2 * std::sin(v); }, [](double v) { return 0.3 * std::sin(v); },
        [](double v) { return 0.3 * std::cos(v); });
    const auto r = harmonic_reduction(c, spec_at(1), 0.001);
    EXPECT_NEAR(r.zone.a, 2.0, 1e-12);
    EXPECT_NEAR(r.zone.mu1, 0.03, 1e-12);
    EXPECT_NEAR(r.harmonic.c_p1, 0.3, 1e-12);
    EXPECT_NEAR(r.harmonic.d_p1, 0.3, 1e-12);
    EXPECT_EQ(r.zone.p, 1);
    EXPECT_EQ(r.zone.b, 1.0);
}

TEST(HarmonicReduction, SecondOrderResonance)
{
    const auto c = AveragedCoefficients::from_functions(
        2, 256, [](double v) { return std::sin(2 * v); }, [](double v) { return 0.4 * std::sin(2 * v); },
        [](double v) { return 0.2 * std::cos(2 * v); });
    const auto r = harmonic_reduction(c, spec_at(2), 0.0);
    EXPECT_NEAR(r.harmonic.a_p1, 1.0, 1e-12);
    EXPECT_EQ(r.zone.p, 2);
    // No sin v content: project sin 2v over a full 2pi period.
    std::vector<double> full(512);
    for (int i = 0; i < 512; ++i) full[i] = std::sin(2 * kTwoPi * i / 512);
    EXPECT_LT(std::abs(fourier::project(full, 1).sin_coeff), 1e-14);
}

TEST(HarmonicReduction, Rejections)
{
    const auto bad = AveragedCoefficients::from_functions(
        1, 256, [](double v) { return std::sin(v); }, [](double v) { return std::sin(v); },
        [](double v) { return 2 * std::cos(v); });
    try {
        harmonic_reduction(bad, spec_at(1), 0.01);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IdentityViolated);
    }
    const auto good = AveragedCoefficients::from_functions(
        1, 256, [](double v) { return std::sin(v); }, [](double) { return 0.0; }, [](double) { return 0.0; });
    EXPECT_THROW(harmonic_reduction(good, spec_at(1, 2), 0.01), Error);
    auto s3 = spec_at(1);
    s3.j = 3;
    EXPECT_THROW(harmonic_reduction(good, s3, 0.01), Error);
    const auto two_modes = AveragedCoefficients::from_functions(
        1, 256, [](double v) { return std::sin(v) + 0.01 * std::sin(2 * v); }, [](double) { return 0.0; },
        [](double) { return 0.0; });
    EXPECT_THROW(harmonic_reduction(two_modes, spec_at(1), 0.01), Error);
}

TEST(HarmonicReduction, FromQuadratureMatchesBessel)
{
    const double amp = 1.0, z = std::sqrt(2.0), eps = 1e-3;
    for (int p = 1; p <= 3; ++p) {
        const auto c = compute_averaged_coefficients(families::cos_x_minus_phi(amp), spec_at(p), 128);
        const auto r = harmonic_reduction(c, spec_at(p), eps, 0.5);
        EXPECT_NEAR(r.harmonic.a_p1, amp * p * std::cyl_bessel_j(p, z), 1e-10);
        EXPECT_NEAR(r.harmonic.d_p1, amp * bessel_prime(p, z) / z, 1e-10);
        EXPECT_NEAR(r.zone.mu1, std::cbrt(eps) * p * r.harmonic.d_p1, 1e-8);
        EXPECT_EQ(r.zone.mu2, 0.5);
    }
}

TEST(HarmonicAmplitude, DecreasesWithResonanceOrder)
{
    double prev = 1e300;
    for (int p = 1; p <= 5; ++p) {
        const auto c = compute_averaged_coefficients(families::cos_x_minus_phi(1.0), spec_at(p), 128);
        const double a = std::abs(harmonic_reduction(c, spec_at(p), 0.0).harmonic.a_p1);
        EXPECT_LT(a, prev) << "p=" << p;
        prev = a;
    }
}
