#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "degres/zone_model.hpp"

using namespace degres;

namespace {

ZoneParameters ref(double mu1, double mu2) { return ZoneParameters{2.0, 1.0, 1, mu1, mu2, 0.0}; }

PhaseState random_state(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> du(-3.0, 3.0), dv(0.0, kTwoPi);
    return {du(rng), dv(rng)};
}

ZoneParameters random_zone(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::uniform_int_distribution<int> dp(1, 4);
    ZoneParameters z{d(rng), d(rng), dp(rng), d(rng), d(rng), 0.0};
    if (std::abs(z.b) < 0.1) z.b = 1.0;
    return z;
}

} // namespace

TEST(ZoneModel, HamiltonianAtOriginIsA)
{
    EXPECT_DOUBLE_EQ(hamiltonian(ref(0, 0), {0.0, 0.0}), 2.0);
}

TEST(ZoneModel, HamiltonianHandValue)
{
    // 1/3 + (2 + 1) cos(pi)
    EXPECT_NEAR(hamiltonian(ref(1, 0), {1.0, kPi}), -8.0 / 3.0, 1e-15);
}

TEST(ZoneModel, HamiltonianEvenInV)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto z = random_zone(rng);
        const auto s = random_state(rng);
        EXPECT_NEAR(hamiltonian(z, s), hamiltonian(z, {s.u, kTwoPi - s.v}), 1e-12 * (1 + std::abs(hamiltonian(z, s))));
    }
}

TEST(ZoneModel, FieldHandValue)
{
    const auto f = vector_field(ref(0, 0), {0.0, kPi / 2});
    EXPECT_NEAR(f.du, 2.0, 1e-15);
    EXPECT_NEAR(f.dv, 0.0, 1e-15);
}

TEST(ZoneModel, FieldMatchesHamiltonianGradient)
{
    std::mt19937_64 rng(12);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        auto z = random_zone(rng);
        z.b3 = (i % 2) ? 0.0 : 0.7;
        const auto s = random_state(rng);
        const double dHdu = (hamiltonian(z, {s.u + h, s.v}) - hamiltonian(z, {s.u - h, s.v})) / (2 * h);
        const double dHdv = (hamiltonian(z, {s.u, s.v + h}) - hamiltonian(z, {s.u, s.v - h})) / (2 * h);
        const auto f = vector_field(z, s);
        EXPECT_NEAR(f.du, -dHdv, 1e-6 * (1 + std::abs(f.du)));
        EXPECT_NEAR(f.dv, dHdu, 1e-6 * (1 + std::abs(f.dv)));
    }
}

TEST(ZoneModel, JacobianIsTraceFreeAndMatchesDifferences)
{
    std::mt19937_64 rng(13);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        const auto z = random_zone(rng);
        const auto s = random_state(rng);
        const auto j = field_jacobian(z, s);
        EXPECT_EQ(j.trace(), 0.0);
        const auto fu1 = vector_field(z, {s.u + h, s.v}), fu0 = vector_field(z, {s.u - h, s.v});
        const auto fv1 = vector_field(z, {s.u, s.v + h}), fv0 = vector_field(z, {s.u, s.v - h});
        EXPECT_NEAR(j.uu, (fu1.du - fu0.du) / (2 * h), 1e-5 * (1 + std::abs(j.uu)));
        EXPECT_NEAR(j.uv, (fv1.du - fv0.du) / (2 * h), 1e-5 * (1 + std::abs(j.uv)));
        EXPECT_NEAR(j.vu, (fu1.dv - fu0.dv) / (2 * h), 1e-5 * (1 + std::abs(j.vu)));
        EXPECT_NEAR(j.vv, (fv1.dv - fv0.dv) / (2 * h), 1e-5 * (1 + std::abs(j.vv)));
    }
}

TEST(ZoneModel, PeriodicityAndTimeReversal)
{
    std::mt19937_64 rng(14);
    for (int i = 0; i < 100; ++i) {
        const auto z = random_zone(rng);
        const auto s = random_state(rng);
        const auto f = vector_field(z, s);
        const auto g = vector_field(z, {s.u, s.v + kTwoPi});
        EXPECT_NEAR(f.du, g.du, 1e-12 * (1 + std::abs(f.du)));
        EXPECT_NEAR(f.dv, g.dv, 1e-12 * (1 + std::abs(f.dv)));
        EXPECT_NEAR(hamiltonian(z, s), hamiltonian(z, {s.u, s.v + kTwoPi}), 1e-12 * (1 + std::abs(hamiltonian(z, s))));
        const auto r = vector_field(z, {s.u, -s.v});
        EXPECT_NEAR(r.du, -f.du, 1e-12 * (1 + std::abs(f.du)));
        EXPECT_NEAR(r.dv, f.dv, 1e-12 * (1 + std::abs(f.dv)));
    }
}

TEST(ZoneModel, WrapAngleRange)
{
    for (double v : {-1e-17, -kTwoPi, 0.0, kTwoPi, 7.0, -7.0, 1e6}) {
        const double w = wrap_angle(v);
        EXPECT_GE(w, 0.0);
        EXPECT_LT(w, kTwoPi);
    }
}

TEST(ZoneModel, ValidateRejectsBadParameters)
{
    ZoneParameters z = ref(0, 0);
    z.p = 0;
    EXPECT_THROW(z.validate(), Error);
    z = ref(0, 0);
    z.b = 0.0;
    EXPECT_THROW(z.validate(), Error);
}

TEST(ReducedHamiltonian, ReducesToZoneHamiltonianWithDeformation)
{
    GeneralAveragedModel m;
    m.j = 2;
    m.bj = 1.0;
    m.p = 1;
    m.epsilon = 0.0;
    const HarmonicCoefficients h{2.0, 0.0, 0.0};
    const double mu2 = 0.37;
    const double dfm[] = {mu2};
    std::mt19937_64 rng(15);
    for (int i = 0; i < 20; ++i) {
        const auto s = random_state(rng);
        EXPECT_NEAR(reduced_hamiltonian(m, h, s, dfm), hamiltonian(ref(0.0, mu2), s), 1e-12);
    }
}

TEST(ReducedHamiltonian, ZeroActionKeepsOnlyHarmonic)
{
    GeneralAveragedModel m;
    m.p = 3;
    m.epsilon = 0.01;
    const HarmonicCoefficients h{1.5, 0.6, 0.2};
    for (double v : {0.0, 0.4, 2.0, 5.5})
        EXPECT_NEAR(reduced_hamiltonian(m, h, {0.0, v}), 1.5 / 3 * std::cos(3 * v), 1e-15);
}

TEST(ReducedHamiltonian, CubicDegeneracyHandValue)
{
    GeneralAveragedModel m;
    m.j = 3;
    m.bj = 1.0;
    m.p = 2;
    m.epsilon = 0.0;
    EXPECT_NEAR(reduced_hamiltonian(m, {1.0, 0.0, 0.0}, {1.0, 0.0}), 0.75, 1e-15);
}

TEST(ReducedHamiltonian, RejectsNonHamiltonianHarmonic)
{
    GeneralAveragedModel m;
    m.p = 1;
    try {
        reduced_hamiltonian(m, {1.0, 1.0, 2.0}, {0.0, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IdentityViolated);
    }
}

TEST(GeneralField, PendulumSpecialization)
{
    GeneralAveragedModel m;
    m.j = 2;
    m.bj = 1.0;
    m.epsilon = 1.0;
    m.A0 = [](double v) { return std::sin(v); };
    for (double u : {-1.0, 0.3, 2.0})
        for (double v : {0.1, 1.0, 4.0}) {
            const auto f = general_field(m, {u, v});
            EXPECT_NEAR(f.du, std::sin(v), 1e-15);
            EXPECT_NEAR(f.dv, u * u, 1e-15);
        }
}

TEST(GeneralField, ZeroEpsilonVanishes)
{
    GeneralAveragedModel m;
    m.A0 = [](double v) { return std::sin(v); };
    m.Q0 = [](double v) { return std::cos(v); };
    const auto f = general_field(m, {1.0, 1.0});
    EXPECT_EQ(f.du, 0.0);
    EXPECT_EQ(f.dv, 0.0);
}

TEST(GeneralField, MatchesZoneFieldAfterPhaseRescaling)
{
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int p = 1; p <= 3; ++p) {
        const double a = 1.3, dd = 0.4, c = p * dd, eps = 1e-3, b = 0.8, b3 = 0.5;
        GeneralAveragedModel m;
        m.j = 2;
        m.p = p;
        m.bj = b;
        m.bj1 = b3;
        m.epsilon = eps;
        m.A0 = [=](double v) { return a * std::sin(p * v); };
        m.P0 = [=](double v) { return c * std::sin(p * v); };
        m.Q0 = [=](double v) { return dd * std::cos(p * v); };
        const double e13 = std::cbrt(eps), lead = std::pow(eps, 2.0 / 3.0);
        const ZoneParameters z{a, b, p, e13 * c, 0.0, e13 * b3};
        for (int i = 0; i < 100; ++i) {
            const PhaseState s{d(rng), 3 * d(rng)};
            const auto g = general_field(m, s);
            const auto f = vector_field(z, {s.u, p * s.v});
            EXPECT_NEAR(g.du, lead * f.du, 1e-12);
            EXPECT_NEAR(g.dv, lead * f.dv / p, 1e-12);
        }
    }
}

TEST(GeneralField, NonFiniteInputIsReported)
{
    GeneralAveragedModel m;
    m.epsilon = 0.1;
    m.A0 = [](double) { return std::nan(""); };
    EXPECT_THROW(general_field(m, {0.0, 0.0}), Error);
}

TEST(GeneralAveragedModel, ExponentAndPeriodicity)
{
    GeneralAveragedModel m;
    m.j = 3;
    m.p = 2;
    EXPECT_DOUBLE_EQ(m.s(), 0.25);
    m.A0 = [](double v) { return std::sin(2 * v); };
    EXPECT_LT(m.periodicity_defect(), 1e-12);
    m.A0 = [](double v) { return std::sin(v); };
    EXPECT_GT(m.periodicity_defect(), 0.1);
}
