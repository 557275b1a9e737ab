#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "degres/flow.hpp"

using namespace degres;

namespace {

PlanarField rotation()
{
    return [](PhaseState s) { return FieldValue{s.v, -s.u}; };
}

} // namespace

TEST(Integrator, HarmonicOscillatorMatchesExactSolution)
{
    for (double tol : {1e-6, 1e-9, 1e-12}) {
        const auto tr = integrate_orbit(rotation(), {1.0, 0.0}, 0.0, 20.0, tol);
        const auto& last = tr.states.back();
        EXPECT_DOUBLE_EQ(last.tau, 20.0);
        EXPECT_NEAR(last.state.u, std::cos(20.0), 200 * tol);
        EXPECT_NEAR(last.state.v, -std::sin(20.0), 200 * tol);
    }
}

TEST(Integrator, DenseOutputMatchesExactSolution)
{
    std::vector<double> times;
    for (int k = 0; k <= 100; ++k) times.push_back(0.1 * k);
    const auto tr = integrate_orbit(rotation(), {1.0, 0.0}, 0.0, 10.0, 1e-10, {}, times);
    ASSERT_EQ(tr.states.size(), times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        EXPECT_EQ(tr.states[k].tau, times[k]);
        EXPECT_NEAR(tr.states[k].state.u, std::cos(times[k]), 1e-8);
        EXPECT_NEAR(tr.states[k].state.v, -std::sin(times[k]), 1e-8);
    }
}

TEST(Integrator, TimeIsStrictlyMonotone)
{
    const ZoneParameters z{2.0, 1.0, 1, 1.0, 0.0};
    const auto fwd = integrate_zone_orbit(z, {0.3, 1.0}, 30.0, 1e-9);
    for (std::size_t k = 1; k < fwd.states.size(); ++k) EXPECT_GT(fwd.states[k].tau, fwd.states[k - 1].tau);
    const auto bwd = integrate_orbit(zone_field(z), {0.3, 1.0}, 0.0, -30.0, 1e-9);
    for (std::size_t k = 1; k < bwd.states.size(); ++k) EXPECT_LT(bwd.states[k].tau, bwd.states[k - 1].tau);
}

TEST(Integrator, EquilibriumStartStaysPut)
{
    // Saddles amplify the 1e-16 residual of the closed form like
    // exp(lambda tau), so they are only followed briefly. At a center the
    // step size settles on the explicit pair's stability boundary, where the
    // error estimate only keeps the residual at a tol-sized level.
    const ZoneParameters z{2.0, 1.0, 1, 1.0, 0.5};
    const double tol = 1e-10;
    for (const auto& e : closed_form_equilibria(z)) {
        const double tau = e.kind == EquilibriumKind::Center ? 100.0 : 5.0;
        const auto tr = integrate_zone_orbit(z, e.state, tau, tol);
        double dev = 0.0;
        for (const auto& s : tr.states)
            dev = std::max(dev, std::hypot(s.state.u - e.state.u, s.state.v - e.state.v));
        EXPECT_LT(dev, e.kind == EquilibriumKind::Center ? 1e3 * tol : 1e-13) << to_string(e.label);
    }
}

TEST(Integrator, EnergyDriftBelowThresholdForRandomStarts)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mu(-3.0, 3.0), u0(-1.5, 1.5), v0(0.0, kTwoPi);
    for (int k = 0; k < 20; ++k) {
        const ZoneParameters z{2.0, 1.0, 1, mu(rng), mu(rng)};
        const auto tr = integrate_zone_orbit(z, {u0(rng), v0(rng)}, 100.0, 1e-10);
        ASSERT_TRUE(tr.relative_drift().has_value());
        EXPECT_LT(*tr.relative_drift(), 1e-8) << "mu=(" << z.mu1 << "," << z.mu2 << ")";
    }
}

TEST(Integrator, NonHamiltonianFieldHasNoDrift)
{
    const auto tr = integrate_orbit(rotation(), {1.0, 0.0}, 0.0, 1.0, 1e-8);
    EXPECT_FALSE(tr.energy_drift.has_value());
    EXPECT_FALSE(tr.relative_drift().has_value());
}

TEST(Integrator, TimeReversalReturnsToStart)
{
    const ZoneParameters z{2.0, 1.0, 2, 0.7, -0.4};
    const double tol = 1e-11;
    const PhaseState start{0.4, 2.0};
    const auto fwd = integrate_zone_orbit(z, start, 10.0, tol);
    const auto back = integrate_orbit(zone_field(z), fwd.states.back().state, 10.0, 0.0, tol);
    const auto end = back.states.back();
    EXPECT_EQ(end.tau, 0.0);
    EXPECT_LT(std::abs(end.state.u - start.u), 10 * tol);
    EXPECT_LT(std::abs(end.state.v - start.v), 10 * tol);
}

TEST(Integrator, RejectsToleranceOutsideRange)
{
    for (double tol : {1e-14, 1e-2, 0.0, -1.0, std::nan("")}) {
        try {
            integrate_orbit(rotation(), {1.0, 0.0}, 0.0, 1.0, tol);
            FAIL() << tol;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
        }
    }
}

TEST(Integrator, BlowupIsReported)
{
    const PlanarField f = [](PhaseState s) { return FieldValue{s.u * s.u, 0.0}; };
    try {
        integrate_orbit(f, {1.0, 0.0}, 0.0, 2.0, 1e-8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Blowup);
    }
}

TEST(Integrator, StepUnderflowIsReported)
{
    // Finite-time singularity with the blow-up guard out of reach.
    const PlanarField f = [](PhaseState s) { return FieldValue{1.0 / (1.0 - s.u), 0.0}; };
    IntegratorOptions io;
    io.blowup = 1e300;
    try {
        integrate_orbit(f, {0.0, 0.0}, 0.0, 2.0, 1e-8, {}, {}, io);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StepUnderflow);
    }
}

TEST(Integrator, StopPredicateEndsEarly)
{
    IntegratorOptions io;
    io.stop = [](double t, PhaseState) { return t > 1.0; };
    const auto tr = integrate_orbit(rotation(), {1.0, 0.0}, 0.0, 10.0, 1e-8, {}, {}, io);
    EXPECT_TRUE(tr.stopped_early);
    EXPECT_LT(tr.states.back().tau, 10.0);
}

TEST(Separatrices, EigenvectorsSatisfyLinearization)
{
    const ZoneParameters z{2.0, 1.0, 1, 1.0, 0.0};
    for (const auto& e : closed_form_equilibria(z)) {
        if (e.kind != EquilibriumKind::Saddle) continue;
        const auto ev = saddle_eigenvectors(z, e.state);
        const Matrix2 j = field_jacobian(z, e.state);
        const double lam = std::sqrt(-j.det());
        for (int k = 0; k < 2; ++k) {
            const double l = k == 0 ? lam : -lam;
            EXPECT_NEAR(j.uu * ev[k][0] + j.uv * ev[k][1], l * ev[k][0], 1e-12);
            EXPECT_NEAR(j.vu * ev[k][0] + j.vv * ev[k][1], l * ev[k][1], 1e-12);
        }
    }
}

TEST(Separatrices, BranchesStayOnSaddleLevel)
{
    for (const ZoneParameters z : {ZoneParameters{2.0, 1.0, 1, 1.0, 0.0}, ZoneParameters{2.0, 1.0, 1, 0.5, 2.0},
                                   ZoneParameters{2.0, 1.0, 2, -0.8, 1.2}}) {
        for (const auto& e : closed_form_equilibria(z)) {
            if (e.kind != EquilibriumKind::Saddle) continue;
            const auto branches = trace_separatrices(z, e);
            for (const auto& br : branches) {
                EXPECT_FALSE(br.error.has_value()) << *br.error;
                EXPECT_LT(br.max_energy_error, 1e-7);
                EXPECT_GT(br.trace.states.size(), 2u);
            }
        }
    }
}

TEST(Separatrices, DistinctLevelsWithoutDetuning)
{
    const ZoneParameters z{2.0, 1.0, 1, 0.0, 1.0};
    std::vector<double> levels;
    for (const auto& e : closed_form_equilibria(z)) {
        if (e.kind != EquilibriumKind::Saddle) continue;
        for (const auto& br : trace_separatrices(z, e))
            for (const auto& s : br.trace.states) EXPECT_NEAR(hamiltonian(z, s.state), e.energy, 1e-7);
        levels.push_back(e.energy);
    }
    std::sort(levels.begin(), levels.end());
    ASSERT_EQ(levels.size(), 2u);
    EXPECT_NEAR(levels[0], -11.0 / 6.0, 1e-12);
    EXPECT_NEAR(levels[1], 2.0, 1e-12);
}

TEST(Separatrices, HomoclinicBranchesReturnToASaddle)
{
    // mu = (1, 0): both on-axis saddles; every branch ends at a saddle.
    const ZoneParameters z{2.0, 1.0, 1, 1.0, 0.0};
    int returned = 0, total = 0;
    for (const auto& e : closed_form_equilibria(z)) {
        if (e.kind != EquilibriumKind::Saddle) continue;
        for (const auto& br : trace_separatrices(z, e)) {
            ++total;
            if (br.returned_to) ++returned;
        }
    }
    EXPECT_GT(total, 0);
    EXPECT_EQ(returned, total);
}

TEST(Separatrices, RejectsCenters)
{
    const ZoneParameters z{2.0, 1.0, 1, 1.0, 0.0};
    for (const auto& e : closed_form_equilibria(z)) {
        if (e.kind != EquilibriumKind::Center) continue;
        EXPECT_THROW(trace_separatrices(z, e), Error);
    }
}
