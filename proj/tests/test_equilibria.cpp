#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "degres/equilibria.hpp"

using namespace degres;

namespace {

ZoneParameters ref(double mu1, double mu2, int p = 1) { return ZoneParameters{2.0, 1.0, p, mu1, mu2, 0.0}; }

const Equilibrium* find(const std::vector<Equilibrium>& es, EquilibriumLabel l)
{
    for (const auto& e : es)
        if (e.label == l) return &e;
    return nullptr;
}

int count_on_line(const std::vector<Equilibrium>& es, double v)
{
    return static_cast<int>(std::count_if(es.begin(), es.end(), [&](const Equilibrium& e) {
        return !is_off_axis(e.label) && std::abs(e.state.v - v) < 1e-12;
    }));
}

} // namespace

TEST(ClosedForm, OnlyVPiPairWhenMu2Zero)
{
    const auto es = closed_form_equilibria(ref(1, 0));
    ASSERT_EQ(es.size(), 2u);
    const auto* c = find(es, EquilibriumLabel::O2Plus);
    const auto* s = find(es, EquilibriumLabel::O2Minus);
    ASSERT_TRUE(c && s);
    EXPECT_NEAR(c->state.u, 1.0, 1e-15);
    EXPECT_NEAR(c->state.v, kPi, 1e-15);
    EXPECT_EQ(c->kind, EquilibriumKind::Center);
    EXPECT_NEAR(c->delta, 6.0, 1e-12);
    EXPECT_NEAR(s->state.u, -1.0, 1e-15);
    EXPECT_EQ(s->kind, EquilibriumKind::Saddle);
    EXPECT_NEAR(s->delta, -2.0, 1e-12);
}

TEST(ClosedForm, FourEquilibriaAtZeroMu1)
{
    const auto es = closed_form_equilibria(ref(0, 1));
    ASSERT_EQ(es.size(), 4u);
    struct Row {
        EquilibriumLabel l;
        double u, v, delta;
        EquilibriumKind k;
    };
    const Row rows[] = {{EquilibriumLabel::O1Plus, 0, 0, -2, EquilibriumKind::Saddle},
                        {EquilibriumLabel::O1Minus, -1, 0, 2, EquilibriumKind::Center},
                        {EquilibriumLabel::O2Plus, 0, kPi, 2, EquilibriumKind::Center},
                        {EquilibriumLabel::O2Minus, -1, kPi, -2, EquilibriumKind::Saddle}};
    for (const auto& r : rows) {
        const auto* e = find(es, r.l);
        ASSERT_TRUE(e) << to_string(r.l);
        EXPECT_NEAR(e->state.u, r.u, 1e-15);
        EXPECT_NEAR(e->state.v, r.v, 1e-15);
        EXPECT_NEAR(e->delta, r.delta, 1e-12);
        EXPECT_EQ(e->kind, r.k);
    }
}

TEST(ClosedForm, OffAxisPairMergesOnM5)
{
    const auto es = closed_form_equilibria(ref(1, 2.5));
    const auto* o3 = find(es, EquilibriumLabel::O3);
    const auto* o4 = find(es, EquilibriumLabel::O4);
    ASSERT_TRUE(o3 && o4);
    EXPECT_EQ(o3->state.v, 0.0);
    EXPECT_EQ(o4->state.v, 0.0);
    EXPECT_EQ(o3->state.u, -2.0);
    EXPECT_EQ(o3->kind, EquilibriumKind::Degenerate);
}

TEST(ClosedForm, OffAxisInsideExistenceRegion)
{
    // mu1 = 2: cos v = 2 (2 mu2 - 2) / 8 lies in (-1, 1) for mu2 in (-1, 3).
    const auto es = closed_form_equilibria(ref(2, 1.5));
    const auto* o3 = find(es, EquilibriumLabel::O3);
    const auto* o4 = find(es, EquilibriumLabel::O4);
    ASSERT_TRUE(o3 && o4);
    EXPECT_NEAR(o3->state.u, -1.0, 1e-15);
    EXPECT_NEAR(std::cos(o3->state.v), 0.25, 1e-15);
    EXPECT_GT(o3->state.v, 0.0);
    EXPECT_LT(o3->state.v, kPi);
    EXPECT_NEAR(o4->state.v, kTwoPi - o3->state.v, 1e-15);
    EXPECT_EQ(o3->kind, EquilibriumKind::Saddle);
    EXPECT_NEAR(o3->delta, -4.0 * std::sin(o3->state.v) * std::sin(o3->state.v), 1e-12);
}

TEST(ClosedForm, GeneralCoefficientsSolveTheField)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::uniform_int_distribution<int> dp(1, 4);
    int seen_off_axis = 0;
    for (int i = 0; i < 400; ++i) {
        ZoneParameters z{d(rng), d(rng), dp(rng), d(rng), d(rng), 0.0};
        if (std::abs(z.b) < 0.2) continue;
        for (const auto& e : closed_form_equilibria(z)) {
            EXPECT_LT(vector_field(z, e.state).norm(), 1e-10);
            EXPECT_EQ(e.energy, hamiltonian(z, e.state));
            EXPECT_EQ(e.delta, equilibrium_delta(z, e.state));
            EXPECT_GE(e.state.v, 0.0);
            EXPECT_LT(e.state.v, kTwoPi);
            seen_off_axis += is_off_axis(e.label);
        }
    }
    EXPECT_GT(seen_off_axis, 0);
}

TEST(ClosedForm, RejectsQuarticTerm)
{
    auto z = ref(1, 0);
    z.b3 = 0.1;
    EXPECT_THROW(closed_form_equilibria(z), Error);
}

TEST(Refine, ConvergesToCenter)
{
    const auto e = refine_equilibrium(ref(1, 0), {0.9, 3.0});
    EXPECT_NEAR(e.state.u, 1.0, 1e-12);
    EXPECT_NEAR(e.state.v, kPi, 1e-12);
    EXPECT_EQ(e.label, EquilibriumLabel::O2Plus);
    EXPECT_EQ(e.kind, EquilibriumKind::Center);
}

TEST(Refine, ExactGuessNeedsNoSteps)
{
    const auto z = ref(0, 1);
    for (const auto& c : closed_form_equilibria(z)) {
        const auto e = refine_equilibrium(z, c.state);
        EXPECT_EQ(e.newton_steps, 0);
        EXPECT_EQ(e.state.u, c.state.u);
        EXPECT_EQ(e.state.v, c.state.v);
        EXPECT_EQ(e.label, c.label);
    }
}

TEST(Refine, NeverFabricatesARoot)
{
    const auto z = ref(0, 1);
    try {
        const auto e = refine_equilibrium(z, {0.0, kPi / 2});
        EXPECT_LT(vector_field(z, e.state).norm(), 1e-12);
    } catch (const Error& err) {
        EXPECT_TRUE(err.code() == ErrorCode::NoConvergence || err.code() == ErrorCode::SingularJacobian);
    }
}

TEST(Refine, DegenerateRequiresOptIn)
{
    const auto z = ref(1, 2.5);
    const PhaseState triple{-2.0, 0.0};
    EXPECT_THROW(refine_equilibrium(z, triple), Error);
    RefineOptions o;
    o.allow_degenerate = true;
    const auto e = refine_equilibrium(z, triple, o);
    EXPECT_EQ(e.kind, EquilibriumKind::Degenerate);
}

TEST(Refine, AgreesWithClosedFormFromPerturbedStarts)
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> d(-3.0, 3.0), kick(-1e-3, 1e-3);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        const auto z = ref(d(rng), d(rng));
        for (const auto& c : closed_form_equilibria(z)) {
            if (c.kind == EquilibriumKind::Degenerate) continue;
            const auto e = refine_equilibrium(z, {c.state.u + kick(rng), c.state.v + kick(rng)});
            EXPECT_NEAR(e.state.u, c.state.u, 1e-10);
            EXPECT_LT(std::abs(std::remainder(e.state.v - c.state.v, kTwoPi)), 1e-10);
            EXPECT_EQ(e.label, c.label);
            EXPECT_LT(vector_field(z, e.state).norm(), 1e-12);
            ++checked;
        }
    }
    EXPECT_GT(checked, 150);
}

TEST(Refine, HandlesQuarticTermWithoutLabels)
{
    auto z = ref(0.5, 0.3);
    z.b3 = 0.2;
    const auto e = refine_equilibrium(z, {0.5, kPi});
    EXPECT_LT(vector_field(z, e.state).norm(), 1e-12);
    EXPECT_EQ(e.label, EquilibriumLabel::Refined);
}

TEST(Curves, PaperPoints)
{
    const auto z = ref(0, 0);
    EXPECT_EQ(m3_mu1(z, 2.0), 1.0);
    EXPECT_EQ(m4_mu1(z, 2.0), -1.0);
    EXPECT_EQ(m5_mu2(z, 1.0, true), 2.5);
    EXPECT_EQ(m5_mu2(z, 1.0, false), 1.5);

    const auto samples = local_bifurcation_curves(z, {-1.0, 1.0});
    auto has = [&](CurveTag t, double mu1, double mu2) {
        return std::any_of(samples.begin(), samples.end(), [&](const CurveSample& s) {
            return s.tag == t && s.mu1 == mu1 && std::abs(s.mu2 - mu2) < 1e-12;
        });
    };
    EXPECT_TRUE(has(CurveTag::M3, 1.0, 2.0));
    EXPECT_TRUE(has(CurveTag::M3, 1.0, -2.0));
    EXPECT_TRUE(has(CurveTag::M4, -1.0, 2.0));
    EXPECT_TRUE(has(CurveTag::M5Plus, 1.0, 2.5));
    EXPECT_TRUE(has(CurveTag::M5Minus, 1.0, 1.5));
    EXPECT_FALSE(has(CurveTag::M3, -1.0, 2.0));
}

TEST(Curves, NoM5AtZeroMu1)
{
    const auto samples = local_bifurcation_curves(ref(0, 0), {0.0});
    for (const auto& s : samples) {
        EXPECT_NE(s.tag, CurveTag::M5Plus);
        EXPECT_NE(s.tag, CurveTag::M5Minus);
    }
}

TEST(Curves, DefiningFunctionsVanishOnSamples)
{
    for (int p = 1; p <= 3; ++p) {
        const ZoneParameters z{1.3, -0.7, p, 0, 0, 0};
        for (const auto& s : local_bifurcation_curves(z, num::linspace(-2.0, 2.0, 41)))
            EXPECT_LT(std::abs(curve_function(z, s.tag, s.mu1, s.mu2)), 1e-12) << to_string(s.tag);
    }
}

TEST(Curves, M5MatchesOffAxisBoundaryForGeneralP)
{
    for (int p = 1; p <= 3; ++p) {
        const ZoneParameters z{1.5, 0.8, p, 0, 0, 0};
        for (double mu1 : {0.7, 1.2, -0.9}) {
            for (bool plus : {true, false}) {
                const double mu2 = m5_mu2(z, mu1, plus);
                const double u = -z.a / mu1;
                const double c = -p * (z.b * u * u + mu2 * u) / mu1;
                EXPECT_NEAR(c, plus ? 1.0 : -1.0, 1e-12);
            }
        }
    }
}

TEST(CountParity, OnAndOffTheParabolas)
{
    const auto off = closed_form_equilibria(ref(1, 2.2));
    EXPECT_EQ(count_on_line(off, 0.0), 2);
    const auto on = closed_form_equilibria(ref(1, 2.0));
    EXPECT_EQ(count_on_line(on, 0.0), 1);
    EXPECT_EQ(count_on_line(closed_form_equilibria(ref(1, 1.8)), 0.0), 0);
    EXPECT_EQ(count_on_line(closed_form_equilibria(ref(-4, 4.0)), kPi), 1);
    EXPECT_EQ(count_on_line(closed_form_equilibria(ref(-4, 3.9)), kPi), 0);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const auto es = closed_form_equilibria(ref(d(rng), d(rng)));
        const int n0 = count_on_line(es, 0.0), npi = count_on_line(es, kPi);
        EXPECT_TRUE(n0 == 0 || n0 == 2);
        EXPECT_TRUE(npi == 0 || npi == 2);
    }
}

TEST(VerticalBifurcation, MergingPairIsSaddleAndCenter)
{
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const auto es = closed_form_equilibria(ref(1, 2.0 + eps));
        const auto* a = find(es, EquilibriumLabel::O1Plus);
        const auto* b = find(es, EquilibriumLabel::O1Minus);
        ASSERT_TRUE(a && b);
        EXPECT_LT(a->delta * b->delta, 0.0);
        EXPECT_LT(std::abs(a->state.u - b->state.u), 3 * std::sqrt(eps));
    }
    for (double eps : {1e-2, 1e-4}) {
        const auto es = closed_form_equilibria(ref(-1, 2.0 + eps));
        const auto* a = find(es, EquilibriumLabel::O2Plus);
        const auto* b = find(es, EquilibriumLabel::O2Minus);
        ASSERT_TRUE(a && b);
        EXPECT_LT(a->delta * b->delta, 0.0);
    }
}

TEST(DetectLocal, VerticalOnM3)
{
    const auto ev = detect_local_bifurcation(ref(0, 0), {1.0, 1.8}, {1.0, 2.2});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, LocalEventKind::Vertical);
    EXPECT_EQ(ev[0].curve, CurveTag::M3);
    EXPECT_NEAR(ev[0].at.mu2, 2.0, 1e-12);
    EXPECT_TRUE(ev[0].verified);
}

TEST(DetectLocal, HorizontalOnM5Plus)
{
    const auto ev = detect_local_bifurcation(ref(0, 0), {1.0, 2.4}, {1.0, 2.6});
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, LocalEventKind::HorizontalTripleSaddle);
    EXPECT_EQ(ev[0].curve, CurveTag::M5Plus);
    EXPECT_NEAR(ev[0].at.mu2, 2.5, 1e-12);
    EXPECT_TRUE(ev[0].verified);
}

TEST(DetectLocal, PathInsideOneRegion)
{
    EXPECT_TRUE(detect_local_bifurcation(ref(0, 0), {1.0, 0.1}, {1.2, 0.3}).empty());
}

TEST(DetectLocal, TangentialTouch)
{
    // The line mu1 = 0 touches m3 and m4 at the origin without crossing.
    try {
        detect_local_bifurcation(ref(0, 0), {0.0, -1.0}, {0.0, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TangentialCrossing);
    }
}

TEST(DetectLocal, EndpointOnCurveIsRejected)
{
    EXPECT_THROW(detect_local_bifurcation(ref(0, 0), {1.0, 2.0}, {1.0, 2.3}), Error);
}

TEST(Labels, RoundTrip)
{
    for (auto l : {EquilibriumLabel::O1Plus, EquilibriumLabel::O1Minus, EquilibriumLabel::O2Plus,
                   EquilibriumLabel::O2Minus, EquilibriumLabel::O3, EquilibriumLabel::O4, EquilibriumLabel::Refined})
        EXPECT_EQ(label_from_string(to_string(l)), l);
}
