#pragma once

// Saddle energy levels, the reconnection condition h1 = h2, region
// signatures and the assembled (mu1, mu2) parameter-plane diagram.

#include <algorithm>
#include <iterator>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "degres/equilibria.hpp"
#include "degres/error.hpp"
#include "degres/numerics.hpp"
#include "degres/zone_model.hpp"

namespace degres {

struct SaddleLevel {
    Equilibrium saddle;
    double energy = 0.0;
};

/// All saddles from the closed forms with their energies, sorted by u (then v).
inline std::vector<SaddleLevel> saddle_energy_levels(const ZoneParameters& z)
{
    std::vector<SaddleLevel> out;
    for (const auto& e : closed_form_equilibria(z))
        if (e.kind == EquilibriumKind::Saddle) out.push_back({e, e.energy});
    std::sort(out.begin(), out.end(), [](const SaddleLevel& x, const SaddleLevel& y) {
        if (x.saddle.state.u != y.saddle.state.u) return x.saddle.state.u < y.saddle.state.u;
        return x.saddle.state.v < y.saddle.state.v;
    });
    return out;
}

using SaddlePair = std::pair<EquilibriumLabel, EquilibriumLabel>;

inline constexpr int kLabelCount = 7;

/// Saddle energies indexed by label; NaN where that saddle does not exist.
inline std::array<double, kLabelCount> saddle_energy_table(const ZoneParameters& z)
{
    std::array<double, kLabelCount> t;
    t.fill(std::numeric_limits<double>::quiet_NaN());
    for (const auto& e : closed_form_equilibria(z))
        if (e.kind == EquilibriumKind::Saddle) t[static_cast<int>(e.label)] = e.energy;
    return t;
}

inline std::string to_string(const SaddlePair& pair)
{
    return std::string(to_string(pair.first)) + "|" + std::string(to_string(pair.second));
}

/// h1 - h2 for the two labelled saddles.
inline double reconnection_residual(const ZoneParameters& z, const SaddlePair& pair)
{
    const auto levels = saddle_energy_levels(z);
    auto energy = [&](EquilibriumLabel l) {
        for (const auto& s : levels)
            if (s.saddle.label == l) return s.energy;
        throw Error(ErrorCode::MissingSaddle, "no saddle " + std::string(to_string(l)) + " at mu1="
                                                  + std::to_string(z.mu1) + " mu2=" + std::to_string(z.mu2));
    };
    return energy(pair.first) - energy(pair.second);
}

/// Lowest-u and highest-u saddles among those on v = 0 and v = pi.
inline std::optional<SaddlePair> default_reconnection_pair(const ZoneParameters& z)
{
    std::vector<SaddleLevel> on_axis;
    for (const auto& s : saddle_energy_levels(z))
        if (!is_off_axis(s.saddle.label)) on_axis.push_back(s);
    if (on_axis.size() < 2) return std::nullopt;
    return SaddlePair{on_axis.front().saddle.label, on_axis.back().saddle.label};
}

struct TracePoint {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double residual = 0.0;
    int segment = 0;
};

struct SkippedSlice {
    double mu1 = 0.0;
    std::string reason; ///< NO_SIGN_CHANGE or MISSING_SADDLE
};

struct ReconnectionTrace {
    SaddlePair pair;
    std::vector<TracePoint> points;
    std::vector<SkippedSlice> skipped;
    std::vector<ParameterPoint> end_markers; ///< last point before the curve is interrupted
};

inline constexpr double kReconnectionTol = 1e-10;

/// Per-mu1 bisection on mu2 of h1 - h2 over [mu2_lo, mu2_hi]. Where several
/// roots exist the one closest to the previous traced point is kept.
inline ReconnectionTrace trace_reconnection_curve(const ZoneParameters& base, const std::vector<double>& mu1_grid,
                                                  double mu2_lo, double mu2_hi, const SaddlePair& pair,
                                                  int n_scan = 256)
{
    base.validate();
    if (!(mu2_hi > mu2_lo)) throw Error(ErrorCode::InvalidArgument, "empty mu2 bracket");
    ReconnectionTrace out;
    out.pair = pair;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    int segment = 0;
    bool open = false;
    for (double mu1 : mu1_grid) {
        auto g = [&](double mu2) {
            try {
                return reconnection_residual(base.with_mu(mu1, mu2), pair);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::MissingSaddle) return nan;
                throw;
            }
        };
        std::vector<double> xs = num::linspace(mu2_lo, mu2_hi, n_scan + 1), gs(xs.size());
        bool any_defined = false;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            gs[i] = g(xs[i]);
            any_defined |= std::isfinite(gs[i]);
        }
        std::vector<double> roots;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            if (!std::isfinite(gs[i]) || !std::isfinite(gs[i + 1])) continue;
            if (gs[i] == 0.0) {
                roots.push_back(xs[i]);
                continue;
            }
            if ((gs[i] > 0.0) == (gs[i + 1] > 0.0) && gs[i + 1] != 0.0) continue;
            const double r = num::bisect([&](double m) { return g(m); }, xs[i], xs[i + 1]);
            if (std::abs(g(r)) < kReconnectionTol) roots.push_back(r);
        }
        if (roots.empty()) {
            out.skipped.push_back({mu1, any_defined ? "NO_SIGN_CHANGE" : "MISSING_SADDLE"});
            if (open) {
                out.end_markers.push_back({out.points.back().mu1, out.points.back().mu2});
                open = false;
                ++segment;
            }
            continue;
        }
        double pick = roots.front();
        if (open) {
            const double prev = out.points.back().mu2;
            for (double r : roots)
                if (std::abs(r - prev) < std::abs(pick - prev)) pick = r;
        }
        out.points.push_back({mu1, pick, g(pick), segment});
        open = true;
    }
    if (open && !out.points.empty()) out.end_markers.push_back({out.points.back().mu1, out.points.back().mu2});
    return out;
}

// ---------------------------------------------------------------------------
// Region signatures

struct SaddleRank {
    EquilibriumLabel label = EquilibriumLabel::Refined;
    double energy = 0.0;
    int rank = 0; ///< equal energies (within tolerance) share a rank
};

struct RegionSignature {
    int n_saddles = 0;
    int n_centers = 0;
    bool has_off_axis = false;
    bool vortex_pair_flag = false;
    std::vector<EquilibriumLabel> center_labels; ///< sorted
    std::vector<SaddleRank> saddle_energy_order; ///< ascending energy

    /// Canonical text form, e.g. "S2C2|on|O1-,O2+|O2-<O1+". Ties are joined with '='.
    std::string key() const
    {
        std::string k = "S" + std::to_string(n_saddles) + "C" + std::to_string(n_centers) + (has_off_axis ? "|off|" : "|on|");
        for (std::size_t i = 0; i < center_labels.size(); ++i) {
            if (i > 0) k += ",";
            k += to_string(center_labels[i]);
        }
        k += "|";
        for (std::size_t i = 0; i < saddle_energy_order.size(); ++i) {
            if (i > 0) k += saddle_energy_order[i].rank == saddle_energy_order[i - 1].rank ? "=" : "<";
            k += to_string(saddle_energy_order[i].label);
        }
        return k;
    }

    std::vector<EquilibriumLabel> saddle_labels() const
    {
        std::vector<EquilibriumLabel> out;
        for (const auto& s : saddle_energy_order) out.push_back(s.label);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool same_ordering(const RegionSignature& o) const
    {
        if (saddle_energy_order.size() != o.saddle_energy_order.size()) return false;
        for (std::size_t i = 0; i < saddle_energy_order.size(); ++i)
            if (saddle_energy_order[i].label != o.saddle_energy_order[i].label
                || saddle_energy_order[i].rank != o.saddle_energy_order[i].rank)
                return false;
        return true;
    }

    bool operator==(const RegionSignature& o) const { return key() == o.key(); }
};

inline constexpr double kCurveMargin = 1e-6;
inline constexpr double kEnergyTieTol = 1e-9;

namespace detail {

inline RegionSignature signature_from(const std::vector<Equilibrium>& es, double tie_tol)
{
    RegionSignature s;
    for (const auto& e : es) {
        if (e.kind == EquilibriumKind::Saddle) {
            ++s.n_saddles;
            s.saddle_energy_order.push_back({e.label, e.energy, 0});
        } else if (e.kind == EquilibriumKind::Center) {
            ++s.n_centers;
            s.center_labels.push_back(e.label);
        }
        s.has_off_axis |= is_off_axis(e.label);
    }
    s.vortex_pair_flag = s.has_off_axis;
    std::sort(s.center_labels.begin(), s.center_labels.end());
    auto& order = s.saddle_energy_order;
    std::sort(order.begin(), order.end(), [](const SaddleRank& x, const SaddleRank& y) { return x.energy < y.energy; });
    // Group into tie classes, then order labels within a class for determinism.
    int rank = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0 && order[i].energy - order[i - 1].energy > tie_tol) ++rank;
        order[i].rank = rank;
    }
    std::stable_sort(order.begin(), order.end(), [](const SaddleRank& x, const SaddleRank& y) {
        return x.rank != y.rank ? x.rank < y.rank : x.label < y.label;
    });
    return s;
}

} // namespace detail

/// Smallest |defining function| over the local curves at (mu1, mu2).
inline double local_curve_margin(const ZoneParameters& z, double mu1, double mu2)
{
    double m = std::numeric_limits<double>::infinity();
    for (CurveTag t : kLocalCurves) m = std::min(m, std::abs(curve_function(z, t, mu1, mu2)));
    return m;
}

/// Signature of the region containing (z.mu1, z.mu2), or nothing when the point
/// is within `margin` of a local curve.
inline std::optional<RegionSignature> try_region_signature(const ZoneParameters& z, double margin = kCurveMargin)
{
    if (local_curve_margin(z, z.mu1, z.mu2) < margin) return std::nullopt;
    return detail::signature_from(closed_form_equilibria(z), kEnergyTieTol);
}

inline RegionSignature region_signature(const ZoneParameters& z, double margin = kCurveMargin)
{
    auto s = try_region_signature(z, margin);
    if (!s)
        throw Error(ErrorCode::OnCurve, "parameters (" + std::to_string(z.mu1) + ", " + std::to_string(z.mu2)
                                            + ") lie on a bifurcation curve");
    return *s;
}

/// Label under the point symmetry (mu1, mu2, u, v, H) -> (-mu1, -mu2, -u, v + pi, -H).
inline EquilibriumLabel mirror_label(EquilibriumLabel l)
{
    switch (l) {
    case EquilibriumLabel::O1Plus: return EquilibriumLabel::O2Minus;
    case EquilibriumLabel::O1Minus: return EquilibriumLabel::O2Plus;
    case EquilibriumLabel::O2Plus: return EquilibriumLabel::O1Minus;
    case EquilibriumLabel::O2Minus: return EquilibriumLabel::O1Plus;
    case EquilibriumLabel::O3: return EquilibriumLabel::O4;
    case EquilibriumLabel::O4: return EquilibriumLabel::O3;
    case EquilibriumLabel::Refined: break;
    }
    return l;
}

/// Signature expected at (-mu1, -mu2) given the one at (mu1, mu2).
inline RegionSignature mirror_signature(const RegionSignature& s)
{
    RegionSignature m = s;
    for (auto& l : m.center_labels) l = mirror_label(l);
    std::sort(m.center_labels.begin(), m.center_labels.end());
    m.saddle_energy_order.clear();
    for (const auto& r : s.saddle_energy_order) m.saddle_energy_order.push_back({mirror_label(r.label), -r.energy, 0});
    auto& order = m.saddle_energy_order;
    std::reverse(order.begin(), order.end());
    const int top = s.saddle_energy_order.empty() ? 0 : s.saddle_energy_order.back().rank;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& src = s.saddle_energy_order[order.size() - 1 - i];
        order[i].rank = top - src.rank;
    }
    std::stable_sort(order.begin(), order.end(), [](const SaddleRank& x, const SaddleRank& y) {
        return x.rank != y.rank ? x.rank < y.rank : x.label < y.label;
    });
    return m;
}

// ---------------------------------------------------------------------------
// Transitions

enum class Scenario { Loops, VortexPairs, Codim2A, Local };

constexpr std::string_view to_string(Scenario s)
{
    switch (s) {
    case Scenario::Loops: return "LOOPS";
    case Scenario::VortexPairs: return "VORTEX_PAIRS";
    case Scenario::Codim2A: return "CODIM2_A";
    case Scenario::Local: return "LOCAL";
    }
    return "UNKNOWN";
}

enum class ReconnectionType { None, MergingLoops, Triangle };

constexpr std::string_view to_string(ReconnectionType t)
{
    switch (t) {
    case ReconnectionType::None: return "none";
    case ReconnectionType::MergingLoops: return "merging_loops";
    case ReconnectionType::Triangle: return "triangle";
    }
    return "unknown";
}

struct Crossing {
    ZoneParameters zone; ///< a, b, p of the family; mu1/mu2 ignored
    ParameterPoint at;
    std::optional<CurveTag> curve; ///< curve crossed, when known
};

struct Transition {
    Scenario scenario = Scenario::Local;
    ReconnectionType reconnection = ReconnectionType::None;
    std::vector<SaddlePair> flipped; ///< saddle pairs whose energy order changed
};

inline constexpr double kCodim2Tol = 1e-6;

/// Smallest energy gap between distinct saddle or degenerate equilibria at a
/// point, ignoring coincident points and the symmetric O3/O4 pair.
inline double min_saddle_energy_gap(const ZoneParameters& z)
{
    std::vector<Equilibrium> cand;
    for (const auto& e : closed_form_equilibria(z))
        if (e.kind != EquilibriumKind::Center) cand.push_back(e);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t j = i + 1; j < cand.size(); ++j) {
            if (is_off_axis(cand[i].label) && is_off_axis(cand[j].label)) continue;
            const double dist = std::hypot(cand[i].state.u - cand[j].state.u,
                                           std::remainder(cand[i].state.v - cand[j].state.v, kTwoPi));
            if (dist < 1e-6) continue;
            gap = std::min(gap, std::abs(cand[i].energy - cand[j].energy));
        }
    return gap;
}

namespace detail {

inline std::vector<SaddlePair> flipped_pairs(const RegionSignature& a, const RegionSignature& b)
{
    std::map<EquilibriumLabel, int> ra, rb;
    for (const auto& s : a.saddle_energy_order) ra[s.label] = s.rank;
    for (const auto& s : b.saddle_energy_order) rb[s.label] = s.rank;
    std::vector<SaddlePair> out;
    for (auto i = ra.begin(); i != ra.end(); ++i)
        for (auto j = std::next(i); j != ra.end(); ++j) {
            if (!rb.count(i->first) || !rb.count(j->first)) continue;
            const int sa = (i->second > j->second) - (i->second < j->second);
            const int sb = (rb[i->first] > rb[j->first]) - (rb[i->first] < rb[j->first]);
            if (sa != sb) out.push_back({i->first, j->first});
        }
    return out;
}

} // namespace detail

/// Scenario of a single curve crossing between two regions.
inline Transition classify_transition(const RegionSignature& before, const RegionSignature& after, const Crossing& crossing)
{
    Transition t;
    const ZoneParameters zc = crossing.zone.with_mu(crossing.at.mu1, crossing.at.mu2);

    const bool on_m5 = std::abs(curve_function(zc, CurveTag::M5Plus, zc.mu1, zc.mu2)) < kCodim2Tol
                       || std::abs(curve_function(zc, CurveTag::M5Minus, zc.mu1, zc.mu2)) < kCodim2Tol;
    if (on_m5 && min_saddle_energy_gap(zc) < kCodim2Tol) {
        t.scenario = Scenario::Codim2A;
        t.flipped = detail::flipped_pairs(before, after);
        return t;
    }

    auto inconsistent = [&](const std::string& why) {
        return Error(ErrorCode::Inconsistent, before.key() + " -> " + after.key() + ": " + why);
    };
    const bool counts_same = before.n_saddles == after.n_saddles && before.n_centers == after.n_centers;
    const bool tag_is = crossing.curve.has_value();
    std::vector<EquilibriumLabel> center_diff;
    std::set_symmetric_difference(before.center_labels.begin(), before.center_labels.end(), after.center_labels.begin(),
                                  after.center_labels.end(), std::back_inserter(center_diff));

    if (before.has_off_axis != after.has_off_axis) {
        if (tag_is && *crossing.curve != CurveTag::M5Plus && *crossing.curve != CurveTag::M5Minus)
            throw inconsistent("off-axis equilibria change across a non-m5 curve");
        if (std::abs(after.n_saddles - before.n_saddles) != 1 || after.n_saddles - before.n_saddles != after.n_centers - before.n_centers
            || center_diff.size() != 1)
            throw inconsistent("not a single triple-saddle split");
        t.scenario = Scenario::VortexPairs;
        return t;
    }
    if (!counts_same) {
        if (tag_is && *crossing.curve != CurveTag::M3 && *crossing.curve != CurveTag::M4)
            throw inconsistent("equilibrium counts change across a curve other than m3/m4");
        if (std::abs(after.n_saddles - before.n_saddles) != 1 || after.n_saddles - before.n_saddles != after.n_centers - before.n_centers
            || center_diff.size() != 1)
            throw inconsistent("counts change by more than one saddle-center pair");
        t.scenario = Scenario::Local;
        return t;
    }
    if (!center_diff.empty()) throw inconsistent("centers differ with equal counts");
    if (before.same_ordering(after)) throw inconsistent("signatures are identical");
    if (before.saddle_labels() != after.saddle_labels()) throw inconsistent("saddle sets differ with equal counts");
    if (tag_is && *crossing.curve != CurveTag::M6) throw inconsistent("energy order changes across a local curve");
    t.scenario = Scenario::Loops;
    t.flipped = detail::flipped_pairs(before, after);
    bool triangle = false;
    for (const auto& f : t.flipped) triangle |= is_off_axis(f.first) || is_off_axis(f.second);
    t.reconnection = triangle ? ReconnectionType::Triangle : ReconnectionType::MergingLoops;
    return t;
}

// ---------------------------------------------------------------------------
// Codimension-2 points where an m5 branch meets a reconnection curve

struct Codim2Point {
    ParameterPoint at;
    CurveTag branch = CurveTag::M5Plus;
    EquilibriumLabel partner = EquilibriumLabel::Refined; ///< saddle level matched by the triple point
};

/// Along each m5 branch the merged triple point is degenerate; its energy is
/// compared with every on-axis saddle on the other line and sign changes of the
/// difference are bisected in mu1.
inline std::vector<Codim2Point> find_codim2_points(const ZoneParameters& base, double mu1_lo, double mu1_hi,
                                                   double mu2_lo, double mu2_hi, int n_scan = 2000)
{
    base.validate();
    std::vector<Codim2Point> out;
    for (CurveTag branch : {CurveTag::M5Plus, CurveTag::M5Minus}) {
        const bool plus = branch == CurveTag::M5Plus;
        const double v_triple = plus ? 0.0 : kPi;
        const std::array<EquilibriumLabel, 2> partners = plus ? std::array{EquilibriumLabel::O2Plus, EquilibriumLabel::O2Minus}
                                                              : std::array{EquilibriumLabel::O1Plus, EquilibriumLabel::O1Minus};
        for (EquilibriumLabel partner : partners) {
            auto gap = [&](double mu1) {
                if (mu1 == 0.0) return std::numeric_limits<double>::quiet_NaN();
                const double mu2 = m5_mu2(base, mu1, plus);
                const ZoneParameters z = base.with_mu(mu1, mu2);
                const double h_triple = hamiltonian(z, {-z.a / mu1, v_triple});
                for (const auto& e : closed_form_equilibria(z))
                    if (e.label == partner && e.kind == EquilibriumKind::Saddle) return h_triple - e.energy;
                return std::numeric_limits<double>::quiet_NaN();
            };
            const auto xs = num::linspace(mu1_lo, mu1_hi, n_scan + 1);
            double prev = gap(xs[0]);
            for (std::size_t i = 1; i < xs.size(); ++i) {
                const double cur = gap(xs[i]);
                if (std::isfinite(prev) && std::isfinite(cur) && (prev > 0.0) != (cur > 0.0)) {
                    const double r = num::bisect(gap, xs[i - 1], xs[i]);
                    const double mu2 = m5_mu2(base, r, plus);
                    if (mu2 >= mu2_lo && mu2 <= mu2_hi && std::abs(gap(r)) < 1e-9) out.push_back({{r, mu2}, branch, partner});
                }
                prev = cur;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parameter-plane diagram

struct DiagramSpec {
    double a = 2.0;
    double b = 1.0;
    int p = 1;
    double mu1_lo = -3.0, mu1_hi = 3.0;
    double mu2_lo = -3.0, mu2_hi = 3.0;
    int n_mu1 = 600; ///< flood-fill cells along mu1
    int n_mu2 = 600;
    int curve_samples = 600; ///< points per analytic curve, columns for m6
    int min_component_cells = 16;
    int jobs = 1;

    ZoneParameters zone() const { return ZoneParameters{a, b, p, 0.0, 0.0, 0.0}; }

    void validate() const
    {
        zone().validate();
        if (!(mu1_hi > mu1_lo) || !(mu2_hi > mu2_lo)) throw Error(ErrorCode::InvalidArgument, "empty diagram window");
        if (n_mu1 < 2 || n_mu2 < 2 || curve_samples < 2) throw Error(ErrorCode::InvalidArgument, "grid sizes >= 2 required");
        if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs >= 1 required");
    }
};

struct DiagramCurve {
    std::string id; ///< tag plus branch index, e.g. "m5+.1" or "m6[O1+|O2-].0"
    CurveTag tag = CurveTag::M3;
    std::vector<ParameterPoint> points;
};

struct RegionSample {
    ParameterPoint at;
    RegionSignature signature;
    int cells = 0;
};

struct ParameterPlaneDiagram {
    DiagramSpec spec;
    std::vector<DiagramCurve> analytic_curves;
    std::vector<DiagramCurve> reconnection_curves;
    std::vector<RegionSample> region_samples;
    int dropped_fragments = 0;
    int boundary_cells = 0;

    std::size_t distinct_signatures() const
    {
        std::set<std::string> keys;
        for (const auto& r : region_samples) keys.insert(r.signature.key());
        return keys.size();
    }
};

namespace detail {

// Splits a sampled curve into polylines that stay inside the window.
inline void push_clipped(std::vector<DiagramCurve>& out, CurveTag tag, const std::vector<ParameterPoint>& pts,
                         const DiagramSpec& w)
{
    auto inside = [&](const ParameterPoint& q) {
        return std::isfinite(q.mu1) && std::isfinite(q.mu2) && q.mu1 >= w.mu1_lo && q.mu1 <= w.mu1_hi
               && q.mu2 >= w.mu2_lo && q.mu2 <= w.mu2_hi;
    };
    int branch = 0;
    for (const auto& c : out)
        if (c.tag == tag) ++branch;
    DiagramCurve cur;
    auto flush = [&] {
        if (cur.points.size() >= 2) {
            cur.tag = tag;
            cur.id = std::string(to_string(tag)) + "." + std::to_string(branch++);
            out.push_back(cur);
        }
        cur.points.clear();
    };
    for (const auto& q : pts) {
        if (inside(q)) cur.points.push_back(q);
        else flush();
    }
    flush();
}

inline std::vector<DiagramCurve> analytic_curves(const DiagramSpec& w)
{
    const ZoneParameters z = w.zone();
    std::vector<DiagramCurve> out;
    const auto mu2s = num::linspace(w.mu2_lo, w.mu2_hi, w.curve_samples);
    for (CurveTag tag : {CurveTag::M3, CurveTag::M4}) {
        std::vector<ParameterPoint> pts;
        for (double m2 : mu2s) pts.push_back({tag == CurveTag::M3 ? m3_mu1(z, m2) : m4_mu1(z, m2), m2});
        push_clipped(out, tag, pts, w);
    }
    if (z.a != 0.0) {
        for (CurveTag tag : {CurveTag::M5Plus, CurveTag::M5Minus}) {
            // The branches have a pole at mu1 = 0; sample each side separately.
            for (int side : {-1, 1}) {
                const double lo = side < 0 ? w.mu1_lo : 0.0, hi = side < 0 ? 0.0 : w.mu1_hi;
                if (!(hi > lo)) continue;
                std::vector<ParameterPoint> pts;
                for (double m1 : num::linspace(lo, hi, w.curve_samples)) {
                    if (m1 == 0.0) continue;
                    pts.push_back({m1, m5_mu2(z, m1, tag == CurveTag::M5Plus)});
                }
                push_clipped(out, tag, pts, w);
            }
        }
    }
    return out;
}

inline std::vector<SaddlePair> all_saddle_pairs()
{
    const std::array labels{EquilibriumLabel::O1Plus, EquilibriumLabel::O1Minus, EquilibriumLabel::O2Plus,
                            EquilibriumLabel::O2Minus, EquilibriumLabel::O3};
    std::vector<SaddlePair> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j) out.push_back({labels[i], labels[j]});
    return out;
}

// Reconnection curves of every saddle pair: per-mu1 sign changes on the mu2
// grid refined by bisection, linked column to column into polylines.
inline std::vector<DiagramCurve> reconnection_curves(const DiagramSpec& w)
{
    const ZoneParameters z = w.zone();
    const auto mu1s = num::linspace(w.mu1_lo, w.mu1_hi, w.curve_samples);
    const auto mu2s = num::linspace(w.mu2_lo, w.mu2_hi, w.n_mu2 + 1);
    const double dmu1 = mu1s[1] - mu1s[0], dmu2 = mu2s[1] - mu2s[0];
    const double link = 10.0 * std::max(dmu1, dmu2);

    const auto pairs = all_saddle_pairs();
    std::vector<std::vector<std::vector<double>>> roots(pairs.size(), std::vector<std::vector<double>>(mu1s.size()));
    for (std::size_t c = 0; c < mu1s.size(); ++c) {
        const double m1 = mu1s[c];
        std::vector<std::array<double, kLabelCount>> col(mu2s.size());
        for (std::size_t i = 0; i < mu2s.size(); ++i) col[i] = saddle_energy_table(z.with_mu(m1, mu2s[i]));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const int l1 = static_cast<int>(pairs[k].first), l2 = static_cast<int>(pairs[k].second);
            auto f = [&](double m2) {
                const auto t = saddle_energy_table(z.with_mu(m1, m2));
                return t[l1] - t[l2];
            };
            double prev = col[0][l1] - col[0][l2];
            for (std::size_t i = 1; i < mu2s.size(); ++i) {
                const double cur = col[i][l1] - col[i][l2];
                if (std::isfinite(prev) && std::isfinite(cur) && prev != 0.0 && (prev > 0.0) != (cur > 0.0)) {
                    const double r = num::bisect(f, mu2s[i - 1], mu2s[i]);
                    if (std::abs(f(r)) < kReconnectionTol) roots[k][c].push_back(r);
                }
                prev = cur;
            }
        }
    }

    std::vector<DiagramCurve> out;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& pair = pairs[k];
        const auto& columns = roots[k];
        // Greedy linking of roots in adjacent columns.
        std::vector<DiagramCurve> open, done;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            std::vector<DiagramCurve> next;
            std::vector<bool> used(open.size(), false);
            for (double r : columns[c]) {
                int best = -1;
                double best_d = link;
                for (std::size_t k = 0; k < open.size(); ++k) {
                    if (used[k]) continue;
                    const double d = std::abs(open[k].points.back().mu2 - r);
                    if (d < best_d) {
                        best_d = d;
                        best = static_cast<int>(k);
                    }
                }
                if (best >= 0) {
                    used[best] = true;
                    next.push_back(std::move(open[best]));
                } else {
                    next.emplace_back();
                }
                next.back().points.push_back({mu1s[c], r});
            }
            for (std::size_t k = 0; k < open.size(); ++k)
                if (!used[k]) done.push_back(std::move(open[k]));
            open = std::move(next);
        }
        for (auto& o : open) done.push_back(std::move(o));
        std::sort(done.begin(), done.end(), [](const DiagramCurve& x, const DiagramCurve& y) {
            return x.points.front().mu1 != y.points.front().mu1 ? x.points.front().mu1 < y.points.front().mu1
                                                                  : x.points.front().mu2 < y.points.front().mu2;
        });
        int branch = 0;
        for (auto& d : done) {
            if (d.points.size() < 2) continue;
            d.tag = CurveTag::M6;
            d.id = "m6[" + to_string(pair) + "]." + std::to_string(branch++);
            out.push_back(std::move(d));
        }
    }
    return out;
}

} // namespace detail

/// Assembles analytic curves, reconnection curves and one signature sample per
/// connected component of the window minus the curves. Components are found by
/// 4-connected flood fill of equal signatures on a cell-centred grid; components
/// smaller than min_component_cells are treated as resolution fragments.
inline ParameterPlaneDiagram build_parameter_diagram(const DiagramSpec& spec)
{
    spec.validate();
    ParameterPlaneDiagram d;
    d.spec = spec;
    d.analytic_curves = detail::analytic_curves(spec);
    d.reconnection_curves = detail::reconnection_curves(spec);

    const int n1 = spec.n_mu1, n2 = spec.n_mu2;
    const double h1 = (spec.mu1_hi - spec.mu1_lo) / n1, h2 = (spec.mu2_hi - spec.mu2_lo) / n2;
    auto cell = [&](int i, int j) { return ParameterPoint{spec.mu1_lo + (i + 0.5) * h1, spec.mu2_lo + (j + 0.5) * h2}; };
    const ZoneParameters z = spec.zone();

    // Signature keys per cell; -1 marks cells on or too close to a curve.
    std::vector<std::string> keys_by_id;
    std::vector<int> key_of(static_cast<std::size_t>(n1) * n2, -1);
    std::vector<std::optional<RegionSignature>> sig(key_of.size());
    auto work = [&](int row_begin, int row_end) {
        for (int j = row_begin; j < row_end; ++j)
            for (int i = 0; i < n1; ++i) {
                const auto q = cell(i, j);
                sig[static_cast<std::size_t>(j) * n1 + i] = try_region_signature(z.with_mu(q.mu1, q.mu2));
            }
    };
    if (spec.jobs <= 1) {
        work(0, n2);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n2 + spec.jobs - 1) / spec.jobs;
        for (int t = 0; t < spec.jobs; ++t) {
            const int lo = t * chunk, hi = std::min(n2, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    std::map<std::string, int> ids;
    for (std::size_t c = 0; c < sig.size(); ++c) {
        if (!sig[c]) {
            ++d.boundary_cells;
            continue;
        }
        const auto k = sig[c]->key();
        auto it = ids.find(k);
        if (it == ids.end()) it = ids.emplace(k, static_cast<int>(ids.size())).first;
        key_of[c] = it->second;
    }

    std::vector<int> comp(key_of.size(), -1);
    int n_comp = 0;
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            const std::size_t start = static_cast<std::size_t>(j) * n1 + i;
            if (key_of[start] < 0 || comp[start] >= 0) continue;
            std::vector<std::size_t> members;
            std::queue<std::size_t> q;
            q.push(start);
            comp[start] = n_comp;
            while (!q.empty()) {
                const std::size_t c = q.front();
                q.pop();
                members.push_back(c);
                const int ci = static_cast<int>(c % n1), cj = static_cast<int>(c / n1);
                const int di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int ni = ci + di[k], nj = cj + dj[k];
                    if (ni < 0 || nj < 0 || ni >= n1 || nj >= n2) continue;
                    const std::size_t nc = static_cast<std::size_t>(nj) * n1 + ni;
                    if (comp[nc] >= 0 || key_of[nc] != key_of[start]) continue;
                    comp[nc] = n_comp;
                    q.push(nc);
                }
            }
            ++n_comp;
            if (static_cast<int>(members.size()) < spec.min_component_cells) {
                ++d.dropped_fragments;
                continue;
            }
            // Representative: member cell nearest to the component centroid.
            double ci = 0.0, cj = 0.0;
            for (auto m : members) {
                ci += static_cast<double>(m % n1);
                cj += static_cast<double>(m / n1);
            }
            ci /= members.size();
            cj /= members.size();
            std::size_t best = members.front();
            double best_d = std::numeric_limits<double>::infinity();
            for (auto m : members) {
                const double dd = std::hypot(static_cast<double>(m % n1) - ci, static_cast<double>(m / n1) - cj);
                if (dd < best_d) {
                    best_d = dd;
                    best = m;
                }
            }
            d.region_samples.push_back({cell(static_cast<int>(best % n1), static_cast<int>(best / n1)), *sig[best],
                                        static_cast<int>(members.size())});
        }
    return d;
}

} // namespace degres
