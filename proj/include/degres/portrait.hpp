#pragma once

// Level sets of the zone Hamiltonian by marching squares: separatrix levels
// plus evenly spaced representative levels over a rectangular window.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "degres/equilibria.hpp"
#include "degres/error.hpp"
#include "degres/zone_model.hpp"

namespace degres {

struct PortraitWindow {
    double u_lo = -3.0, u_hi = 3.0;
    double v_lo = 0.0, v_hi = kTwoPi;

    void validate() const
    {
        if (!(std::isfinite(u_lo) && std::isfinite(u_hi) && std::isfinite(v_lo) && std::isfinite(v_hi)))
            throw Error(ErrorCode::InvalidArgument, "portrait window must be bounded");
        if (!(u_lo < u_hi && v_lo < v_hi)) throw Error(ErrorCode::InvalidArgument, "portrait window is empty");
    }

    bool contains(PhaseState s) const { return s.u >= u_lo && s.u <= u_hi && s.v >= v_lo && s.v <= v_hi; }
};

struct Polyline {
    std::vector<PhaseState> points;
    bool closed = false;
};

enum class LevelKind { Separatrix, Representative, CenterBasin };

inline std::string_view to_string(LevelKind k)
{
    switch (k) {
    case LevelKind::Separatrix: return "separatrix";
    case LevelKind::Representative: return "representative";
    case LevelKind::CenterBasin: return "center";
    }
    return "?";
}

struct ContourLevel {
    double level = 0.0;
    LevelKind kind = LevelKind::Representative;
    std::vector<Polyline> lines;

    bool separatrix() const { return kind == LevelKind::Separatrix; }
};

struct PhasePortrait {
    ZoneParameters params;
    PortraitWindow window;
    int n_grid = 512;
    std::vector<ContourLevel> levels;
    std::vector<Equilibrium> equilibria; ///< all 2pi-images inside the window
    double h_min = 0.0, h_max = 0.0;
    double lipschitz_bound = 0.0; ///< max |grad H| on the grid times the cell diagonal

    double du() const { return (window.u_hi - window.u_lo) / (n_grid - 1); }
    double dv() const { return (window.v_hi - window.v_lo) / (n_grid - 1); }
};

namespace detail {

// Scalar field sampled on an n x n node grid, row index j along v.
struct NodeGrid {
    int n;
    double u0, v0, du, dv;
    std::vector<double> h;

    double at(int i, int j) const { return h[static_cast<std::size_t>(j) * n + i]; }
};

inline std::vector<Polyline> march(const NodeGrid& g, double level)
{
    const int n = g.n;
    auto hid = [n](int i, int j) { return 2 * (static_cast<std::int64_t>(j) * n + i); };
    auto vid = [n](int i, int j) { return 2 * (static_cast<std::int64_t>(j) * n + i) + 1; };
    auto point_on = [&](std::int64_t id) {
        const std::int64_t node = id / 2;
        const int i = static_cast<int>(node % n), j = static_cast<int>(node / n);
        const int i1 = (id % 2 == 0) ? i + 1 : i, j1 = (id % 2 == 0) ? j : j + 1;
        const double a = g.at(i, j), b = g.at(i1, j1);
        const double t = a == b ? 0.5 : std::clamp((level - a) / (b - a), 0.0, 1.0);
        return PhaseState{g.u0 + g.du * (i + t * (i1 - i)), g.v0 + g.dv * (j + t * (j1 - j))};
    };

    // Adjacency of edge crossings; each crossing belongs to at most two cells.
    std::unordered_map<std::int64_t, std::array<std::int64_t, 2>> adj;
    auto link = [&](std::int64_t a, std::int64_t b) {
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
            auto [it, fresh] = adj.try_emplace(x, std::array<std::int64_t, 2>{-1, -1});
            (void)fresh;
            if (it->second[0] < 0) it->second[0] = y;
            else it->second[1] = y;
        }
    };

    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            const double c0 = g.at(i, j), c1 = g.at(i + 1, j), c2 = g.at(i + 1, j + 1), c3 = g.at(i, j + 1);
            const int idx = (c0 >= level) | (c1 >= level) << 1 | (c2 >= level) << 2 | (c3 >= level) << 3;
            if (idx == 0 || idx == 15) continue;
            const std::int64_t e0 = hid(i, j), e1 = vid(i + 1, j), e2 = hid(i, j + 1), e3 = vid(i, j);
            if (idx == 5 || idx == 10) {
                const bool centre_above = 0.25 * (c0 + c1 + c2 + c3) >= level;
                if ((idx == 5) == centre_above) {
                    link(e0, e1);
                    link(e2, e3);
                } else {
                    link(e3, e0);
                    link(e1, e2);
                }
                continue;
            }
            std::array<std::int64_t, 2> ends{};
            int k = 0;
            if (((idx >> 0) ^ (idx >> 1)) & 1) ends[k++] = e0;
            if (((idx >> 1) ^ (idx >> 2)) & 1) ends[k++] = e1;
            if (((idx >> 3) ^ (idx >> 2)) & 1) ends[k++] = e2;
            if (((idx >> 0) ^ (idx >> 3)) & 1) ends[k++] = e3;
            link(ends[0], ends[1]);
        }
    }

    // Deterministic traversal: visit crossings in id order, open chains first.
    std::vector<std::int64_t> ids;
    ids.reserve(adj.size());
    for (const auto& kv : adj) ids.push_back(kv.first);
    std::sort(ids.begin(), ids.end());
    std::unordered_map<std::int64_t, bool> seen;
    seen.reserve(adj.size());

    std::vector<Polyline> out;
    auto walk = [&](std::int64_t start) {
        Polyline line;
        std::int64_t prev = -1, cur = start;
        while (true) {
            seen[cur] = true;
            line.points.push_back(point_on(cur));
            const auto& nb = adj.at(cur);
            std::int64_t next = nb[0] != prev ? nb[0] : nb[1];
            if (nb[0] == nb[1]) next = -1; // degenerate two-cell loop already closed
            if (next < 0) break;
            if (next == start) {
                line.closed = true;
                line.points.push_back(line.points.front());
                break;
            }
            if (seen.count(next)) break;
            prev = cur;
            cur = next;
        }
        out.push_back(std::move(line));
    };
    for (auto id : ids)
        if (!seen.count(id) && adj.at(id)[1] < 0) walk(id);
    for (auto id : ids)
        if (!seen.count(id)) walk(id);
    return out;
}

} // namespace detail

/// Even-odd point-in-polygon test against a closed polyline.
inline bool encloses(const Polyline& line, PhaseState p)
{
    if (!line.closed) return false;
    bool inside = false;
    const auto& q = line.points;
    for (std::size_t a = 0, b = q.size() - 1; a < q.size(); b = a++) {
        if ((q[a].v > p.v) != (q[b].v > p.v)) {
            const double x = q[b].u + (p.v - q[b].v) * (q[a].u - q[b].u) / (q[a].v - q[b].v);
            if (p.u < x) inside = !inside;
        }
    }
    return inside;
}

/// Marching-squares portrait on an n_grid x n_grid node grid. Levels are all
/// saddle energies, then n_levels values evenly spaced strictly inside
/// [min H, max H] over the window, then one basin level per center.
inline PhasePortrait sample_phase_portrait(const ZoneParameters& z, const PortraitWindow& window, int n_levels,
                                           int n_grid = 512)
{
    z.validate();
    window.validate();
    if (n_levels < 3) throw Error(ErrorCode::InvalidArgument, "n_levels >= 3 required");
    if (n_grid < 8) throw Error(ErrorCode::InvalidArgument, "n_grid >= 8 required");

    PhasePortrait out;
    out.params = z;
    out.window = window;
    out.n_grid = n_grid;

    detail::NodeGrid g{n_grid, window.u_lo, window.v_lo, out.du(), out.dv(), {}};
    g.h.resize(static_cast<std::size_t>(n_grid) * n_grid);
    double gmax = 0.0;
    out.h_min = std::numeric_limits<double>::infinity();
    out.h_max = -out.h_min;
    for (int j = 0; j < n_grid; ++j) {
        for (int i = 0; i < n_grid; ++i) {
            const PhaseState s{g.u0 + g.du * i, g.v0 + g.dv * j};
            const double h = hamiltonian(z, s);
            g.h[static_cast<std::size_t>(j) * n_grid + i] = h;
            out.h_min = std::min(out.h_min, h);
            out.h_max = std::max(out.h_max, h);
            gmax = std::max(gmax, vector_field(z, s).norm());
        }
    }
    out.lipschitz_bound = gmax * std::hypot(g.du, g.dv);

    if (z.b3 == 0.0) {
        for (const auto& e : closed_form_equilibria(z)) {
            const int k_lo = static_cast<int>(std::floor((window.v_lo - e.state.v) / kTwoPi));
            const int k_hi = static_cast<int>(std::ceil((window.v_hi - e.state.v) / kTwoPi));
            for (int k = k_lo; k <= k_hi; ++k) {
                Equilibrium img = e;
                img.state.v = e.state.v + k * kTwoPi;
                if (window.contains(img.state)) out.equilibria.push_back(img);
            }
        }
    }

    std::vector<double> saddle_levels;
    for (const auto& e : out.equilibria)
        if (e.kind == EquilibriumKind::Saddle) saddle_levels.push_back(e.energy);
    std::sort(saddle_levels.begin(), saddle_levels.end());
    saddle_levels.erase(std::unique(saddle_levels.begin(), saddle_levels.end(),
                                    [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1 + std::abs(x)); }),
                        saddle_levels.end());

    for (double h : saddle_levels) out.levels.push_back({h, LevelKind::Separatrix, detail::march(g, h)});
    for (int k = 0; k < n_levels; ++k) {
        const double h = out.h_min + (k + 1) * (out.h_max - out.h_min) / (n_levels + 1);
        out.levels.push_back({h, LevelKind::Representative, detail::march(g, h)});
    }
    // One level per center, halfway to the next critical value on the side H
    // moves away from it, so each center gets a closed contour even when its
    // island falls between the representative levels. If that contour runs
    // into the window edge the level is pulled towards the center.
    std::vector<double> done;
    for (const auto& e : out.equilibria) {
        if (e.kind != EquilibriumKind::Center) continue;
        const bool minimum = field_jacobian(z, e.state).vu > 0.0; // H_uu
        double bound = minimum ? out.h_max : out.h_min;
        for (double h : saddle_levels)
            if (minimum ? (h > e.energy && h < bound) : (h < e.energy && h > bound)) bound = h;
        const bool enclosed_already = std::any_of(out.levels.begin(), out.levels.end(), [&](const ContourLevel& lv) {
            return lv.kind == LevelKind::CenterBasin
                && std::any_of(lv.lines.begin(), lv.lines.end(), [&](const Polyline& l) { return encloses(l, e.state); });
        });
        if (enclosed_already) continue;
        ContourLevel best{e.energy + 0.5 * (bound - e.energy), LevelKind::CenterBasin, {}};
        for (double frac = 0.5; frac > 1e-4; frac *= 0.5) {
            const double h = e.energy + frac * (bound - e.energy);
            auto lines = detail::march(g, h);
            const bool ok = std::any_of(lines.begin(), lines.end(), [&](const Polyline& l) { return encloses(l, e.state); });
            if (frac == 0.5 || ok) best = {h, LevelKind::CenterBasin, std::move(lines)};
            if (ok) break;
        }
        out.levels.push_back(std::move(best));
    }
    return out;
}

} // namespace degres
