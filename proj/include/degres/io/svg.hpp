#pragma once

// Static SVG rendering of parameter diagrams, phase portraits and map orbits.
// Coordinates are printed with fixed precision so identical input gives
// byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "degres/equilibria.hpp"
#include "degres/flow.hpp"
#include "degres/io/format.hpp"
#include "degres/portrait.hpp"
#include "degres/reconnection.hpp"

namespace degres::io {

/// CSS class for a curve tag; '+'/'-' are not valid in bare class selectors.
inline std::string_view tag_class(CurveTag t)
{
    switch (t) {
    case CurveTag::M3: return "m3";
    case CurveTag::M4: return "m4";
    case CurveTag::M5Plus: return "m5p";
    case CurveTag::M5Minus: return "m5m";
    case CurveTag::M6: return "m6";
    }
    return "curve";
}

inline std::string_view tag_style(CurveTag t)
{
    switch (t) {
    case CurveTag::M3: return "stroke:#1f77b4;stroke-width:1.6";
    case CurveTag::M4: return "stroke:#2ca02c;stroke-width:1.6";
    case CurveTag::M5Plus: return "stroke:#d62728;stroke-width:1.6";
    case CurveTag::M5Minus: return "stroke:#9467bd;stroke-width:1.6;stroke-dasharray:6 3";
    case CurveTag::M6: return "stroke:#ff7f0e;stroke-width:1.4;stroke-dasharray:2 2";
    }
    return "stroke:#000";
}

/// Axis ticks at 1, 2 or 5 times a power of ten, roughly `target` of them.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
    std::vector<double> out;
    const double span = hi - lo;
    if (!(span > 0.0) || !std::isfinite(span)) return out;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    for (long k = static_cast<long>(std::ceil(lo / step - 1e-9)); k * step <= hi + 1e-9 * step; ++k) {
        const double t = k * step;
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return out;
}

class SvgPlot {
public:
    SvgPlot(double x_lo, double x_hi, double y_lo, double y_hi, std::string x_label, std::string y_label)
        : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), x_label_(std::move(x_label)), y_label_(std::move(y_label))
    {
        if (!(x_hi_ > x_lo_)) x_hi_ = x_lo_ + 1.0;
        if (!(y_hi_ > y_lo_)) y_hi_ = y_lo_ + 1.0;
    }

    void add_style(std::string rule) { styles_.push_back(std::move(rule)); }
    void add_comment(const std::vector<std::string>& lines) { meta_ = lines; }

    /// Legend entries (line class, label), drawn in the top-left corner.
    void add_legend(std::string cls, std::string label) { legend_.emplace_back(std::move(cls), std::move(label)); }

    template <typename Points>
    void polyline(const Points& pts, std::string_view cls, std::string_view extra = {})
    {
        std::string path;
        std::size_t n = 0;
        for (const auto& [x, y] : pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            path += n++ ? " " : "";
            path += px(x) + "," + py(y);
        }
        if (n < 2) return;
        body_ += "<polyline class=\"" + std::string(cls) + "\"" + std::string(extra) + " points=\"" + path + "\"/>\n";
    }

    void cross(double x, double y, std::string_view cls, std::string_view title)
    {
        const double cx = sx(x), cy = sy(y), r = 4.0;
        body_ += "<g class=\"" + std::string(cls) + "\"><title>" + escape(title) + "</title><path d=\"M" + fixed(cx - r) + ","
                 + fixed(cy - r) + "L" + fixed(cx + r) + "," + fixed(cy + r) + "M" + fixed(cx - r) + "," + fixed(cy + r)
                 + "L" + fixed(cx + r) + "," + fixed(cy - r) + "\"/></g>\n";
    }

    void dot(double x, double y, double r, std::string_view cls, std::string_view title = {})
    {
        body_ += "<circle class=\"" + std::string(cls) + "\" cx=\"" + px(x) + "\" cy=\"" + py(y) + "\" r=\"" + fixed(r) + "\"";
        if (title.empty()) body_ += "/>\n";
        else body_ += "><title>" + escape(title) + "</title></circle>\n";
    }

    std::string str() const
    {
        std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight)
             + "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(kHeight) + "\">\n";
        if (!meta_.empty()) {
            s += "<!--\n";
            for (const auto& l : meta_) s += comment_safe(l) + "\n";
            s += "-->\n";
        }
        s += "<style>\n";
        s += "text{font-family:sans-serif;font-size:12px;fill:#222}\n";
        s += ".axis{stroke:#222;stroke-width:1;fill:none}\n.grid{stroke:#ddd;stroke-width:0.5}\n";
        s += "polyline{fill:none}\n.saddle path{stroke:#000;stroke-width:1.5}\n.center{fill:#000}\n";
        for (const auto& r : styles_) s += r + "\n";
        s += "</style>\n";
        s += "<rect x=\"0\" y=\"0\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight) + "\" fill=\"#fff\"/>\n";
        s += "<defs><clipPath id=\"plot\"><rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\""
             + fixed(plot_w()) + "\" height=\"" + fixed(plot_h()) + "\"/></clipPath></defs>\n";
        s += axes();
        s += "<g clip-path=\"url(#plot)\">\n" + body_ + "</g>\n";
        if (!legend_.empty()) {
            const double x = kLeft + 10, y = kTop + 10;
            s += "<rect x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" width=\"90.00\" height=\""
                 + fixed(18.0 * legend_.size() + 8) + "\" fill=\"#fff\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
            for (std::size_t k = 0; k < legend_.size(); ++k) {
                const double yy = y + 16 + 18.0 * k;
                s += "<line class=\"" + legend_[k].first + "\" x1=\"" + fixed(x + 8) + "\" y1=\"" + fixed(yy - 4) + "\" x2=\""
                     + fixed(x + 38) + "\" y2=\"" + fixed(yy - 4) + "\"/>\n";
                s += "<text x=\"" + fixed(x + 46) + "\" y=\"" + fixed(yy) + "\">" + escape(legend_[k].second) + "</text>\n";
            }
        }
        s += "</svg>\n";
        return s;
    }

private:
    static constexpr double kWidth = 720, kHeight = 560;
    static constexpr double kLeft = 70, kRight = 20, kTop = 20, kBottom = 60;

    double x_lo_, x_hi_, y_lo_, y_hi_;
    std::string x_label_, y_label_;
    std::vector<std::string> styles_;
    std::vector<std::string> meta_;
    std::vector<std::pair<std::string, std::string>> legend_;
    std::string body_;

    static double plot_w() { return kWidth - kLeft - kRight; }
    static double plot_h() { return kHeight - kTop - kBottom; }
    double sx(double x) const { return kLeft + (x - x_lo_) / (x_hi_ - x_lo_) * plot_w(); }
    double sy(double y) const { return kTop + (y_hi_ - y) / (y_hi_ - y_lo_) * plot_h(); }
    std::string px(double x) const { return fixed(sx(x)); }
    std::string py(double y) const { return fixed(sy(y)); }

    static std::string fixed(double x)
    {
        // Large values only appear far outside the clip box; keep them finite.
        x = std::clamp(x, -1e7, 1e7);
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.2f", x);
        std::string s = buf;
        if (s == "-0.00") s = "0.00";
        return s;
    }

    static std::string tick_label(double t)
    {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%g", t);
        return buf;
    }

    static std::string escape(std::string_view t)
    {
        std::string out;
        for (char c : t) {
            if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else if (c == '&') out += "&amp;";
            else if (c == '"') out += "&quot;";
            else out += c;
        }
        return out;
    }

    static std::string comment_safe(std::string s)
    {
        for (std::size_t k; (k = s.find("--")) != std::string::npos;) s.replace(k, 2, "- -");
        return s;
    }

    std::string axes() const
    {
        std::string s;
        const double x0 = kLeft, x1 = kLeft + plot_w(), y0 = kTop, y1 = kTop + plot_h();
        for (double t : nice_ticks(x_lo_, x_hi_)) {
            const std::string x = px(t);
            s += "<line class=\"grid\" x1=\"" + x + "\" y1=\"" + fixed(y0) + "\" x2=\"" + x + "\" y2=\"" + fixed(y1) + "\"/>\n";
            s += "<line class=\"axis\" x1=\"" + x + "\" y1=\"" + fixed(y1) + "\" x2=\"" + x + "\" y2=\"" + fixed(y1 + 5) + "\"/>\n";
            s += "<text x=\"" + x + "\" y=\"" + fixed(y1 + 19) + "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
        }
        for (double t : nice_ticks(y_lo_, y_hi_)) {
            const std::string y = py(t);
            s += "<line class=\"grid\" x1=\"" + fixed(x0) + "\" y1=\"" + y + "\" x2=\"" + fixed(x1) + "\" y2=\"" + y + "\"/>\n";
            s += "<line class=\"axis\" x1=\"" + fixed(x0 - 5) + "\" y1=\"" + y + "\" x2=\"" + fixed(x0) + "\" y2=\"" + y + "\"/>\n";
            s += "<text x=\"" + fixed(x0 - 8) + "\" y=\"" + fixed(sy(t) + 4) + "\" text-anchor=\"end\">" + tick_label(t) + "</text>\n";
        }
        s += "<rect class=\"axis\" x=\"" + fixed(x0) + "\" y=\"" + fixed(y0) + "\" width=\"" + fixed(plot_w()) + "\" height=\""
             + fixed(plot_h()) + "\"/>\n";
        s += "<text x=\"" + fixed(0.5 * (x0 + x1)) + "\" y=\"" + fixed(kHeight - 18) + "\" text-anchor=\"middle\">"
             + escape(x_label_) + "</text>\n";
        s += "<text x=\"18\" y=\"" + fixed(0.5 * (y0 + y1)) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
             + fixed(0.5 * (y0 + y1)) + ")\">" + escape(y_label_) + "</text>\n";
        return s;
    }
};

namespace detail {

inline std::vector<std::pair<double, double>> xy(const std::vector<ParameterPoint>& pts)
{
    std::vector<std::pair<double, double>> out;
    out.reserve(pts.size());
    for (const auto& q : pts) out.emplace_back(q.mu1, q.mu2);
    return out;
}

inline std::vector<std::pair<double, double>> xy(const std::vector<PhaseState>& pts)
{
    std::vector<std::pair<double, double>> out;
    out.reserve(pts.size());
    for (const auto& q : pts) out.emplace_back(q.u, q.v);
    return out;
}

inline void equilibrium_glyphs(SvgPlot& plot, const std::vector<Equilibrium>& es)
{
    for (const auto& e : es) {
        const std::string title = std::string(to_string(e.label)) + " " + std::string(to_string(e.kind));
        if (e.kind == EquilibriumKind::Saddle) plot.cross(e.state.u, e.state.v, "saddle", title);
        else if (e.kind == EquilibriumKind::Center) plot.dot(e.state.u, e.state.v, 3.5, "center", title);
        else plot.dot(e.state.u, e.state.v, 3.5, "degenerate", title);
    }
}

} // namespace detail

/// Parameter plane: one polyline per curve, styled by tag; region samples as
/// small grey dots titled with their signature.
inline std::string render_diagram(const ParameterPlaneDiagram& d, const std::vector<std::string>& meta = {})
{
    SvgPlot plot(d.spec.mu1_lo, d.spec.mu1_hi, d.spec.mu2_lo, d.spec.mu2_hi, "mu1", "mu2");
    plot.add_comment(meta);
    std::set<CurveTag> present;
    for (const auto* set : {&d.analytic_curves, &d.reconnection_curves})
        for (const auto& c : *set) present.insert(c.tag);
    for (CurveTag t : present) {
        plot.add_style("." + std::string(tag_class(t)) + "{" + std::string(tag_style(t)) + "}");
        plot.add_legend(std::string(tag_class(t)), std::string(to_string(t)));
    }
    plot.add_style(".region{fill:#888}");
    plot.add_style(".degenerate{fill:none;stroke:#000}");
    for (const auto* set : {&d.analytic_curves, &d.reconnection_curves})
        for (const auto& c : *set)
            plot.polyline(detail::xy(c.points), tag_class(c.tag), " data-tag=\"" + std::string(to_string(c.tag)) + "\"");
    for (const auto& r : d.region_samples) plot.dot(r.at.mu1, r.at.mu2, 2.5, "region", r.signature.key());
    return plot.str();
}

/// Phase portrait: contour lines by level kind, optional separatrix traces,
/// equilibria as glyphs (saddle: cross, center: dot).
inline std::string render_portrait(const PhasePortrait& pp, const std::vector<SeparatrixBranch>& separatrices = {},
                                   const std::vector<std::string>& meta = {})
{
    SvgPlot plot(pp.window.u_lo, pp.window.u_hi, pp.window.v_lo, pp.window.v_hi, "u", "v");
    plot.add_comment(meta);
    plot.add_style(".separatrix{stroke:#d62728;stroke-width:1.4}");
    plot.add_style(".representative{stroke:#555;stroke-width:0.8}");
    plot.add_style(".basin{stroke:#1f77b4;stroke-width:0.8}");
    plot.add_style(".trace{stroke:#ff7f0e;stroke-width:1}");
    plot.add_style(".degenerate{fill:none;stroke:#000}");
    for (const auto& lv : pp.levels) {
        const std::string_view cls = lv.kind == LevelKind::Separatrix ? "separatrix"
                                     : lv.kind == LevelKind::CenterBasin ? "basin"
                                                                         : "representative";
        for (const auto& line : lv.lines) plot.polyline(detail::xy(line.points), cls);
    }
    // Traces run on the cylinder; shift each into the window by whole periods.
    for (const auto& br : separatrices) {
        std::vector<std::pair<double, double>> seg;
        double shift = 0.0;
        bool first = true;
        for (const auto& s : br.trace.states) {
            if (first) {
                shift = kTwoPi * std::floor((s.state.v - pp.window.v_lo) / kTwoPi);
                first = false;
            }
            double v = s.state.v - shift;
            if (v < pp.window.v_lo || v > pp.window.v_hi) {
                plot.polyline(seg, "trace");
                seg.clear();
                shift += kTwoPi * std::floor((v - pp.window.v_lo) / kTwoPi);
                v = s.state.v - shift;
            }
            seg.emplace_back(s.state.u, v);
        }
        plot.polyline(seg, "trace");
    }
    detail::equilibrium_glyphs(plot, pp.equilibria);
    return plot.str();
}

/// Orbit points on the cylinder, one dot per iterate, one colour per orbit.
inline std::string render_orbits(const std::vector<std::vector<PhaseState>>& orbits, double u_lo, double u_hi,
                                 const std::vector<std::string>& meta = {})
{
    SvgPlot plot(u_lo, u_hi, 0.0, kTwoPi, "u", "v");
    plot.add_comment(meta);
    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    for (std::size_t k = 0; k < std::min<std::size_t>(orbits.size(), 10); ++k)
        plot.add_style(".o" + std::to_string(k) + "{fill:" + palette[k] + "}");
    for (std::size_t k = 0; k < orbits.size(); ++k) {
        const std::string cls = "o" + std::to_string(k % 10);
        for (const auto& s : orbits[k]) plot.dot(s.u, s.v, 0.8, cls);
    }
    return plot.str();
}

} // namespace degres::io
