#pragma once

// Run configuration: flat `key = value` lines, `#` comments, one optional
// `[command]` header. Every command has a fixed key schema with defaults and
// ranges; unknown or duplicate keys are rejected with the offending line.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "degres/io/format.hpp"

namespace degres::io {

/// Invalid configuration (exit status 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

enum class Command { Resonances, Average, Equilibria, Bifdiag, Portrait, Reconnect, MapOrbits, Verify };

inline constexpr Command kAllCommands[] = {Command::Resonances, Command::Average,   Command::Equilibria,
                                           Command::Bifdiag,    Command::Portrait,  Command::Reconnect,
                                           Command::MapOrbits,  Command::Verify};

inline std::string_view to_string(Command c)
{
    switch (c) {
    case Command::Resonances: return "resonances";
    case Command::Average: return "average";
    case Command::Equilibria: return "equilibria";
    case Command::Bifdiag: return "bifdiag";
    case Command::Portrait: return "portrait";
    case Command::Reconnect: return "reconnect";
    case Command::MapOrbits: return "map-orbits";
    case Command::Verify: return "verify";
    }
    return "?";
}

inline std::optional<Command> command_from_string(std::string_view s)
{
    for (Command c : kAllCommands)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

enum class KeyType { Real, Integer, Boolean, Text, RealList, Choice };

struct KeySpec {
    std::string name;
    KeyType type = KeyType::Real;
    std::string fallback; ///< default as written; empty = optional without default
    std::optional<double> min, max;
    bool min_open = false, max_open = false;
    std::vector<std::string> choices;
    bool nonzero = false;

    std::string range_text() const
    {
        if (nonzero) return name + " ≠ 0";
        if (min && max)
            return name + " ∈ " + (min_open ? "(" : "[") + format_double(*min) + ", " + format_double(*max)
                   + (max_open ? ")" : "]");
        if (min) return name + (min_open ? " > " : " ≥ ") + format_double(*min);
        if (max) return name + (max_open ? " < " : " ≤ ") + format_double(*max);
        return name;
    }

    bool in_range(double x) const
    {
        if (!std::isfinite(x)) return false;
        if (nonzero && x == 0.0) return false;
        if (min && (min_open ? !(x > *min) : !(x >= *min))) return false;
        if (max && (max_open ? !(x < *max) : !(x <= *max))) return false;
        return true;
    }
};

using ConfigValue = std::variant<std::monostate, double, long long, bool, std::string, std::vector<double>>;

namespace detail {

inline KeySpec real(std::string n, std::string def, std::optional<double> lo = {}, std::optional<double> hi = {},
                    bool lo_open = false, bool hi_open = false)
{
    KeySpec k;
    k.name = std::move(n);
    k.type = KeyType::Real;
    k.fallback = std::move(def);
    k.min = lo;
    k.max = hi;
    k.min_open = lo_open;
    k.max_open = hi_open;
    return k;
}

inline KeySpec integer(std::string n, std::string def, std::optional<double> lo = {}, std::optional<double> hi = {})
{
    KeySpec k = real(std::move(n), std::move(def), lo, hi);
    k.type = KeyType::Integer;
    return k;
}

inline KeySpec boolean(std::string n, std::string def)
{
    KeySpec k;
    k.name = std::move(n);
    k.type = KeyType::Boolean;
    k.fallback = std::move(def);
    return k;
}

inline KeySpec text(std::string n, std::string def)
{
    KeySpec k;
    k.name = std::move(n);
    k.type = KeyType::Text;
    k.fallback = std::move(def);
    return k;
}

inline KeySpec choice(std::string n, std::string def, std::vector<std::string> options)
{
    KeySpec k = text(std::move(n), std::move(def));
    k.type = KeyType::Choice;
    k.choices = std::move(options);
    return k;
}

inline KeySpec real_list(std::string n)
{
    KeySpec k;
    k.name = std::move(n);
    k.type = KeyType::RealList;
    return k;
}

inline std::vector<KeySpec> zone_keys(std::string a = "2", std::string mu1 = "1", std::string mu2 = "0")
{
    KeySpec b = real("b", "1");
    b.nonzero = true;
    return {real("a", std::move(a)), b, integer("p", "1", 1.0), real("mu1", std::move(mu1)), real("mu2", std::move(mu2))};
}

inline std::vector<KeySpec> oscillator_keys()
{
    return {real("curvature", "1"), real("center", "1"), real("nu", "1", 0.0, {}, true)};
}

} // namespace detail

/// Key schema of a command, in the order keys are echoed.
inline std::vector<KeySpec> command_schema(Command c)
{
    using namespace detail;
    std::vector<KeySpec> keys;
    auto add = [&](std::vector<KeySpec> more) { keys.insert(keys.end(), more.begin(), more.end()); };
    switch (c) {
    case Command::Resonances:
        add(oscillator_keys());
        add({real("I_min", "0.1"), real("I_max", "3.5"), integer("p_max", "4", 1.0), integer("q_max", "4", 1.0),
             real("deriv_tol", "1e-6", 0.0, {}, true)});
        break;
    case Command::Average:
        add(oscillator_keys());
        add({integer("p", "1", 1.0), integer("q", "1", 1.0), real("I", ""), real("I_min", "0.1"), real("I_max", "3.5"),
             choice("perturbation", "cos_x_minus_phi", {"cos_x_minus_phi", "harmonic"}), real("amplitude", "1"),
             real("f_amp", "1"), real("g_amp", "0"), real("f_const", "0"), integer("k", "1", 1.0),
             integer("n_nodes", "256", 64.0), real("epsilon", "1e-3", 0.0), real("deformation", "0"),
             real("deriv_tol", "1e-6", 0.0, {}, true)});
        break;
    case Command::Equilibria:
        add(zone_keys());
        add({real_list("mu1_values"), real_list("mu2_values"), boolean("refine", "true")});
        break;
    case Command::Bifdiag:
        add(zone_keys());
        keys.erase(keys.begin() + 3, keys.end()); // mu1/mu2 come from the window
        add({real("mu1_min", "-3"), real("mu1_max", "3"), real("mu2_min", "-3"), real("mu2_max", "3"),
             integer("n_mu1", "600", 8.0), integer("n_mu2", "600", 8.0), integer("curve_samples", "600", 8.0),
             integer("min_component_cells", "16", 1.0)});
        break;
    case Command::Portrait:
        add(zone_keys());
        add({real("u_min", "-3"), real("u_max", "3"), real("v_min", "0"), real("v_max", format_double(2 * 3.141592653589793)),
             integer("n_levels", "12", 3.0), integer("n_grid", "512", 8.0), boolean("separatrices", "true"),
             real("arc_budget", "40", 0.0, {}, true)});
        break;
    case Command::Reconnect:
        add(zone_keys());
        keys.erase(keys.begin() + 3, keys.end());
        add({real("mu1_min", "0.1"), real("mu1_max", "0.5"), integer("n_mu1", "5", 1.0), real_list("mu1_values"),
             real("mu2_min", "0"), real("mu2_max", "3"), text("pair", "auto"), integer("n_scan", "256", 8.0)});
        break;
    case Command::MapOrbits:
        add({choice("map", "euler", {"standard", "euler", "flow"})});
        add(zone_keys("2", "1", "0"));
        add({real("beta", "0.25"), real("alpha", "0.17", 0.0, {}, true), text("starts", "0.1,0.1"),
             integer("n_random", "0", 0.0), real("u_min", "-2"), real("u_max", "2"), integer("n_iter", "1000", 1.0),
             real("tau", "100", 0.0, {}, true), real("tol", "1e-10", 1e-13, 1e-3), boolean("rotation", "true"),
             real("manifold_u", ""), real("manifold_v", ""), integer("segment_iterations", "20", 0.0)});
        break;
    case Command::Verify:
        break;
    }
    keys.push_back(detail::integer("seed", "1", 0.0));
    return keys;
}

struct RunConfig {
    Command command = Command::Verify;
    std::vector<KeySpec> schema;
    std::map<std::string, ConfigValue> values;
    std::map<std::string, int> lines; ///< where each explicitly set key appeared

    bool has(const std::string& key) const
    {
        auto it = values.find(key);
        return it != values.end() && !std::holds_alternative<std::monostate>(it->second);
    }

    bool explicitly_set(const std::string& key) const { return lines.count(key) > 0; }

    const ConfigValue& at(const std::string& key) const
    {
        auto it = values.find(key);
        if (it == values.end()) throw std::logic_error("no config key " + key);
        return it->second;
    }

    double real(const std::string& key) const
    {
        const auto& v = at(key);
        if (const auto* d = std::get_if<double>(&v)) return *d;
        if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
        throw std::logic_error("config key " + key + " is not numeric");
    }
    long long integer(const std::string& key) const { return std::get<long long>(at(key)); }
    bool boolean(const std::string& key) const { return std::get<bool>(at(key)); }
    const std::string& text(const std::string& key) const { return std::get<std::string>(at(key)); }
    const std::vector<double>& reals(const std::string& key) const { return std::get<std::vector<double>>(at(key)); }

    /// Resolved `key = value` lines in schema order; unset optional keys read "auto".
    std::vector<std::string> echo() const
    {
        std::vector<std::string> out;
        out.push_back("[" + std::string(to_string(command)) + "]");
        for (const auto& k : schema) {
            const auto& v = values.at(k.name);
            std::string s;
            if (std::holds_alternative<std::monostate>(v)) s = "auto";
            else if (const auto* d = std::get_if<double>(&v)) s = format_double(*d);
            else if (const auto* i = std::get_if<long long>(&v)) s = format_int(*i);
            else if (const auto* b = std::get_if<bool>(&v)) s = *b ? "true" : "false";
            else if (const auto* t = std::get_if<std::string>(&v)) s = *t;
            else {
                const auto& xs = std::get<std::vector<double>>(v);
                for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_double(xs[i]);
                if (xs.empty()) s = "auto";
            }
            out.push_back(k.name + " = " + s);
        }
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline ConfigValue parse_value(const KeySpec& k, std::string_view raw, int line)
{
    auto bad = [&](const std::string& what) -> ConfigError {
        return ConfigError("invalid value '" + std::string(raw) + "' for " + k.name + ": " + what, line);
    };
    switch (k.type) {
    case KeyType::Real: {
        double x = 0.0;
        if (!parse_double(raw, x)) throw bad("expected a number");
        if (!k.in_range(x)) throw ConfigError(k.name + " = " + std::string(raw) + " is out of range (" + k.range_text() + ")", line);
        return x;
    }
    case KeyType::Integer: {
        long long x = 0;
        if (!parse_long(raw, x)) throw bad("expected an integer");
        if (!k.in_range(static_cast<double>(x)))
            throw ConfigError(k.name + " = " + std::string(raw) + " is out of range (" + k.range_text() + ")", line);
        return x;
    }
    case KeyType::Boolean:
        if (raw == "true" || raw == "yes" || raw == "1") return true;
        if (raw == "false" || raw == "no" || raw == "0") return false;
        throw bad("expected true or false");
    case KeyType::Text: return std::string(raw);
    case KeyType::Choice:
        if (std::find(k.choices.begin(), k.choices.end(), raw) == k.choices.end()) {
            std::string opts;
            for (const auto& c : k.choices) opts += (opts.empty() ? "" : ", ") + c;
            throw bad("expected one of " + opts);
        }
        return std::string(raw);
    case KeyType::RealList: {
        std::vector<double> xs;
        std::size_t pos = 0;
        while (pos <= raw.size()) {
            std::size_t end = raw.find(',', pos);
            if (end == std::string_view::npos) end = raw.size();
            const auto item = trim(raw.substr(pos, end - pos));
            double x = 0.0;
            if (!parse_double(item, x) || !std::isfinite(x)) throw bad("expected a comma-separated list of numbers");
            xs.push_back(x);
            pos = end + 1;
        }
        return xs;
    }
    }
    return std::monostate{};
}

} // namespace detail

/// Parses and validates a configuration for `command`.
inline RunConfig parse_config(std::string_view text, Command command)
{
    RunConfig cfg;
    cfg.command = command;
    cfg.schema = command_schema(command);

    int line_no = 0;
    bool seen_header = false, seen_key = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header '" + std::string(line) + "'", line_no);
            if (seen_header) throw ConfigError("only one [command] header is allowed", line_no);
            if (seen_key) throw ConfigError("the [command] header must precede all keys", line_no);
            const auto name = detail::trim(line.substr(1, line.size() - 2));
            const auto c = command_from_string(name);
            if (!c) throw ConfigError("unknown command '" + std::string(name) + "' in header", line_no);
            if (*c != command)
                throw ConfigError("header [" + std::string(name) + "] does not match command '"
                                      + std::string(to_string(command)) + "'",
                                  line_no);
            seen_header = true;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value', got '" + std::string(line) + "'", line_no);
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto raw = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        const auto spec = std::find_if(cfg.schema.begin(), cfg.schema.end(), [&](const KeySpec& k) { return k.name == key; });
        if (spec == cfg.schema.end())
            throw ConfigError("unknown key '" + key + "' for command " + std::string(to_string(command)), line_no);
        if (auto it = cfg.lines.find(key); it != cfg.lines.end())
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")", line_no);
        if (raw.empty()) throw ConfigError("missing value for " + key, line_no);
        cfg.values[key] = detail::parse_value(*spec, raw, line_no);
        cfg.lines[key] = line_no;
        seen_key = true;
    }

    for (const auto& k : cfg.schema) {
        if (cfg.values.count(k.name)) continue;
        cfg.values[k.name] = k.fallback.empty() ? ConfigValue{std::monostate{}} : detail::parse_value(k, k.fallback, 0);
        if (k.type == KeyType::RealList && k.fallback.empty()) cfg.values[k.name] = std::vector<double>{};
    }

    // Cross-key constraints.
    auto ordered = [&](const char* lo, const char* hi) {
        if (cfg.values.count(lo) && cfg.values.count(hi) && cfg.has(lo) && cfg.has(hi) && !(cfg.real(lo) < cfg.real(hi))) {
            const int line = cfg.lines.count(hi) ? cfg.lines.at(hi) : (cfg.lines.count(lo) ? cfg.lines.at(lo) : 0);
            throw ConfigError(std::string(lo) + " < " + hi + " required", line);
        }
    };
    for (auto [lo, hi] : {std::pair{"mu1_min", "mu1_max"}, std::pair{"mu2_min", "mu2_max"}, std::pair{"u_min", "u_max"},
                          std::pair{"v_min", "v_max"}, std::pair{"I_min", "I_max"}})
        ordered(lo, hi);
    if (cfg.values.count("n_nodes") && cfg.integer("n_nodes") % 2 != 0)
        throw ConfigError("n_nodes must be even", cfg.lines.count("n_nodes") ? cfg.lines.at("n_nodes") : 0);
    if (cfg.values.count("I_min") && !(cfg.real("I_min") > 0.0) && command == Command::Average
        && cfg.values.at("perturbation") == ConfigValue{std::string("cos_x_minus_phi")})
        throw ConfigError("I_min > 0 required for the cos_x_minus_phi perturbation",
                          cfg.lines.count("I_min") ? cfg.lines.at("I_min") : 0);
    if (cfg.has("manifold_u") != cfg.has("manifold_v"))
        throw ConfigError("manifold_u and manifold_v must be given together",
                          cfg.lines.count("manifold_u") ? cfg.lines.at("manifold_u") : cfg.lines.at("manifold_v"));
    return cfg;
}

} // namespace degres::io

namespace degres::io {

/// Header lines embedded in every output: tool version, then the resolved config.
inline std::vector<std::string> output_metadata(const RunConfig& cfg)
{
    std::vector<std::string> out{"degres " + std::string(kVersion)};
    for (auto& l : cfg.echo()) out.push_back(std::move(l));
    return out;
}

} // namespace degres::io
