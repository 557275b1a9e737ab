#pragma once

// Number formatting, CSV reading/writing and atomic file output.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace degres::io {

#ifdef DEGRES_VERSION
inline constexpr std::string_view kVersion = DEGRES_VERSION;
#else
inline constexpr std::string_view kVersion = "0.1.0";
#endif

/// Failure to read or write a file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string format_int(long long x) { return std::to_string(x); }

/// Parses a full string as a double (accepts nan/inf as written by format_double).
inline bool parse_double(std::string_view s, double& out)
{
    if (s == "nan") {
        out = std::nan("");
        return true;
    }
    if (s == "inf" || s == "+inf") {
        out = INFINITY;
        return true;
    }
    if (s == "-inf") {
        out = -INFINITY;
        return true;
    }
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline bool parse_long(std::string_view s, long long& out)
{
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting; leading '#' lines carry metadata)

struct CsvTable {
    std::vector<std::string> comments; ///< without the leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw IoError("CSV has no column '" + std::string(name) + "'");
    }

    double number(std::size_t row, std::string_view col) const
    {
        double x = 0.0;
        const auto& cell = rows.at(row).at(column(col));
        if (!parse_double(cell, x)) throw IoError("CSV cell '" + cell + "' is not a number");
        return x;
    }
};

inline std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string to_csv(const CsvTable& t)
{
    std::string out;
    for (const auto& c : t.comments) out += "# " + c + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(cells[i]);
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

inline CsvTable parse_csv(std::string_view text)
{
    CsvTable t;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < text.size()) {
        if (!have_header && text[pos] == '#') {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string_view c = text.substr(pos + 1, end - pos - 1);
            if (!c.empty() && c.front() == ' ') c.remove_prefix(1);
            t.comments.emplace_back(c);
            pos = end + 1;
            continue;
        }
        std::vector<std::string> cells(1);
        bool quoted = false;
        for (; pos < text.size(); ++pos) {
            const char c = text[pos];
            if (quoted) {
                if (c == '"') {
                    if (pos + 1 < text.size() && text[pos + 1] == '"') {
                        cells.back() += '"';
                        ++pos;
                    } else {
                        quoted = false;
                    }
                } else {
                    cells.back() += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.emplace_back();
            } else if (c == '\n') {
                ++pos;
                break;
            } else if (c != '\r') {
                cells.back() += c;
            }
        }
        if (quoted) throw IoError("unterminated quoted CSV field");
        if (cells.size() == 1 && cells[0].empty()) continue;
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size())
                throw IoError("CSV row has " + std::to_string(cells.size()) + " fields, header has "
                              + std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("cannot read " + path.string());
    return s;
}

/// Writes to a temporary sibling and renames it over `path`, so an existing
/// file is either left untouched or fully replaced.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    std::random_device rd;
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd() % 1000000));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot create " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp, ec);
            throw IoError("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

} // namespace degres::io
