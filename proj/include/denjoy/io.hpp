#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "denjoy/constructions.hpp"
#include "denjoy/errors.hpp"

namespace denjoy {

// Shortest form is not needed; 17 significant digits round-trip every double.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& what) {
    const char* b = s.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (e == b || *e != '\0') throw config_error(what + ": not a number: '" + s + "'");
    return v;
}

inline long parse_long(const std::string& s, const std::string& what) {
    const char* b = s.c_str();
    char* e = nullptr;
    const long v = std::strtol(b, &e, 10);
    if (e == b || *e != '\0') throw config_error(what + ": not an integer: '" + s + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

// FNV-1a, 64 bit
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) h = (h ^ c) * 0x100000001b3ull;
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// In-memory CSV table. Numbers are written with 17 significant digits and must be finite.
class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

    Csv& comment(const std::string& line) {
        comments_.push_back(line);
        return *this;
    }
    Csv& row(const std::vector<double>& v) {
        std::vector<std::string> cells;
        cells.reserve(v.size());
        for (double x : v) {
            if (!std::isfinite(x)) throw internal_error("csv: non-finite value in column " + col_name(cells.size()));
            cells.push_back(fmt(x));
        }
        return raw(std::move(cells));
    }
    // mixed rows; text cells must not contain separators
    Csv& raw(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw internal_error("csv: row width does not match the header");
        for (const auto& c : cells)
            if (c.find_first_of(",\n") != std::string::npos) throw internal_error("csv: separator inside a cell");
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::size_t rows() const { return rows_.size(); }
    std::string str() const {
        std::string s;
        for (const auto& c : comments_) s += "# " + c + "\n";
        s += join(header_) + "\n";
        for (const auto& r : rows_) s += join(r) + "\n";
        return s;
    }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s;
    }
    std::string col_name(std::size_t i) const { return i < header_.size() ? header_[i] : std::to_string(i); }

    std::vector<std::string> header_;
    std::vector<std::string> comments_;
    std::vector<std::vector<std::string>> rows_;
};

struct ParsedCsv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw config_error("csv: missing column '" + name + "'");
    }
};

inline ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv p;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            p.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        auto cells = split(line, ',');
        if (p.header.empty()) {
            p.header = std::move(cells);
            continue;
        }
        if (cells.size() != p.header.size()) throw config_error("csv: ragged row: " + line);
        p.rows.push_back(std::move(cells));
    }
    return p;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path.string());
    out << bytes;
    if (!out) throw config_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Gap catalogs: i1..id, left, length, with the spec and the derived constants as comments

inline std::string export_gap_system(const GapSystem& sys) {
    const auto& cat = sys.catalog();
    const auto& sp = cat.spec;
    std::vector<std::string> header;
    for (int j = 1; j <= sp.d; ++j) header.push_back("i" + std::to_string(j));
    header.push_back("left");
    header.push_back("length");
    Csv csv(header);
    csv.comment(std::string("kind=") + (cat.circle ? "circle" : "interval"));
    csv.comment("d=" + std::to_string(sp.d));
    csv.comment("m=" + std::to_string(sp.m));
    csv.comment("epsilon=" + fmt(sp.epsilon));
    csv.comment("R=" + std::to_string(sp.R));
    std::string th;
    for (std::size_t j = 0; j < sp.theta.size(); ++j) th += (j ? ";" : "") + fmt(sp.theta[j]);
    csv.comment("theta=" + th);
    csv.comment("base_point=" + fmt(sp.base_point));
    csv.comment("min_mass_fraction=" + fmt(sp.min_mass_fraction));
    csv.comment("rho=" + fmt(cat.rho));
    csv.comment("raw_realized=" + fmt(cat.raw_realized));
    csv.comment("raw_total=" + fmt(cat.raw_total));
    for (const auto& g : cat.gaps) {
        std::vector<std::string> cells;
        for (int v : g.idx) cells.push_back(std::to_string(v));
        cells.push_back(fmt(g.left));
        cells.push_back(fmt(g.length));
        csv.raw(std::move(cells));
    }
    return csv.str();
}

inline GapSystem import_gap_system(const std::string& text) {
    const auto p = parse_csv(text);
    std::map<std::string, std::string> meta;
    for (const auto& c : p.comments) {
        const auto eq = c.find('=');
        if (eq != std::string::npos) meta[c.substr(0, eq)] = c.substr(eq + 1);
    }
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = meta.find(k);
        if (it == meta.end()) throw config_error("gap catalog: missing '" + k + "'");
        return it->second;
    };
    auto cat = std::make_shared<GapCatalog>();
    const std::string kind = need("kind");
    if (kind != "circle" && kind != "interval") throw config_error("gap catalog: kind must be circle or interval");
    cat->circle = kind == "circle";
    GapSpec& sp = cat->spec;
    sp.d = int(parse_long(need("d"), "d"));
    sp.m = int(parse_long(need("m"), "m"));
    sp.epsilon = parse_double(need("epsilon"), "epsilon");
    sp.R = int(parse_long(need("R"), "R"));
    sp.theta.clear();
    if (!need("theta").empty())
        for (const auto& t : split(need("theta"), ';')) sp.theta.push_back(parse_double(t, "theta"));
    sp.base_point = parse_double(need("base_point"), "base_point");
    sp.min_mass_fraction = parse_double(need("min_mass_fraction"), "min_mass_fraction");
    cat->rho = parse_double(need("rho"), "rho");
    cat->raw_realized = parse_double(need("raw_realized"), "raw_realized");
    cat->raw_total = parse_double(need("raw_total"), "raw_total");
    detail::check_spec(sp, cat->circle);
    if (p.header.size() != std::size_t(sp.d) + 2) throw config_error("gap catalog: expected d index columns plus left, length");
    const std::size_t cl = p.column("left"), cn = p.column("length");
    for (const auto& r : p.rows) {
        GapRecord g;
        for (int j = 0; j < sp.d; ++j) g.idx.push_back(int(parse_long(r[std::size_t(j)], "index")));
        g.left = parse_double(r[cl], "left");
        g.length = parse_double(r[cn], "length");
        if (!(g.length > 0)) throw config_error("gap catalog: nonpositive gap length");
        if (cat->circle) {
            // same arithmetic as the builder, so the coordinate comes back bit for bit
            double s = sp.base_point;
            for (int j = 0; j < sp.d; ++j) s += g.idx[std::size_t(j)] * sp.theta[std::size_t(j)];
            g.s = frac(s);
        }
        cat->gaps.push_back(std::move(g));
    }
    if (cat->gaps.empty()) throw config_error("gap catalog: no gaps");
    for (std::size_t k = 1; k < cat->gaps.size(); ++k)
        if (!(cat->gaps[k - 1].right() <= cat->gaps[k].left)) throw config_error("gap catalog: gaps overlap or are unsorted");
    cat->index_catalog();
    if (cat->lookup.size() != cat->gaps.size()) throw config_error("gap catalog: repeated index");
    if (!cat->find(Index(std::size_t(sp.d), 0))) throw config_error("gap catalog: the base gap is missing");
    return GapSystem(cat);
}

// ---------------------------------------------------------------------------
// Plain SVG line plots

struct Series {
    std::string name;
    std::vector<double> x, y;
};

inline std::string svg_plot(const std::string& title, const std::vector<Series>& series, bool log_y = false) {
    const double W = 640, H = 400, L = 60, T = 30, Rm = 20, B = 40;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - Rm); };
    auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
       << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - Rm << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    auto label = [&](double x, double y, const std::string& s, const char* anchor) {
        os << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\""
           << anchor << "\">" << s << "</text>\n";
    };
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x0);
    label(L, H - B + 14, buf, "middle");
    std::snprintf(buf, sizeof buf, "%.3g", x1);
    label(W - Rm, H - B + 14, buf, "middle");
    std::snprintf(buf, sizeof buf, log_y ? "1e%.3g" : "%.3g", y0);
    label(L - 4, H - B, buf, "end");
    std::snprintf(buf, sizeof buf, log_y ? "1e%.3g" : "%.3g", y1);
    label(L - 4, T + 4, buf, "end");
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = colors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) os << px(s.x[i]) << "," << py(s.y[i]) << " ";
        os << "\"/>\n";
        label(W - Rm - 4, T + 14 * double(k + 1), s.name, "end");
        os << "<line x1=\"" << W - Rm - 120 << "\" y1=\"" << T + 14 * double(k + 1) - 3 << "\" x2=\""
           << W - Rm - 100 << "\" y2=\"" << T + 14 * double(k + 1) - 3 << "\" stroke=\"" << c << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace denjoy
