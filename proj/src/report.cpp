#include "gramlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gramlab/errors.hpp"

namespace gramlab {

namespace {

std::vector<std::string> split_fields(const std::string& line, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (quoted)
        throw ConfigError("read_csv: unterminated quote on line " + std::to_string(lineno));
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& s) {
    if (s.empty()) return std::nan("");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nan("");
    return v;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// Round step to 1/2/5 x 10^k covering roughly `target` intervals.
double nice_step(double span, int target) {
    if (!(span > 0)) return 1.0;
    const double rough = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(rough)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= rough) return mag * mult;
    }
    return mag * 10.0;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("read_csv: cannot open " + path);
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c[0] == ' ') c.erase(0, 1);
            if (!have_header) t.comments.push_back(c);
            continue;
        }
        std::vector<std::string> fields = split_fields(line, lineno);
        if (!have_header) {
            t.columns = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.columns.size())
            throw ConfigError("read_csv: line " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(t.columns.size()));
        std::vector<double> nums(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j) nums[j] = parse_cell(fields[j]);
        t.raw.push_back(std::move(fields));
        t.cells.push_back(std::move(nums));
    }
    if (!have_header) throw ConfigError("read_csv: no header row in " + path);
    return t;
}

PlotKind parse_plot_kind(const std::string& name) {
    if (name == "line") return PlotKind::line;
    if (name == "loglog") return PlotKind::loglog;
    if (name == "scatter") return PlotKind::scatter;
    throw ConfigError("plot kind must be line, loglog or scatter (got '" + name + "')");
}

PlotResult emit_plot(const std::string& csv_path, const std::string& svg_path, PlotKind kind) {
    const CsvTable t = read_csv(csv_path);
    if (t.n_rows() == 0) throw ConfigError("emit_plot: no data rows in " + csv_path);

    std::vector<std::size_t> numeric;
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
        bool ok = true;
        for (const auto& row : t.cells)
            if (std::isnan(row[j])) {
                ok = false;
                break;
            }
        if (ok) numeric.push_back(j);
    }
    if (numeric.size() < 2)
        throw ConfigError("emit_plot: need at least two numeric columns in " + csv_path);

    const std::size_t xcol = numeric[0];
    const bool logaxes = kind == PlotKind::loglog;

    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> series;
    std::size_t dropped = 0, kept = 0;
    for (std::size_t si = 1; si < numeric.size(); ++si) {
        Series s;
        s.name = t.columns[numeric[si]];
        for (const auto& row : t.cells) {
            double x = row[xcol], y = row[numeric[si]];
            if (logaxes && (!(x > 0) || !(y > 0))) {
                ++dropped;
                continue;
            }
            if (logaxes) {
                x = std::log10(x);
                y = std::log10(y);
            }
            s.pts.emplace_back(x, y);
            ++kept;
        }
        if (!s.pts.empty()) series.push_back(std::move(s));
    }
    if (dropped > 0)
        std::fprintf(stderr, "emit_plot: dropped %zu nonpositive point(s) for log axes\n",
                     dropped);
    if (series.empty()) throw ConfigError("emit_plot: no plottable points in " + csv_path);

    double xlo = series[0].pts[0].first, xhi = xlo;
    double ylo = series[0].pts[0].second, yhi = ylo;
    for (const auto& s : series)
        for (const auto& [x, y] : s.pts) {
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    if (xhi - xlo < 1e-12) {
        xlo -= 0.5;
        xhi += 0.5;
    }
    if (yhi - ylo < 1e-12) {
        ylo -= 0.5;
        yhi += 0.5;
    }

    const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto px = [&](double x) { return ml + pw * (x - xlo) / (xhi - xlo); };
    auto py = [&](double y) { return mt + ph * (yhi - y) / (yhi - ylo); };

    std::string title;
    if (!t.comments.empty()) title = t.comments.front();
    if (title.empty()) {
        title = csv_path;
        const std::size_t slash = title.find_last_of('/');
        if (slash != std::string::npos) title = title.substr(slash + 1);
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    svg << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(W / 2) << "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"14\" text-anchor=\"middle\">"
        << xml_escape(title) << "</text>\n";

    // Axes box.
    svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto tick_text = [&](double sx, double sy, const std::string& label, bool xaxis) {
        svg << "<text x=\"" << fmt(sx) << "\" y=\"" << fmt(sy)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\""
            << (xaxis ? "middle" : "end") << "\">" << xml_escape(label) << "</text>\n";
    };
    auto emit_ticks = [&](double lo, double hi, bool xaxis) {
        std::vector<double> at;
        std::vector<std::string> labels;
        if (logaxes) {
            for (int e = static_cast<int>(std::ceil(lo - 1e-9));
                 e <= static_cast<int>(std::floor(hi + 1e-9)); ++e) {
                at.push_back(e);
                labels.push_back("1e" + std::to_string(e));
            }
            if (at.size() < 2) {
                at = {lo, hi};
                labels = {fmt(std::pow(10.0, lo), "%.3g"), fmt(std::pow(10.0, hi), "%.3g")};
            }
        } else {
            const double step = nice_step(hi - lo, 5);
            for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
                at.push_back(v);
                labels.push_back(fmt(v, "%.6g"));
            }
        }
        for (std::size_t i = 0; i < at.size(); ++i) {
            if (xaxis) {
                const double sx = px(at[i]);
                svg << "<line x1=\"" << fmt(sx) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
                    << fmt(sx) << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
                tick_text(sx, mt + ph + 18, labels[i], true);
            } else {
                const double sy = py(at[i]);
                svg << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(sy) << "\" x2=\""
                    << fmt(ml) << "\" y2=\"" << fmt(sy) << "\" stroke=\"black\"/>\n";
                tick_text(ml - 8, sy + 4, labels[i], false);
            }
        }
    };
    emit_ticks(xlo, xhi, true);
    emit_ticks(ylo, yhi, false);

    // Axis labels from the column names.
    svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(H - 12)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << xml_escape(t.columns[xcol]) << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % 8];
        if (kind == PlotKind::scatter) {
            for (const auto& [x, y] : series[si].pts)
                svg << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
                    << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" "
                   "points=\"";
            for (std::size_t i = 0; i < series[si].pts.size(); ++i) {
                if (i) svg << ' ';
                svg << fmt(px(series[si].pts[i].first)) << ','
                    << fmt(py(series[si].pts[i].second));
            }
            svg << "\"/>\n";
        }
        const double ly = mt + 16 + 16 * static_cast<double>(si);
        svg << "<rect x=\"" << fmt(ml + pw - 150) << "\" y=\"" << fmt(ly - 9)
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << fmt(ml + pw - 136) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(series[si].name)
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(svg_path, std::ios::binary);
    if (!out) throw ArgError("emit_plot: cannot open " + svg_path);
    out << svg.str();

    PlotResult res;
    res.svg_path = svg_path;
    res.points = kept;
    res.dropped = dropped;
    return res;
}

}  // namespace gramlab
