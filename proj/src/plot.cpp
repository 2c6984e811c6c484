#include "isaclab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "isaclab/errors.hpp"

namespace isac::plot {

int CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return static_cast<int>(k);
    return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("csv: '" + s + "' is not a number");
    }
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// 1, 2 or 5 times a power of ten, giving about `target` intervals.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

struct Axis {
    double lo, hi, step;
};

Axis make_axis(double lo, double hi) {
    if (lo == hi) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
    const double step = nice_step(hi - lo, 5);
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

// Averages y per (series key, x) in first-seen key order, x ascending.
struct Grouper {
    std::vector<std::string> order;
    std::map<std::string, std::map<double, std::pair<double, int>>> acc;
    std::map<std::string, std::map<double, std::pair<double, int>>> acc2;

    void add(const std::string& key, double x, double y, double y2 = 0.0) {
        if (!acc.count(key)) order.push_back(key);
        auto& a = acc[key][x];
        a.first += y;
        a.second += 1;
        acc2[key][x].first += y2;
    }
};

}  // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw ConfigError("csv line " + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                                  " fields, got " + std::to_string(cells.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw ConfigError("csv: empty file");
    return t;
}

Figure figure_from_csv(const CsvTable& t, const std::string& title) {
    if (t.rows.empty()) throw ConfigError("csv '" + title + "' has no data rows");
    Figure fig;
    fig.title = title;
    const auto col = [&](const char* name) {
        const int c = t.column(name);
        if (c < 0) throw ConfigError("csv '" + title + "' lacks column " + name);
        return static_cast<std::size_t>(c);
    };
    Grouper g;
    bool tradeoff = false;
    if (t.column("iteration") >= 0 && t.column("M") >= 0) {
        const auto it = col("iteration"), m = col("M"), k = col("kappa"), w = col("wscsc");
        for (const auto& r : t.rows) g.add("M=" + r[m] + ", kappa=" + r[k], number(r[it]), number(r[w]));
        fig.xlabel = "iteration";
        fig.ylabel = "WSCSC";
    } else if (t.column("scheme") >= 0 && t.column("var") >= 0) {
        const auto v = col("var"), x = col("value"), s = col("scheme"), w = col("wscsc");
        const std::string var = t.rows.front()[v];
        if (var == "alpha") {
            tradeoff = true;
            const auto sc = col("scc"), ss = col("ssc");
            for (const auto& r : t.rows) g.add(r[s], number(r[x]), number(r[sc]), number(r[ss]));
            fig.xlabel = "SCC";
            fig.ylabel = "SSC";
        } else {
            for (const auto& r : t.rows) g.add(r[s], number(r[x]), number(r[w]));
            fig.xlabel = var == "power" ? "transmit power (dBm)" : var;
            fig.ylabel = "mean WSCSC";
        }
    } else if (t.column("total_ms") >= 0 && t.column("bus_bits") >= 0) {
        const auto b = col("bits"), bus = col("bus_bits"), ms = col("total_ms");
        for (const auto& r : t.rows) g.add(r[b] + "-bit", number(r[bus]), number(r[ms]));
        fig.xlabel = "bus width (bits)";
        fig.ylabel = "latency (ms)";
    } else {
        throw ConfigError("csv '" + title + "' is not a convergence, sweep or latency table");
    }
    for (const auto& key : g.order) {
        Series s;
        s.label = key;
        for (const auto& [x, a] : g.acc[key]) {
            const double mean = a.first / a.second;
            if (tradeoff) {
                s.x.push_back(mean);
                s.y.push_back(g.acc2[key][x].first / a.second);
            } else {
                s.x.push_back(x);
                s.y.push_back(mean);
            }
        }
        fig.series.push_back(std::move(s));
    }
    return fig;
}

std::string render_svg(const Figure& fig) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    const double W = 640, H = 420, L = 70, R = 170, T = 40, B = 55;
    double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
    for (const auto& s : fig.series) {
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            xlo = std::min(xlo, s.x[k]);
            xhi = std::max(xhi, s.x[k]);
            ylo = std::min(ylo, s.y[k]);
            yhi = std::max(yhi, s.y[k]);
        }
    }
    if (!std::isfinite(xlo)) throw ConfigError("figure '" + fig.title + "' has no finite points");
    const Axis ax = make_axis(xlo, xhi), ay = make_axis(ylo, yhi);
    const double pw = W - L - R, ph = H - T - B;
    const auto px = [&](double x) { return L + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
    const auto py = [&](double y) { return T + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << fmt(L + pw / 2, 1) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(fig.title)
      << "</text>\n";
    // grid and ticks
    for (int k = 0; ax.lo + k * ax.step <= ax.hi + ax.step * 1e-9; ++k) {
        const double v = ax.lo + k * ax.step, x = px(v);
        o << "<line x1=\"" << fmt(x, 2) << "\" y1=\"" << fmt(T, 2) << "\" x2=\"" << fmt(x, 2) << "\" y2=\"" << fmt(T + ph, 2)
          << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << fmt(x, 2) << "\" y=\"" << fmt(T + ph + 16, 2) << "\" text-anchor=\"middle\">"
          << tick_label(std::abs(v) < ax.step * 1e-9 ? 0.0 : v) << "</text>\n";
    }
    for (int k = 0; ay.lo + k * ay.step <= ay.hi + ay.step * 1e-9; ++k) {
        const double v = ay.lo + k * ay.step, y = py(v);
        o << "<line x1=\"" << fmt(L, 2) << "\" y1=\"" << fmt(y, 2) << "\" x2=\"" << fmt(L + pw, 2) << "\" y2=\"" << fmt(y, 2)
          << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << fmt(L - 6, 2) << "\" y=\"" << fmt(y + 4, 2) << "\" text-anchor=\"end\">"
          << tick_label(std::abs(v) < ay.step * 1e-9 ? 0.0 : v) << "</text>\n";
    }
    o << "<rect x=\"" << fmt(L, 2) << "\" y=\"" << fmt(T, 2) << "\" width=\"" << fmt(pw, 2) << "\" height=\"" << fmt(ph, 2)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(L + pw / 2, 1) << "\" y=\"" << fmt(H - 14, 1) << "\" text-anchor=\"middle\">"
      << escape(fig.xlabel) << "</text>\n";
    o << "<text transform=\"translate(18 " << fmt(T + ph / 2, 1) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(fig.ylabel) << "</text>\n";

    for (std::size_t s = 0; s < fig.series.size(); ++s) {
        const auto& ser = fig.series[s];
        const char* color = palette[s % std::size(palette)];
        std::string pts;
        for (std::size_t k = 0; k < ser.x.size(); ++k) {
            if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
            if (!pts.empty()) pts += ' ';
            pts += fmt(px(ser.x[k]), 2) + "," + fmt(py(ser.y[k]), 2);
        }
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
        if (ser.x.size() <= 40) {
            for (std::size_t k = 0; k < ser.x.size(); ++k) {
                if (!std::isfinite(ser.x[k]) || !std::isfinite(ser.y[k])) continue;
                o << "<circle cx=\"" << fmt(px(ser.x[k]), 2) << "\" cy=\"" << fmt(py(ser.y[k]), 2) << "\" r=\"3\" fill=\""
                  << color << "\"/>\n";
            }
        }
        const double ly = T + 10 + 18 * static_cast<double>(s);
        o << "<line x1=\"" << fmt(L + pw + 12, 2) << "\" y1=\"" << fmt(ly, 2) << "\" x2=\"" << fmt(L + pw + 32, 2)
          << "\" y2=\"" << fmt(ly, 2) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << fmt(L + pw + 38, 2) << "\" y=\"" << fmt(ly + 4, 2) << "\">" << escape(ser.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace isac::plot
