#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace plot {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return b;
}

std::string tick_label(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

// Roughly five ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi) {
    std::vector<double> t;
    double span = hi - lo;
    if (!(span > 0)) return {lo};
    double raw = span / 5.0;
    double p = std::pow(10.0, std::floor(std::log10(raw)));
    double step = p;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * p >= raw) {
            step = m * p;
            break;
        }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            lo -= 0.5;
            hi += 0.5;
        }
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

void draw_panel(std::ostringstream& os, const Panel& p, int y0, int width, int height) {
    const int ml = 70, mr = 150, mt = 30, mb = 45;
    const int pw = width - ml - mr, ph = height - mt - mb;
    Range xr, yr;
    for (const auto& s : p.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xr.add(s.x[i]);
            if (i < s.x_hi.size()) xr.add(s.x_hi[i]);
            double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            yr.add(s.y[i] - e);
            yr.add(s.y[i] + e);
            if (s.style == Style::Bars) yr.add(0.0);
        }
    }
    xr.finish();
    yr.finish();
    auto X = [&](double v) { return ml + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto Y = [&](double v) { return y0 + mt + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    os << "<g>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << y0 + mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << y0 + 20 << "\" text-anchor=\"middle\" font-size=\"14\">"
       << esc(p.title) << "</text>\n";
    for (double t : ticks(xr.lo, xr.hi)) {
        os << "<line x1=\"" << num(X(t)) << "\" x2=\"" << num(X(t)) << "\" y1=\"" << y0 + mt + ph << "\" y2=\""
           << y0 + mt + ph + 5 << "\" stroke=\"#444\"/>";
        os << "<text x=\"" << num(X(t)) << "\" y=\"" << y0 + mt + ph + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(yr.lo, yr.hi)) {
        os << "<line x1=\"" << ml - 5 << "\" x2=\"" << ml << "\" y1=\"" << num(Y(t)) << "\" y2=\"" << num(Y(t))
           << "\" stroke=\"#444\"/>";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << num(Y(t) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
           << tick_label(t) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << y0 + height - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << esc(p.xlabel) << "</text>\n";
    os << "<text x=\"16\" y=\"" << y0 + mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
       << y0 + mt + ph / 2 << ")\">" << esc(p.ylabel) << "</text>\n";

    int k = 0;
    for (const auto& s : p.series) {
        const char* c = kColors[k % 6];
        if (s.style == Style::Line && !s.x.empty()) {
            os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) os << num(X(s.x[i])) << "," << num(Y(s.y[i])) << " ";
            os << "\"/>\n";
        } else if (s.style == Style::Points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i < s.yerr.size() && s.yerr[i] > 0)
                    os << "<line x1=\"" << num(X(s.x[i])) << "\" x2=\"" << num(X(s.x[i])) << "\" y1=\""
                       << num(Y(s.y[i] - s.yerr[i])) << "\" y2=\"" << num(Y(s.y[i] + s.yerr[i])) << "\" stroke=\"" << c
                       << "\"/>";
                os << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.y[i])) << "\" r=\"3\" fill=\"" << c
                   << "\"/>\n";
            }
        } else if (s.style == Style::Bars) {
            for (std::size_t i = 0; i < s.x.size() && i < s.x_hi.size(); ++i) {
                double top = Y(std::max(0.0, s.y[i])), base = Y(0.0);
                os << "<rect x=\"" << num(X(s.x[i])) << "\" y=\"" << num(std::min(top, base)) << "\" width=\""
                   << num(X(s.x_hi[i]) - X(s.x[i])) << "\" height=\"" << num(std::abs(base - top)) << "\" fill=\"" << c
                   << "\" fill-opacity=\"0.35\" stroke=\"" << c << "\" stroke-width=\"0.5\"/>\n";
            }
        }
        int ly = y0 + mt + 14 + 18 * k;
        os << "<rect x=\"" << ml + pw + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"10\" fill=\"" << c
           << "\"/><text x=\"" << ml + pw + 30 << "\" y=\"" << ly << "\" font-size=\"11\">" << esc(s.label)
           << "</text>\n";
        ++k;
    }
    os << "</g>\n";
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels, int width, int panel_height) {
    std::ostringstream os;
    const int h = panel_height * int(std::max<std::size_t>(1, panels.size()));
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << h
       << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) draw_panel(os, panels[i], int(i) * panel_height, width, panel_height);
    os << "</svg>\n";
    return os.str();
}

}  // namespace plot
