#include "spectralens/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "spectralens/errors.hpp"
#include "spectralens/io.hpp"

namespace spectralens::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0, hi = 1;
    bool log = false;

    [[nodiscard]] double map(double v) const { return log ? std::log10(v) : v; }
    [[nodiscard]] double frac(double v) const { return (map(v) - lo) / (hi - lo); }

    [[nodiscard]] std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            for (double e = std::ceil(lo); e <= hi + 1e-9; e += 1) {
                t.push_back(std::pow(10.0, e));
            }
            return t;
        }
        const double raw = (hi - lo) / 5;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
            t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        }
        return t;
    }
};

Axis make_axis(const std::vector<Series>& series, bool x, bool log) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : series) {
        for (double v : x ? s.x : s.y) {
            if (!std::isfinite(v) || (log && v <= 0)) {
                continue;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) {
        lo = log ? 1 : 0;
        hi = log ? 10 : 1;
    }
    Axis a;
    a.log = log;
    a.lo = log ? std::log10(lo) : lo;
    a.hi = log ? std::log10(hi) : hi;
    if (a.hi - a.lo < 1e-12) {
        a.lo -= 0.5;
        a.hi += 0.5;
    }
    if (log) {
        a.lo = std::floor(a.lo);
        a.hi = std::ceil(a.hi);
    } else {
        const double pad = 0.04 * (a.hi - a.lo);
        a.lo -= pad;
        a.hi += pad;
    }
    return a;
}

}  // namespace

std::string Plot::render() const {
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;
    const Axis ax = make_axis(series, true, log_x);
    const Axis ay = make_axis(series, false, log_y);
    auto px = [&](double v) { return left + ax.frac(v) * pw; };
    auto py = [&](double v) { return top + (1 - ay.frac(v)) * ph; };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                    std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
    s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        const double x = px(t);
        s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(top + ph + 5) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" + tick_label(t) +
             "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        s += "<line x1=\"" + fmt(left - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(left) + "\" y2=\"" + fmt(y) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
             "</text>\n";
    }
    s += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 12.0) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
    s += "<text transform=\"translate(16," + fmt(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& ser = series[k];
        if (ser.x.size() != ser.y.size()) {
            throw InvalidArgument("svg: series '" + ser.name + "' has mismatched x and y lengths");
        }
        const std::string color = kPalette[k % std::size(kPalette)];
        auto ok = [&](std::size_t i) {
            return std::isfinite(ser.x[i]) && std::isfinite(ser.y[i]) && (!log_x || ser.x[i] > 0) &&
                   (!log_y || ser.y[i] > 0);
        };
        if (ser.style == Style::Line) {
            std::string pts;
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (ok(i)) {
                    pts += fmt(px(ser.x[i])) + "," + fmt(py(ser.y[i])) + " ";
                }
            }
            s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        } else if (ser.style == Style::Points) {
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (ok(i)) {
                    s += "<circle cx=\"" + fmt(px(ser.x[i])) + "\" cy=\"" + fmt(py(ser.y[i])) + "\" r=\"2\" fill=\"" +
                         color + "\"/>\n";
                }
            }
        } else {
            // bars centred on x, width from neighbour spacing
            for (std::size_t i = 0; i < ser.x.size(); ++i) {
                if (!ok(i)) {
                    continue;
                }
                const double w = ser.x.size() > 1 ? std::abs(ser.x[std::min(i + 1, ser.x.size() - 1)] -
                                                             ser.x[i == ser.x.size() - 1 ? i - 1 : i])
                                                  : 1.0;
                const double x0 = px(ser.x[i] - w / 2), x1 = px(ser.x[i] + w / 2);
                const double base = log_y ? std::pow(10.0, ay.lo) : std::max(0.0, ay.lo);
                const double y0 = py(ser.y[i]), y1 = py(base);
                s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(std::max(0.5, x1 - x0)) +
                     "\" height=\"" + fmt(std::max(0.0, y1 - y0)) + "\" fill=\"" + color +
                     "\" fill-opacity=\"0.45\"/>\n";
            }
        }
        const double ly = top + 16 + 16.0 * static_cast<double>(k);
        s += "<rect x=\"" + fmt(left + pw - 170) + "\" y=\"" + fmt(ly - 9) + "\" width=\"12\" height=\"10\" fill=\"" +
             color + "\"/>\n";
        s += "<text x=\"" + fmt(left + pw - 153) + "\" y=\"" + fmt(ly) + "\">" + escape(ser.name) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

void Plot::save(const std::filesystem::path& path) const { io::write_atomically(path, render()); }

}  // namespace spectralens::svg
