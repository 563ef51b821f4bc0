#include "corrtext/svg.hpp"

#include "corrtext/dates.hpp"
#include "corrtext/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace corrtext::svg {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#ff7f0e", "#9467bd", "#7f7f7f"};
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 130;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v, bool is_date) {
    if (is_date) return format_date(Date{std::chrono::days{static_cast<long>(std::lround(v))}});
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
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
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        } else if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

class Canvas {
public:
    Canvas(const ChartOptions& o, Range xr, Range yr) : o_(o), xr_(xr), yr_(yr) {
        pw_ = o.width - kMarginLeft - kMarginRight;
        ph_ = o.height - kMarginTop - kMarginBottom;
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height
             << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out_ << "<text x=\"" << o.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
             << escape(o.title) << "</text>\n";
    }

    double px(double x) const { return kMarginLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * pw_; }
    double py(double y) const { return kMarginTop + (1.0 - (y - yr_.lo) / (yr_.hi - yr_.lo)) * ph_; }

    void axes(bool x_ticks) {
        out_ << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << pw_
             << "\" height=\"" << ph_ << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double y = yr_.lo + (yr_.hi - yr_.lo) * i / 4.0;
            out_ << "<text x=\"" << kMarginLeft - 5 << "\" y=\"" << num(py(y) + 4)
                 << "\" text-anchor=\"end\">" << tick_label(y, false) << "</text>\n";
        }
        if (x_ticks) {
            for (int i = 0; i <= 4; ++i) {
                const double x = xr_.lo + (xr_.hi - xr_.lo) * i / 4.0;
                out_ << "<text x=\"" << num(px(x)) << "\" y=\"" << kMarginTop + ph_ + 15
                     << "\" text-anchor=\"middle\">" << tick_label(x, o_.x_is_date) << "</text>\n";
            }
        }
        if (yr_.lo < 0.0 && yr_.hi > 0.0) {
            out_ << "<line x1=\"" << kMarginLeft << "\" x2=\"" << kMarginLeft + pw_ << "\" y1=\""
                 << num(py(0)) << "\" y2=\"" << num(py(0)) << "\" stroke=\"#bbb\"/>\n";
        }
        out_ << "<text x=\"" << kMarginLeft + pw_ / 2 << "\" y=\"" << o_.height - 10
             << "\" text-anchor=\"middle\">" << escape(o_.x_label) << "</text>\n";
        out_ << "<text transform=\"translate(15," << kMarginTop + ph_ / 2
             << ") rotate(-90)\" text-anchor=\"middle\">" << escape(o_.y_label) << "</text>\n";
    }

    void legend(std::size_t i, const std::string& name) {
        const int y = kMarginTop + 10 + static_cast<int>(i) * 16;
        const int x = kMarginLeft + pw_ + 10;
        out_ << "<rect x=\"" << x << "\" y=\"" << y - 8 << "\" width=\"10\" height=\"10\" fill=\""
             << kPalette[i % kPalette.size()] << "\"/>\n";
        out_ << "<text x=\"" << x + 14 << "\" y=\"" << y + 1 << "\">" << escape(name) << "</text>\n";
    }

    std::ostringstream& out() { return out_; }
    int plot_width() const { return pw_; }
    int plot_height() const { return ph_; }

    void save(const std::filesystem::path& path) {
        out_ << "</svg>\n";
        std::ofstream f(path, std::ios::binary);
        f << out_.str();
        if (!f) throw IoError("cannot write '" + path.string() + "'");
    }

private:
    const ChartOptions& o_;
    Range xr_;
    Range yr_;
    int pw_ = 0;
    int ph_ = 0;
    std::ostringstream out_;
};

}  // namespace

void line_chart(const std::vector<Series>& series, const ChartOptions& options,
                const std::filesystem::path& path) {
    Range xr, yr;
    for (const auto& s : series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    xr.finish();
    yr.finish();
    Canvas c(options, xr, yr);
    c.axes(true);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        std::string d;
        bool pen = false;
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!std::isfinite(s.y[k]) || !std::isfinite(s.x[k])) {
                pen = false;
                continue;
            }
            d += (pen ? " L" : " M") + num(c.px(s.x[k])) + " " + num(c.py(s.y[k]));
            pen = true;
        }
        c.out() << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << kPalette[i % kPalette.size()]
                << "\" stroke-width=\"1.2\"/>\n";
        c.legend(i, s.name);
    }
    c.save(path);
}

void scatter_chart(const Series& points, const ChartOptions& options, const std::filesystem::path& path) {
    Range xr, yr;
    for (double v : points.x) xr.add(v);
    for (double v : points.y) yr.add(v);
    xr.finish();
    yr.finish();
    Canvas c(options, xr, yr);
    c.axes(true);
    for (std::size_t k = 0; k < std::min(points.x.size(), points.y.size()); ++k) {
        if (!std::isfinite(points.x[k]) || !std::isfinite(points.y[k])) continue;
        c.out() << "<circle cx=\"" << num(c.px(points.x[k])) << "\" cy=\"" << num(c.py(points.y[k]))
                << "\" r=\"2\" fill=\"" << kPalette[0] << "\" fill-opacity=\"0.6\"/>\n";
    }
    c.legend(0, points.name);
    c.save(path);
}

void bar_chart(const std::vector<std::pair<std::string, double>>& bars, const ChartOptions& options,
               const std::filesystem::path& path) {
    ChartOptions o = options;
    o.height = std::max(o.height, kMarginTop + kMarginBottom + 22 * static_cast<int>(bars.size()));
    Range xr, yr;
    xr.add(0.0);
    for (const auto& b : bars) xr.add(b.second);
    xr.finish();
    yr.lo = 0.0;
    yr.hi = 1.0;
    Canvas c(o, xr, yr);
    c.out() << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << c.plot_width()
            << "\" height=\"" << c.plot_height() << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double slot = bars.empty() ? 0.0 : static_cast<double>(c.plot_height()) / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = kMarginTop + slot * static_cast<double>(i);
        const double x0 = c.px(std::min(0.0, bars[i].second));
        const double x1 = c.px(std::max(0.0, bars[i].second));
        c.out() << "<rect x=\"" << num(x0) << "\" y=\"" << num(y + slot * 0.15) << "\" width=\""
                << num(x1 - x0) << "\" height=\"" << num(slot * 0.7) << "\" fill=\"" << kPalette[0]
                << "\"/>\n";
        c.out() << "<text x=\"" << num(x1 + 4) << "\" y=\"" << num(y + slot * 0.6) << "\">"
                << escape(bars[i].first) << " " << tick_label(bars[i].second, false) << "</text>\n";
    }
    c.save(path);
}

}  // namespace corrtext::svg
