#include "baw/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "baw/csv.hpp"
#include "baw/errors.hpp"

namespace baw {

namespace {

constexpr double width = 720.0, height = 480.0;
constexpr double ml = 70.0, mr = 20.0, mt = 36.0, mb = 48.0;
const char* palette[] = {"#1f6fb4", "#c23b22", "#2e8b57", "#8a2be2", "#b8860b", "#555555"};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<svg_series>& series,
                            bool log_y) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw argument_error("render_svg_plot: x/y size mismatch");
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double y = log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i];
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmin < xmax)) xmax = xmin + 1.0;
    if (!(ymin < ymax)) ymax = ymin + 1.0;

    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double yv) {
        const double y = log_y ? std::log10(std::max(yv, 1e-300)) : yv;
        return mt + (ymax - y) / (ymax - ymin) * ph;
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
       << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << title << "</text>\n"
       << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double gx = px(fx);
        os << "<line x1=\"" << gx << "\" y1=\"" << mt + ph << "\" x2=\"" << gx << "\" y2=\""
           << mt + ph + 5 << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << gx << "\" y=\"" << mt + ph + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        const double gy = mt + ph - ph * i / 5.0;
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << gy << "\" x2=\"" << ml << "\" y2=\"" << gy
           << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
           << "\" text-anchor=\"end\" font-size=\"11\">"
           << fmt(log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n"
       << "<text x=\"16\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    int color = 0;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << palette[color % 6]
           << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (i) os << ' ';
            os << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
        }
        os << "\"/>\n";
        if (!s.label.empty())
            os << "<text x=\"" << ml + pw - 8 << "\" y=\"" << mt + 16 + 14 * color
               << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << palette[color % 6] << "\">"
               << s.label << "</text>\n";
        ++color;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace baw
