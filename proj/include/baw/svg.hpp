#pragma once

#include <string>
#include <vector>

namespace baw {

struct svg_series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal deterministic polyline plot (fixed canvas, no timestamps); the
// CSV outputs are the contract, this is a best-effort quick look.
std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<svg_series>& series,
                            bool log_y = false);

}  // namespace baw
