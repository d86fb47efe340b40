#include "baw/thickness_mode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace baw {

namespace {

constexpr double pi = std::numbers::pi;

// Smallest positive root of tan(x)/x = 1/kt2 on (0, pi/2) by bisection;
// the left side increases monotonically from 1 to +inf there.
double series_root(double kt2) {
    double lo = 1e-9, hi = pi / 2.0 - 1e-12;
    auto f = [&](double x) { return std::tan(x) / x - 1.0 / kt2; };
    for (int n = 0; n < 200; ++n) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void plate_spec::validate() const {
    material.validate();
    if (!(thickness > 0.0)) throw argument_error("plate thickness must be > 0");
    if (!(active_area > 0.0)) throw argument_error("plate active_area must be > 0");
    if (!(q_mech > 0.0)) throw argument_error("plate q_mech must be > 0");
}

te_constants te_derived(const plate_spec& p) {
    p.validate();
    const double c33 = p.material.stiffness_cE(2, 2);
    const double e33 = p.material.piezo_e(2, 2);
    const double eps33 = p.material.permittivity_epsS(2, 2);
    te_constants d;
    d.c33_bar = c33 + e33 * e33 / eps33;
    d.vbar = std::sqrt(d.c33_bar / p.material.density);
    d.kt2 = e33 * e33 / (eps33 * d.c33_bar);
    d.c0 = eps33 * p.active_area / p.thickness;
    return d;
}

std::pair<double, double> te_resonances(const plate_spec& p) {
    const te_constants d = te_derived(p);
    if (!(d.kt2 > 0.0))
        throw argument_error("material has no thickness coupling (e33 = 0)");
    const double xs = series_root(d.kt2);
    const double fs = xs * d.vbar / (pi * p.thickness);
    const double fp = d.vbar / (2.0 * p.thickness);
    return {fs, fp};
}

impedance_spectrum te_impedance(const plate_spec& p, const std::vector<double>& freqs) {
    p.validate();
    if (freqs.empty()) throw argument_error("te_impedance: empty frequency grid");
    const double c33 = p.material.stiffness_cE(2, 2);
    const double e33 = p.material.piezo_e(2, 2);
    const double eps33 = p.material.permittivity_epsS(2, 2);
    const std::complex<double> j(0.0, 1.0);
    // loss folded into the stiffened constant
    const std::complex<double> c_bar =
        (c33 + e33 * e33 / eps33) * std::complex<double>(1.0, 1.0 / p.q_mech);
    const std::complex<double> v_bar = std::sqrt(c_bar / p.material.density);
    const std::complex<double> kt2 = e33 * e33 / (eps33 * c_bar);
    const double c0 = eps33 * p.active_area / p.thickness;

    impedance_spectrum out;
    out.freqs = freqs;
    out.z.reserve(freqs.size());
    for (double f : freqs) {
        if (!(f > 0.0)) throw argument_error("te_impedance: frequencies must be > 0");
        const double w = 2.0 * pi * f;
        const std::complex<double> x = w * p.thickness / (2.0 * v_bar);
        out.z.push_back((1.0 - kt2 * std::tan(x) / x) / (j * w * c0));
    }
    return out;
}

namespace {

// Vertex of the parabola through three samples of y(f); falls back to the
// middle point for degenerate (collinear) triples.
double parabolic_vertex(double f0, double f1, double f2, double y0, double y1, double y2) {
    const double d1 = (y1 - y0) / (f1 - f0);
    const double d2 = (y2 - y1) / (f2 - f1);
    const double curv = (d2 - d1) / (f2 - f0);
    if (curv == 0.0) return f1;
    const double fv = 0.5 * (f0 + f1 - d1 / curv);
    return std::clamp(fv, std::min(f0, f2), std::max(f0, f2));
}

}  // namespace

std::pair<double, double> resonance_pair(const impedance_spectrum& s, bool global_pair) {
    const size_t n = s.freqs.size();
    if (n < 3 || s.z.size() != n)
        throw argument_error("resonance_pair: need at least 3 consistent samples");
    std::vector<double> mag(n);
    for (size_t i = 0; i < n; ++i) mag[i] = std::abs(s.z[i]);

    std::vector<size_t> minima, maxima;
    for (size_t i = 1; i + 1 < n; ++i) {
        if (mag[i] < mag[i - 1] && mag[i] <= mag[i + 1]) minima.push_back(i);
        if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]) maxima.push_back(i);
    }
    const bool single_mode = minima.size() == 1 && maxima.size() == 1 && minima[0] < maxima[0];
    if (!single_mode && !global_pair) {
        const int count = static_cast<int>(minima.size() + maxima.size());
        throw multi_mode_error("resonance_pair: expected one |Z| minimum followed by one "
                               "maximum, found " + std::to_string(count) +
                               " interior extrema", count);
    }

    size_t imin, imax;
    if (single_mode && !global_pair) {
        imin = minima[0];
        imax = maxima[0];
    } else {
        imin = std::min_element(mag.begin(), mag.end()) - mag.begin();
        imax = std::max_element(mag.begin(), mag.end()) - mag.begin();
    }
    auto refine = [&](size_t i) {
        if (i == 0 || i + 1 >= n) return s.freqs[i];
        return parabolic_vertex(s.freqs[i - 1], s.freqs[i], s.freqs[i + 1],
                                std::log(mag[i - 1]), std::log(mag[i]), std::log(mag[i + 1]));
    };
    const double fs = refine(imin);
    const double fp = refine(imax);
    if (!(fs < fp))
        throw multi_mode_error("resonance_pair: |Z| maximum does not follow the minimum", 0);
    return {fs, fp};
}

}  // namespace baw
