#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "baw/material.hpp"

namespace baw {

// Plate driven in its thickness-extensional mode. The material is already
// in the plate frame (3-axis along the thickness); rotate() it first.
struct plate_spec {
    material_set material;
    double thickness = 0.0;    // m
    double active_area = 0.0;  // m^2
    double q_mech = 2000.0;    // mechanical quality factor

    void validate() const;
};

struct impedance_spectrum {
    std::vector<double> freqs;            // Hz, strictly increasing
    std::vector<std::complex<double>> z;  // ohm
};

// Derived one-dimensional model constants (lossless).
struct te_constants {
    double c33_bar;  // Pa, piezoelectrically stiffened c33 = cE33 + e33^2/epsS33
    double vbar;     // m/s, sqrt(c33_bar / density)
    double kt2;      // e33^2 / (epsS33 c33_bar), thickness coupling
    double c0;       // F, clamped capacitance epsS33 * area / thickness
};
te_constants te_derived(const plate_spec& p);

// Lossless analytic resonances: fs solves tan(x)/x = 1/kt2 with
// x = pi f t / vbar on (0, pi/2); fp = vbar / (2 t).
std::pair<double, double> te_resonances(const plate_spec& p);

// Z(w) = (1/(j w C0)) (1 - kt2 tan(x)/x), x = w t / (2 vbar), with loss
// folded in as c33_bar (1 + j/q_mech).
impedance_spectrum te_impedance(const plate_spec& p, const std::vector<double>& freqs);

// Spectrum violates the single-mode assumption; count = interleaved
// interior |Z| extrema found (0 for a monotone spectrum).
class multi_mode_error : public error {
public:
    multi_mode_error(const std::string& what_arg, int count_arg)
        : error(what_arg), count(count_arg) {}
    int count;
};

// (fs, fp) = (argmin |Z|, argmax |Z|), each refined by local parabolic
// interpolation of log|Z| over the 3 nearest samples. Requires exactly one
// interior minimum followed by one maximum unless global_pair is set, in
// which case the global extrema are used regardless.
std::pair<double, double> resonance_pair(const impedance_spectrum& s, bool global_pair = false);

}  // namespace baw
