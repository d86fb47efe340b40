#pragma once

#include <optional>
#include <string>
#include <vector>

#include "baw/thickness_mode.hpp"

namespace baw {

// Single-branch Butterworth-Van Dyke circuit: motional Lm-Rm-Cm in series,
// all in parallel with the static capacitance C0.
struct bvd_params {
    double c0 = 0.0;  // F
    double cm = 0.0;  // F
    double lm = 0.0;  // H
    double rm = 0.0;  // ohm

    void validate() const;  // all four > 0

    double fs() const;  // 1 / (2 pi sqrt(lm cm))
    double fp() const;  // fs sqrt(1 + cm/c0)
    double q() const;   // sqrt(lm/cm) / rm
    double k2() const;  // k2_from_fs_fp(fs(), fp())
};

// Z(w) = [ j w c0 + 1/(rm + j w lm + 1/(j w cm)) ]^-1.
impedance_spectrum bvd_impedance(const bvd_params& p, const std::vector<double>& freqs);

// Standard BVD coupling relation k2 = (pi^2 / 8) ((fp/fs)^2 - 1).
// Requires 0 < fs <= fp.
double k2_from_fs_fp(double fs, double fp);

// Closed-form inversion: cm = c0 ((fp/fs)^2 - 1), lm = 1/((2 pi fs)^2 cm),
// rm = 2 pi fs lm / q. Requires 0 < k2 < 8/pi^2 and fs, q, c0 > 0.
bvd_params bvd_params_from_targets(double fs, double k2, double q, double c0);

struct bvd_fit_result {
    bvd_params params;
    double residual = 0.0;  // RMS of the log-magnitude misfit
    int iterations = 0;
};

class fitting_error : public error {
public:
    using error::error;
    fitting_error(const std::string& what_arg, bvd_fit_result best_arg)
        : error(what_arg), best(std::move(best_arg)) {}
    std::optional<bvd_fit_result> best;  // best-so-far on non-convergence
};

// Least-squares fit of all four parameters to a measured spectrum spanning
// at least [0.9 fs, 1.1 fp] of a dominant mode. Objective: log-magnitude
// plus phase residuals weighted 1:1; Levenberg-Marquardt on log-parameters,
// at most 200 iterations, relative parameter tolerance 1e-10. Initial
// guess: c0 from the lowest-frequency samples, fs/fp from resonance_pair,
// Q from the 3 dB width of the |Z| minimum.
bvd_fit_result bvd_fit(const impedance_spectrum& s);

// Key-value fit report: c0, cm, lm, rm, fs, fp, k2, q, residual.
std::string format_fit_report(const bvd_fit_result& fit);

struct spurious_metrics {
    double rms = 0.0;      // ohm, RMS of |R_measured - R_ideal| over the band
    double max_abs = 0.0;  // ohm, max of the same
    int peak_count = 0;    // resistance peaks above 3x the local ideal resistance
};

// Deviation of a measured resistance curve from the ideal single-branch
// response over [band_lo, band_hi] (typically [fs, fp]).
spurious_metrics spurious_deviation(const impedance_spectrum& measured, const bvd_params& ideal,
                                    double band_lo, double band_hi);

}  // namespace baw
