#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include "baw/thickness_mode.hpp"

namespace baw {

struct reflection_spectrum {
    std::vector<double> freqs;              // Hz, strictly increasing
    std::vector<std::complex<double>> s11;  // dimensionless
    double z0 = 50.0;                       // ohm, reference impedance
};

struct q_spectrum {
    std::vector<double> freqs;  // Hz, same grid as the source spectrum
    std::vector<double> q;      // dimensionless, >= 0 where valid
    std::vector<bool> valid;    // false where 1 - |s11|^2 < 1e-9
    int window = 1;             // smoothing window actually applied
};

// Touchstone v1 one-port file: option line "# <unit> S <RI|MA|DB> R <z0>",
// '!' comments, strictly increasing frequency.
reflection_spectrum read_touchstone_s1p(const std::filesystem::path& path);

// CSV with header freq_hz,re_z,im_z.
impedance_spectrum read_impedance_csv(const std::filesystem::path& path);

// S11 = (Z - z0) / (Z + z0) and its inverse; round-trip exact to 1e-12.
reflection_spectrum z_to_s11(const impedance_spectrum& z, double z0);
impedance_spectrum s11_to_z(const reflection_spectrum& r);

enum class smoothing_kernel { mean, median };

// Q(w) = w |dS11/dw| / (1 - |S11|^2), dS11/dw by 3-point central
// differences on the complex value (one-sided at the ends), then smoothed
// over `window` samples. Points where 1 - |S11|^2 < 1e-9 are marked
// invalid instead of producing huge values. window = 1 leaves the raw
// estimator untouched.
q_spectrum bode_q(const reflection_spectrum& r, int window = 80,
                  smoothing_kernel kernel = smoothing_kernel::mean);

class summary_error : public error {
public:
    using error::error;
};

struct band_summary_result {
    double q_at_fs = 0.0;    // Q at the grid point nearest fs
    double q_max = 0.0;      // max valid Q in (fs, fp)
    double f_at_q_max = 0.0; // Hz
    double fom_max = 0.0;    // q_max * k2
};

// Figure-of-merit summary over [fs, fp]; throws summary_error when no
// valid sample lies in the band.
band_summary_result band_summary(const q_spectrum& q, double k2, double fs, double fp);

}  // namespace baw
