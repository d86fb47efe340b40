#include "baw/bvd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "baw/csv.hpp"

namespace baw {

namespace {
constexpr double pi = std::numbers::pi;
}

void bvd_params::validate() const {
    if (!(c0 > 0.0 && cm > 0.0 && lm > 0.0 && rm > 0.0))
        throw argument_error("bvd_params: all four parameters must be > 0");
}

double bvd_params::fs() const { return 1.0 / (2.0 * pi * std::sqrt(lm * cm)); }
double bvd_params::fp() const { return fs() * std::sqrt(1.0 + cm / c0); }
double bvd_params::q() const { return std::sqrt(lm / cm) / rm; }
double bvd_params::k2() const { return k2_from_fs_fp(fs(), fp()); }

impedance_spectrum bvd_impedance(const bvd_params& p, const std::vector<double>& freqs) {
    p.validate();
    if (freqs.empty()) throw argument_error("bvd_impedance: empty frequency grid");
    const std::complex<double> j(0.0, 1.0);
    impedance_spectrum out;
    out.freqs = freqs;
    out.z.reserve(freqs.size());
    for (double f : freqs) {
        if (!(f > 0.0)) throw argument_error("bvd_impedance: frequencies must be > 0");
        const double w = 2.0 * pi * f;
        const std::complex<double> zm = p.rm + j * w * p.lm + 1.0 / (j * w * p.cm);
        out.z.push_back(1.0 / (j * w * p.c0 + 1.0 / zm));
    }
    return out;
}

double k2_from_fs_fp(double fs, double fp) {
    if (!(fs > 0.0) || !(fs <= fp))
        throw argument_error("k2_from_fs_fp: need 0 < fs <= fp");
    const double ratio = fp / fs;
    return pi * pi / 8.0 * (ratio * ratio - 1.0);
}

bvd_params bvd_params_from_targets(double fs, double k2, double q, double c0) {
    if (!(fs > 0.0 && q > 0.0 && c0 > 0.0))
        throw argument_error("bvd_params_from_targets: fs, q, c0 must be > 0");
    if (!(k2 > 0.0 && k2 < 8.0 / (pi * pi)))
        throw argument_error("bvd_params_from_targets: k2 must lie in (0, 8/pi^2)");
    bvd_params p;
    p.c0 = c0;
    p.cm = c0 * (8.0 / (pi * pi)) * k2;  // c0 ((fp/fs)^2 - 1)
    p.lm = 1.0 / (std::pow(2.0 * pi * fs, 2) * p.cm);
    p.rm = 2.0 * pi * fs * p.lm / q;
    return p;
}

namespace {

double wrap_phase(double d) {
    while (d > pi) d -= 2.0 * pi;
    while (d < -pi) d += 2.0 * pi;
    return d;
}

// Residual vector: per sample a log-magnitude term and a phase term, 1:1.
Eigen::VectorXd residuals(const Eigen::Vector4d& log_p, const impedance_spectrum& s) {
    bvd_params p{std::exp(log_p[0]), std::exp(log_p[1]), std::exp(log_p[2]), std::exp(log_p[3])};
    const impedance_spectrum model = bvd_impedance(p, s.freqs);
    Eigen::VectorXd r(2 * s.freqs.size());
    for (size_t i = 0; i < s.freqs.size(); ++i) {
        r[2 * i] = std::log(std::abs(model.z[i])) - std::log(std::abs(s.z[i]));
        r[2 * i + 1] = wrap_phase(std::arg(model.z[i]) - std::arg(s.z[i]));
    }
    return r;
}

double logmag_rms(const Eigen::VectorXd& r) {
    double acc = 0.0;
    const long n = r.size() / 2;
    for (long i = 0; i < n; ++i) acc += r[2 * i] * r[2 * i];
    return std::sqrt(acc / n);
}

}  // namespace

bvd_fit_result bvd_fit(const impedance_spectrum& s) {
    if (s.freqs.size() < 16 || s.z.size() != s.freqs.size())
        throw argument_error("bvd_fit: need at least 16 consistent samples");

    double fs0, fp0;
    try {
        std::tie(fs0, fp0) = resonance_pair(s, true);
    } catch (const multi_mode_error& e) {
        throw fitting_error(std::string("bvd_fit: no resonance found (") + e.what() + ")");
    }

    // c0 from the lowest-frequency samples: there Y ~ jw (c0 + cm), and
    // cm/c0 = (fp/fs)^2 - 1 pins the split.
    const double ratio2 = (fp0 / fs0) * (fp0 / fs0);
    double c_lf = 0.0;
    const size_t head = std::max<size_t>(1, s.freqs.size() / 50);
    for (size_t i = 0; i < head; ++i)
        c_lf += (1.0 / s.z[i]).imag() / (2.0 * pi * s.freqs[i]);
    c_lf /= head;
    if (!(c_lf > 0.0)) throw fitting_error("bvd_fit: spectrum is not capacitive at its low end");
    const double c0_init = c_lf / ratio2;  // c_lf = c0 + cm = c0 (fp/fs)^2

    // Q from the 3 dB width of the |Z| minimum.
    std::vector<double> mag(s.freqs.size());
    for (size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(s.z[i]);
    const size_t imin = std::min_element(mag.begin(), mag.end()) - mag.begin();
    const double level = mag[imin] * std::sqrt(2.0);
    size_t lo = imin, hi = imin;
    while (lo > 0 && mag[lo] < level) --lo;
    while (hi + 1 < mag.size() && mag[hi] < level) ++hi;
    double q_init = 1000.0;
    if (hi > lo && s.freqs[hi] > s.freqs[lo]) q_init = fs0 / (s.freqs[hi] - s.freqs[lo]);
    q_init = std::clamp(q_init, 1.0, 1e7);

    const bvd_params init =
        bvd_params_from_targets(fs0, std::clamp(k2_from_fs_fp(fs0, fp0), 1e-4, 0.8), q_init,
                                c0_init);
    Eigen::Vector4d lp(std::log(init.c0), std::log(init.cm), std::log(init.lm),
                       std::log(init.rm));

    Eigen::VectorXd r = residuals(lp, s);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    const int max_iter = 200;
    int used = 0;
    bool converged = false;
    for (; used < max_iter && !converged; ++used) {
        // forward-difference Jacobian on the 4 log-parameters
        Eigen::MatrixXd jac(r.size(), 4);
        const double h = 1e-7;
        for (int c = 0; c < 4; ++c) {
            Eigen::Vector4d lp2 = lp;
            lp2[c] += h;
            jac.col(c) = (residuals(lp2, s) - r) / h;
        }
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Eigen::Vector4d jtr = jac.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 25 && !accepted; ++tries) {
            Eigen::Matrix4d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            const Eigen::Vector4d step = damped.ldlt().solve(-jtr);
            const Eigen::Vector4d lp_new = lp + step;
            const Eigen::VectorXd r_new = residuals(lp_new, s);
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                lp = lp_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (step.cwiseAbs().maxCoeff() < 1e-10) converged = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) converged = true;  // damping exhausted: stationary point
    }

    bvd_fit_result result;
    result.params = {std::exp(lp[0]), std::exp(lp[1]), std::exp(lp[2]), std::exp(lp[3])};
    result.residual = logmag_rms(r);
    result.iterations = used;
    if (!converged)
        throw fitting_error("bvd_fit: no convergence after " + std::to_string(max_iter) +
                            " iterations", result);
    return result;
}

std::string format_fit_report(const bvd_fit_result& fit) {
    const bvd_params& p = fit.params;
    std::ostringstream os;
    os << "c0 = " << format_number(p.c0) << "\n"
       << "cm = " << format_number(p.cm) << "\n"
       << "lm = " << format_number(p.lm) << "\n"
       << "rm = " << format_number(p.rm) << "\n"
       << "fs = " << format_number(p.fs()) << "\n"
       << "fp = " << format_number(p.fp()) << "\n"
       << "k2 = " << format_number(p.k2()) << "\n"
       << "q = " << format_number(p.q()) << "\n"
       << "residual = " << format_number(fit.residual) << "\n";
    return os.str();
}

spurious_metrics spurious_deviation(const impedance_spectrum& measured, const bvd_params& ideal,
                                    double band_lo, double band_hi) {
    if (measured.freqs.empty() || measured.z.size() != measured.freqs.size())
        throw argument_error("spurious_deviation: empty or inconsistent spectrum");
    if (!(band_lo < band_hi) || band_lo < measured.freqs.front() ||
        band_hi > measured.freqs.back())
        throw argument_error("spurious_deviation: band outside the measured grid");

    std::vector<double> f_band, r_meas;
    for (size_t i = 0; i < measured.freqs.size(); ++i) {
        if (measured.freqs[i] < band_lo || measured.freqs[i] > band_hi) continue;
        f_band.push_back(measured.freqs[i]);
        r_meas.push_back(measured.z[i].real());
    }
    if (f_band.empty()) throw argument_error("spurious_deviation: no samples in band");
    const impedance_spectrum ref = bvd_impedance(ideal, f_band);

    spurious_metrics m;
    double acc = 0.0;
    for (size_t i = 0; i < f_band.size(); ++i) {
        const double d = std::abs(r_meas[i] - ref.z[i].real());
        acc += d * d;
        m.max_abs = std::max(m.max_abs, d);
    }
    m.rms = std::sqrt(acc / f_band.size());
    for (size_t i = 1; i + 1 < f_band.size(); ++i) {
        const bool peak = r_meas[i] > r_meas[i - 1] && r_meas[i] >= r_meas[i + 1];
        if (peak && r_meas[i] > 3.0 * ref.z[i].real()) ++m.peak_count;
    }
    return m;
}

}  // namespace baw
