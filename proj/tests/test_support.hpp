#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "baw/material.hpp"

#ifdef BAW_CLI_PATH
#include <sys/wait.h>
#endif

namespace test_support {

inline constexpr double pi = 3.14159265358979323846;

inline double rel_err(double value, double reference) {
    return std::abs(value - reference) / std::abs(reference);
}

inline std::vector<double> linspace(double lo, double hi, size_t n) {
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / double(n - 1);
    return out;
}

// Lithium niobate rotated into the rotated-Y-cut plate frame: theta is the
// cut angle, so the plate normal lies theta degrees away from the crystal Y
// axis (ZXZ angles (0, 90 - theta, 0)).
inline baw::material_set ln_cut(double theta_deg) {
    return baw::rotate(baw::load_material("LiNbO3_congruent"),
                       baw::euler_zxz(0.0, 90.0 - theta_deg, 0.0));
}

inline baw::material_set ln36y() { return ln_cut(36.0); }

inline baw::material_set isotropic() { return baw::load_material("isotropic_test"); }

// --- Rayleigh-Lamb oracle -------------------------------------------------
//
// Characteristic functions of the traction-free isotropic plate in the
// pole-free real form: with u = (q h)^2 allowed to go negative,
// cos_like(u) = cos(sqrt(u)) continues to cosh and sinc_like(u) to sinh, so
// both families are entire in f^2 and a sign scan never needs tangent poles.

inline double cos_like(double u) {
    return u >= 0.0 ? std::cos(std::sqrt(u)) : std::cosh(std::sqrt(-u));
}

inline double sinc_like(double u) {
    if (std::abs(u) < 1e-12) return 1.0 - u / 6.0;
    if (u >= 0.0) {
        const double r = std::sqrt(u);
        return std::sin(r) / r;
    }
    const double r = std::sqrt(-u);
    return std::sinh(r) / r;
}

inline double rayleigh_lamb_residual(double freq, double kx, double thickness, double vl,
                                     double vs, bool symmetric) {
    const double w = 2.0 * pi * freq;
    const double h2 = 0.25 * thickness * thickness;
    const double p2 = w * w / (vl * vl) - kx * kx;
    const double q2 = w * w / (vs * vs) - kx * kx;
    const double pre = (q2 - kx * kx) * (q2 - kx * kx);
    if (symmetric)
        return pre * sinc_like(q2 * h2) * cos_like(p2 * h2) +
               4.0 * kx * kx * p2 * sinc_like(p2 * h2) * cos_like(q2 * h2);
    return pre * sinc_like(p2 * h2) * cos_like(q2 * h2) +
           4.0 * kx * kx * q2 * sinc_like(q2 * h2) * cos_like(p2 * h2);
}

// All Rayleigh-Lamb roots of one family below f_max at fixed kx > 0,
// ascending. f = 0 solves both families identically and is skipped.
inline std::vector<double> rayleigh_lamb_freqs(double vl, double vs, double thickness, double kx,
                                               double f_max, bool symmetric) {
    const int steps = 20000;
    std::vector<double> roots;
    double f_prev = f_max * 1e-5;
    double r_prev = rayleigh_lamb_residual(f_prev, kx, thickness, vl, vs, symmetric);
    for (int i = 1; i <= steps; ++i) {
        const double f = f_max * 1e-5 + (f_max - f_max * 1e-5) * i / double(steps);
        const double r = rayleigh_lamb_residual(f, kx, thickness, vl, vs, symmetric);
        if (r_prev == 0.0) roots.push_back(f_prev);
        if (r_prev * r < 0.0) {
            double lo = f_prev, hi = f;
            double rlo = r_prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double rm = rayleigh_lamb_residual(mid, kx, thickness, vl, vs, symmetric);
                if (rlo * rm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    rlo = rm;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        f_prev = f;
        r_prev = r;
    }
    return roots;
}

// Shear-horizontal overtones f_n = vs sqrt(kx^2 + (n pi / t)^2) / (2 pi);
// even n is symmetric about the midplane, odd n antisymmetric.
inline std::vector<double> sh_freqs(double vs, double thickness, double kx, double f_max,
                                    bool symmetric) {
    std::vector<double> out;
    for (int n = symmetric ? 0 : 1;; n += 2) {
        const double kz = n * pi / thickness;
        const double f = vs * std::sqrt(kx * kx + kz * kz) / (2.0 * pi);
        if (f > f_max) break;
        out.push_back(f);
    }
    return out;
}

// --- filesystem helpers -----------------------------------------------------

class temp_dir {
public:
    temp_dir() {
        std::mt19937_64 rng(std::random_device{}());
        std::ostringstream name;
        name << "baw_test_" << std::hex << rng();
        path_ = std::filesystem::temp_directory_path() / name.str();
        std::filesystem::create_directories(path_);
    }
    ~temp_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// --- tiny CSV reader (string cells; numeric access on demand) --------------

struct csv_file {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
    double num(size_t row, int column) const { return std::stod(rows.at(row).at(column)); }
};

inline csv_file parse_csv(const std::string& text) {
    csv_file out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (first) {
            out.header = std::move(cells);
            first = false;
        } else {
            out.rows.push_back(std::move(cells));
        }
    }
    return out;
}

inline csv_file read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

// --- command-line driver ----------------------------------------------------

#ifdef BAW_CLI_PATH
struct cli_result {
    int exit_code = -1;
    std::string output;
};

// Runs the installed binary through the shell; env_prefix may carry
// VAR=value assignments for overrides.
inline cli_result run_cli(const std::string& args, const std::filesystem::path& scratch,
                          const std::string& env_prefix = "") {
    const std::filesystem::path log =
        scratch / ("cli_log_" + std::to_string(std::rand()) + ".txt");
    std::string cmd = env_prefix;
    if (!cmd.empty()) cmd += " ";
    cmd += std::string(BAW_CLI_PATH) + " " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    cli_result out;
    out.exit_code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    out.output = read_file(log);
    return out;
}
#endif

}  // namespace test_support
