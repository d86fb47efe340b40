#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "baw/material.hpp"

namespace baw {

// Electrical surface condition: `shorted` grounds the potential on both
// faces; `open` leaves the faces charge-free (potential condensed out,
// vacuum fringing neglected).
enum class electrical_bc { open, shorted };

// Through-thickness guided mode at fixed real lateral wavenumber kx.
// Symmetry convention about the midplane: S-family means ux even and uz
// odd; A-family the converse. symmetry_score is the energy-weighted
// S-ness in [0, 1]; modes with negligible ux and uz fall back to the uy
// parity (even -> S). uy_fraction is the SH share of displacement energy.
struct guided_mode {
    double freq = 0.0;            // Hz
    char family = 'S';            // 'S' or 'A'
    double symmetry_score = 0.0;
    double uy_fraction = 0.0;
    double group_velocity = 0.0;  // m/s, d(omega)/d(kx) by eigenvalue perturbation
};

// Semi-analytical 1D finite-element eigensolve through the thickness:
// nelem quadratic elements (minimum 8), 4 dofs per node (ux, uy, uz, phi).
// Returns the nmodes lowest eigenfrequencies with symmetry tags.
std::vector<guided_mode> guided_frequencies(const material_set& m, double thickness, double kx,
                                            electrical_bc bc, int nelem = 32, int nmodes = 12);

struct kx_mode {
    std::complex<double> kx;  // 1/m; real => propagating, complex => evanescent
    char family = 'S';
    double symmetry_score = 0.0;
    double uy_fraction = 0.0;
};

// Same discretization recast as a quadratic eigenproblem in kx at fixed
// frequency. Returns all eigenvalues with |Im kx| * thickness < im_window,
// in +/- pairs, with symmetry tags; decay length of an evanescent mode is
// 1 / |Im kx|.
std::vector<kx_mode> complex_kx_at_frequency(const material_set& m, double thickness, double freq,
                                             electrical_bc bc, int nelem = 32,
                                             double im_window = 50.0);

struct branch_point {
    double freq = 0.0;            // Hz
    double kx = 0.0;              // 1/m (traced branches live on the real axis)
    double group_velocity = 0.0;  // m/s
};

enum class mode_family { s0, a0, s1, a1, higher };
const char* family_name(mode_family f);

// Points are ordered by kx, which coincides with frequency order except
// across a zero-group-velocity dip.
struct dispersion_branch {
    electrical_bc bc = electrical_bc::open;
    mode_family family = mode_family::higher;
    char parity = 'S';        // consistent along the branch
    bool sh_dominant = false; // mostly uy-polarized near cutoff
    bool crossing = false;    // passed within tolerance of an opposite-parity branch
    std::vector<branch_point> points;
};

// Sweeps kx over [kx_lo, kx_hi] (kx_points samples), solves the guided
// eigenproblem at each, and connects points by predicted-frequency nearest
// neighbor within each parity class. Branches that approach a branch of
// the other parity within tolerance are flagged `crossing`, never merged.
// Only branches intersecting [f_lo, f_hi] are returned.
std::vector<dispersion_branch> trace_branches(const material_set& m, double thickness,
                                              electrical_bc bc, double f_lo, double f_hi,
                                              double kx_lo, double kx_hi, int kx_points = 121,
                                              int nelem = 32);

class not_found_error : public error {
public:
    using error::error;
};

struct zgv_result {
    double freq = 0.0;  // Hz
    double kx = 0.0;    // 1/m
};

// Zero-group-velocity point of a traced branch: locates the sign change of
// the stored group velocity and refines the minimum by local parabolic
// interpolation (df/f well below 1e-4 for the default kx grids). Throws
// not_found_error when the branch is monotone.
zgv_result zgv_point(const dispersion_branch& b);

// The three lateral lengths that drive the ring design rules, evaluated at
// f_eval (normally the series resonance).
struct characteristic_length_set {
    double lambda_s1_open = 0.0;       // m, 2 pi / kx of the real open-S1 solution
    double lambda_crossing_short = 0.0;// m, 2 pi / kx of the short S1/A1 crossing
    double decay_a1_open = 0.0;        // m, 1/|Im kx| of the open evanescent A-mode
    double eval_freq = 0.0;            // Hz
};

struct partial_length_set {
    std::optional<double> lambda_s1_open;
    std::optional<double> lambda_crossing_short;
    std::optional<double> decay_a1_open;
    double eval_freq = 0.0;
};

class partial_result_error : public error {
public:
    partial_result_error(const std::string& what_arg, partial_length_set partial_arg,
                         std::vector<std::string> missing_arg)
        : error(what_arg), partial(partial_arg), missing(std::move(missing_arg)) {}
    partial_length_set partial;
    std::vector<std::string> missing;  // names of the absent constituents
};

// Total variant: absent constituents are left unset instead of throwing.
partial_length_set survey_characteristic_lengths(const material_set& m, double thickness,
                                                 double f_eval, int nelem = 32);

// lambda_s1_open: smallest real kx where the traced open-S1 branch crosses
// f_eval (absent below the branch ZGV frequency). lambda_crossing_short:
// 2 pi over the mean kx of the traced short S1 and A1 branches at f_eval
// (the S1 solution nearest the A1 one when there are two). decay_a1_open:
// least-confined (smallest |Im kx|) evanescent A-family solution at f_eval
// under open conditions. Throws partial_result_error naming whichever
// constituent is missing, with the others attached.
characteristic_length_set characteristic_lengths(const material_set& m, double thickness,
                                                 double f_eval, int nelem = 32);

}  // namespace baw
