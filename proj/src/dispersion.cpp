#include "baw/dispersion.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace baw {

const char* family_name(mode_family f) {
    switch (f) {
        case mode_family::s0: return "s0";
        case mode_family::a0: return "a0";
        case mode_family::s1: return "s1";
        case mode_family::a1: return "a1";
        case mode_family::higher: return "higher";
    }
    return "?";
}

namespace {

constexpr double pi = std::numbers::pi;
using cd = std::complex<double>;

// Nondimensional 1D through-thickness model: coordinate zeta = z/t in
// [0, 1], wavenumber kappa = kx t, frequency Omega^2 = w^2 rho t^2 / c_ref.
// Pencil [a0 + j kappa a1 + kappa^2 a2 - Omega^2 mass] q = 0 with 4 dofs
// per node (ux, uy, uz, phi), phi scaled by sqrt(eps_ref / c_ref). The
// nondimensional problem depends on (f t, kx t) only, which makes the
// advertised scale invariance exact.
struct safe_model {
    double thickness = 0.0;
    double rho = 0.0;
    double c_ref = 0.0;
    int nelem = 0;
    int nnode = 0;
    int ndof = 0;
    Eigen::MatrixXd a0, a1, a2, mass;

    double freq_of_omega(double omega_nd) const {
        return omega_nd * std::sqrt(c_ref / rho) / (2.0 * pi * thickness);
    }
    double omega_of_freq(double f) const {
        return 2.0 * pi * f * thickness * std::sqrt(rho / c_ref);
    }
    double velocity_scale() const { return std::sqrt(c_ref / rho); }
};

safe_model build_model(const material_set& m, double thickness, int nelem) {
    if (nelem < 8) throw argument_error("dispersion: at least 8 elements required");
    if (!(thickness > 0.0)) throw argument_error("dispersion: thickness must be > 0");
    m.validate();

    safe_model model;
    model.thickness = thickness;
    model.rho = m.density;
    model.c_ref = m.stiffness_cE.diagonal().maxCoeff();
    const double eps_ref = m.permittivity_epsS.diagonal().maxCoeff();
    model.nelem = nelem;
    model.nnode = 2 * nelem + 1;
    model.ndof = 4 * model.nnode;

    const Eigen::Matrix<double, 6, 6> c_hat = m.stiffness_cE / model.c_ref;
    const Eigen::Matrix<double, 3, 6> e_hat =
        m.piezo_e / std::sqrt(model.c_ref * eps_ref);
    const Eigen::Matrix3d eps_hat = m.permittivity_epsS / eps_ref;

    // extended material matrix over (6 strains; grad phi)
    Eigen::Matrix<double, 9, 9> chat = Eigen::Matrix<double, 9, 9>::Zero();
    chat.topLeftCorner<6, 6>() = c_hat;
    chat.topRightCorner<6, 3>() = e_hat.transpose();
    chat.bottomLeftCorner<3, 6>() = e_hat;
    chat.bottomRightCorner<3, 3>() = -eps_hat;

    // extended gradient, fields ~ e^{j(wt - kx x)} and y-invariant:
    // g0 rides on d/dzeta, g1 on the (-j kappa) part
    Eigen::Matrix<double, 9, 4> g0 = Eigen::Matrix<double, 9, 4>::Zero();
    Eigen::Matrix<double, 9, 4> g1 = Eigen::Matrix<double, 9, 4>::Zero();
    g0(2, 2) = 1.0;  // S33 = duz/dz
    g0(3, 1) = 1.0;  // S23 = duy/dz
    g0(4, 0) = 1.0;  // S13 = dux/dz ...
    g1(4, 2) = 1.0;  //     ... - jk uz
    g1(0, 0) = 1.0;  // S11 = -jk ux
    g1(5, 1) = 1.0;  // S12 = -jk uy
    g0(8, 3) = 1.0;  // (grad phi)_z
    g1(6, 3) = 1.0;  // (grad phi)_x = -jk phi

    const int nd = model.ndof;
    model.a0 = Eigen::MatrixXd::Zero(nd, nd);
    model.a1 = Eigen::MatrixXd::Zero(nd, nd);
    model.a2 = Eigen::MatrixXd::Zero(nd, nd);
    model.mass = Eigen::MatrixXd::Zero(nd, nd);

    // 3-node quadratic element on xi in [-1, 1], 3-point Gauss
    const double gp[3] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
    const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double jac = 0.5 / nelem;  // dzeta/dxi

    for (int el = 0; el < nelem; ++el) {
        Eigen::Matrix<double, 12, 12> a0e = Eigen::Matrix<double, 12, 12>::Zero();
        Eigen::Matrix<double, 12, 12> a1e = a0e, a2e = a0e, me = a0e;
        for (int g = 0; g < 3; ++g) {
            const double xi = gp[g];
            const double n[3] = {xi * (xi - 1.0) / 2.0, 1.0 - xi * xi, xi * (xi + 1.0) / 2.0};
            const double dn[3] = {(xi - 0.5) / jac, -2.0 * xi / jac, (xi + 0.5) / jac};
            Eigen::Matrix<double, 9, 12> b0 = Eigen::Matrix<double, 9, 12>::Zero();
            Eigen::Matrix<double, 9, 12> b1 = b0;
            for (int a = 0; a < 3; ++a) {
                b0.block<9, 4>(0, 4 * a) = g0 * dn[a];
                b1.block<9, 4>(0, 4 * a) = g1 * n[a];
            }
            const double w = gw[g] * jac;
            a0e += w * b0.transpose() * chat * b0;
            a2e += w * b1.transpose() * chat * b1;
            a1e += w * (b1.transpose() * chat * b0 - b0.transpose() * chat * b1);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int d = 0; d < 3; ++d)  // no mass on phi
                        me(4 * a + d, 4 * b + d) += w * n[a] * n[b];
        }
        for (int a = 0; a < 12; ++a) {
            const int ga = 4 * (2 * el + a / 4) + a % 4;
            for (int b = 0; b < 12; ++b) {
                const int gb = 4 * (2 * el + b / 4) + b % 4;
                model.a0(ga, gb) += a0e(a, b);
                model.a1(ga, gb) += a1e(a, b);
                model.a2(ga, gb) += a2e(a, b);
                model.mass(ga, gb) += me(a, b);
            }
        }
    }
    return model;
}

// Dof bookkeeping after applying the electrical boundary condition.
struct dof_map {
    std::vector<int> keep;          // reduced index -> global dof
    std::vector<int> upos, ppos;    // displacement / potential rows within `keep`
};

dof_map make_dof_map(const safe_model& model, electrical_bc bc, bool kappa_is_zero) {
    std::vector<int> fixed;
    if (bc == electrical_bc::shorted) {
        fixed = {3, 4 * (model.nnode - 1) + 3};
    } else if (kappa_is_zero) {
        fixed = {3};  // gauge: open-circuit potential is defined up to a constant at kx = 0
    }
    dof_map map;
    map.keep.reserve(model.ndof - fixed.size());
    for (int g = 0; g < model.ndof; ++g)
        if (std::find(fixed.begin(), fixed.end(), g) == fixed.end()) map.keep.push_back(g);
    for (size_t r = 0; r < map.keep.size(); ++r)
        (map.keep[r] % 4 == 3 ? map.ppos : map.upos).push_back(static_cast<int>(r));
    return map;
}

struct parity_info {
    char family = 'S';
    double score = 0.5;
    double uy = 0.0;
};

// Energy-weighted midplane symmetry. S-family: ux even and uz odd; modes
// with negligible ux and uz fall back to the uy parity (even -> S).
parity_info classify_parity(const Eigen::VectorXcd& ux, const Eigen::VectorXcd& uy,
                            const Eigen::VectorXcd& uz) {
    auto even_fraction = [](const Eigen::VectorXcd& v) {
        const Eigen::VectorXcd even = 0.5 * (v + v.reverse().eval());
        const Eigen::VectorXcd odd = 0.5 * (v - v.reverse().eval());
        const double ne = even.squaredNorm(), no = odd.squaredNorm();
        if (ne + no <= 0.0) return 0.5;
        return ne / (ne + no);
    };
    const double nx = ux.squaredNorm(), ny = uy.squaredNorm(), nz = uz.squaredNorm();
    parity_info info;
    const double total = nx + ny + nz;
    if (total <= 0.0) return info;
    info.uy = ny / total;
    if (nx + nz < 1e-9 * total) {
        info.score = even_fraction(uy);
    } else {
        info.score = (nx * even_fraction(ux) + nz * (1.0 - even_fraction(uz))) / (nx + nz);
    }
    info.family = info.score >= 0.5 ? 'S' : 'A';
    return info;
}

parity_info classify_reduced(const Eigen::VectorXcd& q, const std::vector<int>& global_of_row,
                             int nnode) {
    Eigen::VectorXcd ux = Eigen::VectorXcd::Zero(nnode);
    Eigen::VectorXcd uy = ux, uz = ux;
    for (long r = 0; r < q.size(); ++r) {
        const int g = global_of_row[r];
        const int node = g / 4, d = g % 4;
        if (d == 0) ux[node] = q[r];
        else if (d == 1) uy[node] = q[r];
        else if (d == 2) uz[node] = q[r];
    }
    return classify_parity(ux, uy, uz);
}

struct guided_solution {
    double omega_nd = 0.0;  // nondimensional angular frequency
    double freq = 0.0;      // Hz
    parity_info parity;
    double vg = 0.0;        // m/s
};

// Fixed real kappa: condense phi, solve the Hermitian generalized problem,
// recover phi for the group-velocity perturbation formula.
std::vector<guided_solution> solve_guided(const safe_model& model, double kappa, electrical_bc bc,
                                          int nmodes) {
    const dof_map map = make_dof_map(model, bc, kappa == 0.0);
    const long nk = static_cast<long>(map.keep.size());
    Eigen::MatrixXcd k_full(nk, nk);
    for (long r = 0; r < nk; ++r)
        for (long c = 0; c < nk; ++c) {
            const int gr = map.keep[r], gc = map.keep[c];
            k_full(r, c) = model.a0(gr, gc) + cd(0.0, kappa) * model.a1(gr, gc) +
                           kappa * kappa * model.a2(gr, gc);
        }
    k_full = 0.5 * (k_full + k_full.adjoint()).eval();  // scrub assembly roundoff

    const long nu = static_cast<long>(map.upos.size());
    const long np = static_cast<long>(map.ppos.size());
    Eigen::MatrixXcd kuu(nu, nu), kup(nu, np), kpp(np, np);
    Eigen::MatrixXd muu(nu, nu);
    for (long r = 0; r < nu; ++r) {
        for (long c = 0; c < nu; ++c) {
            kuu(r, c) = k_full(map.upos[r], map.upos[c]);
            muu(r, c) = model.mass(map.keep[map.upos[r]], map.keep[map.upos[c]]);
        }
        for (long c = 0; c < np; ++c) kup(r, c) = k_full(map.upos[r], map.ppos[c]);
    }
    for (long r = 0; r < np; ++r)
        for (long c = 0; c < np; ++c) kpp(r, c) = k_full(map.ppos[r], map.ppos[c]);

    // kpp is Hermitian negative definite (dielectric energy), so factor -kpp
    Eigen::LLT<Eigen::MatrixXcd> neg_kpp((-kpp).eval());
    if (neg_kpp.info() != Eigen::Success)
        throw numeric_error("dispersion: potential block factorization failed");
    const Eigen::MatrixXcd kpp_inv_kpu = -neg_kpp.solve(kup.adjoint());
    const Eigen::MatrixXcd k_cond =
        (kuu - kup * kpp_inv_kpu).eval();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (k_cond + k_cond.adjoint()), muu.cast<cd>());
    if (es.info() != Eigen::Success)
        throw numeric_error("dispersion: guided eigensolve did not converge");

    const int count = std::min<long>(nmodes, es.eigenvalues().size());
    std::vector<guided_solution> out(count);
    for (int i = 0; i < count; ++i) {
        const double omega2 = std::max(es.eigenvalues()[i], 0.0);
        const Eigen::VectorXcd u = es.eigenvectors().col(i);
        const Eigen::VectorXcd phi = kpp_inv_kpu * u;

        // assemble the full reduced vector for classification and dw/dk
        Eigen::VectorXcd q = Eigen::VectorXcd::Zero(nk);
        for (long r = 0; r < nu; ++r) q[map.upos[r]] = u[r];
        for (long r = 0; r < np; ++r) q[map.ppos[r]] = phi[r];

        guided_solution& sol = out[i];
        sol.omega_nd = std::sqrt(omega2);
        sol.freq = model.freq_of_omega(sol.omega_nd);
        sol.parity = classify_reduced(u, [&] {
            std::vector<int> g(nu);
            for (long r = 0; r < nu; ++r) g[r] = map.keep[map.upos[r]];
            return g;
        }(), model.nnode);

        // Hellmann-Feynman: d(Omega^2)/dkappa = q^H (j a1 + 2 kappa a2) q / (q^H m q)
        cd num = 0.0;
        double den = 0.0;
        for (long r = 0; r < nk; ++r) {
            const int gr = map.keep[r];
            for (long c = 0; c < nk; ++c) {
                const int gc = map.keep[c];
                const cd dk = cd(0.0, 1.0) * model.a1(gr, gc) + 2.0 * kappa * model.a2(gr, gc);
                num += std::conj(q[r]) * dk * q[c];
            }
        }
        for (long r = 0; r < nu; ++r)
            for (long c = 0; c < nu; ++c)
                den += (std::conj(u[r]) * muu(r, c) * u[c]).real();
        const double domega2 = num.real() / den;
        sol.vg = sol.omega_nd > 1e-12
                     ? domega2 / (2.0 * sol.omega_nd) * model.velocity_scale()
                     : 0.0;
    }
    return out;
}

}  // namespace

std::vector<guided_mode> guided_frequencies(const material_set& m, double thickness, double kx,
                                            electrical_bc bc, int nelem, int nmodes) {
    if (nmodes < 1) throw argument_error("guided_frequencies: nmodes must be >= 1");
    const safe_model model = build_model(m, thickness, nelem);
    const auto solutions = solve_guided(model, kx * thickness, bc, nmodes);
    std::vector<guided_mode> out;
    out.reserve(solutions.size());
    for (const auto& s : solutions)
        out.push_back({s.freq, s.parity.family, s.parity.score, s.parity.uy, s.vg});
    return out;
}

namespace {

std::vector<kx_mode> solve_complex_kx(const safe_model& model, double freq, electrical_bc bc,
                                      double im_window) {
    if (!(freq > 0.0)) throw argument_error("complex_kx_at_frequency: freq must be > 0");
    const dof_map map = make_dof_map(model, bc, false);
    const long n = static_cast<long>(map.keep.size());
    const double omega = model.omega_of_freq(freq);

    Eigen::MatrixXd s0(n, n), s1i(n, n), s2(n, n);
    for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) {
            const int gr = map.keep[r], gc = map.keep[c];
            s0(r, c) = model.a0(gr, gc) - omega * omega * model.mass(gr, gc);
            s1i(r, c) = model.a1(gr, gc);  // enters as j * kappa * a1
            s2(r, c) = model.a2(gr, gc);
        }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(s2);
    const double cond_proxy = lu.matrixLU().diagonal().cwiseAbs().maxCoeff() /
                              lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const Eigen::MatrixXd t0 = lu.solve(s0);
    const Eigen::MatrixXd t1 = lu.solve(s1i);

    // companion linearization of [s0 + j kappa s1i + kappa^2 s2] q = 0
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    comp.topRightCorner(n, n).setIdentity();
    comp.bottomLeftCorner(n, n) = -t0.cast<cd>();
    comp.bottomRightCorner(n, n) = -cd(0.0, 1.0) * t1;

    std::vector<cd> values(2 * n);
    Eigen::MatrixXcd vectors(2 * n, 2 * n);
    const int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<int>(2 * n),
                                   comp.data(), static_cast<int>(2 * n), values.data(), nullptr,
                                   1, vectors.data(), static_cast<int>(2 * n));
    if (info != 0)
        throw numeric_error("complex_kx_at_frequency: eigensolve failed (zgeev info " +
                            std::to_string(info) + ", pencil leading-block condition ~" +
                            std::to_string(cond_proxy) + ")");

    std::vector<kx_mode> out;
    for (long i = 0; i < 2 * n; ++i) {
        const cd kappa = values[i];
        if (!std::isfinite(kappa.real()) || !std::isfinite(kappa.imag())) continue;
        if (std::abs(kappa.imag()) >= im_window) continue;
        const parity_info p =
            classify_reduced(vectors.col(i).head(n), map.keep, model.nnode);
        out.push_back({kappa / model.thickness, p.family, p.score, p.uy});
    }
    std::sort(out.begin(), out.end(), [](const kx_mode& a, const kx_mode& b) {
        return std::abs(a.kx.imag()) != std::abs(b.kx.imag())
                   ? std::abs(a.kx.imag()) < std::abs(b.kx.imag())
                   : a.kx.real() < b.kx.real();
    });
    return out;
}

}  // namespace

std::vector<kx_mode> complex_kx_at_frequency(const material_set& m, double thickness, double freq,
                                             electrical_bc bc, int nelem, double im_window) {
    const safe_model model = build_model(m, thickness, nelem);
    return solve_complex_kx(model, freq, bc, im_window);
}

namespace {

// One kx column of a sweep, solved independently (parallel over columns).
struct sweep_column {
    double kappa = 0.0;
    std::vector<guided_solution> modes;
};

std::vector<sweep_column> sweep_columns(const safe_model& model, electrical_bc bc,
                                        const std::vector<double>& kappas, int nmodes) {
    std::vector<sweep_column> cols(kappas.size());
    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(kappas.size())));
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (size_t i = next++; i < kappas.size(); i = next++) {
                    cols[i].kappa = kappas[i];
                    cols[i].modes = solve_guided(model, kappas[i], bc, nmodes);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return cols;
}

struct traced_branch {
    std::vector<double> kappa;
    std::vector<const guided_solution*> modes;
    bool crossing = false;
};

// Nearest-predicted-frequency continuation with a parity guard; branches
// that shadow an opposite-parity branch are flagged, never merged.
std::vector<traced_branch> connect_columns(const std::vector<sweep_column>& cols,
                                           double thickness) {
    const size_t nb = cols.front().modes.size();
    std::vector<traced_branch> branches(nb);
    for (size_t b = 0; b < nb; ++b) {
        branches[b].kappa.push_back(cols.front().kappa);
        branches[b].modes.push_back(&cols.front().modes[b]);
    }
    for (size_t i = 1; i < cols.size(); ++i) {
        const auto& col = cols[i];
        const double dk = col.kappa - branches.front().kappa.back();
        std::vector<char> taken(col.modes.size(), 0);
        // order branches by prediction confidence: lowest frequency first
        std::vector<size_t> order(nb);
        for (size_t b = 0; b < nb; ++b) order[b] = b;
        std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
            return branches[x].modes.back()->freq < branches[y].modes.back()->freq;
        });
        for (size_t b : order) {
            auto& br = branches[b];
            const guided_solution* last = br.modes.back();
            const double slope = last->vg / (2.0 * pi);  // df/dkx
            const double f_pred = last->freq + slope * dk / thickness;
            double best_cost = std::numeric_limits<double>::infinity();
            double best_other = best_cost;
            long best = -1;
            for (size_t c = 0; c < col.modes.size(); ++c) {
                if (taken[c]) continue;
                const double cost = std::abs(col.modes[c].freq - f_pred);
                if (col.modes[c].parity.family == last->parity.family) {
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = static_cast<long>(c);
                    }
                } else {
                    best_other = std::min(best_other, cost);
                }
            }
            if (best < 0) {  // no same-parity candidate left; fall back to nearest
                for (size_t c = 0; c < col.modes.size(); ++c) {
                    if (taken[c]) continue;
                    const double cost = std::abs(col.modes[c].freq - f_pred);
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = static_cast<long>(c);
                    }
                }
            }
            if (best < 0) continue;  // fewer candidates than branches
            if (best_other < 2.0 * best_cost + 1e-3 * std::max(f_pred, 1.0))
                br.crossing = true;
            taken[best] = 1;
            br.kappa.push_back(col.kappa);
            br.modes.push_back(&col.modes[best]);
        }
    }
    return branches;
}

}  // namespace

std::vector<dispersion_branch> trace_branches(const material_set& m, double thickness,
                                              electrical_bc bc, double f_lo, double f_hi,
                                              double kx_lo, double kx_hi, int kx_points,
                                              int nelem) {
    if (!(f_lo < f_hi) || !(kx_lo < kx_hi))
        throw argument_error("trace_branches: empty frequency or wavenumber range");
    if (kx_lo < 0.0) throw argument_error("trace_branches: kx range must be non-negative");
    if (kx_points < 2) throw argument_error("trace_branches: need at least 2 kx samples");

    const safe_model model = build_model(m, thickness, nelem);
    std::vector<double> kappas(kx_points);
    for (int i = 0; i < kx_points; ++i)
        kappas[i] =
            (kx_lo + (kx_hi - kx_lo) * i / double(kx_points - 1)) * thickness;

    const int nmodes_internal = 20;
    const auto cols = sweep_columns(model, bc, kappas, nmodes_internal);
    const auto traced = connect_columns(cols, thickness);

    // family labels from the cutoff column; parity/polarization from the
    // first point past kx = 0 (the zero-frequency modes are degenerate at 0)
    std::vector<dispersion_branch> out;
    const double f_ref = model.freq_of_omega(1.0);
    std::optional<size_t> s1, a1;
    double s1_cut = 0.0, a1_cut = 0.0;
    std::vector<dispersion_branch> all(traced.size());
    for (size_t b = 0; b < traced.size(); ++b) {
        const auto& tb = traced[b];
        dispersion_branch& db = all[b];
        db.bc = bc;
        db.crossing = tb.crossing;
        const size_t tag_at = tb.modes.size() > 1 && kappas.front() == 0.0 ? 1 : 0;
        db.parity = tb.modes[tag_at]->parity.family;
        db.sh_dominant = tb.modes[tag_at]->parity.uy >= 0.5;
        db.family = mode_family::higher;
        db.points.reserve(tb.modes.size());
        for (size_t i = 0; i < tb.modes.size(); ++i)
            db.points.push_back(
                {tb.modes[i]->freq, tb.kappa[i] / thickness, tb.modes[i]->vg});
        const double cutoff = db.points.front().freq;
        const bool zero_cut = kappas.front() == 0.0 && cutoff < 1e-3 * f_ref;
        if (zero_cut) {
            db.family = db.parity == 'A' ? mode_family::a0
                        : db.sh_dominant ? mode_family::higher
                                         : mode_family::s0;
        } else if (kappas.front() == 0.0 && !db.sh_dominant) {
            if (db.parity == 'S' && (!s1 || cutoff < s1_cut)) {
                s1 = b;
                s1_cut = cutoff;
            } else if (db.parity == 'A' && (!a1 || cutoff < a1_cut)) {
                a1 = b;
                a1_cut = cutoff;
            }
        }
    }
    if (s1) all[*s1].family = mode_family::s1;
    if (a1) all[*a1].family = mode_family::a1;

    for (auto& db : all) {
        const bool in_window = std::any_of(db.points.begin(), db.points.end(),
                                           [&](const branch_point& p) {
                                               return p.freq >= f_lo && p.freq <= f_hi;
                                           });
        if (in_window) out.push_back(std::move(db));
    }
    return out;
}

zgv_result zgv_point(const dispersion_branch& b) {
    const auto& pts = b.points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i].group_velocity < 0.0 && pts[i + 1].group_velocity >= 0.0)) continue;
        // parabola through the three points around the frequency minimum
        const size_t j = std::clamp<size_t>(pts[i].freq <= pts[i + 1].freq ? i : i + 1, 1,
                                            pts.size() - 2);
        const double x0 = pts[j - 1].kx, x1 = pts[j].kx, x2 = pts[j + 1].kx;
        const double y0 = pts[j - 1].freq, y1 = pts[j].freq, y2 = pts[j + 1].freq;
        const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
        const double curv = (d2 - d1) / (x2 - x0);
        if (curv <= 0.0) return {y1, x1};
        const double xv = 0.5 * (x0 + x1 - d1 / curv);
        const double yv = y0 + d1 * (xv - x0) + curv * (xv - x0) * (xv - x1);
        return {yv, xv};
    }
    throw not_found_error("zgv_point: branch has no group-velocity sign change");
}

namespace {

// kx where a traced branch crosses f_eval, each refined by bisection with
// fresh eigensolves; nearest-frequency pick keeps the refinement on-branch.
std::vector<double> branch_crossings(const safe_model& model, electrical_bc bc,
                                     const dispersion_branch& br, double f_eval) {
    std::vector<double> out;
    const auto& pts = br.points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double g0 = pts[i].freq - f_eval, g1 = pts[i + 1].freq - f_eval;
        if (g0 == 0.0) {
            if (pts[i].kx > 0.0) out.push_back(pts[i].kx);
            continue;
        }
        if (g0 * g1 > 0.0) continue;
        double ka = pts[i].kx * model.thickness, kb = pts[i + 1].kx * model.thickness;
        double fa = pts[i].freq, fb = pts[i + 1].freq;
        for (int it = 0; it < 40 && std::abs(kb - ka) > 1e-9 * std::max(1.0, std::abs(kb));
             ++it) {
            const double km = 0.5 * (ka + kb);
            const double f_lin = fa + (fb - fa) * (km - ka) / (kb - ka);
            const auto modes = solve_guided(model, km, bc, 20);
            double fm = modes.front().freq;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& md : modes) {
                const double d = std::abs(md.freq - f_lin);
                if (d < best) {
                    best = d;
                    fm = md.freq;
                }
            }
            if ((fa - f_eval) * (fm - f_eval) <= 0.0) {
                kb = km;
                fb = fm;
            } else {
                ka = km;
                fa = fm;
            }
        }
        const double kx = 0.5 * (ka + kb) / model.thickness;
        if (kx > 0.0) out.push_back(kx);
    }
    std::sort(out.begin(), out.end());
    return out;
}

const dispersion_branch* find_family(const std::vector<dispersion_branch>& branches,
                                     mode_family fam) {
    for (const auto& b : branches)
        if (b.family == fam) return &b;
    return nullptr;
}

}  // namespace

partial_length_set survey_characteristic_lengths(const material_set& m, double thickness,
                                                 double f_eval, int nelem) {
    if (!(f_eval > 0.0)) throw argument_error("characteristic_lengths: f_eval must be > 0");
    const safe_model model = build_model(m, thickness, nelem);
    partial_length_set out;
    out.eval_freq = f_eval;

    const double kx_hi = 6.0 / thickness;  // kappa up to 6 covers the overtone window
    const double f_cap = std::numeric_limits<double>::max();
    const auto open_branches = trace_branches(m, thickness, electrical_bc::open, 0.0, f_cap, 0.0,
                                              kx_hi, 121, nelem);
    const auto short_branches = trace_branches(m, thickness, electrical_bc::shorted, 0.0, f_cap,
                                               0.0, kx_hi, 121, nelem);

    if (const dispersion_branch* s1o = find_family(open_branches, mode_family::s1)) {
        const auto kx = branch_crossings(model, electrical_bc::open, *s1o, f_eval);
        if (!kx.empty()) out.lambda_s1_open = 2.0 * pi / kx.front();
    }

    const dispersion_branch* s1s = find_family(short_branches, mode_family::s1);
    const dispersion_branch* a1s = find_family(short_branches, mode_family::a1);
    if (s1s && a1s) {
        const auto kx_s1 = branch_crossings(model, electrical_bc::shorted, *s1s, f_eval);
        const auto kx_a1 = branch_crossings(model, electrical_bc::shorted, *a1s, f_eval);
        if (!kx_s1.empty() && !kx_a1.empty()) {
            const double a1_kx = kx_a1.front();
            double s1_kx = kx_s1.front();
            for (double k : kx_s1)
                if (std::abs(k - a1_kx) < std::abs(s1_kx - a1_kx)) s1_kx = k;
            out.lambda_crossing_short = 2.0 * pi / (0.5 * (s1_kx + a1_kx));
        }
    }

    // least-confined evanescent A-family response under open conditions
    const auto kx_modes = solve_complex_kx(model, f_eval, electrical_bc::open, 50.0);
    for (const auto& mode : kx_modes) {
        const double im = std::abs(mode.kx.imag()) * thickness;
        if (mode.family != 'A' || im < 1e-4) continue;
        out.decay_a1_open = 1.0 / std::abs(mode.kx.imag());
        break;  // list is sorted by |Im kx|
    }
    return out;
}

characteristic_length_set characteristic_lengths(const material_set& m, double thickness,
                                                 double f_eval, int nelem) {
    const partial_length_set partial = survey_characteristic_lengths(m, thickness, f_eval, nelem);
    std::vector<std::string> missing;
    if (!partial.lambda_s1_open) missing.push_back("lambda_s1_open");
    if (!partial.lambda_crossing_short) missing.push_back("lambda_crossing_short");
    if (!partial.decay_a1_open) missing.push_back("decay_a1_open");
    if (!missing.empty()) {
        std::string what = "characteristic_lengths: missing at " +
                           std::to_string(f_eval) + " Hz:";
        for (const auto& name : missing) what += " " + name;
        throw partial_result_error(what, partial, missing);
    }
    return {*partial.lambda_s1_open, *partial.lambda_crossing_short, *partial.decay_a1_open,
            f_eval};
}

}  // namespace baw
