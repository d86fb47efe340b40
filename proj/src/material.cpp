#include "baw/material.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace baw {

namespace {

constexpr double deg = std::numbers::pi / 180.0;

double normalize_deg(double a) {
    double r = std::fmod(a, 360.0);
    if (r < 0.0) r += 360.0;
    // fmod can land exactly on 360 after the correction of a tiny negative
    if (r >= 360.0) r -= 360.0;
    return r;
}

Eigen::Matrix3d rot_z(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    Eigen::Matrix3d r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

Eigen::Matrix3d rot_x(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    Eigen::Matrix3d r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

void check_spd(const Eigen::MatrixXd& m, const std::string& what) {
    if (!m.isApprox(m.transpose(), 1e-8))
        throw argument_error(what + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw argument_error(what + " is not positive definite");
}

}  // namespace

void material_set::validate() const {
    check_spd(stiffness_cE, "stiffness_cE of " + name);
    check_spd(permittivity_epsS, "permittivity_epsS of " + name);
    if (!(density > 0.0)) throw argument_error("density of " + name + " must be > 0");
}

euler_zxz::euler_zxz(double alpha, double beta, double gamma)
    : alpha_deg(normalize_deg(alpha)), beta_deg(normalize_deg(beta)),
      gamma_deg(normalize_deg(gamma)) {}

Eigen::Matrix3d euler_zxz::rotation() const {
    return rot_z(alpha_deg * deg) * rot_x(beta_deg * deg) * rot_z(gamma_deg * deg);
}

euler_zxz euler_zxz::inverse() const {
    return euler_zxz(-gamma_deg, -beta_deg, -alpha_deg);
}

Eigen::Matrix<double, 6, 6> bond_stress_matrix(const Eigen::Matrix3d& r) {
    // Voigt order (11, 22, 33, 23, 13, 12); shear slot q holds the index
    // pair `pairs[q]`.
    static constexpr int pairs[3][2] = {{1, 2}, {0, 2}, {0, 1}};
    Eigen::Matrix<double, 6, 6> m;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) m(i, j) = r(i, j) * r(i, j);
        for (int jq = 0; jq < 3; ++jq) {
            const int q = pairs[jq][0], s = pairs[jq][1];
            m(i, 3 + jq) = 2.0 * r(i, q) * r(i, s);
        }
    }
    for (int iq = 0; iq < 3; ++iq) {
        const int p = pairs[iq][0], s = pairs[iq][1];
        for (int j = 0; j < 3; ++j) m(3 + iq, j) = r(p, j) * r(s, j);
        for (int jq = 0; jq < 3; ++jq) {
            const int q = pairs[jq][0], t = pairs[jq][1];
            m(3 + iq, 3 + jq) = r(p, q) * r(s, t) + r(p, t) * r(s, q);
        }
    }
    return m;
}

material_set rotate(const material_set& m, const euler_zxz& euler) {
    const Eigen::Matrix3d r = euler.rotation();
    const Eigen::Matrix<double, 6, 6> bond = bond_stress_matrix(r);
    material_set out = m;
    out.stiffness_cE = bond * m.stiffness_cE * bond.transpose();
    out.piezo_e = r * m.piezo_e * bond.transpose();
    out.permittivity_epsS = r * m.permittivity_epsS * r.transpose();
    // congruence keeps cE/epsS symmetric; scrub roundoff so invariants hold bitwise
    out.stiffness_cE = ((out.stiffness_cE + out.stiffness_cE.transpose()) / 2.0).eval();
    out.permittivity_epsS = ((out.permittivity_epsS + out.permittivity_epsS.transpose()) / 2.0).eval();
    return out;
}

double coupling_coefficient(const material_set& m, int i, int j) {
    if (i < 1 || i > 3 || j < 1 || j > 6)
        throw argument_error("coupling_coefficient indices out of range: (" +
                             std::to_string(i) + ", " + std::to_string(j) + ")");
    const double e = m.piezo_e(i - 1, j - 1);
    return e * e / (m.permittivity_epsS(i - 1, i - 1) * m.stiffness_cE(j - 1, j - 1));
}

std::vector<coupling_point> coupling_sweep(const material_set& m,
                                           const std::vector<std::pair<int, int>>& pairs,
                                           const std::vector<double>& theta_grid_deg) {
    if (theta_grid_deg.empty()) throw argument_error("coupling_sweep: empty theta grid");
    if (pairs.empty()) throw argument_error("coupling_sweep: empty pair list");
    for (size_t n = 1; n < theta_grid_deg.size(); ++n)
        if (!(theta_grid_deg[n] > theta_grid_deg[n - 1]))
            throw argument_error("coupling_sweep: theta grid must be strictly increasing");
    std::vector<coupling_point> out;
    out.reserve(theta_grid_deg.size());
    for (double theta : theta_grid_deg) {
        const material_set rotated = rotate(m, euler_zxz(0.0, 90.0 - theta, 0.0));
        coupling_point pt;
        pt.theta_deg = theta;
        pt.k2.reserve(pairs.size());
        for (const auto& [i, j] : pairs) pt.k2.push_back(coupling_coefficient(rotated, i, j));
        out.push_back(std::move(pt));
    }
    return out;
}

namespace {

#ifndef BAW_MATERIAL_DIR
#define BAW_MATERIAL_DIR ""
#endif

bool set_matrix_entry(material_set& m, const std::string& key, double value) {
    auto index = [](char c) { return c - '1'; };
    if (key.size() == 5 && key.rfind("cE_", 0) == 0) {
        const int i = index(key[3]), j = index(key[4]);
        if (i < 0 || i > 5 || j < 0 || j > 5) return false;
        m.stiffness_cE(i, j) = value;
        m.stiffness_cE(j, i) = value;
        return true;
    }
    if (key.size() == 4 && key.rfind("e_", 0) == 0) {
        const int i = index(key[2]), j = index(key[3]);
        if (i < 0 || i > 2 || j < 0 || j > 5) return false;
        m.piezo_e(i, j) = value;
        return true;
    }
    if (key.size() == 7 && key.rfind("epsS_", 0) == 0) {
        const int i = index(key[5]), j = index(key[6]);
        if (i < 0 || i > 2 || j < 0 || j > 2) return false;
        m.permittivity_epsS(i, j) = value;
        m.permittivity_epsS(j, i) = value;
        return true;
    }
    return false;
}

}  // namespace

std::filesystem::path material_database_dir() {
    if (const char* env = std::getenv("BAW_MATERIAL_DB"); env && *env) return env;
    return BAW_MATERIAL_DIR;
}

std::vector<std::string> available_materials() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& it : std::filesystem::directory_iterator(material_database_dir(), ec))
        if (it.path().extension() == ".dat") names.push_back(it.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

material_set load_material_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw lookup_error("cannot open material file " + file.string());
    material_set m;
    m.stiffness_cE.setZero();
    m.piezo_e.setZero();
    m.permittivity_epsS.setZero();
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (auto pos = line.find(';'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string eq;
        if (!(ls >> eq) || eq != "=")
            throw parse_error("expected `key = value`", file, lineno);
        if (key == "name") {
            ls >> m.name;
            continue;
        }
        double value = 0.0;
        if (!(ls >> value)) throw parse_error("bad numeric value for " + key, file, lineno);
        std::string extra;
        if (ls >> extra) throw parse_error("trailing content after value of " + key, file, lineno);
        if (key == "density") {
            m.density = value;
        } else if (!set_matrix_entry(m, key, value)) {
            throw parse_error("unknown material constant " + key, file, lineno);
        }
    }
    if (m.name.empty()) m.name = file.stem().string();
    m.validate();
    return m;
}

material_set load_material(const std::string& name) {
    const auto file = material_database_dir() / (name + ".dat");
    if (!std::filesystem::exists(file)) {
        std::string msg = "unknown material \"" + name + "\"; available:";
        for (const auto& n : available_materials()) msg += " " + n;
        throw lookup_error(msg);
    }
    return load_material_file(file);
}

}  // namespace baw
