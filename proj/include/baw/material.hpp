#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "baw/errors.hpp"

namespace baw {

// Full anisotropic piezoelectric constant set in a given frame.
// Voigt order (11, 22, 33, 23, 13, 12) everywhere.
struct material_set {
    Eigen::Matrix<double, 6, 6> stiffness_cE;  // Pa, constant-field elastic constants
    Eigen::Matrix<double, 3, 6> piezo_e;       // C/m^2, stress piezoelectric constants
    Eigen::Matrix3d permittivity_epsS;         // F/m, constant-strain permittivity
    double density = 0.0;                      // kg/m^3
    std::string name;

    // Throws argument_error unless cE and epsS are symmetric positive
    // definite and density > 0. Rotation preserves these (congruence).
    void validate() const;
};

// ZXZ Euler angles in degrees, normalized to [0, 360).
struct euler_zxz {
    double alpha_deg = 0.0;
    double beta_deg = 0.0;
    double gamma_deg = 0.0;

    euler_zxz() = default;
    euler_zxz(double alpha, double beta, double gamma);

    // Active rotation R = Rz(alpha) Rx(beta) Rz(gamma).
    Eigen::Matrix3d rotation() const;
    euler_zxz inverse() const;
};

// 6x6 stress transformation (Bond) matrix of a rotation: T' = M T.
Eigen::Matrix<double, 6, 6> bond_stress_matrix(const Eigen::Matrix3d& r);

// c' = M c M^T, e' = R e M^T, eps' = R eps R^T; density unchanged.
material_set rotate(const material_set& m, const euler_zxz& euler);

// k2_M_ij = e_ij^2 / (epsS_ii cE_jj) with 1-based i in 1..3, j in 1..6.
double coupling_coefficient(const material_set& m, int i, int j);

struct coupling_point {
    double theta_deg;
    std::vector<double> k2;  // one entry per requested (i, j) pair
};

// Rotates by (0, 90 - theta, 0) for each theta and evaluates the requested
// coupling coefficients. theta_grid must be non-empty and monotone.
std::vector<coupling_point> coupling_sweep(const material_set& m,
                                           const std::vector<std::pair<int, int>>& pairs,
                                           const std::vector<double>& theta_grid_deg);

// Material database: one key-value text file per material, <name>.dat in
// the database directory (BAW_MATERIAL_DB env var, else the bundled data
// directory). Values are SI; symmetric tensor entries may be given once.
std::filesystem::path material_database_dir();
std::vector<std::string> available_materials();
material_set load_material_file(const std::filesystem::path& file);
material_set load_material(const std::string& name);

}  // namespace baw
