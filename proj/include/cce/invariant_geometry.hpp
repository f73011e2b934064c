#pragma once

// Intrinsic geometry of left-invariant metrics on S^3 = SU(2) evaluated at the
// base point of the invariant frame, and the homogeneous Einstein ODE system
// for the metric family g = dr^2 + sinh^2(r) h(x), x = exp(-r).

#include <Eigen/Dense>
#include <array>

namespace cce {

using Table3 = std::array<std::array<std::array<double, 3>, 3>, 3>;

/// Alternating symbol on {0,1,2}: +1 when (i-j)(j-k)(k-i) > 0, -1 when < 0,
/// 0 on repeated indices.
double levi_civita(int i, int j, int k);

/// Frame structure tables at the base point. Index order is (i, j, p) for
/// C_ij^p and T_ij^p; eps holds the alternating symbol used by the closed-form
/// derivative of T.
struct StructureConstants {
  Table3 C{};
  Table3 T{};
  Table3 eps{};
};

/// Tables for the SU(2) frame with [Y_i, Y_j] = 2 eps_ijk Y_k:
/// C_ij^k = eps_jik, T_ij^k = C_ij^k - C_ji^k = 2 eps_jik.
StructureConstants su2_structure();

/// Derivative tables dT[m][i][j][p] = d/dtheta^m T_ij^p at the base point,
/// from the closed contraction 2 eps_qjp C_im^q + 2 eps_iqp C_jm^q
/// - 2 eps_ijq C_qm^p.
std::array<Table3, 3> structure_derivative(const StructureConstants& s);

/// Throws DomainError unless h is symmetric positive definite (leading
/// principal minors > 1e-14 relative to the scale of h).
void require_positive_definite(const Eigen::Matrix3d& h);

/// Inverse of a 3x3 matrix from explicit cofactors.
Eigen::Matrix3d inverse3(const Eigen::Matrix3d& h);

/// Ricci tensor R_ij(h) of the left-invariant metric h (components in the
/// invariant frame), by direct evaluation of the invariant-frame formula.
Eigen::Matrix3d ricci_invariant(const Eigen::Matrix3d& h,
                                const StructureConstants& s);

/// Closed-form diagonal Ricci values for h = diag(I1, I2, I3).
Eigen::Vector3d berger_ricci_diagonal(double I1, double I2, double I3);

struct GeneralResiduals {
  double scalar = 0.0;          // Hamiltonian-type trace equation
  Eigen::Vector3d vector;       // gauge (mixed r-theta) equation
  Eigen::Matrix3d tensor;       // evolution equation for h_ij
};

/// Residuals of the homogeneous Einstein system in the variable x on (0,1)
/// for the 2-jet (h, h', h'') with n = 3.
GeneralResiduals general_einstein_residuals(double x, const Eigen::Matrix3d& h,
                                            const Eigen::Matrix3d& hp,
                                            const Eigen::Matrix3d& hpp,
                                            const StructureConstants& s);

}  // namespace cce
