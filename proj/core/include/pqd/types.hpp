#pragma once

#include <complex>

#include <Eigen/Dense>

namespace pqd {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Numerical thresholds shared by every module. One record so that callers
/// can tighten or loosen a whole pipeline consistently.
struct Tolerances {
  double hermitian = 1e-10;       ///< max-entry |M - M^dagger| for density matrices
  double trace = 1e-10;           ///< |Tr rho - 1|
  double psd = 1e-10;             ///< smallest admissible eigenvalue is -psd
  double probability_sum = 1e-8;  ///< |sum p - 1| accepted by the rate solvers
  double singular_symbol = 1e-10; ///< min |DFT symbol| / max |DFT symbol| below which P is singular
  double eigenvalue_tie = 1e-12;  ///< eigenvalues closer than this are ordered by eigenvector
  double degenerate_gap = 1e-8;   ///< cluster width for subspace alignment across frames
  double min_overlap = 0.9;       ///< minimum |<psi_i(t)|psi_i(t+dt)>| between frames
  double negative_rate = 1e-8;    ///< q_i < -negative_rate is reported as negative
  double mixed_unitary = 1e-9;    ///< slack on q_i in [0, 1] for channel classification
  double channel_residual = 1e-8; ///< reconstruction check for channel decompositions
  double integrator_psd = 1e-8;   ///< RK4 step rejected below -integrator_psd
};

}  // namespace pqd
