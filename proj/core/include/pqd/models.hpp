#pragma once

#include <span>
#include <string>
#include <vector>

#include "pqd/decomposition.hpp"

namespace pqd {

struct JumpOperator {
  CMatrix op;
  double rate = 0.0;
};

/// Time-independent Lindblad generator.
struct LindbladSpec {
  CMatrix hamiltonian;
  std::vector<JumpOperator> jumps;

  /// Throws ValidationError on negative rates, non-Hermitian H or
  /// inconsistent dimensions.
  void validate() const;
  [[nodiscard]] Eigen::Index dim() const noexcept { return hamiltonian.rows(); }
};

struct ModelParams {
  double omega = 1.0;            ///< Rabi / coupling frequency (1/time)
  double gamma = 1.0;            ///< decay rate (1/time)
  double level_splitting = 0.0;  ///< qubit splitting in H_S = w sigma_z / 2
};

/// Pauli matrices in the (excited, ground) basis: index 0 is the excited state.
[[nodiscard]] CMatrix sigma_x();
[[nodiscard]] CMatrix sigma_y();
[[nodiscard]] CMatrix sigma_z();
/// Lowering operator |g><e|.
[[nodiscard]] CMatrix sigma_minus();

/// Reduced atom state of the resonant Jaynes-Cummings model started in
/// |e, 0>: diag(cos^2(omega t / 2), sin^2(omega t / 2)).
[[nodiscard]] DensityMatrix jc_reduced_state(double omega, double t);

struct ModelRate {
  double value = 0.0;
  /// Set where the closed form diverges; value is then +inf.
  bool singular = false;
};

/// Closed-form JC flip rate (omega / 2) tan(omega t).
[[nodiscard]] ModelRate jc_rate(double omega, double t);

/// Closed-form amplitude-damping rate gamma rho_ee / (rho_ee - rho_gg) for
/// the excited initial state.
[[nodiscard]] ModelRate amplitude_damping_rate(double gamma, double t);

/// Spontaneous decay from the excited state: diag(e^{-gamma t}, 1 - e^{-gamma t}).
/// The splitting does not enter because the state stays diagonal.
[[nodiscard]] DensityMatrix amplitude_damping_exact(double gamma, double omega, double t);

/// H = omega sigma_z / 2, single jump sigma_minus at rate gamma.
[[nodiscard]] LindbladSpec amplitude_damping_spec(double gamma, double omega);

[[nodiscard]] CMatrix lindblad_rhs(const LindbladSpec& spec, const CMatrix& rho);

/// Fixed-step classical RK4 over `grid` (one step per interval). Each step
/// is Hermitized and trace-renormalised; a step leaving the PSD cone by more
/// than tol.integrator_psd throws StepTooLarge.
[[nodiscard]] std::vector<TrajectorySample> integrate(const LindbladSpec& spec,
                                                      const DensityMatrix& rho0,
                                                      std::span<const double> grid,
                                                      const Tolerances& tol = {});

/// t_k = k * dt for k = 0..round(horizon / dt).
[[nodiscard]] std::vector<double> uniform_grid(double dt, double horizon);

[[nodiscard]] std::vector<TrajectorySample> jc_trajectory(double omega, std::span<const double> grid);
[[nodiscard]] std::vector<TrajectorySample> amplitude_damping_trajectory(double gamma, double omega,
                                                                         std::span<const double> grid);

struct ModelParameterInfo {
  std::string name;
  std::string description;
  double default_value = 0.0;
};

struct ModelInfo {
  std::string name;
  std::string description;
  std::vector<ModelParameterInfo> parameters;
  bool lindblad_generated = false;
};

/// Models addressable by name from the command line.
[[nodiscard]] const std::vector<ModelInfo>& model_catalogue();

}  // namespace pqd
