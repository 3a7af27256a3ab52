#include "pqd/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace pqd {

CMatrix sigma_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

CMatrix sigma_y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

CMatrix sigma_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

CMatrix sigma_minus() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

void LindbladSpec::validate() const {
  const Eigen::Index d = hamiltonian.rows();
  if (d == 0 || hamiltonian.cols() != d) throw ValidationError("Lindblad spec: Hamiltonian must be square");
  require_finite(hamiltonian, "Lindblad Hamiltonian");
  if (hermiticity_defect(hamiltonian) > 1e-10 * std::max(1.0, hamiltonian.cwiseAbs().maxCoeff())) {
    throw ValidationError("Lindblad spec: Hamiltonian is not Hermitian");
  }
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const auto& j = jumps[k];
    if (j.op.rows() != d || j.op.cols() != d) {
      std::ostringstream os;
      os << "Lindblad spec: jump operator " << k << " has shape " << j.op.rows() << "x" << j.op.cols()
         << ", expected " << d << "x" << d;
      throw ValidationError(os.str());
    }
    require_finite(j.op, "Lindblad jump operator");
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) {
      std::ostringstream os;
      os << "Lindblad spec: jump operator " << k << " has invalid rate " << j.rate;
      throw ValidationError(os.str());
    }
  }
}

DensityMatrix jc_reduced_state(double omega, double t) {
  if (t < 0.0) throw ValidationError("jc_reduced_state: time must be non-negative");
  const double c = std::cos(0.5 * omega * t);
  const double s = std::sin(0.5 * omega * t);
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = c * c;
  m(1, 1) = s * s;
  return DensityMatrix(std::move(m));
}

ModelRate jc_rate(double omega, double t) {
  const double phase = omega * t;
  if (std::abs(std::cos(phase)) <= 1e-12) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  return {0.5 * omega * std::tan(phase), false};
}

ModelRate amplitude_damping_rate(double gamma, double t) {
  const double excited = std::exp(-gamma * t);
  const double gap = 2.0 * excited - 1.0;
  if (std::abs(gap) <= 1e-12) return {std::numeric_limits<double>::infinity(), true};
  return {gamma * excited / gap, false};
}

DensityMatrix amplitude_damping_exact(double gamma, double /*omega*/, double t) {
  if (t < 0.0) throw ValidationError("amplitude_damping_exact: time must be non-negative");
  const double excited = std::exp(-gamma * t);
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = excited;
  m(1, 1) = -std::expm1(-gamma * t);
  return DensityMatrix(std::move(m));
}

LindbladSpec amplitude_damping_spec(double gamma, double omega) {
  return LindbladSpec{0.5 * omega * sigma_z(), {JumpOperator{sigma_minus(), gamma}}};
}

CMatrix lindblad_rhs(const LindbladSpec& spec, const CMatrix& rho) {
  const Eigen::Index d = spec.dim();
  if (rho.rows() != d || rho.cols() != d) throw ValidationError("lindblad_rhs: dimension mismatch");
  CMatrix out = -kI * commutator(spec.hamiltonian, rho);
  for (const auto& j : spec.jumps) {
    if (j.op.rows() != d || j.op.cols() != d) throw ValidationError("lindblad_rhs: dimension mismatch");
    const CMatrix ldl = j.op.adjoint() * j.op;
    out += j.rate * (j.op * rho * j.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

std::vector<TrajectorySample> integrate(const LindbladSpec& spec, const DensityMatrix& rho0,
                                        std::span<const double> grid, const Tolerances& tol) {
  spec.validate();
  if (rho0.dim() != spec.dim()) throw ValidationError("integrate: initial state dimension mismatch");
  if (grid.empty()) throw ValidationError("integrate: empty time grid");
  std::vector<TrajectorySample> out;
  out.reserve(grid.size());
  out.push_back({grid[0], rho0});
  CMatrix rho = rho0.matrix();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double h = grid[k] - grid[k - 1];
    if (!(h > 0.0)) throw ValidationError("integrate: time grid must be strictly increasing");
    const CMatrix k1 = lindblad_rhs(spec, rho);
    const CMatrix k2 = lindblad_rhs(spec, rho + 0.5 * h * k1);
    const CMatrix k3 = lindblad_rhs(spec, rho + 0.5 * h * k2);
    const CMatrix k4 = lindblad_rhs(spec, rho + h * k3);
    CMatrix next = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    next = 0.5 * (next + next.adjoint());
    next /= next.trace().real();

    Eigen::SelfAdjointEigenSolver<CMatrix> es(next, Eigen::EigenvaluesOnly);
    if (const double lo = es.eigenvalues().minCoeff(); lo < -tol.integrator_psd) {
      std::ostringstream os;
      os << "RK4 step to t=" << grid[k] << " left the PSD cone (eigenvalue " << lo
         << "); reduce the step";
      throw StepTooLarge(os.str());
    }
    rho = next;
    Tolerances relaxed = tol;
    relaxed.psd = std::max(tol.psd, tol.integrator_psd);
    out.push_back({grid[k], DensityMatrix(rho, relaxed)});
  }
  return out;
}

std::vector<double> uniform_grid(double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("uniform_grid: need dt > 0 and a finite horizon >= 0");
  }
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = static_cast<double>(k) * dt;
  return grid;
}

std::vector<TrajectorySample> jc_trajectory(double omega, std::span<const double> grid) {
  std::vector<TrajectorySample> out;
  out.reserve(grid.size());
  for (const double t : grid) out.push_back({t, jc_reduced_state(omega, t)});
  return out;
}

std::vector<TrajectorySample> amplitude_damping_trajectory(double gamma, double omega,
                                                           std::span<const double> grid) {
  std::vector<TrajectorySample> out;
  out.reserve(grid.size());
  for (const double t : grid) out.push_back({t, amplitude_damping_exact(gamma, omega, t)});
  return out;
}

const std::vector<ModelInfo>& model_catalogue() {
  static const std::vector<ModelInfo> catalogue{
      {"jc",
       "Resonant Jaynes-Cummings atom traced over a vacuum cavity mode, started in |e,0>; "
       "closed-form reduced state (not Lindblad-generated)",
       {{"omega", "coupling strength (1/time)", 1.0},
        {"level-splitting", "qubit splitting in H_S = w sigma_z / 2 (1/time)", 0.0}},
       false},
      {"amplitude-damping",
       "Spontaneous decay of a two-level atom from the excited state; closed-form solution",
       {{"gamma", "decay rate (1/time)", 1.0},
        {"level-splitting", "qubit splitting in H = w sigma_z / 2 (1/time)", 0.0}},
       true},
      {"lindblad",
       "Arbitrary time-independent Lindblad generator read from a JSON spec file, integrated by RK4",
       {},
       true},
  };
  return catalogue;
}

}  // namespace pqd
