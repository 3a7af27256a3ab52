#pragma once

#include <array>
#include <span>
#include <vector>

#include "pqd/density_matrix.hpp"
#include "pqd/linalg.hpp"

namespace pqd {

struct TrajectorySample {
  double time;
  DensityMatrix rho;
};

/// Eigenframes along a trajectory, with eigenvectors identified across
/// time (branch order, not sorted order) and parallel-transported phases.
struct EigenframeSeries {
  std::vector<double> times;
  /// Aligned frames; eigenvalues follow the eigenvector branches.
  std::vector<Spectrum> frames;
  /// Accumulated phase of each aligned eigenvector relative to the
  /// canonical eigensolver gauge (radians, unwrapped along the series).
  std::vector<RVector> phases;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

/// Eigendecomposes every sample and aligns the frames.
[[nodiscard]] EigenframeSeries align_eigenframes(std::span<const TrajectorySample> samples,
                                                 const Tolerances& tol = {});

/// Aligns precomputed eigen-decompositions (any gauge, any order).
[[nodiscard]] EigenframeSeries align_spectra(std::vector<double> times,
                                             std::vector<Spectrum> raw,
                                             const Tolerances& tol = {});

enum class HamiltonianGauge {
  ParallelTransport,  ///< minimal Hilbert-Schmidt norm driving Hamiltonian
  Canonical,          ///< eigenvectors in the eigensolver's own gauge
};

/// Time derivative at grid index `index` of a sampled quantity: three-point
/// central stencil in the interior, three-point one-sided at the ends (two
/// points when the grid has only two samples). Works on non-uniform grids.
struct DerivativeStencil {
  std::array<std::size_t, 3> at{};
  std::array<double, 3> weight{};
  int points = 0;
};
[[nodiscard]] DerivativeStencil derivative_stencil(std::span<const double> times, std::size_t index);

/// H(t) = i sum_i |d/dt psi_i><psi_i|, Hermitized.
[[nodiscard]] CMatrix build_hamiltonian(const EigenframeSeries& frames, std::size_t index,
                                        HamiltonianGauge gauge = HamiltonianGauge::ParallelTransport);

/// Rates at grid index `index`, indexed by the real_weyl family (q_i belongs
/// to U~_i) with q_0 = sum_{i>=1} q_i. `singular` is set when P is singular
/// or when the circulant symbol passes through zero within half a grid cell
/// of this sample; the least-squares solution is returned in that case.
[[nodiscard]] RateSolveResult compute_rates_at(const EigenframeSeries& frames, std::size_t index,
                                               const Tolerances& tol = {});

/// U~_i = U u_i U^dagger for the real_weyl family u_i, i = 0..d-1.
[[nodiscard]] std::vector<CMatrix> build_tilde_unitaries(const Spectrum& frame);

/// -i[H, rho] + sum_{i>=1} q_i (U~_i rho U~_i^dagger - rho).
[[nodiscard]] CMatrix reconstruct_rhs(const CMatrix& rho, const CMatrix& hamiltonian,
                                      std::span<const CMatrix> unitaries, const RVector& q);

struct TimeFlags {
  bool negative_rate = false;
  bool singular = false;
};

struct DecompositionSeries {
  std::vector<double> times;
  std::vector<CMatrix> hamiltonians;
  std::vector<std::vector<CMatrix>> unitaries;
  /// Rates per time in real_weyl indexing; q_0 = sum_{i>=1} q_i.
  std::vector<RVector> rates;
  std::vector<double> condition_estimates;
  std::vector<TimeFlags> flags;
  EigenframeSeries frames;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  [[nodiscard]] Eigen::Index dim() const noexcept {
    return rates.empty() ? 0 : rates.front().size();
  }
};

struct DecompositionOptions {
  HamiltonianGauge gauge = HamiltonianGauge::ParallelTransport;
  /// When true, a singular rate system anywhere on the grid throws
  /// SingularSystem instead of being flagged.
  bool strict_singular = false;
  Tolerances tolerances{};
};

[[nodiscard]] DecompositionSeries decompose_trajectory(std::span<const TrajectorySample> samples,
                                                       const DecompositionOptions& options = {});

}  // namespace pqd
