#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pqd/decomposition.hpp"

namespace pqd {

struct SimConfig {
  double dt = 1e-3;
  std::size_t n_traj = 1;
  std::uint64_t seed = 0;
  double horizon = 1.0;
  /// Worker threads; 0 uses the hardware concurrency. Never affects results.
  unsigned threads = 0;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<CMatrix> mean_rho;
  /// Per-entry standard error of the ensemble mean (modulus of the complex
  /// deviation).
  std::vector<RMatrix> std_error;
  std::vector<double> trace_distance_to_exact;

  [[nodiscard]] double max_trace_distance() const;
  /// Time average of the largest per-entry standard error.
  [[nodiscard]] double mean_std_error() const;
};

/// One stochastic step. The draw in [0, 1) is partitioned into
/// [0, q_1 dt), [q_1 dt, (q_1 + q_2) dt), ...; a draw past the last interval
/// selects the Hamiltonian branch exp(-i H dt). `q` is real_weyl-indexed
/// (entry 0 ignored) and `unitaries` includes the identity at index 0.
[[nodiscard]] CMatrix step(const CMatrix& state, const CMatrix& hamiltonian,
                           std::span<const CMatrix> unitaries, const RVector& q, double dt,
                           double draw, const Tolerances& tol = {});

/// exp(-i H dt) for Hermitian H.
[[nodiscard]] CMatrix hamiltonian_propagator(const CMatrix& hamiltonian, double dt);

/// Deterministic average of the stochastic scheme: rho_{n+1} =
/// (1 - sum q dt) U rho U^dagger + sum q_i dt U~_i rho U~_i^dagger.
[[nodiscard]] std::vector<CMatrix> expected_evolution(const DecompositionSeries& decomposition,
                                                      const DensityMatrix& rho0, double horizon);

/// Runs `config.n_traj` trajectories along the decomposition grid up to
/// config.horizon. Trajectory k draws from Philox4x32(seed, k); trajectories
/// are reduced in fixed blocks in index order so the output is bitwise
/// independent of the thread count.
[[nodiscard]] EnsembleResult run_ensemble(const SimConfig& config,
                                          const DecompositionSeries& decomposition,
                                          const DensityMatrix& rho0,
                                          std::span<const TrajectorySample> exact);

struct SweepRow {
  double dt = 0.0;
  std::size_t n_traj = 0;
  double max_trace_distance = 0.0;  ///< ensemble mean vs exact
  double bias = 0.0;                ///< max trace distance, expected_evolution vs exact
  double stochastic = 0.0;          ///< EnsembleResult::mean_std_error
};

struct SweepTemplate {
  SimConfig base;
  /// Exact trajectory sampled on a uniform grid with the given step.
  std::function<std::vector<TrajectorySample>(double dt)> trajectory;
};

/// Error table over every (dt, n) pair, dt-major.
[[nodiscard]] std::vector<SweepRow> convergence_sweep(const SweepTemplate& problem,
                                                      std::span<const double> dts,
                                                      std::span<const std::size_t> ns);

}  // namespace pqd
