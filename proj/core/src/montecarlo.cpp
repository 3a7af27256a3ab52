#include "pqd/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "pqd/rng.hpp"

namespace pqd {

namespace {

constexpr std::size_t kMaxBlocks = 256;
constexpr std::size_t kMinBlockSize = 64;

void check_rates(const RVector& q, double dt, const Tolerances& tol, double t) {
  double total = 0.0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) < -tol.negative_rate) {
      std::ostringstream os;
      os << "rate q_" << i << " = " << q(i) << " at t=" << t
         << " is negative; the stochastic scheme cannot realise it";
      throw NegativeRate(os.str());
    }
    total += std::max(q(i), 0.0) * dt;
  }
  if (total >= 1.0) {
    std::ostringstream os;
    os << "jump probability sum q dt = " << total << " at t=" << t << " is not below 1";
    throw StepTooLarge(os.str());
  }
}

// Cumulative jump thresholds for one step; entry i-1 closes the interval of
// unitary i.
std::vector<double> thresholds(const RVector& q, double dt) {
  std::vector<double> out;
  double acc = 0.0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    acc += std::max(q(i), 0.0) * dt;
    out.push_back(acc);
  }
  return out;
}

std::size_t last_step_index(const std::vector<double>& times, double horizon, double dt) {
  std::size_t k = 0;
  while (k + 1 < times.size() && times[k + 1] <= horizon + 1e-9 * dt) ++k;
  return k;
}

struct BlockSums {
  std::vector<CMatrix> sum;
  std::vector<RMatrix> sum_sq;
};

}  // namespace

double EnsembleResult::max_trace_distance() const {
  double m = 0.0;
  for (const double v : trace_distance_to_exact) m = std::max(m, v);
  return m;
}

double EnsembleResult::mean_std_error() const {
  if (std_error.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& e : std_error) acc += e.maxCoeff();
  return acc / static_cast<double>(std_error.size());
}

CMatrix hamiltonian_propagator(const CMatrix& hamiltonian, double dt) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (hamiltonian + hamiltonian.adjoint()));
  CVector phases(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::polar(1.0, -es.eigenvalues()(k) * dt);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix step(const CMatrix& state, const CMatrix& hamiltonian, std::span<const CMatrix> unitaries,
             const RVector& q, double dt, double draw, const Tolerances& tol) {
  const Eigen::Index d = state.rows();
  if (hamiltonian.rows() != d || q.size() != d || static_cast<Eigen::Index>(unitaries.size()) != d) {
    throw ValidationError("step: dimension mismatch");
  }
  if (!(dt > 0.0)) throw ValidationError("step: dt must be positive");
  if (!(draw >= 0.0 && draw < 1.0)) throw ValidationError("step: draw must lie in [0, 1)");
  check_rates(q, dt, tol, 0.0);
  const std::vector<double> cut = thresholds(q, dt);
  for (std::size_t i = 0; i < cut.size(); ++i) {
    if (draw < cut[i]) {
      const CMatrix& u = unitaries[i + 1];
      return u * state * u.adjoint();
    }
  }
  const CMatrix u = hamiltonian_propagator(hamiltonian, dt);
  return u * state * u.adjoint();
}

namespace {

std::vector<CMatrix> midpoint_propagators(const DecompositionSeries& dec, std::size_t steps) {
  std::vector<CMatrix> out;
  out.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const CMatrix mid = 0.5 * (dec.hamiltonians[k] + dec.hamiltonians[k + 1]);
    out.push_back(hamiltonian_propagator(mid, dec.times[k + 1] - dec.times[k]));
  }
  return out;
}

}  // namespace

std::vector<CMatrix> expected_evolution(const DecompositionSeries& dec, const DensityMatrix& rho0,
                                        double horizon) {
  if (dec.size() == 0) throw ValidationError("expected_evolution: empty decomposition");
  if (rho0.dim() != dec.dim()) throw ValidationError("expected_evolution: dimension mismatch");
  const std::size_t steps = last_step_index(dec.times, horizon, dec.size() > 1 ? dec.times[1] - dec.times[0] : 1.0);
  const auto props = midpoint_propagators(dec, steps);
  std::vector<CMatrix> out;
  out.reserve(steps + 1);
  out.push_back(rho0.matrix());
  for (std::size_t k = 0; k < steps; ++k) {
    const double dt = dec.times[k + 1] - dec.times[k];
    const CMatrix& rho = out.back();
    const RVector& q = dec.rates[k];
    double stay = 1.0;
    CMatrix next = CMatrix::Zero(rho.rows(), rho.cols());
    for (Eigen::Index i = 1; i < q.size(); ++i) {
      const CMatrix& u = dec.unitaries[k][static_cast<std::size_t>(i)];
      next += q(i) * dt * (u * rho * u.adjoint());
      stay -= q(i) * dt;
    }
    next += stay * (props[k] * rho * props[k].adjoint());
    out.push_back(std::move(next));
  }
  return out;
}

EnsembleResult run_ensemble(const SimConfig& config, const DecompositionSeries& dec,
                            const DensityMatrix& rho0, std::span<const TrajectorySample> exact) {
  if (!(config.dt > 0.0)) throw ValidationError("run_ensemble: dt must be positive");
  if (config.n_traj < 1) throw ValidationError("run_ensemble: need at least one trajectory");
  if (!(config.horizon >= 0.0)) throw ValidationError("run_ensemble: horizon must be non-negative");
  if (dec.size() == 0) throw ValidationError("run_ensemble: empty decomposition");
  const Eigen::Index d = dec.dim();
  if (rho0.dim() != d) throw ValidationError("run_ensemble: initial state dimension mismatch");

  const double dt = config.dt;
  if (dec.times.back() < config.horizon - 1e-9 * dt) {
    std::ostringstream os;
    os << "run_ensemble: decomposition ends at t=" << dec.times.back() << " before the horizon "
       << config.horizon;
    throw ValidationError(os.str());
  }
  const std::size_t steps = last_step_index(dec.times, config.horizon, dt);
  for (std::size_t k = 0; k < steps; ++k) {
    if (std::abs(dec.times[k + 1] - dec.times[k] - dt) > 1e-9 * dt) {
      std::ostringstream os;
      os << "run_ensemble: decomposition grid spacing at t=" << dec.times[k] << " differs from dt=" << dt;
      throw ValidationError(os.str());
    }
  }
  if (exact.size() < steps + 1) {
    throw ValidationError("run_ensemble: exact trajectory shorter than the horizon");
  }
  for (std::size_t k = 0; k <= steps; ++k) {
    if (std::abs(exact[k].time - dec.times[k]) > 1e-9 * dt || exact[k].rho.dim() != d) {
      throw ValidationError("run_ensemble: exact trajectory does not match the decomposition grid");
    }
  }

  const Tolerances tol{};
  std::optional<std::size_t> first_bad;
  std::size_t last_bad = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const bool negative = dec.flags[k].negative_rate ||
                          (dec.rates[k].tail(d - 1).array() < -tol.negative_rate).any();
    if (negative || dec.flags[k].singular) {
      if (!first_bad) first_bad = k;
      last_bad = k;
    }
  }
  if (first_bad) {
    std::ostringstream os;
    os << "decomposition has negative or singular rates on t in [" << dec.times[*first_bad] << ", "
       << dec.times[last_bad] << "]; refusing to simulate";
    throw RefusesToSimulate(os.str(), dec.times[*first_bad], dec.times[last_bad]);
  }

  std::vector<std::vector<double>> cuts;
  cuts.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    check_rates(dec.rates[k], dt, tol, dec.times[k]);
    cuts.push_back(thresholds(dec.rates[k], dt));
  }
  const auto props = midpoint_propagators(dec, steps);

  const std::size_t n = config.n_traj;
  const std::size_t block_size = std::max(kMinBlockSize, (n + kMaxBlocks - 1) / kMaxBlocks);
  const std::size_t blocks = (n + block_size - 1) / block_size;
  std::vector<BlockSums> partial(blocks);

  // Sums are taken relative to the jump-free path so that the variance
  // formula does not cancel catastrophically (and is exactly zero when every
  // trajectory follows the same branches).
  std::vector<CMatrix> reference(steps + 1);
  {
    CMatrix state = rho0.matrix(), tmp(d, d);
    reference[0] = state;
    for (std::size_t k = 0; k < steps; ++k) {
      tmp.noalias() = props[k] * state;
      state.noalias() = tmp * props[k].adjoint();
      reference[k + 1] = state;
    }
  }

  auto run_block = [&](std::size_t b) {
    BlockSums& acc = partial[b];
    acc.sum.assign(steps + 1, CMatrix::Zero(d, d));
    acc.sum_sq.assign(steps + 1, RMatrix::Zero(d, d));
    CMatrix state(d, d), tmp(d, d), dev(d, d);
    const std::size_t end = std::min(n, (b + 1) * block_size);
    for (std::size_t traj = b * block_size; traj < end; ++traj) {
      Philox4x32 rng(config.seed, traj);
      state = rho0.matrix();
      for (std::size_t k = 0; k < steps; ++k) {
        const double draw = rng.uniform();
        const auto& cut = cuts[k];
        const CMatrix* u = &props[k];
        for (std::size_t i = 0; i < cut.size(); ++i) {
          if (draw < cut[i]) {
            u = &dec.unitaries[k][i + 1];
            break;
          }
        }
        tmp.noalias() = (*u) * state;
        state.noalias() = tmp * u->adjoint();
        dev = state - reference[k + 1];
        acc.sum[k + 1] += dev;
        acc.sum_sq[k + 1] += dev.cwiseAbs2();
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(config.threads == 0 ? hw : config.threads, blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < blocks; b = next++) run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  EnsembleResult out;
  out.times.assign(dec.times.begin(), dec.times.begin() + static_cast<std::ptrdiff_t>(steps + 1));
  out.mean_rho.reserve(steps + 1);
  out.std_error.reserve(steps + 1);
  out.trace_distance_to_exact.reserve(steps + 1);
  const double count = static_cast<double>(n);
  for (std::size_t k = 0; k <= steps; ++k) {
    CMatrix sum = CMatrix::Zero(d, d);
    RMatrix sum_sq = RMatrix::Zero(d, d);
    for (const auto& p : partial) {
      sum += p.sum[k];
      sum_sq += p.sum_sq[k];
    }
    CMatrix mean = reference[k] + sum / count;
    RMatrix err = RMatrix::Zero(d, d);
    if (n > 1) {
      const RMatrix var = ((sum_sq - sum.cwiseAbs2() / count) / (count - 1.0)).cwiseMax(0.0);
      err = (var / count).cwiseSqrt();
    }
    out.trace_distance_to_exact.push_back(trace_distance(mean, exact[k].rho.matrix()));
    out.mean_rho.push_back(std::move(mean));
    out.std_error.push_back(std::move(err));
  }
  return out;
}

std::vector<SweepRow> convergence_sweep(const SweepTemplate& problem, std::span<const double> dts,
                                        std::span<const std::size_t> ns) {
  if (!problem.trajectory) throw ValidationError("convergence_sweep: no trajectory source");
  if (dts.empty() || ns.empty()) throw ValidationError("convergence_sweep: empty dt or n list");
  std::vector<SweepRow> rows;
  for (const double dt : dts) {
    const std::vector<TrajectorySample> samples = problem.trajectory(dt);
    if (samples.empty()) throw ValidationError("convergence_sweep: empty trajectory");
    const DecompositionSeries dec = decompose_trajectory(samples);
    const DensityMatrix& rho0 = samples.front().rho;

    SimConfig cfg = problem.base;
    cfg.dt = dt;
    const auto expected = expected_evolution(dec, rho0, cfg.horizon);
    double bias = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
      bias = std::max(bias, trace_distance(expected[k], samples[k].rho.matrix()));
    }
    for (const std::size_t n : ns) {
      cfg.n_traj = n;
      const EnsembleResult res = run_ensemble(cfg, dec, rho0, samples);
      rows.push_back({dt, n, res.max_trace_distance(), bias, res.mean_std_error()});
    }
  }
  return rows;
}

}  // namespace pqd
