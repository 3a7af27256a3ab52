#include "pqd/decomposition.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "pqd/assignment.hpp"

namespace pqd {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

// Groups of consecutive indices (after sorting by value) whose values chain
// within `gap`. Singletons are omitted.
std::vector<std::vector<Eigen::Index>> degenerate_clusters(const RVector& values, double gap) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  for (Eigen::Index k = 0; k < values.size(); ++k) order[static_cast<std::size_t>(k)] = k;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });
  std::vector<std::vector<Eigen::Index>> clusters;
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin + 1;
    while (end < order.size() && values(order[end - 1]) - values(order[end]) < gap) ++end;
    if (end - begin > 1) {
      std::vector<Eigen::Index> c(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                  order.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(c.begin(), c.end());
      clusters.push_back(std::move(c));
    }
    begin = end;
  }
  return clusters;
}

void check_series(const std::vector<double>& times, const std::vector<Spectrum>& raw) {
  if (times.size() != raw.size()) throw ValidationError("eigenframes: times and frames differ in length");
  if (times.size() < 2) throw ValidationError("eigenframes: need at least two samples");
  const Eigen::Index d = raw.front().dim();
  for (std::size_t k = 0; k < raw.size(); ++k) {
    if (raw[k].dim() != d || raw[k].eigenvectors.rows() != d || raw[k].eigenvectors.cols() != d) {
      std::ostringstream os;
      os << "eigenframes: sample " << k << " has dimension " << raw[k].dim() << ", expected " << d;
      throw ValidationError(os.str());
    }
    if (k > 0 && !(times[k] > times[k - 1])) {
      std::ostringstream os;
      os << "eigenframes: times not strictly increasing at sample " << k;
      throw ValidationError(os.str());
    }
  }
}

}  // namespace

EigenframeSeries align_spectra(std::vector<double> times, std::vector<Spectrum> raw,
                               const Tolerances& tol) {
  check_series(times, raw);
  const Eigen::Index d = raw.front().dim();

  EigenframeSeries out;
  out.times = std::move(times);
  out.frames.reserve(raw.size());
  out.phases.reserve(raw.size());
  out.frames.push_back(raw.front());
  out.phases.push_back(RVector::Zero(d));

  for (std::size_t n = 1; n < raw.size(); ++n) {
    const CMatrix& prev = out.frames.back().eigenvectors;
    const Spectrum& cur = raw[n];

    const CMatrix overlap = prev.adjoint() * cur.eigenvectors;
    const std::vector<int> match = max_weight_assignment(overlap.cwiseAbs2());

    Spectrum next{RVector(d), CMatrix(d, d)};
    CMatrix reference(d, d);  // raw-gauge columns in matched order
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto j = static_cast<Eigen::Index>(match[static_cast<std::size_t>(i)]);
      next.eigenvalues(i) = cur.eigenvalues(j);
      next.eigenvectors.col(i) = cur.eigenvectors.col(j);
      reference.col(i) = cur.eigenvectors.col(j);
    }

    // Degenerate clusters: rotate within the subspace towards the previous
    // frame (unitary polar factor of the overlap block).
    std::vector<char> in_cluster(static_cast<std::size_t>(d), 0);
    for (const auto& cluster : degenerate_clusters(next.eigenvalues, tol.degenerate_gap)) {
      const auto k = static_cast<Eigen::Index>(cluster.size());
      CMatrix sub_prev(d, k), sub_next(d, k);
      for (Eigen::Index c = 0; c < k; ++c) {
        sub_prev.col(c) = prev.col(cluster[static_cast<std::size_t>(c)]);
        sub_next.col(c) = next.eigenvectors.col(cluster[static_cast<std::size_t>(c)]);
        in_cluster[static_cast<std::size_t>(cluster[static_cast<std::size_t>(c)])] = 1;
      }
      const CMatrix block = sub_next.adjoint() * sub_prev;
      Eigen::JacobiSVD<CMatrix> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const CMatrix rotated = sub_next * (svd.matrixU() * svd.matrixV().adjoint());
      for (Eigen::Index c = 0; c < k; ++c) {
        next.eigenvectors.col(cluster[static_cast<std::size_t>(c)]) = rotated.col(c);
      }
    }

    RVector phase(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Complex o = prev.col(i).dot(next.eigenvectors.col(i));
      const double mag = std::abs(o);
      if (mag < tol.min_overlap) {
        std::ostringstream os;
        os << "eigenvector " << i << " overlap " << mag << " between t=" << out.times[n - 1]
           << " and t=" << out.times[n] << " is below " << tol.min_overlap
           << "; sample the trajectory more finely";
        throw TrajectoryTooCoarse(os.str());
      }
      if (!in_cluster[static_cast<std::size_t>(i)]) next.eigenvectors.col(i) *= std::conj(o) / mag;
      const double raw_phase = std::arg(reference.col(i).dot(next.eigenvectors.col(i)));
      const double last = out.phases.back()(i);
      phase(i) = last + wrap_angle(raw_phase - last);
    }
    out.frames.push_back(std::move(next));
    out.phases.push_back(std::move(phase));
  }
  return out;
}

EigenframeSeries align_eigenframes(std::span<const TrajectorySample> samples, const Tolerances& tol) {
  std::vector<double> times;
  std::vector<Spectrum> raw;
  times.reserve(samples.size());
  raw.reserve(samples.size());
  for (const auto& s : samples) {
    times.push_back(s.time);
    raw.push_back(hermitian_eigendecomposition(s.rho.matrix(), tol));
  }
  return align_spectra(std::move(times), std::move(raw), tol);
}

DerivativeStencil derivative_stencil(std::span<const double> t, std::size_t index) {
  const std::size_t n = t.size();
  if (n < 2) throw ValidationError("derivative needs at least two grid points");
  if (index >= n) throw ValidationError("derivative index outside the grid");
  DerivativeStencil s;
  if (n == 2) {
    const double h = t[1] - t[0];
    s.points = 2;
    s.at = {0, 1, 0};
    s.weight = {-1.0 / h, 1.0 / h, 0.0};
    return s;
  }
  s.points = 3;
  if (index == 0) {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    s.at = {0, 1, 2};
    s.weight = {-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))};
  } else if (index == n - 1) {
    const double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
    s.at = {n - 3, n - 2, n - 1};
    s.weight = {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2), (h1 + 2.0 * h2) / (h2 * (h1 + h2))};
  } else {
    const double h1 = t[index] - t[index - 1], h2 = t[index + 1] - t[index];
    s.at = {index - 1, index, index + 1};
    s.weight = {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
  }
  return s;
}

namespace {

CMatrix gauge_vectors(const EigenframeSeries& frames, std::size_t k, HamiltonianGauge gauge) {
  const CMatrix& v = frames.frames[k].eigenvectors;
  if (gauge == HamiltonianGauge::ParallelTransport) return v;
  CVector undo(v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) undo(i) = std::polar(1.0, -frames.phases[k](i));
  return v * undo.asDiagonal();
}

}  // namespace

CMatrix build_hamiltonian(const EigenframeSeries& frames, std::size_t index, HamiltonianGauge gauge) {
  if (frames.size() < 2) throw ValidationError("Hamiltonian needs at least two grid points");
  const DerivativeStencil s = derivative_stencil(frames.times, index);
  const CMatrix here = gauge_vectors(frames, index, gauge);
  CMatrix derivative = CMatrix::Zero(here.rows(), here.cols());
  for (int k = 0; k < s.points; ++k) {
    derivative += s.weight[static_cast<std::size_t>(k)] *
                  gauge_vectors(frames, s.at[static_cast<std::size_t>(k)], gauge);
  }
  const CMatrix h = kI * derivative * here.adjoint();
  return 0.5 * (h + h.adjoint());
}

RateSolveResult compute_rates_at(const EigenframeSeries& frames, std::size_t index, const Tolerances& tol) {
  const DerivativeStencil s = derivative_stencil(frames.times, index);
  const RVector& p = frames.frames[index].eigenvalues;
  RVector f = RVector::Zero(p.size());
  for (int k = 0; k < s.points; ++k) {
    f += s.weight[static_cast<std::size_t>(k)] *
         frames.frames[s.at[static_cast<std::size_t>(k)]].eigenvalues;
  }

  RateSolveResult r =
      solve_circulant_rates(p, f, RateConvention::Continuous, SingularPolicy::LeastSquares, tol);

  // A zero of the symbol inside this sample's cell: |lambda_m| below the
  // distance it moves in half a cell.
  const auto& t = frames.times;
  const std::size_t n = t.size();
  const double cell = index == 0       ? t[1] - t[0]
                      : index == n - 1 ? t[n - 1] - t[n - 2]
                                       : 0.5 * (t[index + 1] - t[index - 1]);
  const CVector symbol = circulant_symbol(p);
  const CVector drift = circulant_symbol(f);
  BlockStructure crossing;
  for (Eigen::Index m = 1; m < p.size(); ++m) {
    if (std::abs(symbol(m)) <= 0.5 * cell * std::abs(drift(m))) {
      crossing.null_frequencies.push_back(static_cast<int>(m));
    }
  }
  if (!crossing.null_frequencies.empty() && !r.singular) {
    const BlockStructure pattern = circulant_singularity_classify(p, 0.5 * cell * drift.cwiseAbs().maxCoeff());
    crossing.singular = true;
    crossing.block_length = pattern.singular ? pattern.block_length : 0;
    crossing.block_count = pattern.singular ? pattern.block_count : 0;
    r.singular = true;
    r.block_structure = crossing;
  }

  RVector q = rates_by_shift(r.q);
  q(0) = q.tail(q.size() - 1).sum();
  r.q = std::move(q);
  return r;
}

std::vector<CMatrix> build_tilde_unitaries(const Spectrum& frame) {
  const int d = static_cast<int>(frame.dim());
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(d));
  out.push_back(CMatrix::Identity(d, d));
  for (int i = 1; i < d; ++i) {
    out.push_back(frame.eigenvectors * real_weyl(d, i) * frame.eigenvectors.adjoint());
  }
  return out;
}

CMatrix reconstruct_rhs(const CMatrix& rho, const CMatrix& hamiltonian,
                        std::span<const CMatrix> unitaries, const RVector& q) {
  const Eigen::Index d = rho.rows();
  if (rho.cols() != d || hamiltonian.rows() != d || hamiltonian.cols() != d || q.size() != d ||
      static_cast<Eigen::Index>(unitaries.size()) != d) {
    throw ValidationError("reconstruct_rhs: dimension mismatch");
  }
  CMatrix out = -kI * commutator(hamiltonian, rho);
  for (Eigen::Index i = 1; i < d; ++i) {
    const CMatrix& u = unitaries[static_cast<std::size_t>(i)];
    if (u.rows() != d || u.cols() != d) throw ValidationError("reconstruct_rhs: dimension mismatch");
    out += q(i) * (u * rho * u.adjoint() - rho);
  }
  return out;
}

DecompositionSeries decompose_trajectory(std::span<const TrajectorySample> samples,
                                         const DecompositionOptions& options) {
  const Tolerances& tol = options.tolerances;
  DecompositionSeries out;
  out.frames = align_eigenframes(samples, tol);
  const std::size_t n = out.frames.size();
  out.times = out.frames.times;
  out.hamiltonians.reserve(n);
  out.unitaries.reserve(n);
  out.rates.reserve(n);
  out.condition_estimates.reserve(n);
  out.flags.reserve(n);

  for (std::size_t k = 0; k < n; ++k) {
    out.hamiltonians.push_back(build_hamiltonian(out.frames, k, options.gauge));
    out.unitaries.push_back(build_tilde_unitaries(out.frames.frames[k]));
    RateSolveResult r = compute_rates_at(out.frames, k, tol);
    if (r.singular && options.strict_singular) {
      std::ostringstream os;
      os << "rate system singular at t=" << out.times[k];
      BlockStructure blocks = r.block_structure.value_or(BlockStructure{});
      if (r.block_structure) os << " (" << blocks.describe() << ")";
      throw SingularSystem(os.str(), std::move(blocks));
    }
    TimeFlags flags;
    flags.singular = r.singular;
    flags.negative_rate = (r.q.tail(r.q.size() - 1).array() < -tol.negative_rate).any();
    out.rates.push_back(std::move(r.q));
    out.condition_estimates.push_back(r.condition_estimate);
    out.flags.push_back(flags);
  }
  return out;
}

}  // namespace pqd
