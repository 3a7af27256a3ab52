#include "pqd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pqd/density_matrix.hpp"

namespace pqd {

namespace {

// Descending lexicographic order on (re, im) of each entry.
bool lex_greater(const CVector& a, const CVector& b, double eps) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (std::abs(a(k).real() - b(k).real()) > eps) return a(k).real() > b(k).real();
    if (std::abs(a(k).imag() - b(k).imag()) > eps) return a(k).imag() > b(k).imag();
  }
  return false;
}

Complex unit_root(Eigen::Index numerator, Eigen::Index d, double sign) {
  const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(numerator % d) /
                       static_cast<double>(d);
  return std::polar(1.0, angle);
}

CVector dft(const RVector& x) {
  const Eigen::Index d = x.size();
  CVector out = CVector::Zero(d);
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index l = 0; l < d; ++l) out(m) += x(l) * unit_root(l * m, d, -1.0);
  }
  return out;
}

RVector inverse_dft_real(const CVector& x) {
  const Eigen::Index d = x.size();
  RVector out(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Complex acc = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) acc += x(m) * unit_root(k * m, d, +1.0);
    out(k) = acc.real() / static_cast<double>(d);
  }
  return out;
}

}  // namespace

std::string BlockStructure::describe() const {
  std::ostringstream os;
  if (!singular) {
    os << "nonsingular";
    return os.str();
  }
  os << "singular";
  if (block_length > 0) {
    os << ": " << block_count << " consecutive constant block" << (block_count == 1 ? "" : "s")
       << " of length " << block_length;
  } else {
    os << ": no constant-block pattern in this arrangement";
  }
  if (!null_frequencies.empty()) {
    os << " (zero symbol at frequenc" << (null_frequencies.size() == 1 ? "y" : "ies");
    for (std::size_t k = 0; k < null_frequencies.size(); ++k) {
      os << (k == 0 ? " " : ", ") << null_frequencies[k];
    }
    os << ")";
  }
  return os.str();
}

CMatrix Spectrum::reconstruct() const {
  return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

void fix_phases(CMatrix& vectors, double threshold) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double mag = std::abs(vectors(r, c));
      if (mag > threshold) {
        vectors.col(c) *= std::conj(vectors(r, c)) / mag;
        vectors(r, c) = mag;
        break;
      }
    }
  }
}

Spectrum hermitian_eigendecomposition(const CMatrix& m, const Tolerances& tol) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ValidationError("eigendecomposition needs a square, non-empty matrix");
  }
  require_finite(m, "eigendecomposition input");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (const double h = hermiticity_defect(m); h > tol.hermitian * scale) {
    std::ostringstream os;
    os << "eigendecomposition input not Hermitian (defect " << h << ")";
    throw ValidationError(os.str());
  }
  const Eigen::Index d = m.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) throw Error("Hermitian eigensolver did not converge");

  CMatrix vecs = es.eigenvectors();
  fix_phases(vecs);
  const RVector& vals = es.eigenvalues();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });
  // Within runs of tied eigenvalues, order by eigenvector.
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin + 1;
    while (end < order.size() && vals(order[end - 1]) - vals(order[end]) <= tol.eigenvalue_tie) ++end;
    if (end - begin > 1) {
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(end),
                       [&](Eigen::Index a, Eigen::Index b) {
                         return lex_greater(vecs.col(a), vecs.col(b), 1e-12);
                       });
    }
    begin = end;
  }

  Spectrum s{RVector(d), CMatrix(d, d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    s.eigenvalues(k) = vals(order[static_cast<std::size_t>(k)]);
    s.eigenvectors.col(k) = vecs.col(order[static_cast<std::size_t>(k)]);
  }
  return s;
}

CMatrix real_weyl(int dim, int shift) {
  if (dim < 1) throw ValidationError("real_weyl: dimension must be positive");
  if (shift < 0 || shift >= dim) {
    std::ostringstream os;
    os << "real_weyl: shift " << shift << " outside [0, " << dim << ")";
    throw ValidationError(os.str());
  }
  CMatrix u = CMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) u(k, (k + shift) % dim) = 1.0;
  return u;
}

CVector circulant_symbol(const RVector& p) { return dft(p); }

RMatrix circulant_matrix(const RVector& p) {
  const Eigen::Index d = p.size();
  RMatrix m(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index j = 0; j < d; ++j) m(k, j) = p(((k - j) % d + d) % d);
  }
  return m;
}

BlockStructure circulant_singularity_classify(const RVector& p, double tol) {
  std::vector<double> sorted(p.data(), p.data() + p.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const int n = static_cast<int>(sorted.size());
  BlockStructure out;
  for (int b = 2; b <= n; ++b) {
    if (n % b != 0) continue;
    bool blocks = true;
    for (int start = 0; start < n && blocks; start += b) {
      blocks = sorted[static_cast<std::size_t>(start)] -
                   sorted[static_cast<std::size_t>(start + b - 1)] <= tol;
    }
    if (blocks) {
      out.singular = true;
      out.block_length = b;
      out.block_count = n / b;
      for (int k = 1; k < b; ++k) out.null_frequencies.push_back(k * (n / b));
      return out;
    }
  }
  return out;
}

RateSolveResult solve_circulant_rates(const RVector& p, const RVector& f, RateConvention convention,
                                      SingularPolicy policy, const Tolerances& tol) {
  const Eigen::Index d = p.size();
  if (d == 0 || f.size() != d) {
    std::ostringstream os;
    os << "circulant solve: dimension mismatch (p has " << d << ", f has " << f.size() << ")";
    throw ValidationError(os.str());
  }
  if (!p.allFinite() || !f.allFinite()) throw ValidationError("circulant solve: non-finite input");
  if (p.minCoeff() < -tol.probability_sum || p.maxCoeff() > 1.0 + tol.probability_sum) {
    throw ValidationError("circulant solve: eigenvalues outside [0, 1]");
  }
  if (std::abs(p.sum() - 1.0) > tol.probability_sum) {
    throw ValidationError("circulant solve: eigenvalues do not sum to 1");
  }

  const CVector symbol = dft(p);
  const CVector rhs = dft(f);
  const double top = symbol.cwiseAbs().maxCoeff();
  const double threshold = tol.singular_symbol * top;

  RateSolveResult result;
  CVector solved(d);
  double bottom = std::numeric_limits<double>::infinity();
  BlockStructure blocks;
  bool consistent = true;
  const double range_tol = tol.singular_symbol * std::max(1.0, f.cwiseAbs().sum());
  for (Eigen::Index m = 0; m < d; ++m) {
    const double mag = std::abs(symbol(m));
    if (mag <= threshold) {
      blocks.null_frequencies.push_back(static_cast<int>(m));
      solved(m) = 0.0;
      if (std::abs(rhs(m)) > range_tol) consistent = false;
    } else {
      bottom = std::min(bottom, mag);
      solved(m) = rhs(m) / symbol(m);
    }
  }

  if (!blocks.null_frequencies.empty()) {
    const BlockStructure pattern = circulant_singularity_classify(p, 1e-8);
    blocks.singular = true;
    blocks.block_length = pattern.singular ? pattern.block_length : 0;
    blocks.block_count = pattern.singular ? pattern.block_count : 0;
    result.singular = true;
    result.condition_estimate = std::numeric_limits<double>::infinity();
    result.block_structure = blocks;
    if (!consistent && policy == SingularPolicy::Throw) {
      throw SingularSystem("rate matrix is " + blocks.describe() +
                               " and the eigenvalue change lies outside its range",
                           blocks);
    }
  } else {
    result.condition_estimate = top / bottom;
  }

  RVector v = inverse_dft_real(solved);
  result.q = v;
  result.q(0) = convention == RateConvention::Continuous ? -v(0) : v(0) + 1.0;
  return result;
}

RateSolveResult solve_toeplitz_rates(const RVector& p, const RVector& f, Eigen::Index truncation) {
  const Eigen::Index n = truncation;
  if (n < 1 || p.size() < n || f.size() < n) {
    std::ostringstream os;
    os << "Toeplitz solve: truncation " << n << " needs p and f of at least that length (got "
       << p.size() << ", " << f.size() << ")";
    throw ValidationError(os.str());
  }
  if (!p.head(n).allFinite() || !f.head(n).allFinite()) {
    throw ValidationError("Toeplitz solve: non-finite input");
  }
  const double lead = p(0);
  if (lead == 0.0) {
    throw ValidationError(
        "Toeplitz solve: leading eigenvalue is zero; reorder the spectrum so that p[0] != 0");
  }

  RVector v(n);
  RVector inverse(n);  // first column of P^{-1}, also lower-triangular Toeplitz
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = f(i);
    double acc_inv = i == 0 ? 1.0 : 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      acc -= p(i - j) * v(j);
      acc_inv -= p(i - j) * inverse(j);
    }
    v(i) = acc / lead;
    inverse(i) = acc_inv / lead;
  }

  RateSolveResult result;
  result.q = v;
  result.q(0) = -v(0);
  result.condition_estimate = p.head(n).cwiseAbs().sum() * inverse.cwiseAbs().sum();
  return result;
}

RVector rates_by_shift(const RVector& column_rates) {
  const Eigen::Index d = column_rates.size();
  RVector out(d);
  if (d == 0) return out;
  out(0) = column_rates(0);
  for (Eigen::Index i = 1; i < d; ++i) out(i) = column_rates(d - i);
  return out;
}

}  // namespace pqd
