#include "pqd/density_matrix.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pqd/errors.hpp"

namespace pqd {

void require_finite(const CMatrix& m, const char* what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const Complex z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << i << ", " << j << ")";
        throw ValidationError(os.str());
      }
    }
  }
}

double hermiticity_defect(const CMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(CMatrix m, const Tolerances& tol) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw ValidationError("density matrix must be square and non-empty");
  }
  require_finite(m_, "density matrix");
  if (const double h = hermiticity_defect(m_); h > tol.hermitian) {
    std::ostringstream os;
    os << "density matrix not Hermitian (defect " << h << ")";
    throw ValidationError(os.str());
  }
  if (const double tr = m_.trace().real(); std::abs(tr - 1.0) > tol.trace) {
    std::ostringstream os;
    os.precision(17);
    os << "density matrix trace " << tr << " differs from 1";
    throw ValidationError(os.str());
  }
  const CMatrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
  if (const double lo = es.eigenvalues().minCoeff(); lo < -tol.psd) {
    std::ostringstream os;
    os << "density matrix not positive semidefinite (eigenvalue " << lo << ")";
    throw ValidationError(os.str());
  }
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix DensityMatrix::cleaned(const CMatrix& m, const Tolerances& tol) {
  CMatrix h = 0.5 * (m + m.adjoint());
  const double tr = h.trace().real();
  if (tr != 0.0 && std::isfinite(tr)) h /= tr;
  return DensityMatrix(std::move(h), tol);
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

double trace_distance(const CMatrix& a, const CMatrix& b) {
  const CMatrix diff = a - b;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace pqd
