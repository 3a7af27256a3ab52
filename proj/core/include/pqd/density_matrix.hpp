#pragma once

#include "pqd/types.hpp"

namespace pqd {

/// Throws ValidationError if any entry is NaN or infinite.
void require_finite(const CMatrix& m, const char* what);

[[nodiscard]] double hermiticity_defect(const CMatrix& m);

/// A validated quantum state: Hermitian, unit trace, positive semidefinite
/// (each up to the configured tolerance). Immutable once built.
class DensityMatrix {
 public:
  /// Validates and stores m. Throws ValidationError on failure.
  explicit DensityMatrix(CMatrix m, const Tolerances& tol = {});

  [[nodiscard]] const CMatrix& matrix() const noexcept { return m_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] double purity() const;

  /// Hermitizes and renormalises before validating; for states produced by
  /// a numerical integrator that drift by rounding.
  static DensityMatrix cleaned(const CMatrix& m, const Tolerances& tol = {});

 private:
  CMatrix m_;
};

[[nodiscard]] CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// 1/2 ||a - b||_1 for Hermitian a, b.
[[nodiscard]] double trace_distance(const CMatrix& a, const CMatrix& b);

}  // namespace pqd
