#pragma once

#include <optional>

#include "pqd/errors.hpp"
#include "pqd/types.hpp"

namespace pqd {

/// Eigen-decomposition of a Hermitian matrix in a deterministic gauge.
/// Columns of `eigenvectors` are the eigenvectors for `eigenvalues`.
struct Spectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;

  [[nodiscard]] Eigen::Index dim() const noexcept { return eigenvalues.size(); }
  [[nodiscard]] CMatrix reconstruct() const;
};

/// Descending eigenvalues. Each eigenvector has its first non-negligible
/// component made real positive; eigenvalues tied within
/// `tol.eigenvalue_tie` are ordered lexicographically (descending) on the
/// phase-fixed eigenvector entries.
[[nodiscard]] Spectrum hermitian_eigendecomposition(const CMatrix& m, const Tolerances& tol = {});

/// Multiplies each eigenvector by a phase so its first component with
/// modulus above `threshold` is real positive.
void fix_phases(CMatrix& vectors, double threshold = 1e-12);

/// Cyclic shift sum_k |k><(k+shift) mod d|. It moves diagonal entry
/// (k+shift) mod d to position k under conjugation.
[[nodiscard]] CMatrix real_weyl(int dim, int shift);

enum class RateConvention {
  Continuous,  ///< unknown vector (-q0, q1, ..., q_{d-1}), rates in 1/time
  Channel,     ///< unknown vector (q0 - 1, q1, ..., q_{d-1}), probabilities
};

enum class SingularPolicy {
  Throw,         ///< SingularSystem when f has a component outside range(P)
  LeastSquares,  ///< minimum-norm least-squares solution, flagged singular
};

struct RateSolveResult {
  /// Rates q_0..q_{d-1}. q_0 follows the convention's definition.
  RVector q;
  bool singular = false;
  /// max|symbol| / min|symbol| of the circulant (1-norm condition for the
  /// Toeplitz solver); +inf when singular.
  double condition_estimate = 1.0;
  std::optional<BlockStructure> block_structure;
};

/// Circulant symbol: eigenvalues of P_{kj} = p_{(k-j) mod d}, i.e. the DFT
/// of p (lambda_m = sum_l p_l exp(-2 pi i l m / d)).
[[nodiscard]] CVector circulant_symbol(const RVector& p);

/// Dense form of the rate matrix P_{kj} = p_{(k-j) mod d}.
[[nodiscard]] RMatrix circulant_matrix(const RVector& p);

/// Solves P v = f with P the circulant built from p, through DFT
/// diagonalisation. Returned q is indexed by the columns of P: column j
/// shifts population from slot k-j to slot k.
[[nodiscard]] RateSolveResult solve_circulant_rates(const RVector& p, const RVector& f,
                                                    RateConvention convention,
                                                    SingularPolicy policy = SingularPolicy::Throw,
                                                    const Tolerances& tol = {});

/// Lower-triangular Toeplitz system P_{ij} = p_{i-j} (zero above the
/// diagonal) solved by forward substitution, continuous convention
/// v = (-q0, q1, ..., q_{N-1}). Requires p[0] != 0.
[[nodiscard]] RateSolveResult solve_toeplitz_rates(const RVector& p, const RVector& f,
                                                   Eigen::Index truncation);

/// Block-pattern test for a circulant built from a monotone spectrum:
/// singular iff the sorted spectrum is n/b consecutive constant blocks of a
/// common length b >= 2 dividing n. Reports the smallest such b. Input is
/// sorted (non-increasing) internally.
[[nodiscard]] BlockStructure circulant_singularity_classify(const RVector& p, double tol);

/// Maps a column-indexed rate vector (as returned by solve_circulant_rates)
/// to the real_weyl family indexing:
/// the rate attached to real_weyl(i) is v_{(d-i) mod d}. q_0 is unchanged.
[[nodiscard]] RVector rates_by_shift(const RVector& column_rates);

}  // namespace pqd
