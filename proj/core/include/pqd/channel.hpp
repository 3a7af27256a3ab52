#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pqd/density_matrix.hpp"
#include "pqd/linalg.hpp"

namespace pqd {

enum class ChannelClass { MixedUnitary, QuasiProbability, Singular };

[[nodiscard]] const char* to_string(ChannelClass c);

/// rho_out = sum_i q_i U~_i rho_in U~_i^dagger with U~_i = V U u_i U^dagger,
/// where U diagonalises rho_in and V = sum_i |psi_i(out)><psi_i(in)|.
struct ChannelDecomposition {
  RVector probabilities;  ///< real_weyl-indexed, q_0 = 1 - sum_{i>=1} q_i
  std::vector<CMatrix> unitaries;
  ChannelClass classification = ChannelClass::MixedUnitary;
  CMatrix connecting_unitary;
  Spectrum input_frame;
  RVector output_eigenvalues;  ///< paired with input_frame columns
  double reconstruction_residual = 0.0;
  double condition_estimate = 1.0;
  std::optional<BlockStructure> block_structure;
  /// Rule used to pair output with input eigenvectors.
  std::string pairing = "max-overlap";
};

struct KrausLikeTerm {
  int index = 0;  ///< position in the real_weyl family
  int sign = 1;   ///< K_bar = sign * K^dagger
  CMatrix k;
  CMatrix k_bar;
};

struct KrausLikeForm {
  std::vector<KrausLikeTerm> terms;
  /// max-entry |sum K K_bar - 1|.
  [[nodiscard]] double completeness_residual() const;
};

/// Throws SingularChannel when the input circulant is singular and the
/// eigenvalue change is outside its range. A singular but consistent pair
/// is returned with classification Singular (minimum-norm probabilities).
[[nodiscard]] ChannelDecomposition decompose_channel(const DensityMatrix& rho_in,
                                                     const DensityMatrix& rho_out,
                                                     const Tolerances& tol = {});

/// K_i = sqrt(|q_i|) U~_i; terms with q_i == 0 (to 1e-14) are dropped.
/// Throws ValidationError for Singular decompositions.
[[nodiscard]] KrausLikeForm to_kraus_like(const ChannelDecomposition& decomposition);

/// sum_i q_i U~_i rho U~_i^dagger for any rho of matching dimension.
[[nodiscard]] CMatrix apply_decomposition(const ChannelDecomposition& decomposition,
                                          const CMatrix& rho);

}  // namespace pqd
