#include "pqd/channel.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pqd/assignment.hpp"

namespace pqd {

const char* to_string(ChannelClass c) {
  switch (c) {
    case ChannelClass::MixedUnitary: return "mixed_unitary";
    case ChannelClass::QuasiProbability: return "quasi_probability";
    case ChannelClass::Singular: return "singular";
  }
  return "unknown";
}

double KrausLikeForm::completeness_residual() const {
  if (terms.empty()) return std::numeric_limits<double>::infinity();
  const Eigen::Index d = terms.front().k.rows();
  CMatrix acc = CMatrix::Zero(d, d);
  for (const auto& t : terms) acc += t.k * t.k_bar;
  return (acc - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

ChannelDecomposition decompose_channel(const DensityMatrix& rho_in, const DensityMatrix& rho_out,
                                       const Tolerances& tol) {
  const Eigen::Index d = rho_in.dim();
  if (rho_out.dim() != d) {
    std::ostringstream os;
    os << "channel: input is " << d << "-dimensional, output " << rho_out.dim() << "-dimensional";
    throw ValidationError(os.str());
  }
  const Spectrum in = hermitian_eigendecomposition(rho_in.matrix(), tol);
  const Spectrum out = hermitian_eigendecomposition(rho_out.matrix(), tol);

  const std::vector<int> match =
      max_weight_assignment((in.eigenvectors.adjoint() * out.eigenvectors).cwiseAbs2());
  CMatrix paired(d, d);
  RVector p_out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto j = static_cast<Eigen::Index>(match[static_cast<std::size_t>(i)]);
    paired.col(i) = out.eigenvectors.col(j);
    p_out(i) = out.eigenvalues(j);
    const Complex o = in.eigenvectors.col(i).dot(paired.col(i));
    if (std::abs(o) > 1e-12) paired.col(i) *= std::conj(o) / std::abs(o);
  }
  const RVector f = p_out - in.eigenvalues;

  RateSolveResult solved;
  try {
    solved = solve_circulant_rates(in.eigenvalues, f, RateConvention::Channel, SingularPolicy::Throw, tol);
  } catch (const SingularSystem& e) {
    throw SingularChannel("channel input spectrum gives a " + e.block_structure().describe() +
                              " rate matrix and the output cannot be reached from it",
                          e.block_structure());
  }

  ChannelDecomposition dec;
  dec.probabilities = rates_by_shift(solved.q);
  dec.probabilities(0) = 1.0 - dec.probabilities.tail(d - 1).sum();
  dec.connecting_unitary = paired * in.eigenvectors.adjoint();
  dec.input_frame = in;
  dec.output_eigenvalues = p_out;
  dec.condition_estimate = solved.condition_estimate;
  dec.block_structure = solved.block_structure;
  dec.unitaries.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < static_cast<int>(d); ++i) {
    dec.unitaries.push_back(paired * real_weyl(static_cast<int>(d), i) * in.eigenvectors.adjoint());
  }

  if (solved.singular) {
    dec.classification = ChannelClass::Singular;
  } else {
    const bool in_range = (dec.probabilities.array() >= -tol.mixed_unitary).all() &&
                          (dec.probabilities.array() <= 1.0 + tol.mixed_unitary).all();
    dec.classification = in_range ? ChannelClass::MixedUnitary : ChannelClass::QuasiProbability;
  }

  dec.reconstruction_residual =
      (apply_decomposition(dec, rho_in.matrix()) - rho_out.matrix()).cwiseAbs().maxCoeff();
  if (dec.reconstruction_residual > tol.channel_residual) {
    std::ostringstream os;
    os << "channel decomposition failed to reconstruct the output (residual "
       << dec.reconstruction_residual << ")";
    throw std::logic_error(os.str());
  }
  return dec;
}

KrausLikeForm to_kraus_like(const ChannelDecomposition& dec) {
  if (dec.classification == ChannelClass::Singular) {
    throw ValidationError("Kraus-like form undefined for a singular channel decomposition");
  }
  KrausLikeForm form;
  for (Eigen::Index i = 0; i < dec.probabilities.size(); ++i) {
    const double q = dec.probabilities(i);
    if (std::abs(q) <= 1e-14) continue;
    KrausLikeTerm term;
    term.index = static_cast<int>(i);
    term.sign = q < 0.0 ? -1 : 1;
    term.k = std::sqrt(std::abs(q)) * dec.unitaries[static_cast<std::size_t>(i)];
    term.k_bar = static_cast<double>(term.sign) * term.k.adjoint();
    form.terms.push_back(std::move(term));
  }
  return form;
}

CMatrix apply_decomposition(const ChannelDecomposition& dec, const CMatrix& rho) {
  const Eigen::Index d = dec.probabilities.size();
  if (rho.rows() != d || rho.cols() != d) throw ValidationError("apply_decomposition: dimension mismatch");
  CMatrix out = CMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const CMatrix& u = dec.unitaries[static_cast<std::size_t>(i)];
    out += dec.probabilities(i) * (u * rho * u.adjoint());
  }
  return out;
}

}  // namespace pqd
