#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pqd/channel.hpp"
#include "pqd/decomposition.hpp"
#include "pqd/models.hpp"
#include "pqd/montecarlo.hpp"

namespace pqd::cli {

// File formats. Matrices are JSON arrays of rows, each entry an [re, im]
// pair; every real is written with 17 significant digits so files read back
// bit-exactly. Time series are CSV with ',' separators.

/// "%.17g"; non-finite values become inf, -inf or nan.
[[nodiscard]] std::string format_real(double x);

[[nodiscard]] std::string matrix_json(const CMatrix& m);

/// {"dim": d, "matrix": [...]} validated as a density matrix.
[[nodiscard]] DensityMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const CMatrix& m);

/// {"dim": d, "times": [...], "rho": [matrix, ...]}.
[[nodiscard]] std::vector<TrajectorySample> read_trajectory_file(const std::filesystem::path& path);
void write_trajectory_file(const std::filesystem::path& path, std::span<const TrajectorySample> samples);

struct LindbladModelFile {
  LindbladSpec spec;
  DensityMatrix rho0;
};

/// {"dim": d, "hamiltonian": matrix, "jump_ops": [{"operator": matrix,
/// "rate": r}, ...], "rho0": matrix}.
[[nodiscard]] LindbladModelFile read_lindblad_file(const std::filesystem::path& path);

/// time, q_0..q_{d-1}, negative_flag, singular_flag, condition_estimate.
void write_rate_report(std::ostream& os, const DecompositionSeries& dec);
void write_hamiltonians(std::ostream& os, const DecompositionSeries& dec);
void write_flags(std::ostream& os, const DecompositionSeries& dec);
void write_ensemble(std::ostream& os, const EnsembleResult& result);
void write_channel(std::ostream& os, const ChannelDecomposition& dec, const KrausLikeForm* kraus);

}  // namespace pqd::cli
