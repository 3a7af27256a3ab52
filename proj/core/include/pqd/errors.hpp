#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pqd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input failed a structural check (dimensions, Hermiticity, trace, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Singularity pattern of a circulant rate matrix.
struct BlockStructure {
  bool singular = false;
  /// Common length of the constant blocks of the sorted spectrum, 0 when the
  /// arrangement is singular without a block pattern (unsorted input).
  int block_length = 0;
  int block_count = 0;
  /// DFT frequencies at which the circulant symbol vanishes.
  std::vector<int> null_frequencies;

  [[nodiscard]] std::string describe() const;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, BlockStructure blocks)
      : Error(what), blocks_(std::move(blocks)) {}
  [[nodiscard]] const BlockStructure& block_structure() const noexcept { return blocks_; }

 private:
  BlockStructure blocks_;
};

class SingularChannel : public Error {
 public:
  SingularChannel(const std::string& what, BlockStructure blocks)
      : Error(what), blocks_(std::move(blocks)) {}
  [[nodiscard]] const BlockStructure& block_structure() const noexcept { return blocks_; }

 private:
  BlockStructure blocks_;
};

/// Eigenvectors moved too far between consecutive samples to be matched.
class TrajectoryTooCoarse : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

/// A rate is negative, so the stochastic scheme has no probabilistic reading.
class NegativeRate : public Error {
 public:
  using Error::Error;
};

class RefusesToSimulate : public Error {
 public:
  RefusesToSimulate(const std::string& what, double begin, double end)
      : Error(what), begin_(begin), end_(end) {}
  [[nodiscard]] double begin() const noexcept { return begin_; }
  [[nodiscard]] double end() const noexcept { return end_; }

 private:
  double begin_;
  double end_;
};

}  // namespace pqd
