#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "pqd/assignment.hpp"
#include "pqd/density_matrix.hpp"
#include "pqd/errors.hpp"
#include "pqd/linalg.hpp"
#include "pqd/rng.hpp"
#include "test_util.hpp"

using namespace pqd;
using pqd::testing::max_abs;

namespace {

RVector vec(std::initializer_list<double> xs) {
  RVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Dense oracle: P_{kj} = p_{(k-j) mod d} assembled entry by entry, solved
// by full-pivot LU.
RVector dense_solve(const RVector& p, const RVector& f) {
  const Eigen::Index d = p.size();
  RMatrix m(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index j = 0; j < d; ++j) m(k, j) = p((k - j + d) % d);
  return m.fullPivLu().solve(f);
}

RVector random_probabilities(std::mt19937_64& rng, Eigen::Index d) {
  std::exponential_distribution<double> e(1.0);
  RVector p(d);
  for (Eigen::Index i = 0; i < d; ++i) p(i) = e(rng);
  return p / p.sum();
}

}  // namespace

TEST(Philox, MatchesPublishedVectors) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  Philox4x32 a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Philox, UniformMeanAndVariance) {
  Philox4x32 g(1, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = g.uniform();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12, 2e-3);
}

TEST(Assignment, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    RMatrix w(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) w(r, c) = u(rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1;
    do {
      double s = 0;
      for (int r = 0; r < n; ++r) s += w(r, perm[static_cast<std::size_t>(r)]);
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = max_weight_assignment(w);
    double s = 0;
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < n; ++r) {
      s += w(r, got[static_cast<std::size_t>(r)]);
      ++seen[static_cast<std::size_t>(got[static_cast<std::size_t>(r)])];
    }
    EXPECT_NEAR(s, best, 1e-12);
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int k) { return k == 1; }));
  }
}

TEST(Assignment, IdentityPreferredOnTies) {
  const auto got = max_weight_assignment(RMatrix::Ones(3, 3));
  EXPECT_EQ(got, (std::vector<int>{0, 1, 2}));
}

TEST(DensityMatrix, RejectsInvalidStates) {
  CMatrix m = CMatrix::Identity(2, 2) * 0.5;
  EXPECT_NO_THROW(DensityMatrix{m});
  EXPECT_THROW(DensityMatrix{CMatrix::Identity(2, 2)}, ValidationError);  // trace 2
  CMatrix neg(2, 2);
  neg << 1.2, 0, 0, -0.2;
  EXPECT_THROW(DensityMatrix{neg}, ValidationError);
  CMatrix nonherm = m;
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{nonherm}, ValidationError);
  CMatrix nan = m;
  nan(0, 0) = std::nan("");
  EXPECT_THROW(DensityMatrix{nan}, ValidationError);
  EXPECT_THROW(DensityMatrix{CMatrix::Identity(2, 3)}, ValidationError);
}

TEST(Eigendecomposition, DiagonalInput) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 0.3;
  m(1, 1) = 0.7;
  const Spectrum s = hermitian_eigendecomposition(m);
  EXPECT_NEAR(s.eigenvalues(0), 0.7, 1e-15);
  EXPECT_NEAR(s.eigenvalues(1), 0.3, 1e-15);
  CMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_LE(max_abs(s.eigenvectors - swap), 1e-15);
}

TEST(Eigendecomposition, PlusStateAgainstTwoByTwoFormula) {
  CMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  const Spectrum s = hermitian_eigendecomposition(0.5 * (CMatrix::Identity(2, 2) + sx));
  EXPECT_NEAR(s.eigenvalues(0), 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 0.0, 1e-14);
  const double r = 1 / std::sqrt(2.0);
  CMatrix expect(2, 2);
  expect << r, r, r, -r;
  EXPECT_LE(max_abs(s.eigenvectors - expect), 1e-14);
}

TEST(Eigendecomposition, MaximallyMixedGivesIdentityFrame) {
  const Spectrum s = hermitian_eigendecomposition(0.5 * CMatrix::Identity(2, 2));
  EXPECT_NEAR(s.eigenvalues(0), 0.5, 1e-15);
  EXPECT_NEAR(s.eigenvalues(1), 0.5, 1e-15);
  EXPECT_LE(max_abs(s.eigenvectors - CMatrix::Identity(2, 2)), 1e-15);
}

TEST(Eigendecomposition, RandomReconstructsAndIsDeterministic) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 2 + trial % 5;
    const CMatrix h = pqd::testing::random_hermitian(rng, d);
    const Spectrum s = hermitian_eigendecomposition(h);
    EXPECT_LE(max_abs(s.reconstruct() - h), 1e-12);
    EXPECT_LE(max_abs(s.eigenvectors.adjoint() * s.eigenvectors - CMatrix::Identity(d, d)), 1e-12);
    for (Eigen::Index i = 1; i < d; ++i) EXPECT_GE(s.eigenvalues(i - 1), s.eigenvalues(i));
    for (Eigen::Index c = 0; c < d; ++c) {
      Eigen::Index k = 0;
      while (std::abs(s.eigenvectors(k, c)) <= 1e-12) ++k;
      EXPECT_NEAR(s.eigenvectors(k, c).imag(), 0.0, 1e-15);
      EXPECT_GT(s.eigenvectors(k, c).real(), 0.0);
    }
    const Spectrum again = hermitian_eigendecomposition(h);
    EXPECT_EQ(max_abs(again.eigenvectors - s.eigenvectors), 0.0);
  }
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW((void)hermitian_eigendecomposition(bad), ValidationError);
}

TEST(RealWeyl, SmallCases) {
  EXPECT_EQ(real_weyl(2, 0), CMatrix::Identity(2, 2));
  CMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  EXPECT_EQ(real_weyl(2, 1), sx);
  CMatrix w3 = CMatrix::Zero(3, 3);
  w3(0, 1) = w3(1, 2) = w3(2, 0) = 1.0;
  EXPECT_EQ(real_weyl(3, 1), w3);
  EXPECT_THROW((void)real_weyl(3, 3), ValidationError);
  EXPECT_THROW((void)real_weyl(3, -1), ValidationError);
}

TEST(RealWeyl, HilbertSchmidtOrthogonality) {
  for (int d = 1; d <= 16; ++d) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const Complex ip = (real_weyl(d, i).adjoint() * real_weyl(d, j)).trace();
        EXPECT_EQ(ip, Complex(i == j ? d : 0, 0)) << "d=" << d << " i=" << i << " j=" << j;
      }
    }
  }
}

TEST(RealWeyl, CyclicActionOnDiagonal) {
  std::mt19937_64 rng(5);
  for (int d = 1; d <= 16; ++d) {
    const RVector p = random_probabilities(rng, d);
    const CMatrix diag = p.cast<Complex>().asDiagonal();
    for (int i = 0; i < d; ++i) {
      const CMatrix u = real_weyl(d, i);
      const CMatrix conj = u * diag * u.adjoint();
      for (int k = 0; k < d; ++k) EXPECT_EQ(conj(k, k).real(), p((k + i) % d));
    }
  }
}

TEST(CirculantSolve, StationarySpectrum) {
  const auto r = solve_circulant_rates(vec({0.7, 0.3}), vec({0, 0}), RateConvention::Continuous);
  EXPECT_LE(max_abs(r.q), 1e-15);
  EXPECT_FALSE(r.singular);
}

TEST(CirculantSolve, TwoLevelDenseOracle) {
  const auto r = solve_circulant_rates(vec({0.7, 0.3}), vec({-0.1, 0.1}), RateConvention::Continuous);
  EXPECT_NEAR(r.q(0), 0.25, 1e-14);
  EXPECT_NEAR(r.q(1), 0.25, 1e-14);
  EXPECT_NEAR(r.condition_estimate, 1.0 / 0.4, 1e-12);
}

TEST(CirculantSolve, DegenerateQubitIsSingular) {
  for (auto conv : {RateConvention::Continuous, RateConvention::Channel}) {
    try {
      (void)solve_circulant_rates(vec({0.5, 0.5}), vec({-0.1, 0.1}), conv);
      FAIL() << "expected SingularSystem";
    } catch (const SingularSystem& e) {
      EXPECT_TRUE(e.block_structure().singular);
      EXPECT_EQ(e.block_structure().block_length, 2);
      EXPECT_EQ(e.block_structure().block_count, 1);
      EXPECT_EQ(e.block_structure().null_frequencies, std::vector<int>{1});
    }
  }
  const auto ls = solve_circulant_rates(vec({0.5, 0.5}), vec({-0.1, 0.1}), RateConvention::Continuous,
                                        SingularPolicy::LeastSquares);
  EXPECT_TRUE(ls.singular);
  EXPECT_TRUE(std::isinf(ls.condition_estimate));
  EXPECT_TRUE(ls.block_structure.has_value());
}

TEST(CirculantSolve, JcChannelConvention) {
  for (double s : {0.3, 1.0, 2.0}) {
    const double c2 = std::pow(std::cos(s / 2), 2), s2 = std::pow(std::sin(s / 2), 2);
    // Input spectrum of diag(1, 0); f is the change to (cos^2, sin^2).
    const auto r = solve_circulant_rates(vec({1, 0}), vec({c2 - 1, s2}), RateConvention::Channel);
    EXPECT_NEAR(r.q(0), c2, 1e-12);
    EXPECT_NEAR(r.q(1), s2, 1e-12);
  }
}

TEST(CirculantSolve, MatchesDenseSolve) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index d = 2 + trial % 7;
    const RVector p = random_probabilities(rng, d);
    RVector f(d);
    for (Eigen::Index i = 0; i < d; ++i) f(i) = g(rng);
    const bool channel = trial % 2;
    const auto r = solve_circulant_rates(p, f, channel ? RateConvention::Channel : RateConvention::Continuous);
    RVector v = dense_solve(p, f);
    RVector expect = v;
    expect(0) = channel ? v(0) + 1 : -v(0);
    const double scale = std::max(1.0, max_abs(v));
    EXPECT_LE(max_abs(r.q - expect), 1e-9 * scale) << "trial " << trial << " cond " << r.condition_estimate;
  }
}

TEST(CirculantSolve, ConservationDuality) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index d = 2 + trial % 7;
    const RVector p = random_probabilities(rng, d);
    RVector f(d);
    for (Eigen::Index i = 0; i < d; ++i) f(i) = g(rng);
    if (trial % 2 == 0) f.array() -= f.mean();
    const auto r = solve_circulant_rates(p, f, RateConvention::Continuous);
    const double signed_sum = -r.q(0) + r.q.tail(d - 1).sum();
    // Column sums of P are 1, so sum(f) = sum(v) exactly.
    EXPECT_NEAR(signed_sum, f.sum(), 1e-9 * std::max(1.0, max_abs(r.q)));
    EXPECT_EQ(std::abs(f.sum()) <= 1e-9, std::abs(signed_sum) <= 1e-9 * std::max(1.0, max_abs(r.q)));
  }
}

TEST(CirculantSolve, InputValidation) {
  EXPECT_THROW((void)solve_circulant_rates(vec({0.7, 0.3}), vec({0.1}), RateConvention::Continuous),
               ValidationError);
  EXPECT_THROW((void)solve_circulant_rates(vec({0.7, 0.4}), vec({0, 0}), RateConvention::Continuous),
               ValidationError);
  EXPECT_THROW((void)solve_circulant_rates(vec({1.2, -0.2}), vec({0, 0}), RateConvention::Continuous),
               ValidationError);
  EXPECT_THROW((void)solve_circulant_rates(vec({0.7, 0.3}), vec({std::nan(""), 0}), RateConvention::Continuous),
               ValidationError);
}

TEST(CirculantSolve, RatesByShiftAssignsColumnsToWeylIndex) {
  // A population transfer driven by real_weyl(i) alone must come back as q_i.
  std::mt19937_64 rng(29);
  for (int d = 2; d <= 6; ++d) {
    RVector p = random_probabilities(rng, d);
    std::sort(p.data(), p.data() + d, std::greater<>());
    for (int i = 1; i < d; ++i) {
      const CMatrix u = real_weyl(d, i);
      const CMatrix diag = p.cast<Complex>().asDiagonal();
      const RVector f = (u * diag * u.adjoint() - diag).diagonal().real() * 0.3;
      const RVector q = rates_by_shift(solve_circulant_rates(p, f, RateConvention::Continuous).q);
      for (int j = 1; j < d; ++j) EXPECT_NEAR(q(j), j == i ? 0.3 : 0.0, 1e-10) << d << " " << i << " " << j;
    }
  }
}

TEST(SingularityClassifier, PaperStyleExamples) {
  const auto six = circulant_singularity_classify(vec({0.3, 0.3, 0.15, 0.15, 0.05, 0.05}), 1e-12);
  EXPECT_TRUE(six.singular);
  EXPECT_EQ(six.block_length, 2);
  EXPECT_EQ(six.block_count, 3);
  EXPECT_EQ(six.null_frequencies, std::vector<int>{3});
  EXPECT_FALSE(circulant_singularity_classify(vec({0.5, 0.3, 0.2}), 1e-12).singular);
  const auto half = circulant_singularity_classify(vec({0.5, 0.5}), 1e-12);
  EXPECT_TRUE(half.singular);
  EXPECT_EQ(half.block_length, 2);
}

TEST(SingularityClassifier, AgreesWithRankOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  int singular_cases = 0, regular_cases = 0;
  for (int d = 2; d <= 12; ++d) {
    for (int b = 1; b <= d; ++b) {
      if (d % b != 0) continue;
      for (int rep = 0; rep < 20; ++rep) {
        for (int perturb = 0; perturb < 2; ++perturb) {
          std::vector<double> blocks(static_cast<std::size_t>(d / b));
          for (auto& x : blocks) x = u(rng);
          std::sort(blocks.begin(), blocks.end(), std::greater<>());
          RVector p(d);
          for (int k = 0; k < d; ++k) p(k) = blocks[static_cast<std::size_t>(k / b)];
          if (perturb) {
            for (int k = 0; k < d; ++k) p(k) += 1e-3 * (d - k);  // strictly decreasing, breaks blocks
          }
          p /= p.sum();
          const Eigen::JacobiSVD<RMatrix> svd(circulant_matrix(p));
          const auto& sv = svd.singularValues();
          const bool rank_deficient = sv(sv.size() - 1) <= 1e-10 * sv(0);
          const BlockStructure c = circulant_singularity_classify(p, 1e-12);
          EXPECT_EQ(c.singular, rank_deficient) << "d=" << d << " b=" << b << " perturb=" << perturb;
          (rank_deficient ? singular_cases : regular_cases)++;
        }
      }
    }
  }
  EXPECT_GT(singular_cases, 100);
  EXPECT_GT(regular_cases, 100);
}

TEST(ToeplitzSolve, IdentityMatrix) {
  const auto r = solve_toeplitz_rates(vec({1, 0, 0, 0}), vec({-0.2, 0.1, 0.1, 0}), 4);
  EXPECT_LE(max_abs(r.q - vec({0.2, 0.1, 0.1, 0})), 1e-15);
}

TEST(ToeplitzSolve, DenseTriangularOracle) {
  const RVector p = vec({0.5, 0.3, 0.2, 0});
  const RVector f = vec({-0.05, 0.05, 0, 0});
  const auto r = solve_toeplitz_rates(p, f, 4);
  RMatrix m = RMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = p(i - j);
  RVector v = r.q;
  v(0) = -r.q(0);
  EXPECT_LE(max_abs(RVector(m * v - f)), 1e-12);
  const RVector dense = m.triangularView<Eigen::Lower>().solve(f);
  EXPECT_LE(max_abs(RVector(v - dense)), 1e-12);
}

TEST(ToeplitzSolve, StationaryAndErrors) {
  EXPECT_LE(max_abs(solve_toeplitz_rates(vec({0.6, 0.4, 0, 0}), RVector::Zero(4), 4).q), 0.0);
  try {
    (void)solve_toeplitz_rates(vec({0, 0.6, 0.4}), vec({0, 0, 0}), 3);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("reorder"), std::string::npos);
  }
  EXPECT_THROW((void)solve_toeplitz_rates(vec({1, 0}), vec({0, 0}), 3), ValidationError);
}

TEST(ToeplitzSolve, TruncatedConservation) {
  // sum_i f_i = sum_j c_j v_j with c_j = p_0 + ... + p_{N-1-j}: exact for any
  // truncation. When p has support K and v vanishes beyond N-K, every c_j on
  // the support is 1 and sum f = 0 forces sum v = 0.
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 2 + trial % 63;
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    RVector p = RVector::Zero(n);
    RVector head = random_probabilities(rng, k);
    std::sort(head.data(), head.data() + k, std::greater<>());
    p.head(k) = head;
    RVector f(n);
    for (Eigen::Index i = 0; i < n; ++i) f(i) = g(rng);
    f.array() -= f.mean();
    const auto r = solve_toeplitz_rates(p, f, n);
    RVector v = r.q;
    v(0) = -r.q(0);
    double weighted = 0;
    for (Eigen::Index j = 0; j < n; ++j) weighted += p.head(n - j).sum() * v(j);
    EXPECT_NEAR(weighted, f.sum(), 1e-9 * std::max(1.0, max_abs(v)));

    RVector w = RVector::Zero(n);
    const Eigen::Index support = n - k + 1;
    for (Eigen::Index i = 0; i < support; ++i) w(i) = g(rng);
    w.array() -= w.head(support).mean();
    w.tail(n - support).setZero();
    RMatrix m = RMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) m(i, j) = p(i - j);
    const RVector fc = m * w;
    ASSERT_NEAR(fc.sum(), 0.0, 1e-12);
    const auto rc = solve_toeplitz_rates(p, fc, n);
    EXPECT_NEAR(-rc.q(0) + rc.q.tail(n - 1).sum(), 0.0, 1e-9);
  }
}
