#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sw/errors.hpp"
#include "sw/linalg.hpp"
#include "sw/stats.hpp"
#include "sw/whitening.hpp"

namespace {

using sw::Matrix;
using sw::SymMatrix;

SymMatrix<double> random_spd(std::size_t n, double cond, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(n);
  for (auto& v : values) v = std::pow(cond, u(rng));
  values[0] = 1.0;
  values[n - 1] = cond;
  return SymMatrix<double>(sw::oracle::from_dense(sw::oracle::random_spd(n, values, rng).matrix));
}

double defining_equation_error(const Matrix<double>& m, const SymMatrix<double>& a) {
  auto mam = sw::matmul(sw::matmul(m, a.matrix()), m);
  mam -= Matrix<double>::identity(a.dim());
  return sw::frobenius_norm(mam);
}

double rel_error(const Matrix<double>& a, const Matrix<double>& b) {
  return sw::frobenius_norm(a - b) / sw::frobenius_norm(b);
}

TEST(Zca, IdentityAndDiagonal) {
  EXPECT_EQ(sw::zca_inverse_sqrt(SymMatrix<double>::identity(4)).inv_sqrt.matrix(), Matrix<double>::identity(4));
  const auto d = sw::zca_inverse_sqrt(SymMatrix<double>{{4, 0}, {0, 1}}).inv_sqrt;
  EXPECT_DOUBLE_EQ(d(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(d(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(d(0, 1), 0.0);
}

TEST(Zca, DefiningEquationAndSymmetry) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = random_spd(12, 50.0, seed);
    const auto z = sw::zca_inverse_sqrt(a);
    EXPECT_LE(defining_equation_error(z.inv_sqrt.matrix(), a), 1e-9);
    EXPECT_EQ(z.inv_sqrt.matrix(), z.inv_sqrt.matrix().transpose());
    EXPECT_GT(sw::sym_eig(z.inv_sqrt).values.back(), 0.0);
    // Commutes with sigma.
    const auto ma = sw::matmul(z.inv_sqrt.matrix(), a.matrix());
    const auto am = sw::matmul(a.matrix(), z.inv_sqrt.matrix());
    EXPECT_LE(sw::frobenius_norm(ma - am), 1e-8 * sw::frobenius_norm(ma));
  }
}

TEST(Zca, MatchesConstructedInverseSqrt) {
  std::mt19937_64 rng(5);
  const auto spd = sw::oracle::random_spd(6, {9, 4, 2, 1, 0.5, 0.25}, rng);
  const auto z = sw::zca_inverse_sqrt(SymMatrix<double>(sw::oracle::from_dense(spd.matrix)));
  EXPECT_LE(rel_error(z.inv_sqrt.matrix(), sw::oracle::from_dense(spd.inverse_sqrt)), 1e-10);
}

TEST(Zca, ScaleEquivariance) {
  const auto a = random_spd(8, 20.0, 3);
  const double c = 7.5;
  auto scaled = a.matrix();
  scaled *= c;
  const auto lhs = sw::zca_inverse_sqrt(SymMatrix<double>(scaled)).inv_sqrt.matrix();
  auto rhs = sw::zca_inverse_sqrt(a).inv_sqrt.matrix();
  rhs *= 1.0 / std::sqrt(c);
  EXPECT_LE(sw::frobenius_norm(lhs - rhs), 1e-9);
}

TEST(Zca, RejectsIndefinite) {
  EXPECT_THROW(sw::zca_inverse_sqrt(SymMatrix<double>{{1, 0}, {0, -1e-3}}), sw::NumericalFailure);
}

TEST(Newton, IdentityIsFixedPoint) {
  for (const int t : {1, 3, 5}) {
    const auto r = sw::newton_inverse_sqrt(SymMatrix<double>::identity(1), t);
    EXPECT_NEAR(r.inv_sqrt(0, 0), 1.0, 1e-12);
  }
  const auto r4 = sw::newton_inverse_sqrt(SymMatrix<double>::identity(4), 5);
  EXPECT_DOUBLE_EQ(r4.stack.trace_value, 4.0);
  EXPECT_DOUBLE_EQ(r4.stack.sigma_n(0, 0), 0.25);
  EXPECT_EQ(r4.stack.iterates.size(), 6u);
  EXPECT_EQ(r4.stack.iterates[0], Matrix<double>::identity(4));
}

TEST(Newton, IdentityConvergesWithEnoughIterations) {
  const auto r = sw::newton_inverse_sqrt(SymMatrix<double>::identity(4), 12);
  EXPECT_LE(defining_equation_error(r.inv_sqrt.matrix(), SymMatrix<double>::identity(4)), 1e-9);
}

TEST(Newton, FollowsRecurrence) {
  const auto a = random_spd(5, 10.0, 8);
  const auto r = sw::newton_inverse_sqrt(a, 3);
  const auto& s = r.stack;
  EXPECT_NEAR(s.trace_value, sw::trace(a.matrix()), 1e-12);
  for (std::size_t k = 1; k < s.iterates.size(); ++k) {
    const auto& p = s.iterates[k - 1];
    auto expected = p;
    expected *= 1.5;
    auto cube = sw::matmul(sw::matmul(sw::matmul(p, p), p), s.sigma_n.matrix());
    cube *= 0.5;
    expected -= cube;
    EXPECT_LE(sw::frobenius_norm(expected - s.iterates[k]), 1e-12);
  }
  auto final_scaled = s.iterates.back();
  final_scaled *= 1.0 / std::sqrt(s.trace_value);
  EXPECT_LE(sw::frobenius_norm(sw::symmetric_part(final_scaled) - r.inv_sqrt.matrix()), 1e-14);
}

TEST(Newton, DiagonalCaseAgreesWithZca) {
  const SymMatrix<double> a{{4, 0}, {0, 1}};
  const auto n = sw::newton_inverse_sqrt(a, 5).inv_sqrt.matrix();
  const auto z = sw::zca_inverse_sqrt(a).inv_sqrt.matrix();
  EXPECT_LE(rel_error(n, z), 1e-3);
}

TEST(Newton, ErrorMonotoneInIterations) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = random_spd(16, 100.0, seed);
    const auto z = sw::zca_inverse_sqrt(a).inv_sqrt.matrix();
    double prev = INFINITY;
    for (int t = 1; t <= 8; ++t) {
      const double e = rel_error(sw::newton_inverse_sqrt(a, t).inv_sqrt.matrix(), z);
      EXPECT_LE(e, prev) << "seed " << seed << " t " << t;
      prev = e;
    }
  }
}

TEST(Newton, DivergenceDetected) {
  // A negative eigenvalue drives the iterates away from any fixed point.
  EXPECT_THROW(sw::newton_inverse_sqrt(SymMatrix<double>{{1, 0}, {0, -0.9}}, 60), sw::NumericalFailure);
  EXPECT_THROW(sw::newton_inverse_sqrt(SymMatrix<double>::identity(2), 0), sw::ConfigError);
}

TEST(WhitenApply, IdentityPassThrough) {
  const Matrix<double> x{{1, 2, 3}, {4, 5, 6}};
  const std::vector<double> zero(2, 0.0);
  EXPECT_EQ(sw::whiten_apply(x, std::span<const double>(zero), SymMatrix<double>::identity(2)), x);
}

TEST(WhitenApply, OwnInstanceStatsGiveShrunkIdentity) {
  const auto t = sw::oracle::random_tensor(sw::Shape4{1, 4, 5, 5}, 21, 3.0);
  const auto x = t.sample_block(0, 0, 4);
  const double eps = 1e-5;
  const auto m = sw::instance_moments(x, eps);
  const auto z = sw::zca_inverse_sqrt(m.cov);
  const auto y = sw::whiten_apply(x, std::span<const double>(m.mean), z.inv_sqrt);
  const auto ycov = sw::batch_moments(y, 1e-300).cov;
  // Eigenvalues of the output covariance are sigma_i / (sigma_i + eps).
  const auto out = sw::sym_eig(ycov).values;
  const auto sig = sw::sym_eig(m.cov).values;
  for (std::size_t i = 0; i < 4; ++i) {
    const double s = sig[3 - i] - eps;
    EXPECT_NEAR(out[3 - i], s / (s + eps), 1e-6);
  }
}

TEST(WhitenApply, BatchStatsWhitenConcatenation) {
  const auto t = sw::oracle::random_tensor(sw::Shape4{6, 3, 4, 4}, 22, 2.0);
  const auto x = sw::batch_matrix(t);
  const auto m = sw::batch_moments(x, 1e-5);
  const auto y = sw::whiten_apply(x, std::span<const double>(m.mean), sw::zca_inverse_sqrt(m.cov).inv_sqrt);
  const auto c = sw::batch_moments(y, 1e-300).cov;
  auto diff = c.matrix();
  diff -= Matrix<double>::identity(3);
  EXPECT_LE(sw::frobenius_norm(diff), 1e-4);
}

TEST(WhitenApply, ShapeMismatch) {
  const std::vector<double> mean(3, 0.0);
  EXPECT_THROW(sw::whiten_apply(Matrix<double>(2, 4), std::span<const double>(mean), SymMatrix<double>::identity(2)),
               sw::ShapeError);
}

TEST(Paths, Parse) {
  EXPECT_EQ(sw::parse_path("eigen").kind, sw::WhiteningPath::Kind::Eigen);
  EXPECT_EQ(sw::parse_path("newton", 7).iterations, 7);
  EXPECT_THROW(sw::parse_path("cholesky"), sw::ConfigError);
}

}  // namespace
