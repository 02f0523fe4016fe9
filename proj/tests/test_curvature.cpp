#include "t2inv/builtin.hpp"
#include "t2inv/curvature.hpp"
#include "t2inv/diagonal.hpp"
#include "t2inv/verifier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace t2inv;

namespace {

/// sup |Ric - lambda g| over nodes at least a quarter of each side from the boundary
double einstein_defect(const MetricModel& m, int n, double lambda) {
  const InvariantMetricData d = sample(m, n);
  const Field<Mat4> G = full_metric_field(d);
  const SamplingMargin margin;
  double e = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!margin.keep(d.grid, i, j)) continue;
      e = std::max(e, (ricci_from_coordinates(G, i, j).ricci - lambda * G(i, j)).cwiseAbs().maxCoeff());
    }
  return e;
}

}  // namespace

TEST(Engine, RoundS4IsEinsteinThree) {
  const double e1 = einstein_defect(round_s4_model(), 33, 3.0);
  const double e2 = einstein_defect(round_s4_model(), 65, 3.0);
  const double h2 = kPi / 64;
  EXPECT_LT(e2, 50 * h2 * h2);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Engine, ProductSpheresIsEinsteinOne) {
  const double e1 = einstein_defect(product_spheres_model(), 33, 1.0);
  const double e2 = einstein_defect(product_spheres_model(), 65, 1.0);
  const double h2 = kPi / 64;
  EXPECT_LT(e2, 50 * h2 * h2);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Engine, FlatConstantDataHasNoCurvature) {
  const Grid g = Grid::make(Topology::periodic, 8, 8, 0, 0, 1, 1);
  Mat4 G0;
  G0 << 2, 0.3, 0.1, 0,
        0.3, 1, 0, 0.2,
        0.1, 0, 3, 0.5,
        0, 0.2, 0.5, 1.5;
  const Field<Mat4> G(g, G0);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) {
      const CurvatureSample s = ricci_from_coordinates(G, i, j);
      EXPECT_LT(s.ricci.cwiseAbs().maxCoeff(), 1e-13);
      double rm = 0.0;
      for (double v : s.riemann) rm = std::max(rm, std::abs(v));
      EXPECT_LT(rm, 1e-13);
      EXPECT_NEAR(s.scalar, 0.0, 1e-13);
    }
}

TEST(Engine, AlgebraicSymmetries) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const InvariantMetricData d = sample(periodic_random_model(seed, 0.3), 24);
    const Field<Mat4> G = full_metric_field(d);
    for (int j = 0; j < 24; j += 3)
      for (int i = 0; i < 24; i += 3) {
        const CurvatureSample s = ricci_from_coordinates(G, i, j);
        double scale = 1.0;
        for (double v : s.riemann) scale = std::max(scale, std::abs(v));
        EXPECT_LT(s.symmetry_defect(), 1e-12 * scale);
        // first Bianchi identity
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
              for (int e = 0; e < 4; ++e)
                EXPECT_NEAR(s.R(a, b, c, e) + s.R(a, c, e, b) + s.R(a, e, b, c), 0.0, 1e-12 * scale);
      }
  }
}

TEST(Engine, SampledAndAnalyticPathsAgree) {
  const MetricModel m = periodic_random_model(11, 0.2);
  const int n = 64;
  const InvariantMetricData d = sample(m, n);
  const Field<Mat4> G = full_metric_field(d);
  for (int k = 0; k < 8; ++k) {
    const int i = 5 + 7 * k, j = 3 + 5 * k;
    const CurvatureSample a = ricci_from_coordinates(G, i, j);
    const CurvatureSample b = ricci_from_model(m, d.grid.x(i), d.grid.y(j), d.grid.hx);
    EXPECT_LT((a.ricci - b.ricci).cwiseAbs().maxCoeff(), 1e-10);
    const CurvatureSample c = ricci_from_coordinates(d, i, j);
    EXPECT_LT((a.ricci - c.ricci).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// ---------------------------------------------------------------------------
// diagonal tables

TEST(DiagonalCurvature, RoundS4AllSectionalCurvaturesOne) {
  for (int n : {33, 65}) {
    const DiagonalCurvature dc = diagonal_curvature(sample_diagonal(round_s4_model(), n, n));
    const SamplingMargin margin;
    const double h = kPi / (n - 1);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (!margin.keep(dc.grid, i, j)) continue;
        EXPECT_NEAR(dc.s(i, j), 1.0, 50 * h * h);
        EXPECT_NEAR(dc.p(i, j), 1.0, 50 * h * h);
        EXPECT_LT((dc.A(i, j) - Mat2::Identity()).cwiseAbs().maxCoeff(), 50 * h * h);
        EXPECT_LT((dc.B(i, j) - Mat2::Identity()).cwiseAbs().maxCoeff(), 50 * h * h);
      }
  }
}

TEST(DiagonalCurvature, ProductSpheresOrthogonalGradients) {
  const DiagonalCurvature dc = diagonal_curvature(sample_diagonal(product_spheres_model(), 33, 33));
  for (int j = 1; j < 32; ++j)
    for (int i = 1; i < 32; ++i) {
      EXPECT_NEAR(dc.p(i, j), 0.0, 1e-12);
      EXPECT_NEAR(dc.s(i, j), 0.0, 1e-12);
    }
}

TEST(DiagonalCurvature, FlatWarpsGiveZero) {
  const Grid g = Grid::make(Topology::periodic, 8, 8, 0, 0, 1, 1);
  const DiagonalMetricData d{OrbitSpace::periodic_torus(1, 1), g,
                             QuotientMetricSpec::gauge(ScalarField(g, 1.0)), ScalarField(g, 2.0),
                             ScalarField(g, 0.5)};
  const DiagonalCurvature dc = diagonal_curvature(d);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(dc.s.values[k], 0.0, 1e-14);
    EXPECT_NEAR(dc.p.values[k], 0.0, 1e-14);
    EXPECT_LT(dc.A.values[k].cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(dc.B.values[k].cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(CurvatureOperator, RoundS4IsIdentity) {
  const OperatorBlocks b = curvature_operator_blocks(1, 1, Mat2::Identity(), Mat2::Identity());
  EXPECT_EQ(b.plus, Mat3::Identity());
  EXPECT_EQ(b.minus, Mat3::Identity());
}

TEST(CurvatureOperator, SplitWarpHessians) {
  Mat2 A = Mat2::Zero(), B = Mat2::Zero();
  A(0, 0) = 1;
  B(1, 1) = 1;
  const OperatorBlocks b = curvature_operator_blocks(0, 0, A, B);
  Mat3 want = Mat3::Zero();
  want(1, 1) = 1;
  EXPECT_EQ(b.plus, want);
  EXPECT_EQ(b.plus, b.plus.transpose());
  EXPECT_EQ(b.minus, b.minus.transpose());
}

TEST(CurvatureOperator, ZeroInputs) {
  const OperatorBlocks b = curvature_operator_blocks(0, 0, Mat2::Zero(), Mat2::Zero());
  EXPECT_EQ(b.plus, Mat3::Zero());
  EXPECT_EQ(b.minus, Mat3::Zero());
}

TEST(CurvatureOperator, EmbedsIntoSixBySix) {
  Mat2 A, B;
  A << 0.3, 0.1, 0.1, -0.2;
  B << 0.5, -0.4, -0.4, 0.7;
  const Mat6 M = curvature_operator_matrix(0.9, 0.2, A, B);
  const OperatorBlocks b = curvature_operator_blocks(0.9, 0.2, A, B);
  EXPECT_EQ(Mat3(M.topLeftCorner(3, 3)), b.plus);
  EXPECT_EQ(Mat3(M.bottomRightCorner(3, 3)), b.minus);
  EXPECT_EQ(M, M.transpose());
  EXPECT_DOUBLE_EQ(b.plus(1, 2), 0.5 * (A(0, 1) - B(0, 1)));
  EXPECT_DOUBLE_EQ(b.plus(0, 0), 0.5 * (0.9 + 0.2));
}

namespace {

DiagonalMetricData generic_diagonal(int n) {
  const Grid g = Grid::make(Topology::periodic, n, n, 0, 0, 2 * kPi, 2 * kPi);
  const ScalarField mu = ScalarField::sample(g, [](double x, double y) { return 1.0 + 0.2 * std::sin(x) * std::cos(y); });
  const ScalarField a = ScalarField::sample(g, [](double x, double y) { return 1.3 + 0.25 * std::sin(x) * std::cos(2 * y); });
  const ScalarField b = ScalarField::sample(g, [](double x, double y) { return 1.1 + 0.2 * std::cos(x + y); });
  return {OrbitSpace::periodic_torus(2 * kPi, 2 * kPi), g, QuotientMetricSpec::gauge(mu), a, b};
}

}  // namespace

TEST(DiagonalCurvature, TablePredictsEngineRiemann) {
  const DiagonalMetricData d = generic_diagonal(128);
  const InvariantMetricData full = d.to_invariant();
  const DiagonalCurvature dc = diagonal_curvature(d);
  const double h = d.grid.hx;
  for (int k = 0; k < 6; ++k) {
    const int i = 7 + 19 * k, j = 3 + 21 * k;
    const CurvatureSample s = ricci_from_coordinates(full, i, j);
    DiagonalCurvaturePoint c;
    c.s = dc.s(i, j);
    c.p = dc.p(i, j);
    c.A = dc.A(i, j);
    c.B = dc.B(i, j);
    c.frame = orthonormal_frame(d.gsigma.g(i, j));
    const auto R = frame_riemann(s, c.frame);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int e = 0; e < 4; ++e)
          for (int f = 0; f < 4; ++f)
            EXPECT_NEAR(R[((a * 4 + b) * 4 + e) * 4 + f], diagonal_riemann_entry(c, a, b, e, f), 20 * h * h)
                << a << b << e << f;
    // same spectrum from the engine and from the table
    const Mat6 M1 = curvature_operator_from_sample(s, c.frame);
    const Mat6 M2 = curvature_operator_matrix(c.s, c.p, c.A, c.B);
    const auto e1 = Eigen::SelfAdjointEigenSolver<Mat6>(0.5 * (M1 + M1.transpose())).eigenvalues();
    const auto e2 = Eigen::SelfAdjointEigenSolver<Mat6>(M2).eigenvalues();
    EXPECT_LT((e1 - e2).cwiseAbs().maxCoeff(), 20 * h * h);
    EXPECT_LT((M1 - M2).cwiseAbs().maxCoeff(), 20 * h * h);
  }
}

TEST(CurvatureOperator, ClosedFormMatchesBivectorContraction) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    DiagonalCurvaturePoint c;
    c.s = nd(rng);
    c.p = nd(rng);
    c.A << nd(rng), 0, 0, nd(rng);
    c.A(0, 1) = c.A(1, 0) = nd(rng);
    c.B << nd(rng), 0, 0, nd(rng);
    c.B(0, 1) = c.B(1, 0) = nd(rng);
    CurvatureSample s;
    s.metric = Mat4::Identity();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int e = 0; e < 4; ++e)
          for (int f = 0; f < 4; ++f) s.riemann[((a * 4 + b) * 4 + e) * 4 + f] = diagonal_riemann_entry(c, a, b, e, f);
    const Mat6 M = curvature_operator_from_sample(s, Mat2::Identity());
    EXPECT_LT((M - curvature_operator_matrix(c.s, c.p, c.A, c.B)).cwiseAbs().maxCoeff(), 1e-14);
  }
}
