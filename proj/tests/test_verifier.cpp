#include "t2inv/builtin.hpp"
#include "t2inv/verifier.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace t2inv;

TEST(EinsteinResidual, RoundS4ConvergesSecondOrder) {
  const EinsteinReport r1 = einstein_residual(sample(round_s4_model(), 65), 3.0);
  const EinsteinReport r2 = einstein_residual(sample(round_s4_model(), 129), 3.0);
  EXPECT_TRUE(r1.einstein);
  EXPECT_TRUE(r2.einstein);
  EXPECT_EQ(r2.verdict(), "einstein");
  EXPECT_GT(r1.residual / r2.residual, 3.5);
  EXPECT_LT(r1.residual / r2.residual, 4.5);
  EXPECT_NEAR(r2.lambda_estimate, 3.0, 1e-3);
  EXPECT_LE(r2.mixed, 1e-10);
  EXPECT_DOUBLE_EQ(r2.tolerance, 50 * r2.h * r2.h);
  EXPECT_FALSE(r2.det.has_value());
  const EinsteinReport r3 = einstein_residual(sample(round_s4_model(), 257), 3.0);
  EXPECT_LT(r3.residual, 1e-3);
}

TEST(EinsteinResidual, ProductSpheres) {
  const EinsteinReport r = einstein_residual(sample(product_spheres_model(), 129), 1.0);
  EXPECT_TRUE(r.einstein);
  EXPECT_LT(r.residual, 1e-3);
  EXPECT_NEAR(r.lambda_estimate, 1.0, 1e-3);
}

TEST(EinsteinResidual, FieldMatchesTheSup) {
  const EinsteinReport r = einstein_residual(sample(round_s4_model(), 33), 3.0);
  double sup = 0.0;
  std::size_t cnt = 0;
  for (double v : r.field.values)
    if (!std::isnan(v)) {
      sup = std::max(sup, v);
      ++cnt;
    }
  EXPECT_EQ(cnt, r.nodes);
  EXPECT_EQ(sup, r.residual);
  EXPECT_EQ(r.field(r.worst_i, r.worst_j), r.residual);
  EXPECT_TRUE(std::isnan(r.field(0, 0)));
}

TEST(EinsteinResidual, SquareFamilyTwoIsNotEinstein) {
  const EinsteinReport r = einstein_residual(sample(square_family_model(2), 65), 1.0);
  EXPECT_FALSE(r.einstein);
  EXPECT_GE(r.residual, 0.1);
  EXPECT_EQ(r.verdict(), "not_einstein");
}

TEST(EinsteinResidual, WrongConstantIsDetected) {
  const EinsteinReport r = einstein_residual(sample(round_s4_model(), 65), 2.5);
  EXPECT_FALSE(r.einstein);
  EXPECT_NEAR(r.residual, 0.5, 1e-2);
  EXPECT_NEAR(r.horizontal, 0.5, 1e-2);
  EXPECT_NEAR(r.vertical, 0.5, 1e-2);
}

TEST(EinsteinResidual, MarginOptions) {
  const InvariantMetricData d = sample(round_s4_model(), 65);
  const EinsteinReport quarter = einstein_residual(d, 3.0);
  SamplingMargin near;
  near.h_multiple = 4.0;
  const EinsteinReport close = einstein_residual(d, 3.0, near);
  EXPECT_GT(close.nodes, quarter.nodes);
  EXPECT_GE(close.residual, quarter.residual);
  EXPECT_EQ(close.margin, near.str());
  SamplingMargin none;
  none.fraction = 0.6;
  EXPECT_THROW(einstein_residual(d, 3.0, none), InvalidInput);
  EXPECT_THROW(einstein_residual(d, -1.0), InvalidInput);
}

TEST(EinsteinResidual, PeriodicDataUsesEveryNode) {
  const InvariantMetricData d = sample(perturbed_model(product_spheres_model(), 0, 0.0), 32);
  const EinsteinReport r = einstein_residual(d, 1.0);
  EXPECT_EQ(r.nodes, d.grid.size());
}

// ---------------------------------------------------------------------------
// determinant obstruction

TEST(DetObstruction, SquareFamilyClosedForm) {
  for (int p : {0, 1, 2, 3}) {
    const InvariantMetricData d = sample(square_family_model(p), 33);
    const ScalarField phi = ScalarField::sample(d.grid, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const DetObstruction o = det_obstruction(d.gomega, phi);
    for (int j = 0; j < 33; ++j)
      for (int i = 0; i < 33; ++i) {
        const double sx = std::sin(d.grid.x(i)), sy = std::sin(d.grid.y(j));
        EXPECT_NEAR(o.field(i, j), p * p / 4.0 * std::pow(sx, 4) * sy * sy, 1e-13);
      }
    EXPECT_NEAR(o.sup_abs, p * p / 4.0, 1e-13);
    if (p > 0) {
      EXPECT_EQ(o.i, 16);
      EXPECT_EQ(o.j, 16);
    }
  }
}

TEST(DetObstruction, IsotropicOrbitsGiveZero) {
  const Grid g = Grid::make(Topology::rectangle, 17, 17, 0, 0, kPi, kPi);
  const ScalarField phi = ScalarField::sample(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
  Mat2Field go(g, Mat2::Zero());
  for (std::size_t k = 0; k < g.size(); ++k) go.values[k] = phi.values[k] * Mat2::Identity();
  const DetObstruction o = det_obstruction(go, phi);
  EXPECT_EQ(o.sup_abs, 0.0);
}

TEST(DetObstruction, GrowsWithTheSlope) {
  double prev = -1.0;
  for (int p : {0, 1, 2, 3, 4}) {
    const InvariantMetricData d = sample(square_family_model(p), 17);
    const ScalarField phi = orbit_volume(sample(square_family_model(0), 17).gomega);
    const double s = det_obstruction(d.gomega, phi).sup_abs;
    EXPECT_GT(s, prev);
    prev = s;
  }
}

// ---------------------------------------------------------------------------
// square classification

TEST(ClassifySquare, OnlyTheProductIsEinstein) {
  const auto rows = classify_square_actions({0, 1, 2, 3}, 65);
  ASSERT_EQ(rows.size(), 4u);
  for (const SquareClassification& c : rows) {
    EXPECT_TRUE(c.solutions_found) << c.p;
    EXPECT_NEAR(c.lambda, 1.0, 1e-3) << c.p;
    EXPECT_NEAR(c.edge_lambda, 1.0, 1e-9) << c.p;
    EXPECT_NEAR(c.phi_scale, 1.0, 1e-3) << c.p;
    EXPECT_NEAR(c.det_center, c.p * c.p / 4.0, 1e-3) << c.p;
    EXPECT_EQ(c.einstein.einstein, c.p == 0) << c.p;
    ASSERT_TRUE(c.einstein.det.has_value());
  }
  EXPECT_GE(rows[2].einstein.residual, 0.1);
}

TEST(ClassifySquare, MirrorSlopeGivesTheSameVerdict) {
  const auto rows = classify_square_actions({2, -2, 3, -3}, 33);
  for (int k = 0; k < 4; k += 2) {
    const SquareClassification &a = rows[k], &b = rows[k + 1];
    EXPECT_EQ(a.einstein.einstein, b.einstein.einstein);
    EXPECT_NEAR(a.det_center, b.det_center, 1e-12);
    EXPECT_NEAR(a.einstein.residual, b.einstein.residual, 1e-9);
    EXPECT_NEAR(a.max_entry_error, b.max_entry_error, 1e-12);
  }
}

TEST(ClassifySquare, TooCoarseThrows) {
  EXPECT_THROW(classify_square_actions({0}, 7), InvalidInput);
}

// ---------------------------------------------------------------------------
// adapted frame

TEST(AdaptedBlocks, RecoverTheBlockData) {
  Mat2 gs, go, C;
  gs << 1.2, 0.1, 0.1, 0.9;
  go << 2.0, 0.3, 0.3, 1.5;
  C << 0.2, -0.4, 0.7, 0.1;
  const Mat4 G = assemble_block(gs, go, C);
  const AdaptedBlocks b = adapted_blocks(G, G);
  EXPECT_LT((b.gsigma - gs).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((b.gomega - go).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((b.C - C).cwiseAbs().maxCoeff(), 1e-14);
  // Ric = g: the adapted blocks are the block metric itself
  EXPECT_LT((b.ric_xx - gs).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((b.ric_vv - go).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(b.ric_xv.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((frame_components(gs, gs) - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}
