#include "t2inv/builtin.hpp"
#include "t2inv/flow.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace t2inv;

namespace {

InvariantMetricData flat_torus(int n) {
  const Grid g = Grid::make(Topology::periodic, n, n, 0, 0, 2 * kPi, 2 * kPi);
  Mat2 go, C;
  go << 2.0, 0.3, 0.3, 1.0;
  C << 0.2, 0.0, -0.1, 0.4;
  InvariantMetricData d;
  d.space = OrbitSpace::periodic_torus(2 * kPi, 2 * kPi);
  d.grid = g;
  d.gsigma = QuotientMetricSpec::gauge(ScalarField(g, 1.5));
  d.gomega = Mat2Field(g, go);
  d.C = Mat2Field(g, C);
  return d;
}

double max_abs_C(const InvariantMetricData& d) {
  double m = 0.0;
  for (const Mat2& c : d.C.values) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// stepping

TEST(FlowStep, FlatDataIsStationary) {
  const InvariantMetricData d = flat_torus(12);
  const Field<Mat4> G0 = full_metric_field(d);
  const FlowStepResult r = flow_step(G0, 0.0, 0.01, {});
  for (std::size_t k = 0; k < G0.values.size(); ++k)
    EXPECT_LT((r.G.values[k] - G0.values[k]).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(r.halvings, 0);
  EXPECT_EQ(r.dt_used, 0.01);
}

TEST(FlowStep, KeepsComponentsExactlySymmetric) {
  const InvariantMetricData d = sample(periodic_random_model(5, 0.3), 16);
  const FlowStepResult r = flow_step(full_metric_field(d), 0.0, 1e-3, {});
  for (const Mat4& M : r.G.values) EXPECT_EQ(M, M.transpose());
}

TEST(FlowStep, RejectsBadInput) {
  const Field<Mat4> G = full_metric_field(flat_torus(8));
  EXPECT_THROW(flow_step(G, 0.0, 0.0, {}), InvalidInput);
  const InvariantMetricData rect = sample(round_s4_model(), 9);
  EXPECT_THROW(flow_step(full_metric_field(rect), 0.0, 1e-3, {}), InvalidInput);
}

TEST(FlowStep, MatchesRicciToFirstOrder) {
  const InvariantMetricData d = sample(periodic_random_model(2, 0.2), 24);
  const Field<Mat4> G = full_metric_field(d);
  const double dt = 1e-5;
  const FlowStepResult r = flow_step(G, 0.0, dt, {});
  for (int k = 0; k < 24 * 24; k += 37) {
    const int i = k % 24, j = k / 24;
    const Mat4 rate = (r.G(i, j) - G(i, j)) / dt;
    const Mat4 want = -2.0 * ricci_from_coordinates(G, i, j).ricci;
    EXPECT_LT((rate - want).cwiseAbs().maxCoeff(), 1e-3 * (1 + want.cwiseAbs().maxCoeff()));
  }
}

// ---------------------------------------------------------------------------
// defect integrals

TEST(PolarityDefect, ZeroWithoutConnection) {
  const InvariantMetricData d = sample(round_s4_model(), 17);
  EXPECT_EQ(polarity_defect(d), 0.0);
  InvariantMetricData r = sample(periodic_random_model(4, 0.3), 16);
  r.C = Mat2Field(r.grid, Mat2::Zero());
  EXPECT_EQ(polarity_defect(r), 0.0);
}

TEST(PolarityDefect, ConstantBracketQuadratureOracle) {
  // C = [[0,0],[x,0]] gives <[X,Y], V> = g^Omega (1, 0)^T, alpha = (1/w)(1, 0)
  // with w = det g^Sigma = mu^2; integrand sqrt(w) g11 alpha^1 alpha^1 sqrt(w) = g11 / mu^2
  const int n = 17;
  const Grid g = Grid::make(Topology::rectangle, n, n, -1, -1, 2, 2);
  InvariantMetricData d;
  d.space = OrbitSpace::rectangle(2, 2, {}, -1, -1);
  d.grid = g;
  d.gsigma = QuotientMetricSpec::gauge(ScalarField::sample(g, [](double x, double y) { return 1.0 + 0.1 * x * y; }));
  d.gomega = Mat2Field::sample(g, [](double x, double) {
    Mat2 m;
    m << 2.0 + 0.5 * x, 0.1, 0.1, 1.0;
    return m;
  });
  d.C = Mat2Field::sample(g, [](double x, double) {
    Mat2 c = Mat2::Zero();
    c(1, 0) = x;
    return c;
  });
  double want = 0.0;
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i) {
      const double mu = 1.0 + 0.1 * g.x(i) * g.y(j);
      want += g.hx * g.hy * (2.0 + 0.5 * g.x(i)) / (mu * mu);
    }
  EXPECT_NEAR(polarity_defect(d), want, 1e-12 * want);
}

TEST(PolarityDefect, InvariantUnderSwappingKillingFields) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const InvariantMetricData d = sample(periodic_random_model(seed, 0.3), 20);
    InvariantMetricData s = d;
    Mat2 P;
    P << 0, 1, 1, 0;
    for (std::size_t k = 0; k < d.grid.size(); ++k) {
      s.gomega.values[k] = P * d.gomega.values[k] * P;
      s.C.values[k] = d.C.values[k] * P;
    }
    const double a = polarity_defect(d), b = polarity_defect(s);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(a, b, 1e-12 * a);
  }
}

TEST(DiagonalDefect, ZeroForDiagonalData) {
  EXPECT_EQ(diagonal_defect(sample(round_s4_model(), 17)), 0.0);
  EXPECT_EQ(diagonal_defect(sample(perturbed_model(product_spheres_model(), 0, 0.0), 16)), 0.0);
}

TEST(DiagonalDefect, QuadraticInTheOffDiagonalEntry) {
  InvariantMetricData d = sample(perturbed_model(product_spheres_model(), 3, 1e-3), 32);
  const double one = diagonal_defect(d);
  for (Mat2& m : d.gomega.values) {
    m(0, 1) *= 2;
    m(1, 0) *= 2;
  }
  EXPECT_GT(one, 0.0);
  EXPECT_NEAR(diagonal_defect(d) / one, 4.0, 1e-4);
}

TEST(DiagonalDefect, SquareFamilyIntegrandIsUnbounded) {
  // g12 stays sin^2 x on the top edge while phi vanishes there
  for (int p : {1, 2})
    for (int n : {33, 65}) EXPECT_THROW(diagonal_defect(sample(square_family_model(p), n)), InvalidInput) << p;
  EXPECT_NO_THROW(diagonal_defect(sample(perturbed_model(round_s4_model(), 1, 0.01), 33)));
}

// ---------------------------------------------------------------------------
// runs

TEST(RunFlow, FlatTorusStaysPut) {
  const InvariantMetricData d = flat_torus(10);
  FlowOptions opt;
  opt.T = 0.01;
  opt.dt = 0.002;
  const FlowTrace tr = run_flow(d, opt);
  ASSERT_TRUE(tr.completed);
  EXPECT_EQ(tr.t.size(), 6u);
  EXPECT_LT(homothety_error(tr, full_metric_field(d), 0.0), 1e-14);
  for (std::size_t q = 1; q < tr.t.size(); ++q) {
    EXPECT_NEAR(tr.polarity[q], tr.polarity[0], 1e-12);
    EXPECT_NEAR(tr.diagonal[q], tr.diagonal[0], 1e-12);
  }
}

TEST(RunFlow, PerturbedTorusDampedDefectsAreMonotone) {
  const InvariantMetricData d = sample(perturbed_model(product_spheres_model(), 0, 1e-2), 24);
  FlowOptions opt;
  opt.T = 0.05;
  opt.dt = 1e-3;
  const FlowTrace tr = run_flow(d, opt);
  ASSERT_TRUE(tr.completed) << tr.error;
  EXPECT_GE(tr.t.size(), 51u);
  EXPECT_GT(tr.polarity[0], 0.0);
  EXPECT_GT(tr.diagonal[0], 0.0);
  EXPECT_GT(tr.C_polarity, 0.0);
  EXPECT_TRUE(tr.polarity_monotone);
  EXPECT_TRUE(tr.diagonal_monotone);
  EXPECT_LE(tr.polarity_violation, 1e-6);
  EXPECT_LE(tr.diagonal_violation, 1e-6);
}

TEST(RunFlow, DiagonalAndPolarDataStayThatWay) {
  {
    const InvariantMetricData d = sample(perturbed_model(product_spheres_model(), 0, 0.0), 20);
    FlowOptions opt;
    opt.T = 0.02;
    opt.dt = 1e-3;
    const FlowTrace tr = run_flow(d, opt);
    ASSERT_TRUE(tr.completed);
    for (std::size_t q = 0; q < tr.t.size(); ++q) {
      EXPECT_LE(tr.diagonal[q], 1e-10);
      EXPECT_LE(tr.polarity[q], 1e-10);
    }
  }
  {
    InvariantMetricData d = sample(periodic_random_model(7, 0.2), 20);
    d.C = Mat2Field(d.grid, Mat2::Zero());
    FlowOptions opt;
    opt.T = 0.02;
    opt.dt = 1e-3;
    const FlowTrace tr = run_flow(d, opt);
    ASSERT_TRUE(tr.completed);
    for (std::size_t q = 0; q < tr.t.size(); ++q) {
      EXPECT_LE(tr.polarity[q], 1e-10);
      EXPECT_LE(max_abs_C(tr.snapshots[q]), 1e-12);
    }
    EXPECT_GT(tr.diagonal.back(), 0.0);
  }
}

TEST(RunFlow, ProductSpheresPatchIsHomothetic) {
  // interior patch with boundary values continued by the homothety
  const MetricModel m = restrict_model(product_spheres_model(), kPi / 4, kPi / 4, kPi / 2, kPi / 2);
  const InvariantMetricData d = sample(m, 21);
  const Field<Mat4> G0 = full_metric_field(d);
  FlowOptions opt;
  opt.T = 0.1;
  opt.dt = 2.5e-4 * std::pow(17.0 / 21.0, 2);
  opt.deturck = true;
  opt.boundary = homothety_boundary(G0, 1.0);
  const FlowTrace tr = run_flow(d, opt);
  ASSERT_TRUE(tr.completed) << tr.error;
  EXPECT_NEAR(tr.t.back(), 0.1, 1e-12);
  EXPECT_LT(homothety_error(tr, G0, 1.0), 1e-3);
  for (std::size_t q = 0; q < tr.t.size(); ++q) {
    EXPECT_LE(tr.diagonal[q], 1e-10);
    EXPECT_LE(tr.polarity[q], 1e-10);
  }
}

TEST(RunFlow, RectangleWithoutBoundaryDataThrows) {
  FlowOptions opt;
  opt.T = 0.01;
  opt.dt = 1e-3;
  EXPECT_THROW(run_flow(sample(round_s4_model(), 9), opt), InvalidInput);
  opt.T = -1.0;
  EXPECT_THROW(run_flow(flat_torus(8), opt), InvalidInput);
}
