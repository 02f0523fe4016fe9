#include "t2inv/builtin.hpp"
#include "t2inv/smoothness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

using namespace t2inv;

namespace {

using F1 = std::function<double(double)>;
using F2 = std::function<double(double, double)>;

constexpr double kStep = 0.02;

struct EdgeGerm {
  F1 mu2 = [](double r) { return 1.0 - r * r; };
  F1 a2 = [](double r) { return std::sin(r) * std::sin(r); };
  F1 b = [](double r) { return 0.1 * r * r; };
  F1 d2 = [](double r) { return 2.0 + r * r; };
  F1 c11 = [](double r) { return r; };
  F1 c12 = [](double r) { return 0.2 * r + r * r * r; };
  F1 c21 = [](double r) { return 0.3 + r * r; };
  F1 c22 = [](double) { return 0.0; };

  EdgeProfiles sample(int K = 7) const {
    EdgeProfiles P;
    P.h = kStep;
    for (int k = 0; k < K; ++k) {
      const double r = k * kStep;
      P.mu2.push_back(mu2(r));
      P.a2.push_back(a2(r));
      P.b.push_back(b(r));
      P.d2.push_back(d2(r));
      P.c11.push_back(c11(r));
      P.c12.push_back(c12(r));
      P.c21.push_back(c21(r));
      P.c22.push_back(c22(r));
    }
    return P;
  }
};

struct VertexGerm {
  F2 mu2 = [](double r, double t) { return 1.0 + r * r * t * t; };
  F2 a2 = [](double r, double t) { return r * r + r * r * r * r * t * t; };
  F2 b = [](double r, double t) { return r * r * t * t; };
  F2 d2 = [this](double r, double t) { return mu2(r, t) * t * t + t * t * t * t; };
  F2 c11 = [](double r, double) { return r; };
  F2 c12 = [](double r, double t) { return r * t * t; };
  F2 c21 = [](double, double t) { return t; };
  F2 c22 = [](double r, double t) { return r * r * t; };

  VertexGerm() = default;
  VertexGerm(const VertexGerm&) = delete;

  VertexSamples sample(int K = 7) const {
    VertexSamples S;
    S.h = kStep;
    S.K = K;
    for (int k = 0; k < K; ++k)
      for (int l = 0; l < K; ++l) {
        const double r = k * kStep, t = l * kStep;
        S.mu2.push_back(mu2(r, t));
        S.a2.push_back(a2(r, t));
        S.b.push_back(b(r, t));
        S.d2.push_back(d2(r, t));
        S.c11.push_back(c11(r, t));
        S.c12.push_back(c12(r, t));
        S.c21.push_back(c21(r, t));
        S.c22.push_back(c22(r, t));
      }
    return S;
  }
};

void expect_only_failure(const SmoothnessReport& rep, const std::string& name) {
  EXPECT_FALSE(rep.pass());
  EXPECT_EQ(rep.failed_names(), std::vector<std::string>{name});
}

}  // namespace

TEST(EdgeSmoothness, SmoothGermPasses) {
  const SmoothnessReport rep = validate_edge_smoothness(EdgeGerm{}.sample());
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.conditions.size(), 13u);
}

TEST(EdgeSmoothness, OddMuIsRejected) {
  EdgeGerm g;
  g.mu2 = [](double r) { return 1.0 + 0.5 * r; };
  expect_only_failure(validate_edge_smoothness(g.sample()), "mu2_even");
}

TEST(EdgeSmoothness, OddCollapsingBlockIsRejected) {
  EdgeGerm g;
  g.a2 = [](double r) { return r * r + r * r * r; };
  expect_only_failure(validate_edge_smoothness(g.sample()), "a2_even");
}

TEST(EdgeSmoothness, ConeAngleIsRejected) {
  EdgeGerm g;
  g.a2 = [](double r) { return 2.0 * r * r; };
  expect_only_failure(validate_edge_smoothness(g.sample()), "a2_leading_coefficient");
}

TEST(EdgeSmoothness, NonUnitMuIsRejected) {
  EdgeGerm g;
  g.mu2 = [](double r) { return 1.21 - r * r; };
  expect_only_failure(validate_edge_smoothness(g.sample()), "mu_unit_on_edge");
}

TEST(EdgeSmoothness, EvenConnectionTermIsRejected) {
  EdgeGerm g;
  g.c11 = [](double r) { return r + r * r; };
  expect_only_failure(validate_edge_smoothness(g.sample()), "c11_parity");
}

TEST(EdgeSmoothness, TooFewStationsThrows) {
  EXPECT_THROW(validate_edge_smoothness(EdgeGerm{}.sample(4)), InvalidInput);
  EdgeProfiles P = EdgeGerm{}.sample();
  P.b.pop_back();
  EXPECT_THROW(validate_edge_smoothness(P), InvalidInput);
}

TEST(VertexSmoothness, SmoothGermPasses) {
  const VertexGerm g;
  const SmoothnessReport rep = validate_vertex_smoothness(g.sample());
  EXPECT_TRUE(rep.pass()) << ::testing::PrintToString(rep.failed_names());
}

TEST(VertexSmoothness, OffClassCrossTermIsRejected) {
  VertexGerm g;
  g.b = [](double r, double t) { return r * t * t; };
  expect_only_failure(validate_vertex_smoothness(g.sample()), "b_class");
}

TEST(VertexSmoothness, CubicOrbitLengthIsRejected) {
  VertexGerm g;
  g.d2 = [&g](double r, double t) { return g.mu2(r, t) * t * t + t * t * t; };
  expect_only_failure(validate_vertex_smoothness(g.sample()), "d2_class");
}

TEST(VertexSmoothness, TooSmallStencilThrows) {
  const VertexGerm g;
  EXPECT_THROW(validate_vertex_smoothness(g.sample(4)), InvalidInput);
}

// ---------------------------------------------------------------------------
// builtin models

TEST(ModelSmoothness, SmoothBuiltinsPass) {
  for (const std::string name : {"round_s4", "product_spheres", "square_family(0)", "periodic_random(1,0.2)"}) {
    const SmoothnessReport rep = validate_model_smoothness(builtin_model(name));
    EXPECT_TRUE(rep.pass()) << name << " " << ::testing::PrintToString(rep.failed_names());
  }
}

TEST(ModelSmoothness, RectangleModelsCheckEveryStratum) {
  const SmoothnessReport rep = validate_model_smoothness(product_spheres_model());
  // 4 edges x 3 stations x 13 conditions + 4 vertices x 9 conditions
  EXPECT_EQ(rep.conditions.size(), 4u * 3u * 13u + 4u * 9u);
  EXPECT_TRUE(validate_model_smoothness(periodic_random_model(0, 0.1)).conditions.empty());
}

TEST(ModelSmoothness, SquareFamilyHasConeAlongTiltedEdge) {
  // a^2 / r^2 tends to 1 + p^2 sin^2(t) / 4 on the bottom edge, so the
  // collapsing circle closes up with the wrong period whenever p != 0
  for (int p : {1, 2, 3}) {
    const SmoothnessReport rep = validate_model_smoothness(square_family_model(p));
    EXPECT_FALSE(rep.pass()) << p;
    EXPECT_TRUE(rep.failed("a2_leading_coefficient")) << p;
    double worst = 0.0;
    for (const ConditionResult& c : rep.conditions)
      if (c.name == "a2_leading_coefficient" && !c.pass) worst = std::max(worst, c.measured);
    // largest station offset is at t = pi/2 among 0.3, 0.5, 0.7 of the edge
    EXPECT_NEAR(worst, p * p / 4.0, 1e-3) << p;
  }
}
