#pragma once

#include "t2inv/core.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/orbit_space.hpp"

#include <cmath>

namespace t2inv {

/// Quotient metric on the orbit space: either dx^2 + mu^2 dy^2 or a general
/// symmetric 2x2 field. The full tensor field `g` is always populated.
/// mu may vanish on sides that collapse to a vertex.
struct QuotientMetricSpec {
  enum class Kind { gauge_mu, general };
  Kind kind = Kind::general;
  ScalarField mu;  ///< populated for gauge_mu only
  Mat2Field g;

  static QuotientMetricSpec gauge(const ScalarField& mu) {
    QuotientMetricSpec s;
    s.kind = Kind::gauge_mu;
    s.mu = mu;
    s.g = Mat2Field(mu.grid, Mat2::Identity());
    for (std::size_t k = 0; k < mu.values.size(); ++k) {
      const double m = mu.values[k];
      require(m >= 0.0, "gauge coefficient mu must be nonnegative");
      s.g.values[k](1, 1) = m * m;
    }
    return s;
  }
  static QuotientMetricSpec general(const Mat2Field& g) {
    QuotientMetricSpec s;
    s.kind = Kind::general;
    s.g = g;
    return s;
  }
  bool is_gauge() const { return kind == Kind::gauge_mu; }
};

/// T^2-invariant metric data: quotient metric, orbit metric g^Omega and the
/// connection matrix C, all sampled on one grid.
struct InvariantMetricData {
  OrbitSpace space;
  Grid grid;
  QuotientMetricSpec gsigma;
  Mat2Field gomega;
  Mat2Field C;

  void check_consistent() const {
    require(gsigma.g.grid.same_shape(grid) && gomega.grid.same_shape(grid) &&
                C.grid.same_shape(grid),
            "metric fields must share one grid");
  }
  bool polar(double tol = 0.0) const {
    for (const Mat2& c : C.values)
      if (c.cwiseAbs().maxCoeff() > tol) return false;
    return true;
  }
};

/// Polar metric with orthogonal Killing fields of lengths 2 pi a and 2 pi b.
struct DiagonalMetricData {
  OrbitSpace space;
  Grid grid;
  QuotientMetricSpec gsigma;
  ScalarField a;
  ScalarField b;

  InvariantMetricData to_invariant() const {
    InvariantMetricData d{space, grid, gsigma, Mat2Field(grid, Mat2::Zero()),
                          Mat2Field(grid, Mat2::Zero())};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      d.gomega.values[k](0, 0) = a.values[k] * a.values[k];
      d.gomega.values[k](1, 1) = b.values[k] * b.values[k];
    }
    return d;
  }
};

/// Block form of the 4-metric in the basis (d_x, d_y, d_phi, d_theta).
inline Mat4 assemble_block(const Mat2& gs, const Mat2& go, const Mat2& C) {
  Mat4 G;
  const Mat2 cgo = C * go;
  G.topLeftCorner<2, 2>() = gs + cgo * C.transpose();
  G.topRightCorner<2, 2>() = -cgo;
  G.bottomLeftCorner<2, 2>() = -cgo.transpose();
  G.bottomRightCorner<2, 2>() = go;
  // exact symmetry regardless of rounding in the products
  for (int r = 0; r < 4; ++r)
    for (int c = r + 1; c < 4; ++c) G(c, r) = G(r, c);
  return G;
}

inline bool positive_definite(const Mat2& m) {
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

inline Mat4 assemble_full_metric(const InvariantMetricData& d, int i, int j) {
  require(i >= 0 && j >= 0 && i < d.grid.nx && j < d.grid.ny, "node outside grid");
  const Mat2& go = d.gomega(i, j);
  if (!d.grid.on_boundary(i, j) && !positive_definite(go))
    throw DegenerateMetric("orbit metric is not positive definite at interior node (" +
                           std::to_string(i) + "," + std::to_string(j) + ")");
  return assemble_block(d.gsigma.g(i, j), go, d.C(i, j));
}

inline Field<Mat4> full_metric_field(const InvariantMetricData& d) {
  Field<Mat4> f(d.grid, Mat4::Zero());
  for (int j = 0; j < d.grid.ny; ++j)
    for (int i = 0; i < d.grid.nx; ++i) f(i, j) = assemble_full_metric(d, i, j);
  return f;
}

/// Inverse of assemble_block: recovers (g_Sigma, g^Omega, C) from a 4-metric.
struct BlockParts {
  Mat2 gsigma, gomega, C;
};

inline BlockParts decompose_block(const Mat4& G) {
  BlockParts b;
  b.gomega = G.bottomRightCorner<2, 2>();
  if (std::abs(b.gomega.determinant()) <= 0.0)
    throw DegenerateMetric("orbit block is singular");
  const Mat2 hv = G.topRightCorner<2, 2>();
  b.C = -hv * b.gomega.inverse();
  b.gsigma = G.topLeftCorner<2, 2>() - b.C * b.gomega * b.C.transpose();
  return b;
}

/// phi = sqrt(det g^Omega). Small negative determinants from rounding clamp to 0.
inline ScalarField orbit_volume(const Mat2Field& go) {
  ScalarField phi(go.grid, 0.0);
  for (std::size_t k = 0; k < go.values.size(); ++k) {
    const Mat2& m = go.values[k];
    const double det = m.determinant();
    const double scale = m.cwiseAbs().maxCoeff();
    if (det < -1e-12 * (scale * scale + 1e-300))
      throw InvalidInput("orbit metric has negative determinant " + std::to_string(det));
    phi.values[k] = std::sqrt(std::max(det, 0.0));
  }
  return phi;
}

}  // namespace t2inv
