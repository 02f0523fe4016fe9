#pragma once

#include "t2inv/core.hpp"
#include "t2inv/curvature.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"

#include <cmath>
#include <limits>

namespace t2inv {

/// Riemannian data of the quotient surface at one point.
struct SurfaceFrame {
  Mat2 g, gi;
  double gam[2][2][2]{};  ///< Gamma^k_{st}
  double K = 0.0;         ///< Gauss curvature
  double area = 0.0;      ///< sqrt(det g)

  static SurfaceFrame from_jet(const Jet<Mat2>& J) {
    SurfaceFrame f;
    f.g = J.v;
    require<DegenerateMetric>(J.v.determinant() > 0.0, "quotient metric is degenerate");
    f.gi = J.v.inverse();
    f.area = std::sqrt(J.v.determinant());
    for (int k = 0; k < 2; ++k)
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) {
          double v = 0.0;
          for (int m = 0; m < 2; ++m)
            v += 0.5 * f.gi(k, m) * (J.d(s)(m, t) + J.d(t)(m, s) - J.d(m)(s, t));
          f.gam[k][s][t] = v;
        }
    // Gauss curvature from the 4D engine applied to g (+) identity
    auto lift = [](const Mat2& m, double diag) {
      Mat4 G = Mat4::Zero();
      G.topLeftCorner<2, 2>() = m;
      G(2, 2) = G(3, 3) = diag;
      return G;
    };
    Jet<Mat4> J4{lift(J.v, 1.0), lift(J.dx, 0.0), lift(J.dy, 0.0),
                 lift(J.dxx, 0.0), lift(J.dxy, 0.0), lift(J.dyy, 0.0)};
    f.K = curvature_from_jet(J4).R(0, 1, 0, 1) / J.v.determinant();
    return f;
  }

  Vec2 grad(const Jet<double>& f) const { return Vec2(f.dx, f.dy); }
  double hess(const Jet<double>& f, int s, int t) const {
    return f.dd(s, t) - gam[0][s][t] * f.dx - gam[1][s][t] * f.dy;
  }
  Mat2 hess(const Jet<double>& f) const {
    Mat2 h;
    h << hess(f, 0, 0), hess(f, 0, 1), hess(f, 1, 0), hess(f, 1, 1);
    return h;
  }
  double laplacian(const Jet<double>& f) const { return gi.cwiseProduct(hess(f)).sum(); }
  double dot(const Vec2& a, const Vec2& b) const { return a.dot(gi * b); }  ///< covectors
};

/// Scalar jet of one entry of a matrix jet.
inline Jet<double> entry(const Jet<Mat2>& J, int a, int b) {
  return {J.v(a, b), J.dx(a, b), J.dy(a, b), J.dxx(a, b), J.dxy(a, b), J.dyy(a, b)};
}

/// Reduced Ricci data of a polar metric at one point.
struct PolarRicciPoint {
  Mat2 ric_vv;   ///< Ric(V_i, V_j)
  Mat2 ric_xx;   ///< Ric(X_s, X_t) in the coordinate frame of the quotient
  double vertical_trace = 0.0;
  double horizontal_trace = 0.0;
  double scal = 0.0;
  double scal_sigma = 0.0;
  Vec2 H;        ///< mean curvature vector of the orbit (contravariant components)
  double norm_h2 = 0.0;
  double norm_b2 = 0.0;
};

inline PolarRicciPoint polar_ricci_point(const Jet<Mat2>& gs, const Jet<Mat2>& go,
                                         const Jet<double>& phi) {
  require<DegenerateMetric>(phi.v > 0.0, "orbit volume vanishes at the evaluation point");
  const SurfaceFrame S = SurfaceFrame::from_jet(gs);
  const Mat2 Gi = go.v.inverse();
  PolarRicciPoint r;
  const Vec2 Hcov = -S.grad(phi) / phi.v;
  r.H = S.gi * Hcov;
  r.norm_h2 = S.dot(Hcov, Hcov);

  // <B_s, B_t> = 1/4 tr(G^-1 d_s G G^-1 d_t G)
  Mat2 BB;
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) BB(s, t) = 0.25 * (Gi * go.d(s) * Gi * go.d(t)).trace();
  r.norm_b2 = S.gi.cwiseProduct(BB).sum();

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Jet<double> gij = entry(go, i, j);
      double v = -0.5 * S.laplacian(gij);
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) {
          v += 0.5 * S.gi(s, t) * Hcov(s) * gij.d(t);
          double c = 0.0;
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) c += Gi(k, l) * go.d(s)(i, k) * go.d(t)(j, l);
          v += 0.5 * S.gi(s, t) * c;
        }
      r.ric_vv(i, j) = v;
    }
  r.ric_vv = 0.5 * (r.ric_vv + r.ric_vv.transpose()).eval();

  const Mat2 hphi = S.hess(phi);
  const double lap_phi = S.gi.cwiseProduct(hphi).sum();
  r.ric_xx = S.K * S.g - hphi / phi.v + Hcov * Hcov.transpose() - BB;
  r.ric_xx = 0.5 * (r.ric_xx + r.ric_xx.transpose()).eval();
  r.scal_sigma = 2.0 * S.K;
  r.vertical_trace = -lap_phi / phi.v;
  r.horizontal_trace = r.scal_sigma - lap_phi / phi.v + r.norm_h2 - r.norm_b2;
  r.scal = r.scal_sigma - 2.0 * lap_phi / phi.v + r.norm_h2 - r.norm_b2;
  return r;
}

/// Reduced Ricci fields of polar data on every node where the orbit volume
/// is positive (boundary nodes of a rectangle are marked invalid).
struct PolarRicciField {
  Grid grid;
  std::vector<bool> valid;
  std::vector<PolarRicciPoint> values;

  const PolarRicciPoint& operator()(int i, int j) const { return values[grid.index(i, j)]; }
  bool ok(int i, int j) const { return valid[grid.index(i, j)]; }
};

inline PolarRicciField quotient_ricci_polar(const QuotientMetricSpec& gs, const Mat2Field& go) {
  const Grid& g = go.grid;
  require(gs.g.grid.same_shape(g), "quotient and orbit metrics must share one grid");
  const ScalarField phi = orbit_volume(go);
  PolarRicciField out{g, std::vector<bool>(g.size(), false),
                      std::vector<PolarRicciPoint>(g.size())};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      if (!(phi(i, j) > 0.0))
        throw DegenerateMetric("orbit volume vanishes at interior node (" + std::to_string(i) +
                               "," + std::to_string(j) + ")");
      out.values[g.index(i, j)] =
          polar_ricci_point(node_jet(gs.g, i, j), node_jet(go, i, j), node_jet(phi, i, j));
      out.valid[g.index(i, j)] = true;
    }
  return out;
}

inline PolarRicciField quotient_ricci_polar(const InvariantMetricData& d) {
  require(d.polar(), "connection matrix is nonzero; use mixed_ricci_defect for non-polar data");
  return quotient_ricci_polar(d.gsigma, d.gomega);
}

struct FundamentalForms {
  Grid grid;
  Field<Vec2> H;
  ScalarField norm_h2;
  ScalarField norm_b2;
};

/// Mean curvature and second fundamental form norms of the orbits, at nodes
/// with positive orbit volume (NaN elsewhere).
inline FundamentalForms fundamental_forms(const QuotientMetricSpec& gs, const Mat2Field& go) {
  const Grid& g = go.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const ScalarField phi = orbit_volume(go);
  FundamentalForms f{g, Field<Vec2>(g, Vec2(nan, nan)), ScalarField(g, nan), ScalarField(g, nan)};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!(phi(i, j) > 0.0)) continue;
      const auto r =
          polar_ricci_point(node_jet(gs.g, i, j), node_jet(go, i, j), node_jet(phi, i, j));
      f.H(i, j) = r.H;
      f.norm_h2(i, j) = r.norm_h2;
      f.norm_b2(i, j) = r.norm_b2;
    }
  return f;
}

/// Vertical bracket components <[X,Y], V_k> of the horizontal lifts.
inline Field<Vec2> bracket_field(const InvariantMetricData& d) {
  const Grid& g = d.grid;
  Field<Vec2> beta(g, Vec2::Zero());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Jet<Mat2> C = node_jet(d.C, i, j);
      const Vec2 B(C.dx(1, 0) - C.dy(0, 0), C.dx(1, 1) - C.dy(0, 1));
      beta(i, j) = d.gomega(i, j) * B;
    }
  return beta;
}

/// Mixed Ricci components of gauge data: row 0 holds Ric(X, V_k), row 1 Ric(Y, V_k).
inline Mat2Field mixed_ricci_defect(const InvariantMetricData& d) {
  require(d.gsigma.is_gauge(), "mixed Ricci formulas need the gauge dx^2 + mu^2 dy^2");
  const Grid& g = d.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Field<Vec2> beta = bracket_field(d);
  const ScalarField phi = orbit_volume(d.gomega);
  std::array<ScalarField, 2> F{ScalarField(g, 0.0), ScalarField(g, 0.0)};
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double mu = d.gsigma.mu.values[n];
    for (int k = 0; k < 2; ++k)
      F[k].values[n] = mu > 0.0 ? phi.values[n] / mu * beta.values[n](k) : 0.0;
  }
  Mat2Field out(g, Mat2::Constant(nan));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      const double mu = d.gsigma.mu(i, j);
      const double D = phi(i, j);
      require<DegenerateMetric>(mu > 0.0 && D > 0.0, "degenerate metric at interior node");
      Mat2 m;
      for (int k = 0; k < 2; ++k) {
        const Jet<double> Fk = node_jet(F[k], i, j);
        m(0, k) = -Fk.dy / (2.0 * mu * D);
        m(1, k) = mu * Fk.dx / (2.0 * D);
      }
      out(i, j) = m;
    }
  return out;
}

/// Engine values of the same mixed components: X^T Ric V_k and Y^T Ric V_k.
inline Mat2 mixed_from_sample(const CurvatureSample& s, const Mat2& C) {
  Mat2 m;
  for (int row = 0; row < 2; ++row) {
    Vec4 lift = Vec4::Zero();
    lift(row) = 1.0;
    lift(2) = C(row, 0);
    lift(3) = C(row, 1);
    for (int k = 0; k < 2; ++k) m(row, k) = lift.dot(s.ricci.col(2 + k));
  }
  return m;
}

}  // namespace t2inv
