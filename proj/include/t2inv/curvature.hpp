#pragma once

#include "t2inv/builtin.hpp"
#include "t2inv/core.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"

#include <array>
#include <cmath>

namespace t2inv {

/// Curvature of a 4-metric at one point. Index convention:
/// R(d_c, d_d) d_b = R^a_{bcd} d_a, R_{abcd} = g_{ae} R^e_{bcd}, Ric_{bd} = R^a_{bad},
/// so R_{abab} is the sectional curvature times |d_a ^ d_b|^2.
struct CurvatureSample {
  int i = -1;
  int j = -1;
  Mat4 metric;
  std::array<double, 64> christoffel{};  ///< Gamma^k_{ij}
  std::array<double, 256> riemann{};     ///< R_{abcd}
  Mat4 ricci;
  double scalar = 0.0;

  double gamma(int k, int a, int b) const { return christoffel[k * 16 + a * 4 + b]; }
  double R(int a, int b, int c, int d) const { return riemann[((a * 4 + b) * 4 + c) * 4 + d]; }

  /// Largest violation of R_abcd = -R_bacd = -R_abdc = R_cdab and of Ricci symmetry.
  double symmetry_defect() const {
    double m = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            const double r = R(a, b, c, d);
            m = std::max({m, std::abs(r + R(b, a, c, d)), std::abs(r + R(a, b, d, c)),
                          std::abs(r - R(c, d, a, b))});
          }
    return std::max(m, (ricci - ricci.transpose()).cwiseAbs().maxCoeff());
  }
};

/// Curvature from the value, first and second (x, y)-derivatives of a
/// 4-metric depending on the first two coordinates only.
inline CurvatureSample curvature_from_jet(const Jet<Mat4>& J) {
  CurvatureSample s;
  s.metric = J.v;
  const Mat4& g = J.v;
  Eigen::LDLT<Mat4> ldlt(g);
  if (ldlt.info() != Eigen::Success || !(std::abs(g.determinant()) > 0.0))
    throw DegenerateMetric("metric is singular at the evaluation point");
  const Mat4 gi = g.inverse();

  // lowered Christoffel symbols and their derivatives; only l = 0, 1 are nonzero
  auto dg = [&](int l, int a, int b) { return l < 2 ? J.d(l)(a, b) : 0.0; };
  auto ddg = [&](int l, int m, int a, int b) { return (l < 2 && m < 2) ? J.dd(l, m)(a, b) : 0.0; };

  double gl[4][4][4];      // Gamma_{k i j}
  double dgl[2][4][4][4];  // d_l Gamma_{k i j}
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        gl[k][a][b] = 0.5 * (dg(a, k, b) + dg(b, k, a) - dg(k, a, b));
        for (int l = 0; l < 2; ++l)
          dgl[l][k][a][b] = 0.5 * (ddg(l, a, k, b) + ddg(l, b, k, a) - ddg(l, k, a, b));
      }

  std::array<Mat4, 2> dgi;  // d_l g^{-1} = -g^{-1} (d_l g) g^{-1}
  for (int l = 0; l < 2; ++l) dgi[l] = -gi * J.d(l) * gi;

  double G[4][4][4];       // Gamma^a_{ij}
  double dG[2][4][4][4];   // d_l Gamma^a_{ij}
  for (int a = 0; a < 4; ++a)
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        double v = 0.0, d0 = 0.0, d1 = 0.0;
        for (int k = 0; k < 4; ++k) {
          v += gi(a, k) * gl[k][p][q];
          d0 += dgi[0](a, k) * gl[k][p][q] + gi(a, k) * dgl[0][k][p][q];
          d1 += dgi[1](a, k) * gl[k][p][q] + gi(a, k) * dgl[1][k][p][q];
        }
        G[a][p][q] = v;
        dG[0][a][p][q] = d0;
        dG[1][a][p][q] = d1;
        s.christoffel[a * 16 + p * 4 + q] = v;
      }
  auto dGam = [&](int l, int a, int p, int q) { return l < 2 ? dG[l][a][p][q] : 0.0; };

  double Rup[4][4][4][4];  // R^a_{bcd}
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = dGam(c, a, d, b) - dGam(d, a, c, b);
          for (int e = 0; e < 4; ++e) v += G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b];
          Rup[a][b][c][d] = v;
        }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          for (int e = 0; e < 4; ++e) v += g(a, e) * Rup[e][b][c][d];
          s.riemann[((a * 4 + b) * 4 + c) * 4 + d] = v;
        }
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += Rup[a][b][a][d];
      s.ricci(b, d) = v;
    }
  s.ricci = 0.5 * (s.ricci + s.ricci.transpose()).eval();
  s.scalar = (gi.cwiseProduct(s.ricci)).sum();
  return s;
}

/// Grid path: second-order differences of the assembled metric at node (i, j).
inline CurvatureSample ricci_from_coordinates(const Field<Mat4>& G, int i, int j) {
  require(i >= 0 && j >= 0 && i < G.grid.nx && j < G.grid.ny, "node outside grid");
  CurvatureSample s = curvature_from_jet(node_jet(G, i, j));
  s.i = i;
  s.j = j;
  return s;
}

inline CurvatureSample ricci_from_coordinates(const InvariantMetricData& d, int i, int j) {
  // local 7x7 patch so the node jet sees exactly the assembled values
  const Grid& g = d.grid;
  require(i >= 0 && j >= 0 && i < g.nx && j < g.ny, "node outside grid");
  Field<Mat4> G(g, Mat4::Zero());
  for (int dj = -3; dj <= 3; ++dj)
    for (int di = -3; di <= 3; ++di) {
      int a = i + di, b = j + dj;
      if (g.periodic()) {
        a = g.wrap_x(a);
        b = g.wrap_y(b);
      } else if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) {
        continue;
      }
      G(a, b) = assemble_block(d.gsigma.g(a, b), d.gomega(a, b), d.C(a, b));
    }
  return ricci_from_coordinates(G, i, j);
}

/// Analytic path: centered differences of a model with step h at (x, y).
inline CurvatureSample ricci_from_model(const MetricModel& m, double x, double y, double h) {
  require(h > 0.0, "difference step must be positive");
  return curvature_from_jet(analytic_jet([&](double u, double v) { return m.full(u, v); }, x, y, h));
}

/// Full curvature field on every node of the grid (boundary nodes left unset
/// for rectangle domains).
inline Field<Mat4> ricci_field(const Field<Mat4>& G) {
  Field<Mat4> R(G.grid, Mat4::Zero());
  for (int j = 0; j < G.grid.ny; ++j)
    for (int i = 0; i < G.grid.nx; ++i) {
      if (G.grid.on_boundary(i, j)) continue;
      R(i, j) = ricci_from_coordinates(G, i, j).ricci;
    }
  return R;
}

}  // namespace t2inv
