#pragma once

#include "t2inv/core.hpp"
#include "t2inv/curvature.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/reduced.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace t2inv {

/// Curvature data of a diagonal metric at one point. A and B are expressed
/// in the orthonormal frame (e1, e2) of the quotient, e1 parallel to d_x.
struct DiagonalCurvaturePoint {
  double s = 0.0;
  double p = 0.0;
  Mat2 A = Mat2::Zero();
  Mat2 B = Mat2::Zero();
  Mat2 frame = Mat2::Identity();  ///< columns e1, e2 in coordinates
};

inline Mat2 orthonormal_frame(const Mat2& g) {
  Vec2 e1(1.0 / std::sqrt(g(0, 0)), 0.0);
  Vec2 e2(0.0, 1.0);
  e2 -= (e1.dot(g * e2)) * e1;
  e2 /= std::sqrt(e2.dot(g * e2));
  Mat2 E;
  E << e1, e2;
  return E;
}

inline DiagonalCurvaturePoint diagonal_curvature_point(const Jet<Mat2>& gs, const Jet<double>& a,
                                                       const Jet<double>& b) {
  if (!(a.v > 0.0) || !(b.v > 0.0))
    throw DegenerateMetric("warp function vanishes at the evaluation point");
  const SurfaceFrame S = SurfaceFrame::from_jet(gs);
  DiagonalCurvaturePoint r;
  r.frame = orthonormal_frame(gs.v);
  r.s = S.K;
  r.p = -S.dot(S.grad(a), S.grad(b)) / (a.v * b.v);
  r.A = -(r.frame.transpose() * S.hess(a) * r.frame) / a.v;
  r.B = -(r.frame.transpose() * S.hess(b) * r.frame) / b.v;
  return r;
}

struct DiagonalCurvature {
  Grid grid;
  ScalarField s, p;
  Mat2Field A, B;
};

/// (s, p, A, B) at every node where both warps are positive (NaN elsewhere).
inline DiagonalCurvature diagonal_curvature(const DiagonalMetricData& d) {
  const Grid& g = d.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DiagonalCurvature dc{g, ScalarField(g, nan), ScalarField(g, nan), Mat2Field(g, Mat2::Constant(nan)),
                       Mat2Field(g, Mat2::Constant(nan))};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      if (!(d.a(i, j) > 0.0) || !(d.b(i, j) > 0.0))
        throw DegenerateMetric("warp function vanishes at interior node (" + std::to_string(i) +
                               "," + std::to_string(j) + ")");
      const auto r = diagonal_curvature_point(node_jet(d.gsigma.g, i, j), node_jet(d.a, i, j),
                                              node_jet(d.b, i, j));
      dc.s(i, j) = r.s;
      dc.p(i, j) = r.p;
      dc.A(i, j) = r.A;
      dc.B(i, j) = r.B;
    }
  return dc;
}

/// Riemann entries predicted by (s, p, A, B) for the orthonormal frame
/// (e1, e2, V/a, W/b): returns R(u1, u2, u3, u4) for frame indices.
inline double diagonal_riemann_entry(const DiagonalCurvaturePoint& c, int i, int j, int k, int l) {
  // nonzero entries up to the algebraic symmetries:
  // R(e1,e2,e1,e2) = s, R(V,W,V,W) = p, R(e_a,V,e_b,V) = A_ab, R(e_a,W,e_b,W) = B_ab
  auto base = [&](int a, int b, int cc, int d) -> std::optional<double> {
    if (a == 0 && b == 1 && cc == 0 && d == 1) return c.s;
    if (a == 2 && b == 3 && cc == 2 && d == 3) return c.p;
    if (a < 2 && b == 2 && cc < 2 && d == 2) return c.A(a, cc);
    if (a < 2 && b == 3 && cc < 2 && d == 3) return c.B(a, cc);
    return std::nullopt;
  };
  const int idx[4] = {i, j, k, l};
  for (int pair = 0; pair < 2; ++pair) {
    int a = idx[0], b = idx[1], cc = idx[2], d = idx[3];
    if (pair == 1) {
      std::swap(a, cc);
      std::swap(b, d);
    }
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) {
        const int A0 = s1 ? b : a, A1 = s1 ? a : b;
        const int B0 = s2 ? d : cc, B1 = s2 ? cc : d;
        if (auto v = base(A0, A1, B0, B1)) return ((s1 + s2) % 2 ? -1.0 : 1.0) * *v;
      }
  }
  return 0.0;
}

/// Riemann tensor of the engine sample in the orthonormal frame (e1, e2, V/a, W/b).
inline std::array<double, 256> frame_riemann(const CurvatureSample& s, const Mat2& frame) {
  Eigen::Matrix4d E = Eigen::Matrix4d::Zero();
  E.topLeftCorner<2, 2>() = frame;
  E(2, 2) = 1.0 / std::sqrt(s.metric(2, 2));
  E(3, 3) = 1.0 / std::sqrt(s.metric(3, 3));
  std::array<double, 256> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double v = 0.0;
          for (int a = 0; a < 4; ++a) {
            if (E(a, i) == 0.0) continue;
            for (int b = 0; b < 4; ++b) {
              if (E(b, j) == 0.0) continue;
              for (int c = 0; c < 4; ++c) {
                if (E(c, k) == 0.0) continue;
                for (int d = 0; d < 4; ++d)
                  if (E(d, l) != 0.0) v += E(a, i) * E(b, j) * E(c, k) * E(d, l) * s.R(a, b, c, d);
              }
            }
          }
          out[((i * 4 + j) * 4 + k) * 4 + l] = v;
        }
  return out;
}

// ---------------------------------------------------------------------------
// Curvature operator

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Curvature operator in the basis
/// 1/2(XY+VW), 1/2(XV-YW), 1/2(XW+YV), 1/2(XY-VW), 1/2(XV+YW), 1/2(XW-YV)
/// of hatted frame vectors X = e1, Y = e2, V, W.
inline Mat6 curvature_operator_matrix(double s, double p, const Mat2& A, const Mat2& B) {
  Mat6 M = Mat6::Zero();
  const double a11 = A(0, 0), a12 = 0.5 * (A(0, 1) + A(1, 0)), a22 = A(1, 1);
  const double b11 = B(0, 0), b12 = 0.5 * (B(0, 1) + B(1, 0)), b22 = B(1, 1);
  M(0, 0) = M(3, 3) = 0.5 * (s + p);
  M(0, 3) = M(3, 0) = 0.5 * (s - p);
  M(1, 1) = M(4, 4) = 0.5 * (a11 + b22);
  M(1, 2) = M(2, 1) = 0.5 * (a12 - b12);
  M(4, 5) = M(5, 4) = -0.5 * (a12 - b12);
  M(2, 2) = M(5, 5) = 0.5 * (a22 + b11);
  M(1, 4) = M(4, 1) = 0.5 * (a11 - b22);
  M(2, 4) = M(4, 2) = 0.5 * (a12 + b12);
  // <Rm(XV - YW), XW - YV> picks up -A_12 - B_12
  M(1, 5) = M(5, 1) = -0.5 * (a12 + b12);
  M(2, 5) = M(5, 2) = 0.5 * (b11 - a22);
  return M;
}

/// Curvature operator of an engine sample, <Rm(w), n> = sum w_ab n_cd R_abcd over a<b, c<d,
/// in the same bivector basis as curvature_operator_matrix.
inline Mat6 curvature_operator_from_sample(const CurvatureSample& s, const Mat2& frame) {
  const auto R = frame_riemann(s, frame);
  auto Rf = [&](int a, int b, int c, int d) { return R[((a * 4 + b) * 4 + c) * 4 + d]; };
  // bivector coefficients on (a,b) pairs, frame order X=0, Y=1, V=2, W=3
  using Biv = std::array<std::array<double, 4>, 4>;
  auto biv = [](int a, int b, double sa, int c, int d, double sc) {
    Biv w{};
    w[a][b] += 0.5 * sa;
    w[b][a] -= 0.5 * sa;
    w[c][d] += 0.5 * sc;
    w[d][c] -= 0.5 * sc;
    return w;
  };
  const std::array<Biv, 6> basis = {biv(0, 1, 1, 2, 3, 1),  biv(0, 2, 1, 1, 3, -1),
                                    biv(0, 3, 1, 1, 2, 1),  biv(0, 1, 1, 2, 3, -1),
                                    biv(0, 2, 1, 1, 3, 1),  biv(0, 3, 1, 1, 2, -1)};
  Mat6 M;
  for (int u = 0; u < 6; ++u)
    for (int v = 0; v < 6; ++v) {
      double acc = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          for (int c = 0; c < 4; ++c)
            for (int d = c + 1; d < 4; ++d) acc += basis[u][a][b] * basis[v][c][d] * Rf(a, b, c, d);
      // basis vectors have norm 1/sqrt(2); rescale to the orthonormal normalization
      M(u, v) = 2.0 * acc;
    }
  return M;
}

struct OperatorBlocks {
  Mat3 plus;
  Mat3 minus;
};

inline OperatorBlocks curvature_operator_blocks(double s, double p, const Mat2& A, const Mat2& B) {
  const Mat6 M = curvature_operator_matrix(s, p, A, B);
  return {M.topLeftCorner<3, 3>(), M.bottomRightCorner<3, 3>()};
}

inline OperatorBlocks curvature_operator_blocks(const DiagonalCurvature& dc, int i, int j) {
  return curvature_operator_blocks(dc.s(i, j), dc.p(i, j), dc.A(i, j), dc.B(i, j));
}

/// Eigenvalues of a symmetric 3x3 matrix in ascending order: trigonometric
/// closed form followed by Newton steps on the characteristic polynomial.
inline Vec3 symmetric_eigenvalues3(const Mat3& Min) {
  const Mat3 M = 0.5 * (Min + Min.transpose());
  const double p1 = M(0, 1) * M(0, 1) + M(0, 2) * M(0, 2) + M(1, 2) * M(1, 2);
  const double q = M.trace() / 3.0;
  Vec3 ev;
  if (p1 == 0.0) {
    ev << M(0, 0), M(1, 1), M(2, 2);
  } else {
    const double p2 = (M(0, 0) - q) * (M(0, 0) - q) + (M(1, 1) - q) * (M(1, 1) - q) +
                      (M(2, 2) - q) * (M(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const Mat3 Bm = (M - q * Mat3::Identity()) / p;
    const double r = std::clamp(Bm.determinant() / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    ev(2) = q + 2.0 * p * std::cos(phi);
    ev(0) = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
    ev(1) = 3.0 * q - ev(0) - ev(2);
    // Newton polish on det(M - x I)
    const double c2 = -M.trace();
    const double c1 = M(0, 0) * M(1, 1) + M(0, 0) * M(2, 2) + M(1, 1) * M(2, 2) - p1;
    const double c0 = -M.determinant();
    for (int k = 0; k < 3; ++k) {
      double x = ev(k);
      for (int it = 0; it < 4; ++it) {
        const double f = ((x + c2) * x + c1) * x + c0;
        const double df = (3.0 * x + 2.0 * c2) * x + c1;
        if (df == 0.0) break;
        const double nx = x - f / df;
        if (!std::isfinite(nx) || std::abs(nx - x) > 1e-6 * (1.0 + std::abs(x))) break;
        x = nx;
      }
      ev(k) = x;
    }
  }
  std::sort(ev.data(), ev.data() + 3);
  return ev;
}

struct NicReport {
  bool nonnegative = false;
  double sum_plus = 0.0;   ///< sum of the two smallest eigenvalues of M+
  double sum_minus = 0.0;  ///< same for M-
};

inline NicReport nonneg_isotropic_check(const Mat3& plus, const Mat3& minus, double tol = 1e-10) {
  const Vec3 ep = symmetric_eigenvalues3(plus);
  const Vec3 em = symmetric_eigenvalues3(minus);
  NicReport r;
  r.sum_plus = ep(0) + ep(1);
  r.sum_minus = em(0) + em(1);
  r.nonnegative = r.sum_plus >= -tol && r.sum_minus >= -tol;
  return r;
}

struct NicSample {
  double s = 0.0, p = 0.0;
  Mat2 A = Mat2::Zero(), B = Mat2::Zero();
};

/// s, p exponential; A, B = L L^T with Gaussian L.
inline NicSample random_nic_sample(std::mt19937_64& rng) {
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto psd = [&] {
    Mat2 L;
    L << nd(rng), nd(rng), nd(rng), nd(rng);
    return Mat2(L * L.transpose());
  };
  NicSample x;
  x.s = ex(rng);
  x.p = ex(rng);
  x.A = psd();
  x.B = psd();
  return x;
}

/// Indefinite A = diag(1, -1), B = 0, s = p = 0: M+ = diag(0, 1/2, -1/2),
/// so the check must fail with sum -1/2.
inline NicSample nic_counterexample() {
  NicSample x;
  x.A << 1.0, 0.0, 0.0, -1.0;
  return x;
}

inline NicReport nonneg_isotropic_check(const NicSample& x, double tol = 1e-10) {
  const OperatorBlocks b = curvature_operator_blocks(x.s, x.p, x.A, x.B);
  return nonneg_isotropic_check(b.plus, b.minus, tol);
}

}  // namespace t2inv
