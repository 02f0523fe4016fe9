#pragma once

#include "t2inv/builtin.hpp"
#include "t2inv/core.hpp"
#include "t2inv/curvature.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/reduced.hpp"
#include "t2inv/verifier.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace t2inv {

/// Full metric prescribed on boundary nodes of a rectangle working domain.
using FlowBoundary = std::function<Mat4(double t, int i, int j)>;

/// Boundary continuation of Einstein data: g(t) = (1 - 2 Lambda t) g(0).
inline FlowBoundary homothety_boundary(const Field<Mat4>& G0, double lambda) {
  return [G0, lambda](double t, int i, int j) { return Mat4((1.0 - 2.0 * lambda * t) * G0(i, j)); };
}

/// Copy of a model restricted to a sub-rectangle of its domain (no edge labels).
inline MetricModel restrict_model(const MetricModel& m, double x0, double y0, double lx,
                                  double ly) {
  MetricModel r = m;
  r.space = OrbitSpace::rectangle(lx, ly, {}, x0, y0);
  r.edge_charts.clear();
  r.vertex_charts.clear();
  return r;
}

inline InvariantMetricData from_full_metric(const Field<Mat4>& G, const OrbitSpace& space) {
  const Grid& g = G.grid;
  InvariantMetricData d{space, g, QuotientMetricSpec::general(Mat2Field(g, Mat2::Zero())),
                        Mat2Field(g, Mat2::Zero()), Mat2Field(g, Mat2::Zero())};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const BlockParts b = decompose_block(G.values[k]);
    d.gsigma.g.values[k] = b.gsigma;
    d.gomega.values[k] = b.gomega;
    d.C.values[k] = b.C;
  }
  return d;
}

namespace detail {

/// -2 Ric(G), plus the Lie derivative L_W G of the DeTurck field
/// W^k = g^ab (Gamma^k_ab - Gamma0^k_ab) when a background is given.
inline Field<Mat4> ricci_rate(const Field<Mat4>& G, const Field<Mat4>* background) {
  const Grid& g = G.grid;
  Field<Mat4> R(g, Mat4::Zero());
  Field<Vec4> W(g, Vec4::Zero());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      const CurvatureSample s = ricci_from_coordinates(G, i, j);
      R(i, j) = -2.0 * s.ricci;
      if (!background) continue;
      const CurvatureSample b = curvature_from_jet(node_jet(*background, i, j));
      const Mat4 gi = G(i, j).inverse();
      Vec4 w = Vec4::Zero();
      for (int k = 0; k < 4; ++k)
        for (int a = 0; a < 4; ++a)
          for (int c = 0; c < 4; ++c) w(k) += gi(a, c) * (s.gamma(k, a, c) - b.gamma(k, a, c));
      W(i, j) = w;
    }
  if (!background) return R;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      const Jet<Vec4> Wj = node_jet(W, i, j);
      const Jet<Mat4> Gj = node_jet(G, i, j);
      Mat4 dW = Mat4::Zero();  // dW(c, a) = d_a W^c, only a = x, y
      dW.col(0) = Wj.dx;
      dW.col(1) = Wj.dy;
      const Mat4& m = G(i, j);
      Mat4 L = Wj.v(0) * Gj.dx + Wj.v(1) * Gj.dy + dW.transpose() * m + m * dW;
      R(i, j) += (0.5 * (L + L.transpose())).eval();
    }
  return R;
}

inline bool all_positive_definite(const Field<Mat4>& G) {
  for (const Mat4& m : G.values) {
    Eigen::LLT<Mat4> llt(m);
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

inline void apply_boundary(Field<Mat4>& G, const FlowBoundary& bc, double t) {
  const Grid& g = G.grid;
  if (g.periodic()) return;
  require(static_cast<bool>(bc), "rectangle flows need boundary data");
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.on_boundary(i, j)) G(i, j) = bc(t, i, j);
}

inline Field<Mat4> axpy(const Field<Mat4>& G, double a, const Field<Mat4>& K) {
  Field<Mat4> out = G;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += a * K.values[k];
  return out;
}

}  // namespace detail

struct FlowStepResult {
  Field<Mat4> G;
  double dt_used = 0.0;
  int halvings = 0;
};

/// One RK4 step of dG/dt = -2 Ric(G); interior nodes only on rectangles.
/// A step that breaks positive definiteness is retried with dt halved, up to
/// 8 times.
inline FlowStepResult flow_step(const Field<Mat4>& G, double t, double dt,
                                const FlowBoundary& bc = {},
                                const Field<Mat4>* background = nullptr) {
  require(dt > 0.0, "time step must be positive");
  for (int attempt = 0; attempt <= 8; ++attempt) {
    const double h = dt / std::pow(2.0, attempt);
    Field<Mat4> s = G;
    detail::apply_boundary(s, bc, t);
    const Field<Mat4> k1 = detail::ricci_rate(s, background);
    Field<Mat4> s2 = detail::axpy(s, 0.5 * h, k1);
    detail::apply_boundary(s2, bc, t + 0.5 * h);
    const Field<Mat4> k2 = detail::ricci_rate(s2, background);
    Field<Mat4> s3 = detail::axpy(s, 0.5 * h, k2);
    detail::apply_boundary(s3, bc, t + 0.5 * h);
    const Field<Mat4> k3 = detail::ricci_rate(s3, background);
    Field<Mat4> s4 = detail::axpy(s, h, k3);
    detail::apply_boundary(s4, bc, t + h);
    const Field<Mat4> k4 = detail::ricci_rate(s4, background);
    Field<Mat4> next = s;
    for (std::size_t k = 0; k < next.values.size(); ++k) {
      Mat4& m = next.values[k];
      m += h / 6.0 * (k1.values[k] + 2.0 * k2.values[k] + 2.0 * k3.values[k] + k4.values[k]);
      m = (0.5 * (m + m.transpose())).eval();
    }
    detail::apply_boundary(next, bc, t + h);
    if (detail::all_positive_definite(next)) return {next, h, attempt};
  }
  throw SolverError("flow step lost positive definiteness after 8 step halvings");
}

inline InvariantMetricData flow_step(const InvariantMetricData& d, double dt,
                                     const FlowBoundary& bc = {}) {
  return from_full_metric(flow_step(full_metric_field(d), 0.0, dt, bc).G, d.space);
}

// ---------------------------------------------------------------------------
// Defect integrals

namespace detail {

/// Trapezoid weights restricted to the working subdomain (interior nodes of
/// a rectangle, all nodes of a torus).
inline double quadrature_weight(const Grid& g, int i, int j) {
  if (g.periodic()) return g.hx * g.hy;
  if (g.on_boundary(i, j)) return 0.0;
  return g.hx * g.hy;
}

}  // namespace detail

struct DefectIntegrands {
  Field<Vec2> alpha;  ///< (1/w) g_Omega^{-1} <[X,Y], V>
  ScalarField omega;  ///< |[X,Y]^perp|^2 / w
  ScalarField w;      ///< |X ^ Y|^2 = det g_Sigma
};

inline DefectIntegrands defect_integrands(const InvariantMetricData& d) {
  const Grid& g = d.grid;
  const Field<Vec2> beta = bracket_field(d);
  DefectIntegrands D{Field<Vec2>(g, Vec2::Zero()), ScalarField(g, 0.0), ScalarField(g, 0.0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = d.gsigma.g.values[k].determinant();
    D.w.values[k] = w;
    const Mat2& go = d.gomega.values[k];
    if (!(w > 0.0) || !positive_definite(go)) continue;
    const Vec2 a = go.inverse() * beta.values[k] / w;
    D.alpha.values[k] = a;
    D.omega.values[k] = a.dot(go * a) * w;
  }
  return D;
}

/// Integral over the orbit space of sqrt(w) g^Omega_ij alpha^i alpha^j dvol
/// (the integral over M divided by 4 pi^2).
inline double polarity_defect(const InvariantMetricData& d) {
  const Grid& g = d.grid;
  const DefectIntegrands D = defect_integrands(d);
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double q = detail::quadrature_weight(g, i, j);
      if (q == 0.0) continue;
      const double w = D.w(i, j);
      const Vec2& a = D.alpha(i, j);
      s += q * std::sqrt(w) * a.dot(d.gomega(i, j) * a) * std::sqrt(w);
    }
  return s;
}

/// Integral of phi^-1 (g^Omega_12)^2 dvol_Sigma.
/// On rectangles the integrand is compared on the first two node rings next to
/// each side: growth by `growth` or more towards the side (1/r blow-up doubles)
/// means g12 does not vanish where phi does, and the integral diverges.
inline double diagonal_defect(const Mat2Field& go, const QuotientMetricSpec& gs,
                              double growth = 1.5) {
  const Grid& g = go.grid;
  const ScalarField phi = orbit_volume(go);
  ScalarField f(g, 0.0);
  double s = 0.0, fmax = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double q = detail::quadrature_weight(g, i, j);
      if (q == 0.0) continue;
      const double g12 = go(i, j)(0, 1);
      if (g12 == 0.0) continue;
      require<DegenerateMetric>(phi(i, j) > 0.0, "phi vanishes at an interior quadrature node");
      f(i, j) = g12 * g12 / phi(i, j);
      fmax = std::max(fmax, f(i, j));
      s += q * f(i, j) * std::sqrt(std::max(gs.g(i, j).determinant(), 0.0));
    }
  if (!g.periodic() && g.nx >= 7 && g.ny >= 7 && fmax > 0.0) {
    auto check = [&](int i1, int j1, int i2, int j2) {
      const double a = f(i1, j1), b = f(i2, j2);
      if (a > 1e-3 * fmax && a >= growth * b)
        throw InvalidInput("diagonal defect integrand is unbounded near the boundary at node (" +
                           std::to_string(i1) + "," + std::to_string(j1) + ")");
    };
    for (int i = 3; i < g.nx - 3; ++i) {
      check(i, 1, i, 2);
      check(i, g.ny - 2, i, g.ny - 3);
    }
    for (int j = 3; j < g.ny - 3; ++j) {
      check(1, j, 2, j);
      check(g.nx - 2, j, g.nx - 3, j);
    }
  }
  return s;
}

inline double diagonal_defect(const InvariantMetricData& d) {
  return diagonal_defect(d.gomega, d.gsigma);
}

/// Pointwise quantities whose sups define the damping constants.
struct CurvatureBounds {
  double ric_norm = 0.0;         ///< sup |Ric| (tensor norm)
  double log_w_rate = 0.0;       ///< sup |d_t w / w|, w = det g_Sigma
  double diagonal_source = -INFINITY;  ///< sup of -(5 tr Ric_VV - 4 tr Ric_XX + 4 Scal_Sigma - d_t log area)
};

inline CurvatureBounds curvature_bounds(const Field<Mat4>& G) {
  const Grid& g = G.grid;
  CurvatureBounds b;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      const CurvatureSample s = ricci_from_coordinates(G, i, j);
      const Mat4 gi = G(i, j).inverse();
      const Mat4 mixed = gi * s.ricci;
      b.ric_norm = std::max(b.ric_norm, std::sqrt((mixed * mixed.transpose()).trace()));
      const AdaptedBlocks ab = adapted_blocks(G(i, j), s.ricci);
      const Mat2 gsi = ab.gsigma.inverse();
      const double tr_xx = gsi.cwiseProduct(ab.ric_xx).sum();
      const double tr_vv = ab.gomega.inverse().cwiseProduct(ab.ric_vv).sum();
      // d_t g_Sigma = -2 Ric_XX in the horizontal basis
      b.log_w_rate = std::max(b.log_w_rate, std::abs(-2.0 * tr_xx));
      // Gauss curvature of the quotient metric from the decomposed field
      const auto gs_at = [&](int a, int c) {
        int aa = a, cc = c;
        if (g.periodic()) {
          aa = g.wrap_x(a);
          cc = g.wrap_y(c);
        }
        return decompose_block(G(aa, cc)).gsigma;
      };
      Jet<Mat2> J{ab.gsigma, Mat2::Zero(), Mat2::Zero(), Mat2::Zero(), Mat2::Zero(), Mat2::Zero()};
      {
        const Mat2 e = gs_at(i + 1, j), w = gs_at(i - 1, j), n = gs_at(i, j + 1), so = gs_at(i, j - 1);
        const Mat2 ne = gs_at(i + 1, j + 1), nw = gs_at(i - 1, j + 1), se = gs_at(i + 1, j - 1),
                   sw = gs_at(i - 1, j - 1);
        J.dx = (e - w) / (2 * g.hx);
        J.dy = (n - so) / (2 * g.hy);
        J.dxx = (e - 2 * ab.gsigma + w) / (g.hx * g.hx);
        J.dyy = (n - 2 * ab.gsigma + so) / (g.hy * g.hy);
        J.dxy = (ne - nw - se + sw) / (4 * g.hx * g.hy);
      }
      const double scal_sigma = 2.0 * SurfaceFrame::from_jet(J).K;
      const double log_area_rate = -tr_xx;
      b.diagonal_source = std::max(
          b.diagonal_source, -(5.0 * tr_vv - 4.0 * tr_xx + 4.0 * scal_sigma - log_area_rate));
    }
  return b;
}

// ---------------------------------------------------------------------------

struct FlowOptions {
  double T = 0.0;
  double dt = 0.0;
  FlowBoundary boundary;      ///< required on rectangles
  double slack = 1e-6;        ///< tolerance of the damped monotonicity checks
  double safety = 1.1;        ///< C = safety x measured bound
  bool keep_snapshots = true;
  /// Adds the DeTurck term with the initial metric as background. It leaves
  /// Einstein homotheties unchanged and damps the gauge modes that pinned
  /// rectangle boundaries otherwise excite.
  bool deturck = false;
};

struct FlowTrace {
  std::vector<double> t;
  std::vector<InvariantMetricData> snapshots;
  std::vector<double> polarity;
  std::vector<double> diagonal;
  std::vector<CurvatureBounds> bounds;
  std::vector<double> component_norm;  ///< sup of |G| entries
  double C_polarity = 0.0;   ///< damping constant of the polarity defect (rate 3C)
  double C_diagonal = 0.0;   ///< damping constant of the diagonal defect (rate C)
  double polarity_violation = 0.0;  ///< max increase of e^{-3Ct} P between steps
  double diagonal_violation = 0.0;  ///< max increase of e^{-Ct} D between steps
  bool polarity_monotone = false;
  bool diagonal_monotone = false;
  bool completed = false;
  std::string error;
};

/// Integrates the flow from t = 0 to T, recording the defect integrals and the
/// curvature bounds at every step; the damping constants are fixed afterwards
/// as safety x (max over the run), and the damped sequences are checked.
inline FlowTrace run_flow(const InvariantMetricData& d0, const FlowOptions& opt) {
  require(opt.T > 0.0 && opt.dt > 0.0, "flow time and step must be positive");
  d0.check_consistent();
  FlowTrace tr;
  Field<Mat4> G = full_metric_field(d0);
  double t = 0.0;
  auto record = [&](const Field<Mat4>& F, double time) {
    const InvariantMetricData d = from_full_metric(F, d0.space);
    tr.t.push_back(time);
    tr.polarity.push_back(polarity_defect(d));
    tr.diagonal.push_back(diagonal_defect(d));
    tr.bounds.push_back(curvature_bounds(F));
    double nm = 0.0;
    for (const Mat4& m : F.values) nm = std::max(nm, m.cwiseAbs().maxCoeff());
    tr.component_norm.push_back(nm);
    if (opt.keep_snapshots) tr.snapshots.push_back(d);
  };
  detail::apply_boundary(G, opt.boundary, 0.0);
  record(G, 0.0);
  double dt = opt.dt;
  const Field<Mat4> background = G;
  try {
    while (t < opt.T - 1e-12 * opt.T) {
      const double step = std::min(dt, opt.T - t);
      FlowStepResult r = flow_step(G, t, step, opt.boundary, opt.deturck ? &background : nullptr);
      G = std::move(r.G);
      t += r.dt_used;
      if (r.halvings > 0) dt = r.dt_used;
      record(G, t);
    }
    tr.completed = true;
  } catch (const Error& e) {
    tr.error = e.what();
  }
  double ric = 0.0, wr = 0.0, src = -INFINITY;
  for (const auto& b : tr.bounds) {
    ric = std::max(ric, b.ric_norm);
    wr = std::max(wr, b.log_w_rate);
    src = std::max(src, b.diagonal_source);
  }
  tr.C_polarity = opt.safety * std::max(ric, wr);
  tr.C_diagonal = opt.safety * std::max(src, 0.0);
  for (std::size_t n = 1; n < tr.t.size(); ++n) {
    const double p0 = std::exp(-3.0 * tr.C_polarity * tr.t[n - 1]) * tr.polarity[n - 1];
    const double p1 = std::exp(-3.0 * tr.C_polarity * tr.t[n]) * tr.polarity[n];
    const double q0 = std::exp(-tr.C_diagonal * tr.t[n - 1]) * tr.diagonal[n - 1];
    const double q1 = std::exp(-tr.C_diagonal * tr.t[n]) * tr.diagonal[n];
    tr.polarity_violation = std::max(tr.polarity_violation, p1 - p0);
    tr.diagonal_violation = std::max(tr.diagonal_violation, q1 - q0);
  }
  tr.polarity_monotone = tr.polarity_violation <= opt.slack;
  tr.diagonal_monotone = tr.diagonal_violation <= opt.slack;
  return tr;
}

/// Sup over the recorded times of max |G(t) - (1 - 2 Lambda t) G0|, relative to
/// (1 - 2 Lambda t) max |G0|.
inline double homothety_error(const FlowTrace& tr, const Field<Mat4>& G0, double lambda) {
  require(tr.snapshots.size() == tr.t.size(), "homothety check needs the flow snapshots");
  double scale = 0.0;
  for (const Mat4& M : G0.values) scale = std::max(scale, M.cwiseAbs().maxCoeff());
  double err = 0.0;
  for (std::size_t q = 0; q < tr.t.size(); ++q) {
    const double c = 1.0 - 2.0 * lambda * tr.t[q];
    const Field<Mat4> G = full_metric_field(tr.snapshots[q]);
    double e = 0.0;
    for (std::size_t k = 0; k < G.values.size(); ++k)
      e = std::max(e, (G.values[k] - c * G0.values[k]).cwiseAbs().maxCoeff());
    err = std::max(err, e / (c * scale));
  }
  return err;
}

}  // namespace t2inv
