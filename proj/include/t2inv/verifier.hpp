#pragma once

#include "t2inv/builtin.hpp"
#include "t2inv/core.hpp"
#include "t2inv/curvature.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/reduced.hpp"
#include "t2inv/solvers.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace t2inv {

/// Ricci tensor and metric in the adapted basis (X, Y, V1, V2), X and Y the
/// horizontal lifts of d_x and d_y.
struct AdaptedBlocks {
  Mat2 gsigma, gomega, C;
  Mat2 ric_xx, ric_xv, ric_vv;
};

inline Mat4 adapted_basis(const Mat2& C) {
  Mat4 B = Mat4::Identity();
  B.block<2, 2>(2, 0) = C.transpose();  // column s: e_s + C(s, k) e_{2+k}
  return B;
}

inline AdaptedBlocks adapted_blocks(const Mat4& G, const Mat4& Ric) {
  const BlockParts bp = decompose_block(G);
  const Mat4 B = adapted_basis(bp.C);
  const Mat4 R = B.transpose() * Ric * B;
  return {bp.gsigma, bp.gomega, bp.C, R.topLeftCorner<2, 2>(), R.topRightCorner<2, 2>(),
          R.bottomRightCorner<2, 2>()};
}

/// Orthonormal-frame components of a symmetric form T relative to a
/// positive definite metric g (Cholesky frame).
inline Mat2 frame_components(const Mat2& T, const Mat2& g) {
  const Eigen::LLT<Mat2> llt(g);
  require<DegenerateMetric>(llt.info() == Eigen::Success, "metric block is not positive definite");
  const Mat2 Li = llt.matrixL().solve(Mat2::Identity());
  return Li * T * Li.transpose();
}

inline Mat2 frame_components_mixed(const Mat2& T, const Mat2& g1, const Mat2& g2) {
  const Eigen::LLT<Mat2> l1(g1), l2(g2);
  require<DegenerateMetric>(l1.info() == Eigen::Success && l2.info() == Eigen::Success,
                            "metric block is not positive definite");
  const Mat2 L1 = l1.matrixL().solve(Mat2::Identity());
  const Mat2 L2 = l2.matrixL().solve(Mat2::Identity());
  return L1 * T * L2.transpose();
}

/// Which interior nodes enter the residual sups.
struct SamplingMargin {
  double fraction = 0.25;  ///< of each side length
  std::optional<double> h_multiple;  ///< overrides the fraction: k h from every side

  bool keep(const Grid& g, int i, int j) const {
    if (g.periodic()) return true;
    if (g.on_boundary(i, j)) return false;
    const double dx = std::min(i, g.nx - 1 - i) * g.hx;
    const double dy = std::min(j, g.ny - 1 - j) * g.hy;
    if (h_multiple) return dx >= *h_multiple * g.hx - 1e-12 && dy >= *h_multiple * g.hy - 1e-12;
    return dx >= fraction * g.lx - 1e-12 && dy >= fraction * g.ly - 1e-12;
  }
  std::string str() const {
    if (h_multiple) return std::to_string(*h_multiple) + "h";
    return std::to_string(fraction) + " of each side";
  }
};

struct DetObstruction {
  ScalarField field;     ///< det g^Omega - phi^2
  double sup_abs = 0.0;  ///< over interior nodes
  int i = 0, j = 0;      ///< argmax
};

/// det g^Omega - phi^2, which vanishes for Einstein data.
inline DetObstruction det_obstruction(const Mat2Field& go, const ScalarField& phi) {
  require(go.grid.same_shape(phi.grid), "orbit metric and phi must share one grid");
  const Grid& g = go.grid;
  DetObstruction d{ScalarField(g, 0.0)};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double v = go(i, j).determinant() - phi(i, j) * phi(i, j);
      d.field(i, j) = v;
      if (!g.on_boundary(i, j) && std::abs(v) > d.sup_abs) {
        d.sup_abs = std::abs(v);
        d.i = i;
        d.j = j;
      }
    }
  return d;
}

struct EinsteinReport {
  double lambda = 0.0;
  double h = 0.0;
  double tolerance = 0.0;  ///< 50 h^2
  std::string margin;
  std::size_t nodes = 0;
  double residual = 0.0;    ///< sup over sampled nodes of the frame norm of Ric - Lambda g
  double horizontal = 0.0;
  double vertical = 0.0;
  double mixed = 0.0;
  int worst_i = 0, worst_j = 0;
  double lambda_estimate = 0.0;  ///< mean of Scal / 4 over the sampled nodes
  std::optional<DetObstruction> det;
  ScalarField field;  ///< per-node residual, NaN where not sampled
  bool einstein = false;
  std::string verdict() const { return einstein ? "einstein" : "not_einstein"; }
};

inline double einstein_tolerance(double h) { return 50.0 * h * h; }

/// Sup of Ric - Lambda g over sampled interior nodes, split into the
/// horizontal, vertical and mixed blocks of an orthonormal adapted frame.
inline EinsteinReport einstein_residual(const InvariantMetricData& d, double lambda,
                                        const SamplingMargin& margin = {},
                                        const ScalarField* phi = nullptr) {
  require(lambda > 0.0, "the Einstein constant must be positive");
  d.check_consistent();
  const Grid& g = d.grid;
  EinsteinReport r;
  r.lambda = lambda;
  r.h = std::max(g.hx, g.hy);
  r.tolerance = einstein_tolerance(r.h);
  r.margin = margin.str();
  r.field = ScalarField(g, std::numeric_limits<double>::quiet_NaN());
  const Field<Mat4> G = full_metric_field(d);
  double scal_sum = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!margin.keep(g, i, j)) continue;
      const CurvatureSample s = ricci_from_coordinates(G, i, j);
      const AdaptedBlocks b = adapted_blocks(G(i, j), s.ricci);
      const double hz =
          frame_components(b.ric_xx - lambda * b.gsigma, b.gsigma).cwiseAbs().maxCoeff();
      const double vt =
          frame_components(b.ric_vv - lambda * b.gomega, b.gomega).cwiseAbs().maxCoeff();
      const double mx = frame_components_mixed(b.ric_xv, b.gsigma, b.gomega).cwiseAbs().maxCoeff();
      r.horizontal = std::max(r.horizontal, hz);
      r.vertical = std::max(r.vertical, vt);
      r.mixed = std::max(r.mixed, mx);
      const double tot = std::max({hz, vt, mx});
      r.field(i, j) = tot;
      if (tot >= r.residual) {
        r.residual = tot;
        r.worst_i = i;
        r.worst_j = j;
      }
      scal_sum += s.scalar;
      ++r.nodes;
    }
  require(r.nodes > 0, "sampling margin leaves no interior nodes");
  r.lambda_estimate = scal_sum / (4.0 * r.nodes);
  if (phi) r.det = det_obstruction(d.gomega, *phi);
  r.einstein = r.residual <= r.tolerance && r.mixed <= r.tolerance;
  return r;
}

inline EinsteinReport einstein_residual(const DiagonalMetricData& d, double lambda,
                                        const SamplingMargin& margin = {},
                                        const ScalarField* phi = nullptr) {
  return einstein_residual(d.to_invariant(), lambda, margin, phi);
}

// ---------------------------------------------------------------------------

struct SquareClassification {
  int p = 0;
  double lambda = 0.0;        ///< lambda1 / 2 of the discrete eigenpair
  double edge_lambda = 0.0;   ///< from shooting the edge ODE
  std::array<double, 3> entry_error{};  ///< sup |u - closed form| for g11, g12, g22
  double max_entry_error = 0.0;
  bool solutions_found = false;
  double det_sup = 0.0;       ///< sup interior |det g^Omega - phi^2|
  double det_center = 0.0;    ///< det g^Omega - phi^2 at the centre node
  double phi_scale = 1.0;     ///< edge normalization applied to the sup-normalized phi
  EinsteinReport einstein;
};

/// Runs the reduced Einstein pipeline on the square with labels
/// (1,0), (0,1), (1,0), (p,1) for each p.
inline std::vector<SquareClassification> classify_square_actions(const std::vector<int>& ps,
                                                                 int n, double match_tol = 1e-3) {
  require(n >= 9, "square classification needs at least 9 nodes per side");
  std::vector<SquareClassification> out;
  for (int p : ps) {
    const MetricModel model = square_family_model(p);
    const InvariantMetricData closed = sample(model, n);
    const Grid& g = closed.grid;
    SquareClassification c;
    c.p = p;
    const EigenResult ep = principal_eigenpair(closed.gsigma);
    c.lambda = ep.lambda1 / 2.0;
    const auto flat = [](double) { return 0.0; };
    c.edge_lambda = shoot_edge_eigenvalue(flat, model.space.lx);
    const EdgeODEResult ode = solve_edge_ode(flat, model.space.lx, c.edge_lambda, n);
    const double dt = ode.t[1] - ode.t[0];
    const std::function<double(double)> d0 = [ode, dt](double t) {
      const double s = t / dt;
      const auto k = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, double(ode.d0.size() - 2)));
      const double w = s - k;
      return (1 - w) * ode.d0[k] + w * ode.d0[k + 1];
    };
    std::vector<std::function<double(double)>> traces(model.space.edges.size(), d0);
    const std::vector<std::function<double(double)>> roots(
        model.space.edges.size(), [d0](double t) { return std::sqrt(std::max(d0(t), 0.0)); });
    ScalarField phi = ep.phi;
    const double scale = edge_normalization(
        phi, closed.gsigma, model.space, edge_profile_field(model.space, g, roots));
    for (double& v : phi.values) v *= scale;
    c.phi_scale = scale;
    InvariantMetricData solved = closed;
    const int ent[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int e = 0; e < 3; ++e) {
      const int a = ent[e][0], b = ent[e][1];
      const DriftPDEProblem P{closed.gsigma, phi, c.lambda,
                              slope_boundary_trace(model.space, g, a, b, traces)};
      const DriftSolution s = solve_drift_pde(P);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double u = s.u.values[k];
        c.entry_error[e] = std::max(c.entry_error[e], std::abs(u - closed.gomega.values[k](a, b)));
        solved.gomega.values[k](a, b) = u;
        solved.gomega.values[k](b, a) = u;
      }
    }
    c.max_entry_error = *std::max_element(c.entry_error.begin(), c.entry_error.end());
    c.solutions_found = c.max_entry_error <= match_tol;
    const DetObstruction det = det_obstruction(solved.gomega, phi);
    c.det_sup = det.sup_abs;
    c.det_center = det.field(g.nx / 2, g.ny / 2);
    c.einstein = einstein_residual(solved, c.lambda, SamplingMargin{}, &phi);
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ScalarIdentity {
  ScalarField scal;          ///< coordinate engine
  ScalarField formula_residual;  ///< Scal - (Scal_Sigma - 2 Lap phi / phi + |H|^2 - |B|^2)
  ScalarField einstein_combination;  ///< Scal_Sigma + |H|^2 - |B|^2
  double sup_formula = 0.0;
  double sup_combination = 0.0;
  double mean_scal = 0.0;
};

/// Both scalar identities on interior nodes kept by the margin (NaN elsewhere).
inline ScalarIdentity scalar_identity_check(const InvariantMetricData& d,
                                            const SamplingMargin& margin = {}) {
  require(d.polar(), "scalar identity check needs polar data");
  const Grid& g = d.grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ScalarIdentity r{ScalarField(g, nan), ScalarField(g, nan), ScalarField(g, nan)};
  const Field<Mat4> G = full_metric_field(d);
  const ScalarField phi = orbit_volume(d.gomega);
  std::size_t cnt = 0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!margin.keep(g, i, j)) continue;
      const PolarRicciPoint p = polar_ricci_point(node_jet(d.gsigma.g, i, j),
                                                  node_jet(d.gomega, i, j), node_jet(phi, i, j));
      const double scal = ricci_from_coordinates(G, i, j).scalar;
      r.scal(i, j) = scal;
      r.formula_residual(i, j) = scal - p.scal;
      r.einstein_combination(i, j) = p.scal_sigma + p.norm_h2 - p.norm_b2;
      r.sup_formula = std::max(r.sup_formula, std::abs(r.formula_residual(i, j)));
      r.sup_combination = std::max(r.sup_combination, std::abs(r.einstein_combination(i, j)));
      r.mean_scal += scal;
      ++cnt;
    }
  require(cnt > 0, "sampling margin leaves no interior nodes");
  r.mean_scal /= cnt;
  return r;
}

}  // namespace t2inv
