#pragma once

#include "t2inv/builtin.hpp"
#include "t2inv/core.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/orbit_space.hpp"
#include "t2inv/reduced.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace t2inv {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct EigenResult {
  double lambda1 = 0.0;
  ScalarField phi;        ///< sup phi = 1, zero on the boundary
  double residual = 0.0;  ///< sup |Lap phi + lambda1 phi| over interior nodes
  int iterations = 0;
  double lambda_change = 0.0;  ///< last eigenvalue update
};

namespace detail {

/// Interior unknown numbering of a rectangle grid (-1 on boundary nodes).
struct InteriorIndex {
  std::vector<int> id;
  std::vector<std::size_t> node;

  explicit InteriorIndex(const Grid& g) : id(g.size(), -1) {
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (!g.on_boundary(i, j)) {
          id[g.index(i, j)] = static_cast<int>(node.size());
          node.push_back(g.index(i, j));
        }
  }
  int size() const { return static_cast<int>(node.size()); }
};

/// Coefficients of -d_a(A^ab d_b u) + c u in divergence form on a rectangle.
/// A^ab = sqrt(g) g^ab / w with weight w; half-node values average the
/// numerator and the weight separately so a weight vanishing on the boundary
/// stays finite in between.
struct DivergenceOperator {
  Grid grid;
  std::vector<double> axx, ayy, axy;  ///< sqrt(g) g^ab at nodes
  std::vector<double> w;              ///< weight at nodes
  std::vector<double> c;              ///< zeroth-order coefficient at nodes

  double half_x(int i, int j) const {  // between i and i+1
    const std::size_t a = grid.index(i, j), b = grid.index(i + 1, j);
    return 0.5 * (axx[a] + axx[b]) / (0.5 * (w[a] + w[b]));
  }
  double half_y(int i, int j) const {
    const std::size_t a = grid.index(i, j), b = grid.index(i, j + 1);
    return 0.5 * (ayy[a] + ayy[b]) / (0.5 * (w[a] + w[b]));
  }
  double cross(int i, int j) const {
    const std::size_t a = grid.index(i, j);
    if (axy[a] == 0.0) return 0.0;
    require(w[a] > 0.0,
            "off-diagonal quotient metric needs a positive weight next to the boundary");
    return axy[a] / w[a];
  }

  /// Row of node (i, j) as (neighbour node, coefficient) pairs.
  template <class Emit>
  void row(int i, int j, Emit&& emit) const {
    const Grid& g = grid;
    const double hx2 = g.hx * g.hx, hy2 = g.hy * g.hy;
    const double e = half_x(i, j) / hx2, wv = half_x(i - 1, j) / hx2;
    const double n = half_y(i, j) / hy2, s = half_y(i, j - 1) / hy2;
    emit(g.index(i, j), e + wv + n + s + c[g.index(i, j)]);
    emit(g.index(i + 1, j), -e);
    emit(g.index(i - 1, j), -wv);
    emit(g.index(i, j + 1), -n);
    emit(g.index(i, j - 1), -s);
    const double q = 1.0 / (4.0 * g.hx * g.hy);
    const double ce = cross(i + 1, j), cw = cross(i - 1, j);
    const double cn = cross(i, j + 1), cs = cross(i, j - 1);
    if (ce != 0.0 || cw != 0.0 || cn != 0.0 || cs != 0.0) {
      // -d_x(A d_y u) - d_y(A d_x u)
      emit(g.index(i + 1, j + 1), -q * (ce + cn));
      emit(g.index(i + 1, j - 1), q * (ce + cs));
      emit(g.index(i - 1, j + 1), q * (cw + cn));
      emit(g.index(i - 1, j - 1), -q * (cw + cs));
    }
  }
};

inline DivergenceOperator laplace_coefficients(const QuotientMetricSpec& gs) {
  const Grid& g = gs.g.grid;
  DivergenceOperator op{g, std::vector<double>(g.size()), std::vector<double>(g.size()),
                        std::vector<double>(g.size()), std::vector<double>(g.size(), 1.0),
                        std::vector<double>(g.size(), 0.0)};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Mat2& m = gs.g.values[k];
    const double det = m.determinant();
    require<DegenerateMetric>(det >= 0.0, "quotient metric has negative determinant");
    const double sg = std::sqrt(det);
    if (sg == 0.0) {
      // collapsed side: only reached through half-node averages in x
      op.axx[k] = 0.0;
      op.ayy[k] = 0.0;
      op.axy[k] = 0.0;
      continue;
    }
    const Mat2 gi = m.inverse();
    op.axx[k] = sg * gi(0, 0);
    op.ayy[k] = sg * gi(1, 1);
    op.axy[k] = sg * gi(0, 1);
  }
  return op;
}

inline std::vector<double> area_density(const QuotientMetricSpec& gs) {
  std::vector<double> m(gs.g.values.size());
  for (std::size_t k = 0; k < m.size(); ++k)
    m[k] = std::sqrt(std::max(gs.g.values[k].determinant(), 0.0));
  return m;
}

/// Sparse factorization with an iterative fallback.
struct LinearSolver {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  SparseMatrix A;
  bool direct = false;

  explicit LinearSolver(SparseMatrix M) : A(std::move(M)) {
    A.makeCompressed();
    lu.analyzePattern(A);
    lu.factorize(A);
    direct = lu.info() == Eigen::Success;
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
    if (direct) {
      Eigen::VectorXd x = lu.solve(b);
      if (lu.info() == Eigen::Success && x.allFinite()) return x;
    }
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(1e-10);
    it.setMaxIterations(20000);
    it.compute(A);
    Eigen::VectorXd x = it.solve(b);
    if (it.info() != Eigen::Success || !x.allFinite())
      throw SolverError("linear system is singular: direct and iterative solves both failed");
    return x;
  }
};

}  // namespace detail

/// Discrete Laplace-Beltrami operator applied at interior nodes (NaN elsewhere).
inline ScalarField laplace_beltrami(const QuotientMetricSpec& gs, const ScalarField& f) {
  const Grid& g = gs.g.grid;
  require(f.grid.same_shape(g), "field and metric must share one grid");
  const auto op = detail::laplace_coefficients(gs);
  const auto m = detail::area_density(gs);
  ScalarField out(g, std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      double v = 0.0;
      op.row(i, j, [&](std::size_t n, double c) { v += c * f.values[n]; });
      out(i, j) = -v / m[g.index(i, j)];
    }
  return out;
}

/// Smallest Dirichlet eigenvalue of -Lap on a rectangle and its positive
/// eigenfunction, by inverse iteration on the generalized problem K f = l M f.
inline EigenResult principal_eigenpair(const QuotientMetricSpec& gs, double tol = 1e-10,
                                       int max_iterations = 10000) {
  const Grid& g = gs.g.grid;
  require(!g.periodic(), "principal eigenpair needs a rectangle domain with Dirichlet sides");
  require(tol > 0.0 && max_iterations > 0, "eigen tolerance and iteration cap must be positive");
  const auto op = detail::laplace_coefficients(gs);
  const auto mass = detail::area_density(gs);
  const detail::InteriorIndex idx(g);
  const int n = idx.size();
  require(n > 0, "grid has no interior nodes");

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n) * 9);
  for (int r = 0; r < n; ++r) {
    const std::size_t node = idx.node[r];
    const int i = static_cast<int>(node % g.nx), j = static_cast<int>(node / g.nx);
    require<DegenerateMetric>(mass[node] > 0.0, "quotient metric degenerates at an interior node");
    op.row(i, j, [&](std::size_t nb, double c) {
      const int col = idx.id[nb];
      if (col >= 0 && c != 0.0) trip.emplace_back(r, col, c);
    });
  }
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  detail::LinearSolver solver(K);

  Eigen::VectorXd M(n), f(n);
  for (int r = 0; r < n; ++r) {
    const std::size_t node = idx.node[r];
    M(r) = mass[node];
    const double x = (g.x(static_cast<int>(node % g.nx)) - g.x0) / g.lx;
    const double y = (g.y(static_cast<int>(node / g.nx)) - g.y0) / g.ly;
    f(r) = x * (1 - x) * y * (1 - y);  // positive start, no sign changes
  }
  auto rayleigh = [&](const Eigen::VectorXd& v) {
    return v.dot(K * v) / v.dot(M.cwiseProduct(v));
  };
  double lambda = rayleigh(f);
  EigenResult res;
  for (int it = 1; it <= max_iterations; ++it) {
    f = solver.solve(M.cwiseProduct(f));
    f /= f.cwiseAbs().maxCoeff();
    const double next = rayleigh(f);
    res.lambda_change = std::abs(next - lambda);
    lambda = next;
    res.iterations = it;
    if (res.lambda_change < tol) break;
    if (it == max_iterations)
      throw SolverError("inverse iteration did not converge within " +
                        std::to_string(max_iterations) + " iterations");
  }
  if (f.sum() < 0) f = -f;
  f /= f.maxCoeff();
  res.lambda1 = lambda;
  res.phi = ScalarField(g, 0.0);
  for (int r = 0; r < n; ++r) res.phi.values[idx.node[r]] = f(r);
  const Eigen::VectorXd Kf = K * f;
  for (int r = 0; r < n; ++r)
    res.residual = std::max(res.residual, std::abs(-Kf(r) / M(r) + lambda * f(r)));
  return res;
}

// ---------------------------------------------------------------------------
// Edge ODE

struct EdgeODEResult {
  double length = 0.0;
  double lambda = 0.0;
  std::vector<double> t;
  std::vector<double> sqrt_d0;
  std::vector<double> d0;
  double end_value = 0.0;       ///< sqrt(d0)(l), should be 0
  double end_slope = 0.0;       ///< d sqrt(d0)/dt at l, should be -1
  double residual = 0.0;        ///< sup |f'' - (2 sec - Lambda) f| by 5-point differences
  bool consistent = false;
};

namespace detail {

/// RK4 for f'' = (2 sec(t) - Lambda) f from f(0) = 0, f'(0) = 1.
inline void integrate_edge(const std::function<double(double)>& sec, double l, double lambda,
                           int steps, std::vector<double>* values, double& f_end,
                           double& df_end) {
  const double h = l / steps;
  double f = 0.0, df = 1.0, t = 0.0;
  auto acc = [&](double tt, double ff) { return (2.0 * sec(tt) - lambda) * ff; };
  if (values) values->assign(1, 0.0);
  for (int k = 0; k < steps; ++k) {
    const double k1f = df, k1d = acc(t, f);
    const double k2f = df + 0.5 * h * k1d, k2d = acc(t + 0.5 * h, f + 0.5 * h * k1f);
    const double k3f = df + 0.5 * h * k2d, k3d = acc(t + 0.5 * h, f + 0.5 * h * k2f);
    const double k4f = df + h * k3d, k4d = acc(t + h, f + h * k3f);
    f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
    df += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
    t += h;
    if (values) values->push_back(f);
  }
  f_end = f;
  df_end = df;
}

}  // namespace detail

/// Solves -f''/f + 2 sec = Lambda with f = sqrt(d0), f(0) = 0, f'(0) = 1 and
/// checks the far-end conditions f(l) = 0, f'(l) = -1. Throws SolverError
/// when (sec, l, Lambda) are incompatible.
inline EdgeODEResult solve_edge_ode(const std::function<double(double)>& sec, double l,
                                    double lambda, int samples = 1025, double tol = 1e-6,
                                    int substeps = 8) {
  require(l > 0.0, "edge length must be positive");
  require(samples >= 5 && substeps >= 1, "edge ODE needs at least 5 samples");
  EdgeODEResult r;
  r.length = l;
  r.lambda = lambda;
  std::vector<double> fine;
  const int steps = (samples - 1) * substeps;
  detail::integrate_edge(sec, l, lambda, steps, &fine, r.end_value, r.end_slope);
  const double h = l / (samples - 1);
  for (int k = 0; k < samples; ++k) {
    r.t.push_back(k * h);
    const double f = fine[static_cast<std::size_t>(k) * substeps];
    r.sqrt_d0.push_back(f);
    r.d0.push_back(f * f);
  }
  const double hf = l / steps;
  for (int k = 2; k + 2 <= steps; ++k) {
    const double fpp = (-fine[k - 2] + 16 * fine[k - 1] - 30 * fine[k] + 16 * fine[k + 1] -
                        fine[k + 2]) / (12 * hf * hf);
    r.residual = std::max(r.residual, std::abs(fpp - (2.0 * sec(k * hf) - lambda) * fine[k]));
  }
  r.consistent = std::abs(r.end_value) <= tol && std::abs(r.end_slope + 1.0) <= tol;
  if (!r.consistent)
    throw SolverError("edge ODE endpoint conditions inconsistent: sqrt(d0)(l) = " +
                      std::to_string(r.end_value) + ", slope " + std::to_string(r.end_slope) +
                      " (expected 0 and -1); Lambda, length and curvature are incompatible");
  return r;
}

/// The Lambda for which the solution from f(0) = 0, f'(0) = 1 first returns
/// to zero exactly at t = l (bisection on the first zero).
inline double shoot_edge_eigenvalue(const std::function<double(double)>& sec, double l,
                                    int steps = 8192, double tol = 1e-13) {
  require(l > 0.0, "edge length must be positive");
  double smin = INFINITY;
  for (int k = 0; k <= 64; ++k) smin = std::min(smin, sec(l * k / 64.0));
  // Sturm comparison: the first zero moves left as Lambda grows
  auto zero_before_end = [&](double lam) {
    const double h = l / steps;
    double f = 0.0, df = 1.0, t = 0.0;
    auto acc = [&](double tt, double ff) { return (2.0 * sec(tt) - lam) * ff; };
    for (int k = 0; k < steps; ++k) {
      const double k1f = df, k1d = acc(t, f);
      const double k2f = df + 0.5 * h * k1d, k2d = acc(t + 0.5 * h, f + 0.5 * h * k1f);
      const double k3f = df + 0.5 * h * k2d, k3d = acc(t + 0.5 * h, f + 0.5 * h * k2f);
      const double k4f = df + h * k3d, k4d = acc(t + h, f + h * k3f);
      f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
      df += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
      t += h;
      if (f <= 0.0) return true;
    }
    return false;
  };
  double lo = 2.0 * smin, hi = lo + 1.0;
  while (!zero_before_end(hi)) {
    hi = lo + 2.0 * (hi - lo);
    require<SolverError>(hi < 1e12, "edge eigenvalue bracket diverged");
  }
  while (hi - lo > tol * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    (zero_before_end(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Drift PDE

struct DriftPDEProblem {
  QuotientMetricSpec gsigma;
  ScalarField phi;       ///< positive on interior nodes
  double lambda = 0.0;
  ScalarField boundary;  ///< Dirichlet values, read on boundary nodes only
};

struct DriftSolution {
  ScalarField u;
  double residual = 0.0;  ///< scaled linear-system residual
  bool direct = true;     ///< false when the iterative fallback was used
};

/// Gauss curvature of the quotient metric at interior nodes (0 elsewhere).
inline ScalarField quotient_curvature(const QuotientMetricSpec& gs) {
  const Grid& g = gs.g.grid;
  ScalarField K(g, 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      K(i, j) = SurfaceFrame::from_jet(node_jet(gs.g, i, j)).K;
    }
  return K;
}

/// -1/2 Lap u + (1/2 phi) <grad phi, grad u> + 2 sec u = Lambda u with
/// Dirichlet data, in the weighted divergence form
/// -d_a(sqrt(g) g^ab phi^-1 d_b u) + 2 (2 sec - Lambda) sqrt(g) phi^-1 u = 0.
inline DriftSolution solve_drift_pde(const DriftPDEProblem& P) {
  const Grid& g = P.gsigma.g.grid;
  require(!g.periodic(), "drift PDE is posed on a rectangle");
  require(P.phi.grid.same_shape(g) && P.boundary.grid.same_shape(g),
          "drift problem fields must share one grid");
  auto op = detail::laplace_coefficients(P.gsigma);
  const auto mass = detail::area_density(P.gsigma);
  const ScalarField K = quotient_curvature(P.gsigma);
  op.w = P.phi.values;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      const std::size_t k = g.index(i, j);
      require<DegenerateMetric>(P.phi.values[k] > 0.0,
                                "phi must be positive at interior node (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      op.c[k] = 2.0 * (2.0 * K.values[k] - P.lambda) * mass[k] / P.phi.values[k];
    }
  const detail::InteriorIndex idx(g);
  const int n = idx.size();
  std::vector<Triplet> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < n; ++r) {
    const std::size_t node = idx.node[r];
    const int i = static_cast<int>(node % g.nx), j = static_cast<int>(node / g.nx);
    op.row(i, j, [&](std::size_t nb, double c) {
      const int col = idx.id[nb];
      if (col >= 0) {
        if (c != 0.0) trip.emplace_back(r, col, c);
      } else {
        b(r) -= c * P.boundary.values[nb];
      }
    });
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  detail::LinearSolver solver(A);
  const Eigen::VectorXd x = solver.solve(b);

  DriftSolution s;
  s.direct = solver.direct;
  s.u = ScalarField(g, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) s.u.values[k] = P.boundary.values[k];
  for (int r = 0; r < n; ++r) s.u.values[idx.node[r]] = x(r);
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  s.residual = (A * x - b).cwiseAbs().maxCoeff() / scale;
  if (s.residual > 1e-8)
    throw SolverError("drift PDE solve left scaled residual " + std::to_string(s.residual));
  return s;
}

/// Pointwise residual of the drift equation for a given field, in
/// non-divergence form (interior nodes; NaN elsewhere).
inline ScalarField drift_residual(const QuotientMetricSpec& gs, const ScalarField& phi,
                                  double lambda, const ScalarField& u) {
  const Grid& g = gs.g.grid;
  ScalarField out(g, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      const SurfaceFrame S = SurfaceFrame::from_jet(node_jet(gs.g, i, j));
      const Jet<double> U = node_jet(u, i, j), F = node_jet(phi, i, j);
      require<DegenerateMetric>(F.v > 0.0, "phi vanishes at an interior node");
      out(i, j) = -0.5 * S.laplacian(U) + S.dot(S.grad(F), S.grad(U)) / (2.0 * F.v) +
                  (2.0 * S.K - lambda) * U.v;
    }
  return out;
}

/// Dirichlet data of the orbit-metric entry (a, b) along labelled edges:
/// an edge with slope (p, q) carries [[q^2, pq], [pq, p^2]] d0(t), t the
/// arclength from the start of the side. Unlabelled sides get zero.
inline ScalarField slope_boundary_trace(const OrbitSpace& space, const Grid& g, int a, int b,
                                        const std::vector<std::function<double(double)>>& d0) {
  require(d0.size() == space.edges.size(), "one d0 profile per edge is required");
  require(a >= 0 && a < 2 && b >= 0 && b < 2, "orbit metric entry index out of range");
  ScalarField f(g, 0.0);
  for (std::size_t k = 0; k < space.edges.size(); ++k) {
    const Slope s = space.edges[k];
    const double P = static_cast<double>(s.p), Q = static_cast<double>(s.q);
    Mat2 M;
    M << Q * Q, P * Q, P * Q, P * P;
    const Side side = space.edge_side(k);
    const bool along_x = side == Side::bottom || side == Side::top;
    for (std::size_t node : g.side_nodes(side)) {
      const int i = static_cast<int>(node % g.nx), j = static_cast<int>(node / g.nx);
      const double t = along_x ? g.x(i) - g.x0 : g.y(j) - g.y0;
      f.values[node] = M(a, b) * d0[k](t);
    }
  }
  return f;
}

/// Per-edge profiles f_k(t) written onto the labelled side nodes (zero elsewhere),
/// t the arclength from the start of the side.
inline ScalarField edge_profile_field(const OrbitSpace& space, const Grid& g,
                                      const std::vector<std::function<double(double)>>& f) {
  require(f.size() == space.edges.size(), "one profile per edge is required");
  ScalarField out(g, 0.0);
  for (std::size_t k = 0; k < space.edges.size(); ++k) {
    const Side side = space.edge_side(k);
    const bool along_x = side == Side::bottom || side == Side::top;
    for (std::size_t node : g.side_nodes(side)) {
      const int i = static_cast<int>(node % g.nx), j = static_cast<int>(node / g.nx);
      out.values[node] = f[k](along_x ? g.x(i) - g.x0 : g.y(j) - g.y0);
    }
  }
  return out;
}

/// Scale c such that |grad(c phi)| matches sqrt(d0) along the labelled edges
/// in least squares. The eigenfunction is only fixed up to scale; this is the
/// scale for which det g^Omega = phi^2 can hold. `sqrt_d0` is read on labelled
/// side nodes; side end nodes are skipped.
inline double edge_normalization(const ScalarField& phi, const QuotientMetricSpec& gs,
                                 const OrbitSpace& space, const ScalarField& sqrt_d0) {
  const Grid& g = phi.grid;
  require(!g.periodic() && g.nx >= 5 && g.ny >= 5, "edge normalization needs a rectangle, 5+ nodes a side");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < space.edges.size(); ++k) {
    const Side side = space.edge_side(k);
    const auto nodes = g.side_nodes(side);
    const bool along_x = side == Side::bottom || side == Side::top;
    for (std::size_t q = 1; q + 1 < nodes.size(); ++q) {
      const int i = static_cast<int>(nodes[q] % g.nx), j = static_cast<int>(nodes[q] / g.nx);
      // one-sided fourth-order inward difference
      const int di = side == Side::left ? 1 : side == Side::right ? -1 : 0;
      const int dj = side == Side::bottom ? 1 : side == Side::top ? -1 : 0;
      const double h = along_x ? g.hy : g.hx;
      auto f = [&](int m) { return phi(i + m * di, j + m * dj); };
      const double dn = (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h);
      const Mat2 ginv = gs.g(i, j).inverse();
      const double gnn = along_x ? ginv(1, 1) : ginv(0, 0);
      if (!std::isfinite(gnn) || gnn <= 0.0) continue;
      const double a = std::abs(dn) * std::sqrt(gnn);
      num += a * sqrt_d0(i, j);
      den += a * a;
    }
  }
  require<SolverError>(den > 0.0, "eigenfunction has no slope on the labelled edges");
  return num / den;
}

// ---------------------------------------------------------------------------
// Geodesic identity and maximum-principle witness

/// sec - D^-1/2 (sqrt D)'' + det(dG/ds) / (2 D) - Lambda along a unit-speed
/// geodesic sampled with spacing ds (D = det g^Omega). Endpoints are NaN.
inline std::vector<double> geodesic_residual(const std::vector<Mat2>& go,
                                             const std::vector<double>& sec, double ds,
                                             double lambda) {
  require(go.size() == sec.size() && go.size() >= 3, "geodesic samples need matching lengths");
  require(ds > 0.0, "arclength spacing must be positive");
  const std::size_t n = go.size();
  std::vector<double> root(n), out(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < n; ++k) root[k] = std::sqrt(std::max(go[k].determinant(), 0.0));
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double D = go[k].determinant();
    if (!(D > 0.0)) throw DegenerateMetric("orbit determinant vanishes on the geodesic");
    const double rpp = (root[k + 1] - 2 * root[k] + root[k - 1]) / (ds * ds);
    const Mat2 dG = (go[k + 1] - go[k - 1]) / (2 * ds);
    out[k] = sec[k] - rpp / root[k] + dG.determinant() / (2 * D) - lambda;
  }
  return out;
}

struct GeodesicSamples {
  std::vector<Vec2> points;
  std::vector<Mat2> gomega;
  std::vector<double> sec;
  double ds = 0.0;
};

/// Integrates a unit-speed geodesic of the model's quotient metric with RK4
/// and samples g^Omega and the Gauss curvature along it.
inline GeodesicSamples trace_geodesic(const MetricModel& m, Vec2 start, Vec2 direction,
                                      double length, int samples, double fd_step = 1e-4) {
  require(samples >= 3 && length > 0.0, "geodesic needs a positive length and 3 samples");
  GeodesicSamples G;
  G.ds = length / (samples - 1);
  auto gamma = [&](const Vec2& p) {
    const SurfaceFrame S = SurfaceFrame::from_jet(analytic_jet(m.gsigma, p.x(), p.y(), fd_step));
    return S;
  };
  const Mat2 g0 = m.gsigma(start.x(), start.y());
  direction /= std::sqrt(direction.dot(g0 * direction));
  auto rhs = [&](const Vec4& s) {
    const SurfaceFrame S = gamma(s.head<2>());
    Vec4 d;
    d.head<2>() = s.tail<2>();
    for (int k = 0; k < 2; ++k) {
      double a = 0.0;
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) a -= S.gam[k][p][q] * s(2 + p) * s(2 + q);
      d(2 + k) = a;
    }
    return d;
  };
  Vec4 s;
  s << start, direction;
  const int sub = 8;
  const double h = G.ds / sub;
  for (int k = 0; k < samples; ++k) {
    const Vec2 p = s.head<2>();
    G.points.push_back(p);
    G.gomega.push_back(m.gomega(p.x(), p.y()));
    G.sec.push_back(gamma(p).K);
    if (k + 1 == samples) break;
    for (int r = 0; r < sub; ++r) {
      const Vec4 k1 = rhs(s), k2 = rhs(s + 0.5 * h * k1), k3 = rhs(s + 0.5 * h * k2),
                 k4 = rhs(s + h * k3);
      s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return G;
}

struct WitnessResult {
  ScalarField w;
  int i = 0, j = 0;
  double max_abs = 0.0;
  bool on_boundary = false;
};

/// w = u / u0 with boundary values where both vanish taken as the limit
/// along the inward normal (linear extrapolation from the two inner nodes).
inline WitnessResult maximum_principle_witness(const ScalarField& u, const ScalarField& u0,
                                               double zero_tol = 1e-12) {
  const Grid& g = u.grid;
  require(u0.grid.same_shape(g), "u and u0 must share one grid");
  WitnessResult r;
  r.w = ScalarField(g, 0.0);
  const double scale = std::max(1.0, *std::max_element(u0.values.begin(), u0.values.end()));
  auto ratio = [&](int i, int j) -> std::optional<double> {
    const double d = u0(i, j);
    if (std::abs(d) > zero_tol * scale) return u(i, j) / d;
    return std::nullopt;
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (g.on_boundary(i, j)) continue;
      const auto v = ratio(i, j);
      if (!v) throw DegenerateMetric("u0 vanishes at interior node (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
      r.w(i, j) = *v;
    }
  if (!g.periodic()) {
    auto clampi = [&](int i) { return std::clamp(i, 1, g.nx - 2); };
    auto clampj = [&](int j) { return std::clamp(j, 1, g.ny - 2); };
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!g.on_boundary(i, j)) continue;
        if (const auto v = ratio(i, j)) {
          r.w(i, j) = *v;
          continue;
        }
        // inward direction(s); corners average both normals
        double sum = 0.0;
        int cnt = 0;
        const int di = i == 0 ? 1 : (i == g.nx - 1 ? -1 : 0);
        const int dj = j == 0 ? 1 : (j == g.ny - 1 ? -1 : 0);
        if (di != 0 && g.nx >= 5) {
          const int jj = clampj(j);
          sum += 2 * r.w(i + di, jj) - r.w(i + 2 * di, jj);
          ++cnt;
        }
        if (dj != 0 && g.ny >= 5) {
          const int ii = clampi(i);
          sum += 2 * r.w(ii, j + dj) - r.w(ii, j + 2 * dj);
          ++cnt;
        }
        r.w(i, j) = cnt ? sum / cnt : 0.0;
      }
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (std::abs(r.w(i, j)) > r.max_abs) {
        r.max_abs = std::abs(r.w(i, j));
        r.i = i;
        r.j = j;
      }
  r.on_boundary = g.on_boundary(r.i, r.j);
  return r;
}

}  // namespace t2inv
