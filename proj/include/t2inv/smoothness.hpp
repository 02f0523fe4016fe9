#pragma once

#include "t2inv/builtin.hpp"
#include "t2inv/core.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace t2inv {

struct ConditionResult {
  std::string name;
  std::string location;
  bool pass = false;
  double measured = 0.0;   ///< worst offending coefficient (or the checked value)
  double tolerance = 0.0;
};

struct SmoothnessReport {
  std::vector<ConditionResult> conditions;

  bool pass() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return true;
  }
  std::vector<std::string> failed_names() const {
    std::vector<std::string> out;
    for (const auto& c : conditions)
      if (!c.pass) out.push_back(c.name);
    return out;
  }
  bool failed(const std::string& name) const {
    for (const auto& c : conditions)
      if (!c.pass && c.name == name) return true;
    return false;
  }
  void append(const SmoothnessReport& o) {
    conditions.insert(conditions.end(), o.conditions.begin(), o.conditions.end());
  }
};

struct SmoothnessOptions {
  double C = 10.0;   ///< tolerance constant: |coefficient| <= C h^2
  int max_order = 4; ///< highest (total) Taylor order that is checked
};

/// Profiles on the one-sided stations r_k = k h, k = 0..K-1, at fixed t.
struct EdgeProfiles {
  double h = 0.0;
  std::vector<double> mu2, a2, b, d2, c11, c12, c21, c22;
};

/// Samples on the stations (r_k, t_l) = (k h, l h), stored with index k*K + l.
struct VertexSamples {
  double h = 0.0;
  int K = 0;
  std::vector<double> mu2, a2, b, d2, c11, c12, c21, c22;
};

namespace detail {

/// Taylor coefficients c_0..c_{K-1} of the interpolating polynomial through (k h, f_k).
inline Eigen::VectorXd taylor_fit(const std::vector<double>& f, double h) {
  const int K = static_cast<int>(f.size());
  Eigen::MatrixXd V(K, K);
  Eigen::VectorXd rhs(K);
  for (int k = 0; k < K; ++k) {
    rhs(k) = f[k];
    for (int m = 0; m < K; ++m) V(k, m) = std::pow(static_cast<double>(k), m);
  }
  Eigen::VectorXd c = V.fullPivLu().solve(rhs);
  for (int m = 0; m < K; ++m) c(m) /= std::pow(h, m);
  return c;
}

/// Tensor-product Taylor coefficients c_{kl} (coefficient of r^k t^l).
inline Eigen::MatrixXd taylor_fit2(const std::vector<double>& f, int K, double h) {
  Eigen::MatrixXd V(K, K);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < K; ++m) V(k, m) = std::pow(static_cast<double>(k), m);
  Eigen::MatrixXd F(K, K);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) F(k, l) = f[k * K + l];
  const auto lu = V.fullPivLu();
  // F = V Cs V^T  =>  Cs = V^-1 F V^-T
  Eigen::MatrixXd Cs = lu.solve(lu.solve(F).transpose()).transpose();
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) Cs(k, l) /= std::pow(h, k + l);
  return Cs;
}

inline ConditionResult coefficient_check(const std::string& name, const std::string& where,
                                         const Eigen::VectorXd& c, const std::vector<int>& orders,
                                         double target0, double tol) {
  ConditionResult r{name, where, true, 0.0, tol};
  for (int k : orders) {
    if (k >= c.size()) continue;
    const double dev = std::abs(c(k) - (k == orders.front() ? target0 : 0.0));
    r.measured = std::max(r.measured, dev);
  }
  r.pass = r.measured <= tol;
  return r;
}

inline ConditionResult class_check(const std::string& name, const std::string& where,
                                   const Eigen::MatrixXd& c, int max_order,
                                   const std::function<bool(int, int)>& allowed,
                                   const std::function<double(int, int)>& target, double tol) {
  ConditionResult r{name, where, true, 0.0, tol};
  // total order k + l <= max_order; higher mixed coefficients carry roundoff of size eps / h^(k+l)
  for (int k = 0; k <= max_order && k < c.rows(); ++k)
    for (int l = 0; k + l <= max_order && l < c.cols(); ++l) {
      if (allowed(k, l)) continue;
      r.measured = std::max(r.measured, std::abs(c(k, l) - target(k, l)));
    }
  r.pass = r.measured <= tol;
  return r;
}

inline std::vector<int> odd_orders(int max_order) {
  std::vector<int> v;
  for (int k = 1; k <= max_order; k += 2) v.push_back(k);
  return v;
}

}  // namespace detail

/// Parity and normalization conditions along an edge r = 0.
inline SmoothnessReport validate_edge_smoothness(const EdgeProfiles& P,
                                                 const SmoothnessOptions& opt = {},
                                                 const std::string& where = "edge") {
  const std::size_t K = P.a2.size();
  require(K >= 5, "edge smoothness needs at least 5 r-stations");
  for (const auto* v : {&P.mu2, &P.b, &P.d2, &P.c11, &P.c12, &P.c21, &P.c22})
    require(v->size() == K, "edge profiles must share one station set");
  require(P.h > 0.0, "station spacing must be positive");
  const double tol = opt.C * P.h * P.h;
  const auto odd = detail::odd_orders(opt.max_order);
  std::vector<int> even_from2;
  for (int k = 2; k <= opt.max_order; k += 2) even_from2.push_back(k);

  SmoothnessReport rep;
  auto add = [&](ConditionResult c) { rep.conditions.push_back(std::move(c)); };
  const auto mu2 = detail::taylor_fit(P.mu2, P.h);
  const auto a2 = detail::taylor_fit(P.a2, P.h);
  const auto b = detail::taylor_fit(P.b, P.h);
  const auto d2 = detail::taylor_fit(P.d2, P.h);
  const auto c11 = detail::taylor_fit(P.c11, P.h);
  const auto c12 = detail::taylor_fit(P.c12, P.h);
  const auto c21 = detail::taylor_fit(P.c21, P.h);
  const auto c22 = detail::taylor_fit(P.c22, P.h);

  add(detail::coefficient_check("mu2_even", where, mu2, odd, 0.0, tol));
  add(detail::coefficient_check("mu_unit_on_edge", where, mu2, {0}, 1.0, tol));
  add(detail::coefficient_check("a2_even", where, a2, odd, 0.0, tol));
  add(detail::coefficient_check("a2_vanishes_on_edge", where, a2, {0}, 0.0, tol));
  add(detail::coefficient_check("a2_leading_coefficient", where, a2, {2}, 1.0, tol));
  add(detail::coefficient_check("b_even", where, b, odd, 0.0, tol));
  add(detail::coefficient_check("b_vanishes_on_edge", where, b, {0}, 0.0, tol));
  add(detail::coefficient_check("d2_even", where, d2, odd, 0.0, tol));
  add({"d2_positive_on_edge", where, d2(0) > tol, d2(0), tol});
  add(detail::coefficient_check("c11_parity", where, c11, even_from2, 0.0, tol));
  add(detail::coefficient_check("c12_parity", where, c12, even_from2, 0.0, tol));
  add(detail::coefficient_check("c21_even", where, c21, odd, 0.0, tol));
  add(detail::coefficient_check("c22_even", where, c22, odd, 0.0, tol));
  return rep;
}

/// Membership conditions at a vertex r = t = 0 for the germ classes of the
/// metric coefficients (R^even: even in both r and t).
inline SmoothnessReport validate_vertex_smoothness(const VertexSamples& S,
                                                   const SmoothnessOptions& opt = {},
                                                   const std::string& where = "vertex") {
  const int K = S.K;
  require(K >= 5, "vertex smoothness needs at least a 5x5 stencil");
  const std::size_t n = static_cast<std::size_t>(K) * K;
  for (const auto* v : {&S.mu2, &S.a2, &S.b, &S.d2, &S.c11, &S.c12, &S.c21, &S.c22})
    require(v->size() == n, "vertex samples must fill the K x K stencil");
  require(S.h > 0.0, "station spacing must be positive");
  const double tol = opt.C * S.h * S.h;
  const int mo = opt.max_order;
  auto even = [](int k) { return k % 2 == 0; };
  auto zero = [](int, int) { return 0.0; };

  // d^2 - mu^2 t^2
  std::vector<double> d2_rest(n);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      const double t = l * S.h;
      d2_rest[k * K + l] = S.d2[k * K + l] - S.mu2[k * K + l] * t * t;
    }

  const auto mu2 = detail::taylor_fit2(S.mu2, K, S.h);
  const auto a2 = detail::taylor_fit2(S.a2, K, S.h);
  const auto d2 = detail::taylor_fit2(d2_rest, K, S.h);
  const auto b = detail::taylor_fit2(S.b, K, S.h);
  const auto c11 = detail::taylor_fit2(S.c11, K, S.h);
  const auto c12 = detail::taylor_fit2(S.c12, K, S.h);
  const auto c21 = detail::taylor_fit2(S.c21, K, S.h);
  const auto c22 = detail::taylor_fit2(S.c22, K, S.h);

  SmoothnessReport rep;
  auto add = [&](ConditionResult c) { rep.conditions.push_back(std::move(c)); };
  add(detail::class_check("mu2_class", where, mu2, mo,
                          [&](int k, int l) { return (even(k) && even(l)) || (k == 0 && l == 0); },
                          zero, tol));
  add({"mu_unit_at_vertex", where, std::abs(mu2(0, 0) - 1.0) <= tol, std::abs(mu2(0, 0) - 1.0),
       tol});
  add(detail::class_check("a2_class", where, a2, mo,
                          [&](int k, int l) { return k >= 4 && even(k) && even(l); },
                          [](int k, int l) { return (k == 2 && l == 0) ? 1.0 : 0.0; }, tol));
  add(detail::class_check("d2_class", where, d2, mo,
                          [&](int k, int l) { return l >= 4 && even(k) && even(l); }, zero, tol));
  add(detail::class_check("b_class", where, b, mo,
                          [&](int k, int l) { return k >= 2 && l >= 2 && even(k) && even(l); },
                          zero, tol));
  auto r_odd = [&](int k, int l) { return !even(k) && even(l); };
  auto t_odd = [&](int k, int l) { return even(k) && !even(l); };
  add(detail::class_check("c11_class", where, c11, mo, r_odd, zero, tol));
  add(detail::class_check("c12_class", where, c12, mo, r_odd, zero, tol));
  add(detail::class_check("c21_class", where, c21, mo, t_odd, zero, tol));
  add(detail::class_check("c22_class", where, c22, mo, t_odd, zero, tol));
  return rep;
}

namespace detail {

/// Quotient and orbit data of a model pulled back through a Fermi chart.
struct ChartValues {
  double mu2;
  Mat2 go;
  Mat2 C;
};

inline ChartValues chart_values(const MetricModel& m, const FermiChart& ch, double r, double t) {
  const double eps = 1e-6;
  const Vec2 pt = ch.map(r, t);
  Mat2 J;
  J.col(0) = (ch.map(r + eps, t) - ch.map(r - eps, t)) / (2 * eps);
  J.col(1) = (ch.map(r, t + eps) - ch.map(r, t - eps)) / (2 * eps);
  const Mat2 gs = ch.quotient ? ch.quotient(r, t) : Mat2(J.transpose() * m.gsigma(pt.x(), pt.y()) * J);
  const Mat2& P = ch.basis;
  return {gs(1, 1), P.transpose() * m.gomega(pt.x(), pt.y()) * P,
          J.transpose() * m.C(pt.x(), pt.y()) * P.inverse().transpose()};
}

}  // namespace detail

inline EdgeProfiles edge_profiles(const MetricModel& m, std::size_t edge, double t, double h,
                                  int K = 7) {
  require(edge < m.edge_charts.size(), "model has no chart for edge " + std::to_string(edge));
  EdgeProfiles P;
  P.h = h;
  for (int k = 0; k < K; ++k) {
    const auto v = detail::chart_values(m, m.edge_charts[edge], k * h, t);
    P.mu2.push_back(v.mu2);
    P.a2.push_back(v.go(0, 0));
    P.b.push_back(v.go(0, 1));
    P.d2.push_back(v.go(1, 1));
    P.c11.push_back(v.C(0, 0));
    P.c12.push_back(v.C(0, 1));
    P.c21.push_back(v.C(1, 0));
    P.c22.push_back(v.C(1, 1));
  }
  return P;
}

inline VertexSamples vertex_samples(const MetricModel& m, std::size_t vertex, double h, int K = 7) {
  require(vertex < m.vertex_charts.size(),
          "model has no chart for vertex " + std::to_string(vertex));
  VertexSamples S;
  S.h = h;
  S.K = K;
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      const auto v = detail::chart_values(m, m.vertex_charts[vertex], k * h, l * h);
      S.mu2.push_back(v.mu2);
      S.a2.push_back(v.go(0, 0));
      S.b.push_back(v.go(0, 1));
      S.d2.push_back(v.go(1, 1));
      S.c11.push_back(v.C(0, 0));
      S.c12.push_back(v.C(0, 1));
      S.c21.push_back(v.C(1, 0));
      S.c22.push_back(v.C(1, 1));
    }
  return S;
}

/// Runs the edge checks at three stations along every edge and the vertex
/// checks at every vertex of a model. Periodic models have no strata and pass.
inline SmoothnessReport validate_model_smoothness(const MetricModel& m, double h = 0.02,
                                                  int K = 7, const SmoothnessOptions& opt = {}) {
  SmoothnessReport rep;
  for (std::size_t e = 0; e < m.edge_charts.size(); ++e) {
    const double len = m.edge_charts[e].length;
    for (double frac : {0.3, 0.5, 0.7}) {
      const double t = frac * len;
      const std::string where = "edge " + std::to_string(e) + " " + m.space.edges[e].str() +
                                " t=" + std::to_string(t);
      rep.append(validate_edge_smoothness(edge_profiles(m, e, t, h, K), opt, where));
    }
  }
  for (std::size_t v = 0; v < m.vertex_charts.size(); ++v)
    rep.append(validate_vertex_smoothness(vertex_samples(m, v, h, K), opt,
                                          "vertex " + std::to_string(v)));
  return rep;
}

}  // namespace t2inv
