#pragma once

#include "t2inv/core.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/orbit_space.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace t2inv {

using ScalarFn = std::function<double(double, double)>;
using Mat2Fn = std::function<Mat2(double, double)>;

/// Coordinates (r, t) near a boundary stratum, mapped into the model's (x, y).
/// r is the distance to the stratum; t runs along it (or is the distance to
/// the second edge at a vertex).
struct FermiChart {
  std::function<Vec2(double, double)> map;
  Mat2 basis;  ///< columns: new Killing basis in terms of the model's (V1, V2)
  double length = 0.0;  ///< extent of t along an edge
  /// Quotient metric in (r, t); when unset it is pulled back through `map`.
  std::function<Mat2(double, double)> quotient;
};

/// Analytic T^2-invariant metric given by closed-form component functions.
struct MetricModel {
  std::string name;
  OrbitSpace space;
  bool gauge = true;
  ScalarFn mu;      ///< gauge coefficient (gauge models)
  Mat2Fn gsigma;    ///< quotient metric
  Mat2Fn gomega;    ///< orbit metric
  Mat2Fn C;         ///< connection matrix
  std::optional<double> lambda;  ///< Einstein constant, when Einstein
  ScalarFn a, b;    ///< warps, for diagonal models
  std::vector<FermiChart> edge_charts;    ///< one per edge
  std::vector<FermiChart> vertex_charts;  ///< vertex k joins edge k and edge k+1

  bool diagonal() const { return static_cast<bool>(a) && static_cast<bool>(b); }
  Mat4 full(double x, double y) const { return assemble_block(gsigma(x, y), gomega(x, y), C(x, y)); }
};

namespace detail {

inline Mat2 diag2(double a, double b) {
  Mat2 m;
  m << a, 0, 0, b;
  return m;
}

inline Mat2 zero2(double, double) { return Mat2::Zero(); }

/// Extended Euclid: completes the column (p, -q) to a unimodular basis.
inline Mat2 completing_basis(const Slope& s) {
  // find (r, t) with p t + q r = 1
  long long old_r = s.p, r = s.q, old_s = 1, ss = 0, old_t = 0, t = 1;
  while (r != 0) {
    const long long qt = old_r / r;
    long long tmp = old_r - qt * r; old_r = r; r = tmp;
    tmp = old_s - qt * ss; old_s = ss; ss = tmp;
    tmp = old_t - qt * t; old_t = t; t = tmp;
  }
  // old_s * p + old_t * q = old_r = +-1
  double sgn = old_r > 0 ? 1.0 : -1.0;
  const double tt = sgn * old_s;  // coefficient of p
  const double rr = sgn * old_t;  // coefficient of q
  Mat2 P;
  P << s.p, rr, -s.q, tt;
  return P;
}

inline Mat2 vertex_basis(const Slope& a, const Slope& b) {
  Mat2 P;
  P << a.p, b.p, -a.q, -b.q;
  if (P.determinant() < 0) P.col(1) *= -1.0;
  return P;
}

/// Straight Fermi charts for a flat rectangle, edges listed left, bottom, right, top.
inline void flat_rectangle_charts(MetricModel& m) {
  const OrbitSpace& s = m.space;
  const double x0 = s.x0, y0 = s.y0, x1 = s.x0 + s.lx, y1 = s.y0 + s.ly;
  std::vector<std::function<Vec2(double, double)>> edge = {
      [=](double r, double t) { return Vec2(x0 + r, y0 + t); },
      [=](double r, double t) { return Vec2(x0 + t, y0 + r); },
      [=](double r, double t) { return Vec2(x1 - r, y0 + t); },
      [=](double r, double t) { return Vec2(x0 + t, y1 - r); }};
  // vertex k joins edge k (distance r) and edge k+1 (distance t)
  std::vector<std::function<Vec2(double, double)>> vert = {
      [=](double r, double t) { return Vec2(x0 + r, y0 + t); },
      [=](double r, double t) { return Vec2(x1 - t, y0 + r); },
      [=](double r, double t) { return Vec2(x1 - r, y1 - t); },
      [=](double r, double t) { return Vec2(x0 + t, y1 - r); }};
  const auto& e = s.edges;
  for (std::size_t k = 0; k < 4; ++k) {
    m.edge_charts.push_back({edge[k], completing_basis(e[k]), k % 2 == 0 ? s.ly : s.lx, {}});
    m.vertex_charts.push_back({vert[k], vertex_basis(e[k], e[(k + 1) % 4]), 0.0, {}});
  }
}

/// Lune coordinates (u, v) of the point (sin r, cos r sin t, cos r cos t)
/// on the unit 2-sphere, with the first two coordinates swapped when
/// `swap` is set and the third negated when `south` is set.
inline Vec2 lune_point(double r, double t, bool swap, bool south) {
  double x1 = std::sin(r), x2 = std::cos(r) * std::sin(t), x3 = std::cos(r) * std::cos(t);
  if (swap) std::swap(x1, x2);
  if (south) x3 = -x3;
  const double u = std::acos(std::clamp(x3, -1.0, 1.0));
  const double v = std::atan2(x2, x1);
  return Vec2(u, v);
}

/// Low-order trigonometric polynomial with seeded coefficients, bounded by 1 in sup norm.
struct TrigPoly {
  std::vector<double> c;  // cos/sin pairs over modes (k, l) in {0,1,2}^2
  double operator()(double x, double y) const {
    double s = 0.0;
    std::size_t n = 0;
    for (int k = 0; k <= 2; ++k)
      for (int l = 0; l <= 2; ++l) {
        s += c[n++] * std::cos(k * x + l * y);
        s += c[n++] * std::sin(k * x - l * y);
      }
    return s;
  }
  static TrigPoly random(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrigPoly t;
    t.c.resize(18);
    double sum = 0.0;
    for (double& v : t.c) {
      v = u(rng);
      sum += std::abs(v);
    }
    for (double& v : t.c) v /= sum;
    return t;
  }
};

}  // namespace detail

/// Unit 4-sphere over the lune u in [0, pi], v in [0, pi/2].
inline MetricModel round_s4_model() {
  MetricModel m;
  m.name = "round_s4";
  m.space = OrbitSpace::rectangle(kPi, kPi / 2, {{1, 0}, {0, 1}});
  m.mu = [](double u, double) { return std::sin(u); };
  m.gsigma = [](double u, double) { return detail::diag2(1.0, std::sin(u) * std::sin(u)); };
  m.a = [](double u, double v) { return std::sin(u) * std::cos(v); };
  m.b = [](double u, double v) { return std::sin(u) * std::sin(v); };
  m.gomega = [a = m.a, b = m.b](double u, double v) {
    const double av = a(u, v), bv = b(u, v);
    return detail::diag2(av * av, bv * bv);
  };
  m.C = detail::zero2;
  m.lambda = 3.0;
  // edge 0 is v = pi/2 (a = 0), edge 1 is v = 0 (b = 0)
  // the (u, v) chart is singular at the poles, so the charts carry their metric dr^2 + cos^2 r dt^2
  auto fermi = [](double r, double) { return detail::diag2(1.0, std::cos(r) * std::cos(r)); };
  m.edge_charts.push_back({[](double r, double t) { return detail::lune_point(r, t, false, false); },
                           detail::completing_basis({1, 0}), kPi, fermi});
  m.edge_charts.push_back({[](double r, double t) { return detail::lune_point(r, t, true, false); },
                           detail::completing_basis({0, 1}), kPi, fermi});
  // vertex 0 at u = 0, vertex 1 at u = pi; r measures distance to the a = 0 edge
  m.vertex_charts.push_back({[](double r, double t) { return detail::lune_point(r, t, false, false); },
                             detail::vertex_basis({1, 0}, {0, 1}), 0.0, fermi});
  m.vertex_charts.push_back({[](double r, double t) { return detail::lune_point(r, t, false, true); },
                             detail::vertex_basis({1, 0}, {0, 1}), 0.0, fermi});
  return m;
}

/// One member of the closed-form family on the flat square [0, pi]^2 with
/// edge labels (1,0), (0,1), (1,0), (p,1). p = 0 is the product of unit spheres.
inline MetricModel square_family_model(int p) {
  MetricModel m;
  m.name = "square_family(" + std::to_string(p) + ")";
  m.space = OrbitSpace::rectangle(kPi, kPi, {{1, 0}, {0, 1}, {1, 0}, {p, 1}});
  m.mu = [](double, double) { return 1.0; };
  m.gsigma = [](double, double) { return Mat2::Identity(); };
  const double pp = p;
  m.gomega = [pp](double x, double y) {
    const double sx2 = std::sin(x) * std::sin(x);
    const double sy2 = std::sin(y) * std::sin(y);
    const double w = 1.0 - std::cos(y);
    Mat2 g;
    g(0, 0) = sx2;
    g(0, 1) = g(1, 0) = 0.5 * pp * sx2 * w;
    g(1, 1) = 0.5 * pp * pp * sx2 * w + sy2;
    return g;
  };
  m.C = detail::zero2;
  if (p == 0) {
    m.lambda = 1.0;
    m.a = [](double x, double) { return std::sin(x); };
    m.b = [](double, double y) { return std::sin(y); };
  }
  detail::flat_rectangle_charts(m);
  return m;
}

inline MetricModel product_spheres_model() {
  MetricModel m = square_family_model(0);
  m.name = "product_spheres";
  return m;
}

/// Smooth random data on the flat-in-x torus [0, 2 pi]^2 with nonzero C.
inline MetricModel periodic_random_model(std::uint64_t seed, double amplitude) {
  require(amplitude >= 0.0 && amplitude <= 0.5, "periodic_random amplitude must lie in [0, 0.5]");
  std::mt19937_64 rng(seed);
  MetricModel m;
  m.name = "periodic_random(" + std::to_string(seed) + "," + std::to_string(amplitude) + ")";
  m.space = OrbitSpace::periodic_torus(2 * kPi, 2 * kPi);
  const detail::TrigPoly pm = detail::TrigPoly::random(rng);
  std::array<detail::TrigPoly, 4> R, Cp;
  for (auto& t : R) t = detail::TrigPoly::random(rng);
  for (auto& t : Cp) t = detail::TrigPoly::random(rng);
  const double A = amplitude;
  m.mu = [pm, A](double x, double y) { return 1.0 + A * pm(x, y); };
  m.gsigma = [mu = m.mu](double x, double y) {
    const double v = mu(x, y);
    return detail::diag2(1.0, v * v);
  };
  m.gomega = [R, A](double x, double y) {
    Mat2 M;
    M << 1.0 + A * R[0](x, y), A * R[1](x, y), A * R[2](x, y), 1.0 + A * R[3](x, y);
    return Mat2(M * M.transpose() + 0.25 * Mat2::Identity());
  };
  m.C = [Cp, A](double x, double y) {
    Mat2 c;
    c << A * Cp[0](x, y), A * Cp[1](x, y), A * Cp[2](x, y), A * Cp[3](x, y);
    return c;
  };
  return m;
}

/// Seeded perturbation of a base model: eps-sized off-diagonal orbit metric
/// and connection terms. product_spheres is realised on the torus as the
/// warped product with a = 1 + cos(x)/2, b = 1 + cos(y)/2; rectangle bases
/// receive perturbations vanishing to fourth order on the boundary.
inline MetricModel perturbed_model(const MetricModel& base, std::uint64_t seed, double eps) {
  std::mt19937_64 rng(seed);
  std::array<detail::TrigPoly, 5> T;
  for (auto& t : T) t = detail::TrigPoly::random(rng);
  MetricModel m;
  const bool torus_analog = base.name == "product_spheres";
  if (torus_analog) {
    m.space = OrbitSpace::periodic_torus(2 * kPi, 2 * kPi);
    m.mu = [](double, double) { return 1.0; };
    m.gsigma = [](double, double) { return Mat2::Identity(); };
    m.a = [](double x, double) { return 1.0 + 0.5 * std::cos(x); };
    m.b = [](double, double y) { return 1.0 + 0.5 * std::cos(y); };
    m.gomega = [a = m.a, b = m.b](double x, double y) {
      const double av = a(x, y), bv = b(x, y);
      return detail::diag2(av * av, bv * bv);
    };
    m.C = detail::zero2;
  } else {
    m = base;
    m.lambda.reset();
    m.edge_charts.clear();
    m.vertex_charts.clear();
  }
  m.name = "perturbed(" + base.name + "," + std::to_string(seed) + "," + std::to_string(eps) + ")";
  if (eps == 0.0) return m;
  m.a = nullptr;
  m.b = nullptr;
  ScalarFn bump = [](double, double) { return 1.0; };
  if (!m.space.periodic()) {
    const OrbitSpace s = m.space;
    bump = [s](double x, double y) {
      const double f = std::sin(kPi * (x - s.x0) / s.lx) * std::sin(kPi * (y - s.y0) / s.ly);
      return f * f * f * f;
    };
  }
  const Mat2Fn go = m.gomega, c0 = m.C;
  m.gomega = [go, T, eps, bump](double x, double y) {
    Mat2 g = go(x, y);
    const double off = eps * bump(x, y) * T[0](x, y);
    g(0, 1) += off;
    g(1, 0) += off;
    return g;
  };
  m.C = [c0, T, eps, bump](double x, double y) {
    Mat2 c = c0(x, y);
    const double s = eps * bump(x, y);
    c(0, 0) += s * T[1](x, y);
    c(0, 1) += s * T[2](x, y);
    c(1, 0) += s * T[3](x, y);
    c(1, 1) += s * T[4](x, y);
    return c;
  };
  return m;
}

/// Parses "round_s4", "product_spheres", "square_family(p)",
/// "periodic_random(seed,amplitude)", "perturbed(base,seed,eps)".
inline MetricModel builtin_model(const std::string& text) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string s = trim(text);
  const auto open = s.find('(');
  const std::string name = trim(s.substr(0, open));
  std::vector<std::string> args;
  if (open != std::string::npos) {
    require(s.back() == ')', "unbalanced parentheses in builtin name '" + text + "'");
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    int depth = 0;
    std::string cur;
    for (char ch : inner) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) {
        args.push_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!trim(cur).empty()) args.push_back(trim(cur));
  }
  auto num = [&](std::size_t k, double dflt) {
    if (k >= args.size()) return dflt;
    try {
      std::size_t used = 0;
      const double v = std::stod(args[k], &used);
      require(used == args[k].size(), "bad numeric argument '" + args[k] + "'");
      return v;
    } catch (const std::logic_error&) {
      throw InvalidInput("bad numeric argument '" + args[k] + "' in '" + text + "'");
    }
  };
  if (name == "round_s4") return round_s4_model();
  if (name == "product_spheres") return product_spheres_model();
  if (name == "square_family") {
    require(args.size() == 1, "square_family takes one integer argument");
    const double p = num(0, 0);
    require(p == std::floor(p), "square_family parameter must be an integer");
    return square_family_model(static_cast<int>(p));
  }
  if (name == "periodic_random")
    return periodic_random_model(static_cast<std::uint64_t>(num(0, 0)), num(1, 0.1));
  if (name == "perturbed") {
    require(!args.empty(), "perturbed needs a base metric");
    return perturbed_model(builtin_model(args[0]), static_cast<std::uint64_t>(num(1, 0)),
                           num(2, 1e-2));
  }
  throw InvalidInput("unknown builtin metric '" + text + "'");
}

/// Samples a model on an n_x x n_y grid of its domain.
inline InvariantMetricData sample(const MetricModel& m, int nx, int ny) {
  const DomainGrid dg = build_grid(m.space, nx, ny);
  const Grid& g = dg.grid;
  InvariantMetricData d;
  d.space = m.space;
  d.grid = g;
  if (m.gauge && m.mu)
    d.gsigma = QuotientMetricSpec::gauge(ScalarField::sample(g, m.mu));
  else
    d.gsigma = QuotientMetricSpec::general(Mat2Field::sample(g, m.gsigma));
  d.gomega = Mat2Field::sample(g, m.gomega);
  d.C = Mat2Field::sample(g, m.C);
  return d;
}

inline InvariantMetricData sample(const MetricModel& m, int n) { return sample(m, n, n); }

inline DiagonalMetricData sample_diagonal(const MetricModel& m, int nx, int ny) {
  require(m.diagonal(), "model '" + m.name + "' is not diagonal");
  const InvariantMetricData d = sample(m, nx, ny);
  return {d.space, d.grid, d.gsigma, ScalarField::sample(d.grid, m.a),
          ScalarField::sample(d.grid, m.b)};
}

}  // namespace t2inv
