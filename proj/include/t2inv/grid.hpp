#pragma once

#include "t2inv/core.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace t2inv {

enum class Topology { rectangle, periodic };

/// Sides of a rectangle domain, in the cyclic order used for edge labels.
enum class Side { left = 0, bottom = 1, right = 2, top = 3 };

/// Uniform structured grid. Rectangles include both end nodes on each axis
/// (h = L/(n-1)); periodic tori use n distinct nodes per period (h = L/n).
struct Grid {
  Topology topology = Topology::rectangle;
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = 0.0;
  double ly = 0.0;
  double hx = 0.0;
  double hy = 0.0;

  static Grid make(Topology topo, int nx, int ny, double x0, double y0,
                   double lx, double ly) {
    require(nx >= 3 && ny >= 3, "grid resolution must be at least 3 per axis");
    require(lx > 0.0 && ly > 0.0, "grid lengths must be positive");
    Grid g;
    g.topology = topo;
    g.nx = nx;
    g.ny = ny;
    g.x0 = x0;
    g.y0 = y0;
    g.lx = lx;
    g.ly = ly;
    if (topo == Topology::rectangle) {
      g.hx = lx / (nx - 1);
      g.hy = ly / (ny - 1);
    } else {
      g.hx = lx / nx;
      g.hy = ly / ny;
    }
    return g;
  }

  bool periodic() const { return topology == Topology::periodic; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  double x(int i) const { return x0 + i * hx; }
  double y(int j) const { return y0 + j * hy; }

  int wrap_x(int i) const { return ((i % nx) + nx) % nx; }
  int wrap_y(int j) const { return ((j % ny) + ny) % ny; }

  bool on_boundary(int i, int j) const {
    if (periodic()) return false;
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }

  /// Distance from node (i,j) to the nearest rectangle side (infinite on tori).
  double boundary_distance(int i, int j) const {
    if (periodic()) return INFINITY;
    const double dx = std::min(i, nx - 1 - i) * hx;
    const double dy = std::min(j, ny - 1 - j) * hy;
    return std::min(dx, dy);
  }

  std::size_t boundary_count() const {
    return periodic() ? 0 : 2 * static_cast<std::size_t>(nx) + 2 * ny - 4;
  }

  /// Node indices of one rectangle side, ordered along increasing x or y.
  std::vector<std::size_t> side_nodes(Side s) const {
    std::vector<std::size_t> out;
    if (periodic()) return out;
    switch (s) {
      case Side::left:
        for (int j = 0; j < ny; ++j) out.push_back(index(0, j));
        break;
      case Side::right:
        for (int j = 0; j < ny; ++j) out.push_back(index(nx - 1, j));
        break;
      case Side::bottom:
        for (int i = 0; i < nx; ++i) out.push_back(index(i, 0));
        break;
      case Side::top:
        for (int i = 0; i < nx; ++i) out.push_back(index(i, ny - 1));
        break;
    }
    return out;
  }

  bool same_shape(const Grid& o) const {
    return topology == o.topology && nx == o.nx && ny == o.ny &&
           std::abs(hx - o.hx) < 1e-14 * (1 + hx) &&
           std::abs(hy - o.hy) < 1e-14 * (1 + hy) &&
           std::abs(x0 - o.x0) < 1e-12 && std::abs(y0 - o.y0) < 1e-12;
  }
};

/// Values of type T at every node of a grid, stored row-major (x fastest).
template <class T>
struct Field {
  Grid grid;
  std::vector<T> values;

  Field() = default;
  Field(const Grid& g, const T& fill) : grid(g), values(g.size(), fill) {}

  T& operator()(int i, int j) { return values[grid.index(i, j)]; }
  const T& operator()(int i, int j) const { return values[grid.index(i, j)]; }

  template <class F>
  static Field sample(const Grid& g, F&& fn) {
    Field f;
    f.grid = g;
    f.values.reserve(g.size());
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) f.values.push_back(fn(g.x(i), g.y(j)));
    return f;
  }
};

using ScalarField = Field<double>;
using Mat2Field = Field<Mat2>;

// ---------------------------------------------------------------------------
// Finite-difference stencils

/// Weights of a 1D derivative stencil around node i (offsets relative to i).
struct Stencil1D {
  std::array<int, 4> offset{};
  std::array<double, 4> weight{};
  int count = 0;
};

/// Second-order first-derivative stencil: centered in the interior, one-sided
/// at the ends of a non-periodic axis.
inline Stencil1D first_derivative_stencil(int i, int n, double h, bool periodic) {
  Stencil1D s;
  if (periodic || (i > 0 && i < n - 1)) {
    s.offset = {-1, 1, 0, 0};
    s.weight = {-0.5 / h, 0.5 / h, 0, 0};
    s.count = 2;
  } else if (i == 0) {
    s.offset = {0, 1, 2, 0};
    s.weight = {-1.5 / h, 2.0 / h, -0.5 / h, 0};
    s.count = 3;
  } else {
    s.offset = {0, -1, -2, 0};
    s.weight = {1.5 / h, -2.0 / h, 0.5 / h, 0};
    s.count = 3;
  }
  return s;
}

/// Second-order second-derivative stencil (4-point one-sided at the ends).
inline Stencil1D second_derivative_stencil(int i, int n, double h, bool periodic) {
  Stencil1D s;
  const double h2 = h * h;
  if (periodic || (i > 0 && i < n - 1)) {
    s.offset = {-1, 0, 1, 0};
    s.weight = {1.0 / h2, -2.0 / h2, 1.0 / h2, 0};
    s.count = 3;
  } else {
    const int dir = (i == 0) ? 1 : -1;
    s.offset = {0, dir, 2 * dir, 3 * dir};
    s.weight = {2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2};
    s.count = 4;
  }
  return s;
}

/// Value together with its first and second partial derivatives in (x, y).
template <class T>
struct Jet {
  T v, dx, dy, dxx, dxy, dyy;

  const T& d(int k) const { return k == 0 ? dx : dy; }
  const T& dd(int k, int l) const {
    if (k == 0 && l == 0) return dxx;
    if (k == 1 && l == 1) return dyy;
    return dxy;
  }
};

template <class T>
Jet<T> node_jet(const Field<T>& f, int i, int j) {
  const Grid& g = f.grid;
  const bool per = g.periodic();
  auto at = [&](int a, int b) -> const T& {
    if (per) return f.values[g.index(g.wrap_x(a), g.wrap_y(b))];
    return f.values[g.index(a, b)];
  };
  const T zero = at(i, j) * 0.0;
  Jet<T> J{at(i, j), zero, zero, zero, zero, zero};

  const Stencil1D sx = first_derivative_stencil(i, g.nx, g.hx, per);
  const Stencil1D sy = first_derivative_stencil(j, g.ny, g.hy, per);
  const Stencil1D sxx = second_derivative_stencil(i, g.nx, g.hx, per);
  const Stencil1D syy = second_derivative_stencil(j, g.ny, g.hy, per);
  for (int a = 0; a < sx.count; ++a) J.dx = J.dx + sx.weight[a] * at(i + sx.offset[a], j);
  for (int b = 0; b < sy.count; ++b) J.dy = J.dy + sy.weight[b] * at(i, j + sy.offset[b]);
  for (int a = 0; a < sxx.count; ++a) J.dxx = J.dxx + sxx.weight[a] * at(i + sxx.offset[a], j);
  for (int b = 0; b < syy.count; ++b) J.dyy = J.dyy + syy.weight[b] * at(i, j + syy.offset[b]);
  for (int a = 0; a < sx.count; ++a)
    for (int b = 0; b < sy.count; ++b)
      J.dxy = J.dxy + (sx.weight[a] * sy.weight[b]) * at(i + sx.offset[a], j + sy.offset[b]);
  return J;
}

/// Centered-difference jet of an analytic function at (x, y) with step h.
template <class F>
auto analytic_jet(F&& fn, double x, double y, double h) {
  using T = decltype(fn(x, y));
  const T c = fn(x, y);
  const T e = fn(x + h, y), w = fn(x - h, y);
  const T n = fn(x, y + h), s = fn(x, y - h);
  const T ne = fn(x + h, y + h), nw = fn(x - h, y + h);
  const T se = fn(x + h, y - h), sw = fn(x - h, y - h);
  const double h2 = h * h;
  return Jet<T>{c,
                (e - w) / (2 * h),
                (n - s) / (2 * h),
                (e - 2.0 * c + w) / h2,
                (ne - nw - se + sw) / (4 * h2),
                (n - 2.0 * c + s) / h2};
}

/// Trapezoidal integral of a scalar grid function (full torus / rectangle).
inline double integrate(const ScalarField& f) {
  const Grid& g = f.grid;
  double sum = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double w = 1.0;
      if (!g.periodic()) {
        if (i == 0 || i == g.nx - 1) w *= 0.5;
        if (j == 0 || j == g.ny - 1) w *= 0.5;
      }
      sum += w * f(i, j);
    }
  }
  return sum * g.hx * g.hy;
}

}  // namespace t2inv
