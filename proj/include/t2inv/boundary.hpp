#pragma once

#include "t2inv/core.hpp"

#include <cmath>
#include <functional>

namespace t2inv {

using Profile = std::function<double(double)>;

/// Leading coefficients of a polar metric near an edge, in Fermi coordinates:
/// a^2 = r^2 + a0 r^4, b = b0 r^2, d^2 = d0 + d2 r^2, mu^2 = 1 - sec r^2,
/// each up to higher even orders in r.
struct EdgeExpansion {
  Profile a0, b0, d0, d2, sec;
};

struct BoundaryRicci {
  double rr = 0.0;          ///< Ric(d_r, d_r)
  double tt = 0.0;          ///< Ric(d_t, d_t)
  double phiphi = 0.0;      ///< Ric(V, V) / r^2, V the collapsing Killing field
  double thetatheta = 0.0;  ///< Ric(W, W) / d0
};

/// Second-order accurate derivatives of a profile by five-point differences.
inline double profile_derivative(const Profile& f, double t, int order, double step = 1e-3) {
  const double h = step * std::max(1.0, std::abs(t));
  const double fm2 = f(t - 2 * h), fm1 = f(t - h), f0 = f(t), fp1 = f(t + h), fp2 = f(t + 2 * h);
  if (order == 1) return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
  return (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
}

/// Ricci components at r = 0 from the edge expansion.
inline BoundaryRicci boundary_ricci_expansion(const EdgeExpansion& e, double t) {
  const double d0 = e.d0(t);
  if (!(d0 > 0.0)) throw InvalidInput("edge expansion evaluated where d0 <= 0 (edge endpoint)");
  const double d0p = profile_derivative(e.d0, t, 1);
  const double d0pp = profile_derivative(e.d0, t, 2);
  const double a0 = e.a0(t), b0 = e.b0(t), d2 = e.d2(t), sec = e.sec(t);
  const double q = (d2 - b0 * b0) / d0;
  const double tang = -d0pp / (2.0 * d0) + d0p * d0p / (4.0 * d0 * d0);
  BoundaryRicci r;
  r.rr = -3.0 * a0 - q + sec;
  r.tt = tang + 2.0 * sec;
  r.phiphi = -3.0 * a0 - q + sec;
  r.thetatheta = tang - 2.0 * q;
  return r;
}

}  // namespace t2inv
