#pragma once

#include "t2inv/core.hpp"
#include "t2inv/grid.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace t2inv {

/// Circle subgroup {(e^{ip s}, e^{iq s})} of the torus labelling an edge.
struct Slope {
  int p = 0;
  int q = 0;

  bool operator==(const Slope&) const = default;

  /// Representative with q > 0, or q = 0 and p > 0. (p,q) and (-p,-q) name the same circle.
  Slope canonical() const {
    if (q < 0 || (q == 0 && p < 0)) return {-p, -q};
    return *this;
  }
  std::string str() const {
    return "(" + std::to_string(p) + "," + std::to_string(q) + ")";
  }
};

inline long long slope_det(const Slope& a, const Slope& b) {
  return static_cast<long long>(a.p) * b.q - static_cast<long long>(a.q) * b.p;
}

enum class ActionClass { diagonal_bigon, hirzebruch, other };

inline std::string to_string(ActionClass c) {
  switch (c) {
    case ActionClass::diagonal_bigon: return "diagonal_bigon";
    case ActionClass::hirzebruch: return "hirzebruch";
    default: return "other";
  }
}

struct ActionReport {
  bool admissible = false;
  ActionClass classification = ActionClass::other;
  int hirzebruch_p = 0;  ///< meaningful only for ActionClass::hirzebruch
  std::vector<long long> vertex_dets;  ///< det[e_i, e_{i+1}], cyclic
  std::vector<std::string> diagnostics;

  std::string classification_label() const {
    if (classification == ActionClass::hirzebruch)
      return "hirzebruch(" + std::to_string(hirzebruch_p) + ")";
    return to_string(classification);
  }
};

namespace detail {

inline bool matches_rotation(const std::vector<Slope>& e, const std::vector<Slope>& pattern) {
  const std::size_t n = e.size();
  if (n != pattern.size()) return false;
  for (std::size_t shift = 0; shift < n; ++shift) {
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) ok = e[(k + shift) % n] == pattern[k];
    if (ok) return true;
  }
  return false;
}

}  // namespace detail

/// Admissibility of a cyclic list of edge labels. Malformed labels throw;
/// a failed vertex condition yields admissible = false with a diagnostic.
inline ActionReport validate_action(const std::vector<Slope>& edges) {
  require(!edges.empty(), "edge list must be nonempty");
  for (const Slope& s : edges) {
    require(!(s.p == 0 && s.q == 0), "slope (0,0) is not a circle subgroup");
    const int g = std::gcd(std::abs(s.p), std::abs(s.q));
    require(g == 1, "slope " + s.str() + " has gcd " + std::to_string(g) + " != 1");
  }
  ActionReport rep;
  rep.admissible = true;
  const std::size_t n = edges.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Slope& a = edges[i];
    const Slope& b = edges[(i + 1) % n];
    const long long d = slope_det(a, b);
    rep.vertex_dets.push_back(d);
    if (std::llabs(d) != 1) {
      rep.admissible = false;
      rep.diagnostics.push_back("vertex between edges " + std::to_string(i) + " " + a.str() +
                                " and " + std::to_string((i + 1) % n) + " " + b.str() +
                                " has |det| = " + std::to_string(std::llabs(d)) + " != 1");
    }
  }

  std::vector<Slope> canon;
  for (const Slope& s : edges) canon.push_back(s.canonical());
  if (rep.admissible) {
    if (detail::matches_rotation(canon, {{1, 0}, {0, 1}})) {
      rep.classification = ActionClass::diagonal_bigon;
    } else if (n == 4) {
      for (std::size_t shift = 0; shift < 4; ++shift) {
        const Slope& e0 = canon[shift];
        const Slope& e1 = canon[(shift + 1) % 4];
        const Slope& e2 = canon[(shift + 2) % 4];
        const Slope& e3 = canon[(shift + 3) % 4];
        if (e0 == Slope{1, 0} && e1 == Slope{0, 1} && e2 == Slope{1, 0} && e3.q == 1) {
          rep.classification = ActionClass::hirzebruch;
          rep.hirzebruch_p = e3.p;
          break;
        }
      }
    }
  }
  return rep;
}

enum class DomainKind { rectangle, periodic_torus };

/// Orbit-space domain and its edge labels. Edges of a rectangle are listed in
/// the order left (x = x0), bottom (y = y0), right, top. A two-edge list
/// labels the top and bottom sides, with left and right collapsed to vertices.
struct OrbitSpace {
  DomainKind kind = DomainKind::rectangle;
  double x0 = 0.0;
  double y0 = 0.0;
  double lx = kPi;
  double ly = kPi;
  std::vector<Slope> edges;

  static OrbitSpace rectangle(double lx, double ly, std::vector<Slope> edges = {},
                              double x0 = 0.0, double y0 = 0.0) {
    require(lx > 0 && ly > 0, "rectangle side lengths must be positive");
    require(edges.empty() || edges.size() == 2 || edges.size() == 4,
            "rectangle domains carry 2 or 4 edge labels");
    return {DomainKind::rectangle, x0, y0, lx, ly, std::move(edges)};
  }
  static OrbitSpace periodic_torus(double lx, double ly) {
    require(lx > 0 && ly > 0, "torus periods must be positive");
    return {DomainKind::periodic_torus, 0.0, 0.0, lx, ly, {}};
  }

  bool periodic() const { return kind == DomainKind::periodic_torus; }

  /// Side of the rectangle carrying edge k.
  Side edge_side(std::size_t k) const {
    require(k < edges.size(), "edge index out of range");
    if (edges.size() == 2) return k == 0 ? Side::top : Side::bottom;
    return static_cast<Side>(k);
  }
};

struct EdgeTag {
  Slope slope;
  Side side;
  std::vector<std::size_t> nodes;
};

/// Grid over an orbit space with its boundary nodes tagged per edge.
struct DomainGrid {
  Grid grid;
  std::vector<EdgeTag> edges;
};

inline DomainGrid build_grid(const OrbitSpace& space, int nx, int ny) {
  require(nx >= 3 && ny >= 3, "resolution must be at least 3 per axis");
  DomainGrid dg;
  dg.grid = Grid::make(space.periodic() ? Topology::periodic : Topology::rectangle, nx, ny,
                       space.x0, space.y0, space.lx, space.ly);
  for (std::size_t k = 0; k < space.edges.size(); ++k) {
    const Side s = space.edge_side(k);
    dg.edges.push_back({space.edges[k], s, dg.grid.side_nodes(s)});
  }
  return dg;
}

inline void to_json(nlohmann::json& j, const Slope& s) { j = nlohmann::json::array({s.p, s.q}); }
inline void from_json(const nlohmann::json& j, Slope& s) {
  require(j.is_array() && j.size() == 2, "slope must be a two-element array");
  s.p = j.at(0).get<int>();
  s.q = j.at(1).get<int>();
}

inline nlohmann::json to_json(const OrbitSpace& s) {
  nlohmann::json dom;
  dom["type"] = s.periodic() ? "periodic_torus" : "rectangle";
  dom["Lx"] = s.lx;
  dom["Ly"] = s.ly;
  dom["x0"] = s.x0;
  dom["y0"] = s.y0;
  return {{"domain", dom}, {"edges", s.edges}};
}

inline OrbitSpace orbit_space_from_json(const nlohmann::json& j) {
  try {
    const auto& dom = j.at("domain");
    const std::string type = dom.at("type").get<std::string>();
    const double lx = dom.at("Lx").get<double>();
    const double ly = dom.at("Ly").get<double>();
    if (type == "periodic_torus") return OrbitSpace::periodic_torus(lx, ly);
    require(type == "rectangle", "unknown domain type '" + type + "'");
    std::vector<Slope> edges;
    if (j.contains("edges")) edges = j.at("edges").get<std::vector<Slope>>();
    return OrbitSpace::rectangle(lx, ly, edges, dom.value("x0", 0.0), dom.value("y0", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed orbit space document: ") + e.what());
  }
}

}  // namespace t2inv
