#pragma once

#include "t2inv/core.hpp"
#include "t2inv/grid.hpp"
#include "t2inv/metric.hpp"
#include "t2inv/orbit_space.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace t2inv {

namespace fs = std::filesystem;

/// %.17g, so every double round-trips and output is byte-stable.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes through a temporary file in the same directory, then renames.
inline void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Output directory: the override in T2INV_OUTPUT_DIR wins over `fallback`.
inline fs::path output_directory(const fs::path& fallback) {
  if (const char* env = std::getenv("T2INV_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fallback;
}

// ---------------------------------------------------------------------------
// CSV fields: header "x,y,value", one node per row, x fastest.

inline std::string field_csv(const ScalarField& f) {
  std::string s = "x,y,value\n";
  const Grid& g = f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      s += format_double(g.x(i)) + "," + format_double(g.y(j)) + "," + format_double(f(i, j)) + "\n";
  return s;
}

inline void write_field_csv(const fs::path& path, const ScalarField& f) {
  atomic_write(path, field_csv(f));
}

/// Reads a CSV field onto `g`; node coordinates must match the grid.
inline ScalarField read_field_csv(const fs::path& path, const Grid& g) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,value", 0) != 0)
    throw InvalidInput(path.string() + ": missing header 'x,y,value'");
  ScalarField f(g, 0.0);
  std::size_t k = 0;
  const double tol = 1e-9 * (1.0 + std::max(std::abs(g.lx), std::abs(g.ly)));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (k >= g.size()) throw InvalidInput(path.string() + ": more rows than grid nodes");
    double x, y, v;
    char c1, c2;
    std::istringstream row(line);
    if (!(row >> x >> c1 >> y >> c2 >> v) || c1 != ',' || c2 != ',')
      throw InvalidInput(path.string() + ": malformed row '" + line + "'");
    const int i = static_cast<int>(k % g.nx), j = static_cast<int>(k / g.nx);
    if (std::abs(x - g.x(i)) > tol || std::abs(y - g.y(j)) > tol)
      throw InvalidInput(path.string() + ": node coordinates do not match the grid");
    f.values[k++] = v;
  }
  if (k != g.size()) throw InvalidInput(path.string() + ": fewer rows than grid nodes");
  return f;
}

/// Plain table: one header row, %.17g cells.
inline std::string table_csv(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += "\n";
  for (const auto& r : rows) {
    require(r.size() == header.size(), "table row width differs from the header");
    for (std::size_t c = 0; c < r.size(); ++c) s += (c ? "," : "") + format_double(r[c]);
    s += "\n";
  }
  return s;
}

/// JSON text with doubles printed as %.17g; keys sorted, so identical inputs
/// give identical bytes.
inline std::string dump_json(const nlohmann::json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) return "null";
      std::string s = format_double(v);
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      return s;
    }
    case nlohmann::json::value_t::object: {
      if (j.empty()) return "{}";
      std::string s = "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) s += ",\n";
        first = false;
        s += pad + nlohmann::json(it.key()).dump() + ": " + dump_json(it.value(), indent, depth + 1);
      }
      return s + "\n" + close + "}";
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) return "[]";
      std::string s = "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) s += ",\n";
        s += pad + dump_json(j[k], indent, depth + 1);
      }
      return s + "\n" + close + "]";
    }
    default:
      return j.dump();
  }
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  atomic_write(path, dump_json(j) + "\n");
}

// ---------------------------------------------------------------------------
// Metric manifests

inline nlohmann::json grid_json(const Grid& g) {
  return {{"topology", g.periodic() ? "periodic" : "rectangle"},
          {"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0},
          {"Lx", g.lx}, {"Ly", g.ly}, {"hx", g.hx}, {"hy", g.hy}};
}

inline Grid grid_from_json(const nlohmann::json& j) {
  const std::string topo = j.at("topology").get<std::string>();
  require(topo == "periodic" || topo == "rectangle", "unknown grid topology '" + topo + "'");
  return Grid::make(topo == "periodic" ? Topology::periodic : Topology::rectangle,
                    j.at("nx").get<int>(), j.at("ny").get<int>(), j.value("x0", 0.0),
                    j.value("y0", 0.0), j.at("Lx").get<double>(), j.at("Ly").get<double>());
}

namespace detail {

inline ScalarField component(const Mat2Field& f, int a, int b) {
  ScalarField s(f.grid, 0.0);
  for (std::size_t k = 0; k < s.values.size(); ++k) s.values[k] = f.values[k](a, b);
  return s;
}

}  // namespace detail

/// Writes one CSV per component plus manifest.json into `dir`.
inline fs::path save_metric(const fs::path& dir, const InvariantMetricData& d) {
  d.check_consistent();
  nlohmann::json comps;
  auto put = [&](const std::string& name, const ScalarField& f) {
    write_field_csv(dir / (name + ".csv"), f);
    comps[name] = name + ".csv";
  };
  if (d.gsigma.is_gauge()) {
    put("mu", d.gsigma.mu);
  } else {
    put("gsigma_11", detail::component(d.gsigma.g, 0, 0));
    put("gsigma_12", detail::component(d.gsigma.g, 0, 1));
    put("gsigma_22", detail::component(d.gsigma.g, 1, 1));
  }
  put("gomega_11", detail::component(d.gomega, 0, 0));
  put("gomega_12", detail::component(d.gomega, 0, 1));
  put("gomega_22", detail::component(d.gomega, 1, 1));
  put("C_11", detail::component(d.C, 0, 0));
  put("C_12", detail::component(d.C, 0, 1));
  put("C_21", detail::component(d.C, 1, 0));
  put("C_22", detail::component(d.C, 1, 1));
  nlohmann::json m = to_json(d.space);
  m["grid"] = grid_json(d.grid);
  m["metric"] = {{"quotient", d.gsigma.is_gauge() ? "gauge_mu" : "general"}, {"components", comps}};
  m["version"] = kVersion;
  const fs::path path = dir / "manifest.json";
  write_json(path, m);
  return path;
}

/// Loads a manifest written by save_metric (component paths relative to it).
inline InvariantMetricData load_metric(const fs::path& manifest) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed manifest " + manifest.string() + ": " + e.what());
  }
  try {
    InvariantMetricData d;
    d.space = orbit_space_from_json(m);
    d.grid = grid_from_json(m.at("grid"));
    require(d.grid.periodic() == d.space.periodic(), "grid topology disagrees with the domain");
    const auto& comps = m.at("metric").at("components");
    const fs::path base = manifest.parent_path();
    auto load = [&](const std::string& name) {
      return read_field_csv(base / comps.at(name).get<std::string>(), d.grid);
    };
    auto load2 = [&](const std::string& p, bool symmetric) {
      Mat2Field f(d.grid, Mat2::Zero());
      const ScalarField a = load(p + "_11"), b = load(p + "_12"),
                        c = symmetric ? b : load(p + "_21"), e = load(p + "_22");
      for (std::size_t k = 0; k < d.grid.size(); ++k)
        f.values[k] << a.values[k], b.values[k], c.values[k], e.values[k];
      return f;
    };
    const std::string kind = m.at("metric").value("quotient", "general");
    if (kind == "gauge_mu") {
      d.gsigma = QuotientMetricSpec::gauge(load("mu"));
    } else {
      require(kind == "general", "unknown quotient metric kind '" + kind + "'");
      d.gsigma = QuotientMetricSpec::general(load2("gsigma", true));
    }
    d.gomega = load2("gomega", true);
    d.C = load2("C", false);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("malformed manifest " + manifest.string() + ": " + e.what());
  }
}

/// Report envelope shared by every command: the payload plus reproducibility data.
inline nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config,
                                      const nlohmann::json& payload) {
  return {{"command", command}, {"version", kVersion}, {"config", config}, {"result", payload}};
}

}  // namespace t2inv
