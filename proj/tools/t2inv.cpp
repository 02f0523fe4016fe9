// t2inv: command-line front end. One command per process; every command
// writes <command>.json plus CSV fields into the output directory.
// Exit status: 0 pass, 2 verdict-fail, 1 error.

#include "t2inv/t2inv.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

namespace {

using namespace t2inv;
using nlohmann::json;

constexpr int kPass = 0;
constexpr int kError = 1;
constexpr int kVerdictFail = 2;

struct RunConfig {
  std::string command;
  std::string builtin;
  std::string manifest;
  int n = 65;
  std::uint64_t seed = 0;
  std::string out = "t2inv_out";
  double tol = 1e-10;

  // validate-action
  std::string edges;
  // smoothness-check
  double smooth_h = 0.02;
  double smooth_C = 10.0;
  // edge-ode, drift-solve
  double sec = 0.0;
  double length = kPi;
  std::optional<double> lambda;
  int samples = 1025;
  bool shoot = false;
  std::string trace = "data";
  // einstein-check
  std::optional<double> margin_h;
  double margin_fraction = 0.25;
  // classify-square
  std::vector<int> ps = {0, 1, 2, 3};
  double match_tol = 1e-3;
  // nic-check
  int nic_samples = 10000;
  // flow
  double T = 0.05;
  double dt = 1e-4;
  bool deturck = false;
  std::vector<double> patch;
  std::string boundary = "auto";

  fs::path out_dir() const { return output_directory(out); }

  void validate() const {
    require(n >= 3, "--n must be at least 3");
    require(tol > 0.0 && match_tol > 0.0 && smooth_h > 0.0 && smooth_C > 0.0,
            "tolerances must be positive");
    if (!manifest.empty())
      require(fs::exists(manifest), "manifest '" + manifest + "' does not exist");
    require(builtin.empty() || manifest.empty(), "give --builtin or --manifest, not both");
  }

  json to_json() const {
    json j = {{"command", command}, {"n", n}, {"seed", seed}, {"tolerance", tol}};
    if (!builtin.empty()) j["builtin"] = builtin;
    if (!manifest.empty()) j["manifest"] = manifest;
    return j;
  }
};

/// Metric input: an analytic builtin (sampled at n x n) or a saved manifest.
struct Input {
  std::optional<MetricModel> model;
  InvariantMetricData data;
};

Input load_input(const RunConfig& c) {
  Input in;
  if (!c.builtin.empty()) {
    in.model = builtin_model(c.builtin);
    in.data = sample(*in.model, c.n);
  } else if (!c.manifest.empty()) {
    in.data = load_metric(c.manifest);
  } else {
    throw InvalidInput("a metric is required: --builtin NAME or --manifest PATH");
  }
  return in;
}

int finish(const RunConfig& c, json config, json result, bool pass) {
  result["verdict"] = pass ? "pass" : "fail";
  const fs::path path = c.out_dir() / (c.command + ".json");
  write_json(path, report_envelope(c.command, config, result));
  std::cout << c.command << ": " << (pass ? "pass" : "fail") << "  (" << path.string() << ")\n";
  return pass ? kPass : kVerdictFail;
}

json einstein_json(const EinsteinReport& r) {
  json j = {{"lambda", r.lambda},         {"h", r.h},
            {"tolerance", r.tolerance},   {"margin", r.margin},
            {"nodes", r.nodes},           {"residual", r.residual},
            {"horizontal", r.horizontal}, {"vertical", r.vertical},
            {"mixed", r.mixed},           {"worst_node", {r.worst_i, r.worst_j}},
            {"lambda_estimate", r.lambda_estimate}, {"verdict", r.verdict()}};
  if (r.det) j["det_obstruction_sup"] = r.det->sup_abs;
  return j;
}

std::vector<Slope> parse_edges(const std::string& text) {
  static const std::regex pair(R"(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
  std::vector<Slope> out;
  std::string rest;
  auto it = std::sregex_iterator(text.begin(), text.end(), pair);
  std::size_t last = 0;
  for (; it != std::sregex_iterator(); ++it) {
    rest += text.substr(last, it->position() - last);
    last = it->position() + it->length();
    out.push_back({std::stoi((*it)[1]), std::stoi((*it)[2])});
  }
  rest += text.substr(last);
  for (char ch : rest)
    require(ch == ',' || ch == ' ', "cannot parse edge list '" + text + "'");
  require(!out.empty(), "edge list is empty");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_validate_action(const RunConfig& c) {
  const std::vector<Slope> edges = parse_edges(c.edges);
  const ActionReport r = validate_action(edges);
  json cfg = c.to_json();
  cfg["edges"] = edges;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < edges.size(); ++k)
    rows.push_back({double(k), double(edges[k].p), double(edges[k].q),
                    k < r.vertex_dets.size() ? double(r.vertex_dets[k]) : 0.0});
  atomic_write(c.out_dir() / "edges.csv", table_csv({"edge", "p", "q", "det_next"}, rows));
  for (const auto& d : r.diagnostics) std::cerr << "validate-action: " << d << "\n";
  return finish(c, cfg,
                {{"admissible", r.admissible},
                 {"classification", r.classification_label()},
                 {"vertex_dets", r.vertex_dets},
                 {"diagnostics", r.diagnostics}},
                r.admissible);
}

int cmd_smoothness(const RunConfig& c) {
  require(!c.builtin.empty(), "smoothness-check needs --builtin (it reads boundary charts)");
  const MetricModel m = builtin_model(c.builtin);
  SmoothnessOptions opt;
  opt.C = c.smooth_C;
  const SmoothnessReport rep = validate_model_smoothness(m, c.smooth_h, 7, opt);
  json conds = json::array();
  std::string csv = "name,location,pass,measured,tolerance\n";
  for (const auto& k : rep.conditions) {
    conds.push_back({{"name", k.name}, {"location", k.location}, {"pass", k.pass},
                     {"measured", k.measured}, {"tolerance", k.tolerance}});
    csv += k.name + ",\"" + k.location + "\"," + (k.pass ? "1" : "0") + "," +
           format_double(k.measured) + "," + format_double(k.tolerance) + "\n";
  }
  atomic_write(c.out_dir() / "conditions.csv", csv);
  json cfg = c.to_json();
  cfg["step"] = c.smooth_h;
  cfg["C"] = c.smooth_C;
  return finish(c, cfg, {{"conditions", conds}, {"failed", rep.failed_names()}}, rep.pass());
}

int cmd_curvature(const RunConfig& c) {
  const Input in = load_input(c);
  const InvariantMetricData& d = in.data;
  const Grid& g = d.grid;
  const Field<Mat4> G = full_metric_field(d);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ScalarField scal(g, nan);
  std::vector<ScalarField> ric(10, ScalarField(g, nan));
  double smin = INFINITY, smax = -INFINITY, sym = 0.0;
  const SamplingMargin all{0.0, std::nullopt};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!all.keep(g, i, j)) continue;
      const CurvatureSample s = ricci_from_coordinates(G, i, j);
      scal(i, j) = s.scalar;
      smin = std::min(smin, s.scalar);
      smax = std::max(smax, s.scalar);
      sym = std::max(sym, s.symmetry_defect());
      int k = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) ric[k++](i, j) = s.ricci(a, b);
    }
  const fs::path dir = c.out_dir();
  write_field_csv(dir / "scalar.csv", scal);
  int k = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      write_field_csv(dir / ("ricci_" + std::to_string(a + 1) + std::to_string(b + 1) + ".csv"),
                      ric[k++]);
  json res = {{"grid", grid_json(g)},
              {"scalar_min", smin},
              {"scalar_max", smax},
              {"symmetry_defect", sym},
              {"polar", d.polar()}};
  if (in.model && in.model->diagonal()) {
    const DiagonalCurvature dc = diagonal_curvature(sample_diagonal(*in.model, c.n, c.n));
    double worst = INFINITY;
    for (std::size_t q = 0; q < g.size(); ++q) {
      if (!std::isfinite(dc.s.values[q])) continue;
      const OperatorBlocks b = curvature_operator_blocks(dc.s.values[q], dc.p.values[q],
                                                         dc.A.values[q], dc.B.values[q]);
      const NicReport r = nonneg_isotropic_check(b.plus, b.minus);
      worst = std::min({worst, r.sum_plus, r.sum_minus});
    }
    res["nic_min_pair_sum"] = worst;
  }
  return finish(c, c.to_json(), res, true);
}

int cmd_eigen(const RunConfig& c) {
  const Input in = load_input(c);
  const EigenResult r = principal_eigenpair(in.data.gsigma, c.tol);
  write_field_csv(c.out_dir() / "phi.csv", r.phi);
  return finish(c, c.to_json(),
                {{"grid", grid_json(in.data.grid)},
                 {"lambda1", r.lambda1},
                 {"einstein_constant", r.lambda1 / 2.0},
                 {"residual", r.residual},
                 {"iterations", r.iterations},
                 {"lambda_change", r.lambda_change}},
                true);
}

int cmd_edge_ode(const RunConfig& c) {
  const double sec = c.sec;
  const auto secf = [sec](double) { return sec; };
  json cfg = c.to_json();
  cfg["sec"] = sec;
  cfg["length"] = c.length;
  cfg["samples"] = c.samples;
  double lambda = 0.0;
  if (c.shoot) {
    lambda = shoot_edge_eigenvalue(secf, c.length);
  } else {
    require(c.lambda.has_value(), "edge-ode needs --lambda or --shoot");
    lambda = *c.lambda;
  }
  cfg["lambda"] = lambda;
  json res = {{"lambda", lambda}};
  if (lambda > 2.0 * sec)
    res["compatibility"] = c.length * std::sqrt(lambda - 2.0 * sec) - kPi;
  try {
    const EdgeODEResult r = solve_edge_ode(secf, c.length, lambda, c.samples, 1e-6);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.t.size(); ++k) rows.push_back({r.t[k], r.sqrt_d0[k], r.d0[k]});
    atomic_write(c.out_dir() / "profile.csv", table_csv({"t", "sqrt_d0", "d0"}, rows));
    res.update({{"consistent", true}, {"end_value", r.end_value},
                {"end_slope", r.end_slope}, {"residual", r.residual}});
    return finish(c, cfg, res, true);
  } catch (const SolverError& e) {
    std::cerr << "edge-ode: " << e.what() << "\n";
    res.update({{"consistent", false}, {"diagnostic", e.what()}});
    atomic_write(c.out_dir() / "profile.csv", table_csv({"t", "sqrt_d0", "d0"}, {}));
    return finish(c, cfg, res, false);
  }
}

int cmd_drift_solve(const RunConfig& c) {
  const Input in = load_input(c);
  const InvariantMetricData& d = in.data;
  const Grid& g = d.grid;
  require(!g.periodic() && !d.space.edges.empty(), "drift-solve needs a rectangle with edge labels");
  const EigenResult ep = principal_eigenpair(d.gsigma, c.tol);
  const double lambda = c.lambda.value_or(ep.lambda1 / 2.0);
  json cfg = c.to_json();
  cfg["trace"] = c.trace;
  cfg["lambda"] = lambda;
  json res = {{"grid", grid_json(g)}, {"lambda1", ep.lambda1}};

  // boundary data per entry: read off the input, or built from the edge ODE
  std::array<ScalarField, 3> bc;
  ScalarField root_d0(g, 0.0);
  const int ent[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  if (c.trace == "data") {
    for (int e = 0; e < 3; ++e) bc[e] = detail::component(d.gomega, ent[e][0], ent[e][1]);
    // on an edge with slope (p, q), g^Omega = d0 [[q^2, pq], [pq, p^2]]
    for (std::size_t k = 0; k < d.space.edges.size(); ++k) {
      const Slope sl = d.space.edges[k];
      const double norm2 = double(sl.p) * sl.p + double(sl.q) * sl.q;
      for (std::size_t node : g.side_nodes(d.space.edge_side(k)))
        root_d0.values[node] = std::sqrt(std::max(d.gomega.values[node].trace() / norm2, 0.0));
    }
  } else {
    require(c.trace == "ode", "--trace must be 'data' or 'ode'");
    const double sec = c.sec;
    const auto secf = [sec](double) { return sec; };
    std::vector<std::function<double(double)>> d0;
    json edge_lambdas = json::array();
    for (std::size_t k = 0; k < d.space.edges.size(); ++k) {
      const Side s = d.space.edge_side(k);
      const double len = (s == Side::bottom || s == Side::top) ? g.lx : g.ly;
      const double lam = shoot_edge_eigenvalue(secf, len);
      edge_lambdas.push_back(lam);
      const EdgeODEResult r = solve_edge_ode(secf, len, lam, c.samples);
      const double dt = r.t[1] - r.t[0];
      d0.push_back([r, dt](double t) {
        const double u = t / dt;
        const auto k = static_cast<std::size_t>(
            std::clamp(std::floor(u), 0.0, double(r.d0.size() - 2)));
        const double w = u - k;
        return (1 - w) * r.d0[k] + w * r.d0[k + 1];
      });
    }
    res["edge_lambda"] = edge_lambdas;
    std::vector<std::function<double(double)>> roots;
    for (const auto& f : d0) roots.push_back([f](double t) { return std::sqrt(std::max(f(t), 0.0)); });
    root_d0 = edge_profile_field(d.space, g, roots);
    for (int e = 0; e < 3; ++e) bc[e] = slope_boundary_trace(d.space, g, ent[e][0], ent[e][1], d0);
  }

  ScalarField phi = ep.phi;
  const double scale = edge_normalization(phi, d.gsigma, d.space, root_d0);
  for (double& v : phi.values) v *= scale;
  res["phi_scale"] = scale;

  Mat2Field solved = d.gomega;
  json entries = json::array();
  const fs::path dir = c.out_dir();
  double max_err = 0.0;
  for (int e = 0; e < 3; ++e) {
    const int a = ent[e][0], b = ent[e][1];
    const DriftSolution s = solve_drift_pde({d.gsigma, phi, lambda, bc[e]});
    double err = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      err = std::max(err, std::abs(s.u.values[k] - d.gomega.values[k](a, b)));
      solved.values[k](a, b) = solved.values[k](b, a) = s.u.values[k];
    }
    max_err = std::max(max_err, err);
    const std::string name = "u_" + std::to_string(a + 1) + std::to_string(b + 1);
    write_field_csv(dir / (name + ".csv"), s.u);
    entries.push_back({{"entry", name}, {"solver_residual", s.residual}, {"direct", s.direct},
                       {"sup_difference_from_input", err}});
  }
  const DetObstruction det = det_obstruction(solved, phi);
  write_field_csv(dir / "phi.csv", phi);
  write_field_csv(dir / "det_obstruction.csv", det.field);
  res.update({{"entries", entries},
              {"max_difference_from_input", max_err},
              {"matches_input", max_err <= c.match_tol},
              {"det_obstruction_sup", det.sup_abs},
              {"det_obstruction_center", det.field(g.nx / 2, g.ny / 2)}});
  return finish(c, cfg, res, true);
}

int cmd_einstein(const RunConfig& c) {
  const Input in = load_input(c);
  std::optional<double> lam = c.lambda;
  if (!lam && in.model) lam = in.model->lambda;
  require(lam.has_value(), "einstein-check needs --lambda (the model has no Einstein constant)");
  SamplingMargin margin{c.margin_fraction, c.margin_h};
  const EinsteinReport r = einstein_residual(in.data, *lam, margin);
  write_field_csv(c.out_dir() / "residual.csv", r.field);
  json cfg = c.to_json();
  cfg["lambda"] = *lam;
  cfg["margin"] = r.margin;
  json res = einstein_json(r);
  res["grid"] = grid_json(in.data.grid);
  return finish(c, cfg, res, r.einstein);
}

int cmd_classify(const RunConfig& c) {
  const auto rows = classify_square_actions(c.ps, c.n, c.match_tol);
  json table = json::array();
  std::vector<std::vector<double>> csv;
  bool consistent = true;
  for (const auto& r : rows) {
    table.push_back({{"p", r.p}, {"lambda", r.lambda}, {"edge_lambda", r.edge_lambda},
                     {"phi_scale", r.phi_scale},
                     {"entry_error", r.entry_error}, {"solutions_found", r.solutions_found},
                     {"det_sup", r.det_sup}, {"det_center", r.det_center},
                     {"einstein", r.einstein.einstein}, {"residual", r.einstein.residual},
                     {"tolerance", r.einstein.tolerance}});
    csv.push_back({double(r.p), r.lambda, r.edge_lambda, r.max_entry_error, r.det_center,
                   r.det_sup, r.einstein.residual, r.einstein.einstein ? 1.0 : 0.0});
    consistent = consistent && r.solutions_found && (r.einstein.einstein == (r.p == 0));
  }
  atomic_write(c.out_dir() / "classification.csv",
               table_csv({"p", "lambda", "edge_lambda", "max_entry_error", "det_center", "det_sup",
                          "residual", "einstein"},
                         csv));
  json cfg = c.to_json();
  cfg["p"] = c.ps;
  cfg["match_tolerance"] = c.match_tol;
  return finish(c, cfg, {{"table", table}, {"einstein_only_at_p0", consistent}}, consistent);
}

int cmd_nic(const RunConfig& c) {
  json cfg = c.to_json();
  json res;
  std::vector<std::vector<double>> rows;
  bool pass = true;
  if (!c.builtin.empty()) {
    const MetricModel m = builtin_model(c.builtin);
    const DiagonalCurvature dc = diagonal_curvature(sample_diagonal(m, c.n, c.n));
    const SamplingMargin margin{c.margin_fraction, c.margin_h};
    ScalarField worst(dc.grid, std::numeric_limits<double>::quiet_NaN());
    std::size_t nodes = 0, failed = 0;
    for (int j = 0; j < dc.grid.ny; ++j)
      for (int i = 0; i < dc.grid.nx; ++i) {
        if (!margin.keep(dc.grid, i, j) || !std::isfinite(dc.s(i, j))) continue;
        const OperatorBlocks b = curvature_operator_blocks(dc, i, j);
        const NicReport r = nonneg_isotropic_check(b.plus, b.minus, c.tol);
        worst(i, j) = std::min(r.sum_plus, r.sum_minus);
        ++nodes;
        failed += !r.nonnegative;
      }
    write_field_csv(c.out_dir() / "nic_min_pair_sum.csv", worst);
    cfg["margin"] = margin.str();
    pass = failed == 0 && nodes > 0;
    res = {{"nodes", nodes}, {"failed_nodes", failed}, {"grid", grid_json(dc.grid)}};
  } else {
    std::mt19937_64 rng(c.seed);
    std::size_t failed = 0;
    double worst = INFINITY;
    for (int k = 0; k < c.nic_samples; ++k) {
      const NicSample x = random_nic_sample(rng);
      const NicReport r = nonneg_isotropic_check(x, c.tol);
      failed += !r.nonnegative;
      worst = std::min({worst, r.sum_plus, r.sum_minus});
      rows.push_back({double(k), x.s, x.p, r.sum_plus, r.sum_minus, r.nonnegative ? 1.0 : 0.0});
    }
    const NicReport ce = nonneg_isotropic_check(nic_counterexample(), c.tol);
    atomic_write(c.out_dir() / "samples.csv",
                 table_csv({"sample", "s", "p", "sum_plus", "sum_minus", "pass"}, rows));
    cfg["samples"] = c.nic_samples;
    pass = failed == 0 && !ce.nonnegative;
    res = {{"samples", c.nic_samples},
           {"failed_samples", failed},
           {"min_pair_sum", worst},
           {"counterexample", {{"nonnegative", ce.nonnegative},
                               {"sum_plus", ce.sum_plus},
                               {"sum_minus", ce.sum_minus}}}};
  }
  return finish(c, cfg, res, pass);
}

int cmd_flow(const RunConfig& c) {
  Input in;
  if (!c.builtin.empty()) {
    MetricModel m = builtin_model(c.builtin);
    if (!c.patch.empty()) {
      require(c.patch.size() == 4, "--patch takes x0,y0,lx,ly");
      m = restrict_model(m, c.patch[0], c.patch[1], c.patch[2], c.patch[3]);
    }
    in.model = m;
    in.data = sample(m, c.n);
  } else {
    require(c.patch.empty(), "--patch needs --builtin");
    in = load_input(c);
  }
  const InvariantMetricData& d = in.data;
  const Field<Mat4> G0 = full_metric_field(d);
  std::optional<double> lam = c.lambda;
  if (!lam && in.model) lam = in.model->lambda;

  FlowOptions opt;
  opt.T = c.T;
  opt.dt = c.dt;
  opt.deturck = c.deturck;
  std::string boundary = c.boundary;
  if (boundary == "auto") boundary = d.grid.periodic() ? "none" : (lam ? "homothety" : "fixed");
  if (boundary == "homothety") {
    require(lam.has_value(), "homothety boundary needs --lambda");
    opt.boundary = homothety_boundary(G0, *lam);
  } else if (boundary == "fixed") {
    opt.boundary = [G0](double, int i, int j) { return G0(i, j); };
  } else {
    require(boundary == "none" && d.grid.periodic(),
            "--boundary must be homothety, fixed, or none (periodic data only)");
  }

  const FlowTrace tr = run_flow(d, opt);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    rows.push_back({tr.t[k], tr.polarity[k], tr.diagonal[k], tr.component_norm[k],
                    tr.bounds[k].ric_norm, tr.bounds[k].log_w_rate});
  const fs::path dir = c.out_dir();
  atomic_write(dir / "trace.csv", table_csv({"t", "polarity_defect", "diagonal_defect",
                                             "component_norm", "ric_norm", "log_w_rate"},
                                            rows));
  if (!tr.snapshots.empty()) save_metric(dir / "final", tr.snapshots.back());

  json cfg = c.to_json();
  cfg.update({{"T", c.T}, {"dt", c.dt}, {"deturck", c.deturck}, {"boundary", boundary},
              {"slack", opt.slack}, {"patch", c.patch}});
  json res = {{"grid", grid_json(d.grid)},
              {"steps", tr.t.empty() ? 0 : tr.t.size() - 1},
              {"completed", tr.completed},
              {"C_polarity", tr.C_polarity},
              {"C_diagonal", tr.C_diagonal},
              {"polarity_violation", tr.polarity_violation},
              {"diagonal_violation", tr.diagonal_violation},
              {"polarity_monotone", tr.polarity_monotone},
              {"diagonal_monotone", tr.diagonal_monotone},
              {"defect_measure", "integral over the orbit space; multiply by 4 pi^2 for the total space"}};
  if (!tr.error.empty()) res["error"] = tr.error;
  bool pass = tr.completed && tr.polarity_monotone && tr.diagonal_monotone;
  if (boundary == "homothety") {
    const double err = homothety_error(tr, G0, *lam);
    res["homothety_relative_error"] = err;
    pass = pass && err <= 1e-3;
  }
  return finish(c, cfg, res, pass);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"T^2-invariant 4-metrics: orbit-space reduction, solvers, verifiers, flow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  RunConfig c;

  auto common = [&](CLI::App* s, bool metric) {
    s->add_option("--out", c.out, "output directory (T2INV_OUTPUT_DIR overrides)");
    s->add_option("--seed", c.seed, "random seed");
    s->add_option("--tol", c.tol, "solver / check tolerance");
    if (metric) {
      s->add_option("--builtin", c.builtin, "builtin metric, e.g. round_s4, square_family(2)");
      s->add_option("--manifest", c.manifest, "metric manifest.json");
      s->add_option("--n", c.n, "grid nodes per side");
    }
  };

  auto* va = app.add_subcommand("validate-action", "check edge labels of a torus action");
  common(va, false);
  va->add_option("--edges", c.edges, "cyclic slope list, e.g. \"(1,0),(0,1),(1,0),(2,1)\"")->required();

  auto* sm = app.add_subcommand("smoothness-check", "boundary and vertex smoothness conditions");
  common(sm, true);
  sm->add_option("--step", c.smooth_h, "station spacing h");
  sm->add_option("--C", c.smooth_C, "tolerance constant, |coefficient| <= C h^2");

  auto* cu = app.add_subcommand("curvature", "Ricci and scalar curvature fields");
  common(cu, true);

  auto* ei = app.add_subcommand("eigen", "principal Dirichlet eigenpair of the quotient Laplacian");
  common(ei, true);

  auto* eo = app.add_subcommand("edge-ode", "orbit-length profile along an edge");
  common(eo, false);
  eo->add_option("--sec", c.sec, "constant curvature along the edge");
  eo->add_option("--length", c.length, "edge length");
  eo->add_option("--lambda", c.lambda, "Einstein constant");
  eo->add_option("--samples", c.samples, "output samples");
  eo->add_flag("--shoot", c.shoot, "find Lambda by shooting instead of taking --lambda");

  auto* dr = app.add_subcommand("drift-solve", "orbit metric entries from the drift PDE");
  common(dr, true);
  dr->add_option("--lambda", c.lambda, "Einstein constant (default lambda1 / 2)");
  dr->add_option("--trace", c.trace, "boundary data: 'data' (from input) or 'ode' (edge ODE)");
  dr->add_option("--sec", c.sec, "edge curvature used with --trace ode");
  dr->add_option("--samples", c.samples, "edge ODE samples");
  dr->add_option("--match-tol", c.match_tol, "tolerance for matching the input orbit metric");

  auto* es = app.add_subcommand("einstein-check", "residual of Ric - Lambda g");
  common(es, true);
  es->add_option("--lambda", c.lambda, "Einstein constant (default: the model's)");
  es->add_option("--margin-fraction", c.margin_fraction, "excluded strip, fraction of each side");
  es->add_option("--margin-h", c.margin_h, "excluded strip in grid steps (overrides the fraction)");

  auto* cs = app.add_subcommand("classify-square", "reduced Einstein pipeline on square actions");
  common(cs, true);
  cs->add_option("--p", c.ps, "Hirzebruch parameters")->delimiter(',');
  cs->add_option("--match-tol", c.match_tol, "closed-form matching tolerance");

  auto* ni = app.add_subcommand("nic-check", "nonnegative isotropic curvature of operator blocks");
  common(ni, true);
  ni->add_option("--samples", c.nic_samples, "random block samples");
  ni->add_option("--margin-fraction", c.margin_fraction, "excluded strip for --builtin");
  ni->add_option("--margin-h", c.margin_h, "excluded strip in grid steps");

  auto* fl = app.add_subcommand("flow", "Ricci flow of invariant data with defect tracking");
  common(fl, true);
  fl->add_option("--T", c.T, "final time");
  fl->add_option("--dt", c.dt, "time step");
  fl->add_option("--lambda", c.lambda, "Einstein constant for the homothety boundary");
  fl->add_flag("--deturck", c.deturck, "add the DeTurck term (initial metric as background)");
  fl->add_option("--patch", c.patch, "sub-rectangle x0,y0,lx,ly of a builtin")->delimiter(',');
  fl->add_option("--boundary", c.boundary, "auto, homothety, fixed or none");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kError;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    c.validate();
    if (c.command == "validate-action") return cmd_validate_action(c);
    if (c.command == "smoothness-check") return cmd_smoothness(c);
    if (c.command == "curvature") return cmd_curvature(c);
    if (c.command == "eigen") return cmd_eigen(c);
    if (c.command == "edge-ode") return cmd_edge_ode(c);
    if (c.command == "drift-solve") return cmd_drift_solve(c);
    if (c.command == "einstein-check") return cmd_einstein(c);
    if (c.command == "classify-square") return cmd_classify(c);
    if (c.command == "nic-check") return cmd_nic(c);
    if (c.command == "flow") return cmd_flow(c);
    throw InvalidInput("unknown command " + c.command);
  } catch (const std::exception& e) {
    std::cerr << "t2inv " << c.command << ": error: " << e.what() << "\n";
    return kError;
  }
}
