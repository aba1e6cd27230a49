// Command-line interface for geometric quantiles on Hadamard manifolds.
//
// Subcommands: quantile, field, measures, permtest, table12, contours,
// breakdown, gradcheck. Every command echoes a manifest (command, argv,
// version, seed, config) next to its result; re-running the recorded argv
// reproduces the result bit for bit. Exit codes: 0 success, 2 validation
// error, 3 numerical/solver error, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hadaq/dataset_io.hpp"
#include "hadaq/euclidean.hpp"
#include "hadaq/experiments.hpp"
#include "hadaq/parallel.hpp"
#include "hadaq/rng.hpp"
#include "hadaq/stats.hpp"
#include "hadaq/version.hpp"

using nlohmann::json;
using namespace hadaq;

namespace {

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse \"" + cell + "\"");
    }
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& what) {
  const auto nums = parse_number_list(text, what);
  Eigen::VectorXd v(static_cast<Eigen::Index>(nums.size()));
  for (std::size_t i = 0; i < nums.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = nums[i];
  return v;
}

struct SolverFlags {
  double tol = 0.0;
  int maxcount = 200;
  double lr0 = 0.0;
  std::uint64_t seed = 0;

  DescentConfig config() const {
    DescentConfig cfg;
    cfg.tol = tol;
    cfg.maxcount = maxcount;
    cfg.lr0 = lr0;
    cfg.seed = seed;
    return cfg;
  }
  json to_json() const {
    return json{{"tol", tol},
                {"maxcount", maxcount},
                {"lr0", lr0},
                {"seed", seed}};
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags* flags) {
  cmd->add_option("--tol", flags->tol,
                  "Learning-rate floor (0: auto, 1e-6 * lr0)");
  cmd->add_option("--maxcount", flags->maxcount, "Rejection budget");
  cmd->add_option("--lr0", flags->lr0,
                  "Initial learning rate (0: auto, 0.1 * data diameter)");
  cmd->add_option("--seed", flags->seed, "Seed echoed into outputs");
}

GradientMode parse_mode(const std::string& name) {
  if (name == "exact") return GradientMode::Exact;
  if (name == "transport") return GradientMode::TransportApprox;
  if (name == "radial") return GradientMode::RadialApprox;
  if (name == "fd") return GradientMode::FiniteDifference;
  throw ValidationError("unknown gradient mode \"" + name + "\"");
}

LossKind parse_kind(const std::string& name) {
  if (name == "data") return LossKind::DataBased;
  if (name == "param") return LossKind::ParameterBased;
  throw ValidationError("unknown loss kind \"" + name + "\"");
}

std::string mode_name(GradientMode m) {
  switch (m) {
    case GradientMode::Exact: return "exact";
    case GradientMode::TransportApprox: return "transport";
    case GradientMode::RadialApprox: return "radial";
    case GradientMode::FiniteDifference: return "fd";
  }
  return "?";
}

// Direction given as circle:L:l-style grid coordinates (anchored at the
// canonical base point) or as explicit anchor/vector coordinate lists.
struct DirectionFlags {
  std::string circle;  // "L:l"
  std::string anchor;
  std::string vec;

  BoundaryDirection build(const Manifold& M) const {
    if (!circle.empty()) {
      int L = 0, l = 0;
      if (std::sscanf(circle.c_str(), "%d:%d", &L, &l) != 2)
        throw ValidationError("--xi-circle expects L:l");
      const DirectionGrid grid = directions_circle(M, M.base_point(), L);
      if (l < 1 || l > L)
        throw ValidationError("--xi-circle index l must be in 1..L");
      return grid.dirs[static_cast<std::size_t>(l - 1)];
    }
    if (vec.empty())
      throw ValidationError(
          "a direction is required (--xi-circle or --xi-vec)");
    const ManifoldPoint a = anchor.empty()
                                ? M.base_point()
                                : M.point(parse_vector(anchor, "--xi-anchor"));
    return M.direction(a, parse_vector(vec, "--xi-vec"));
  }

  json to_json() const {
    if (!circle.empty()) return json{{"circle", circle}};
    json j{{"vec", vec}};
    if (!anchor.empty()) j["anchor"] = anchor;
    return j;
  }
};

void add_direction_flags(CLI::App* cmd, DirectionFlags* flags) {
  cmd->add_option("--xi-circle", flags->circle,
                  "Direction l of an L-point circle grid, as L:l");
  cmd->add_option("--xi-anchor", flags->anchor,
                  "Anchor coordinates (comma separated; matrices row-major)");
  cmd->add_option("--xi-vec", flags->vec,
                  "Direction vector at the anchor (comma separated)");
}

// Grid given as circle:L or random:K.
DirectionGrid build_grid(const Manifold& M, const ManifoldPoint& anchor,
                         const std::string& spec, std::uint64_t seed) {
  int n = 0;
  if (std::sscanf(spec.c_str(), "circle:%d", &n) == 1)
    return directions_circle(M, anchor, n);
  if (std::sscanf(spec.c_str(), "random:%d", &n) == 1) {
    if (n < 2 || n % 2 != 0)
      throw ValidationError("--directions random:K needs an even K >= 2");
    return directions_random_antipodal(M, anchor, n / 2, seed);
  }
  throw ValidationError("--directions expects circle:L or random:K");
}

json result_json(const Manifold& M, const QuantileResult& r) {
  json j;
  j["point"] = point_to_json(M, r.point);
  j["objective"] = r.objective;
  j["first_order_residual"] = r.first_order_residual;
  j["residual_at_kink"] = r.residual_at_kink;
  j["iters"] = r.iters;
  j["termination"] =
      r.termination == Termination::LrFloor ? "lr_floor" : "maxcount";
  j["lr_final"] = r.lr_final;
  return j;
}

json measures_json(const MeasureReport& rep) {
  return json{{"delta1", rep.delta1},
              {"delta2", rep.delta2},
              {"gamma1", rep.gamma1},
              {"gamma2_norm", rep.gamma2_norm},
              {"kappa1", rep.kappa1},
              {"kappa2", rep.kappa2},
              {"alpha", rep.alpha},
              {"beta", rep.beta},
              {"beta_prime", rep.beta_prime},
              {"K", rep.K},
              {"seed", rep.seed}};
}

json table_json(const ErrorTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json cells = json::array();
    for (const auto& cell : row.cells) {
      if (cell.ok)
        cells.push_back(cell.value);
      else
        cells.push_back(json{{"error", cell.error}});
    }
    rows.push_back(
        json{{"label", row.label},
             {"loss", row.kind == LossKind::DataBased ? "data" : "param"},
             {"step", mode_name(row.mode)},
             {"reference", row.reference},
             {"cells", cells}});
  }
  return json{{"betas", table.betas}, {"L", table.L}, {"rows", rows}};
}

struct OutputWriter {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  json config = json::object();
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void emit(const std::string& out_path, const json& result,
            const std::string& summary) const {
    if (!out_path.empty()) {
      RunManifest manifest;
      manifest.command = command;
      manifest.argv = argv;
      manifest.version = kVersion;
      manifest.seed = seed;
      manifest.config = config;
      manifest.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start)
              .count();
    write_output_file(out_path, manifest, result);
    }
    std::cout << summary << "\n";
  }
};

std::vector<QuantileIndex> load_indices(const Manifold& M,
                                        const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": JSON parse error: " + e.what());
  }
  if (!j.is_array() || j.empty())
    throw ValidationError(path + ": expected a nonempty array of indices");
  std::vector<QuantileIndex> out;
  int idx = 0;
  for (const auto& item : j) {
    const std::string where = path + ": indices[" + std::to_string(idx) + "]";
    if (!item.contains("beta") || !item["beta"].is_number())
      throw ValidationError(where + ": missing numeric beta");
    QuantileIndex q;
    q.beta = item["beta"].get<double>();
    if (!item.contains("xi")) throw ValidationError(where + ": missing xi");
    const json& xi = item["xi"];
    if (xi.contains("circle")) {
      const json& c = xi["circle"];
      if (!c.contains("L") || !c.contains("l"))
        throw ValidationError(where + ": circle direction needs L and l");
      const int L = c["L"].get<int>();
      const int l = c["l"].get<int>();
      const DirectionGrid grid = directions_circle(M, M.base_point(), L);
      if (l < 1 || l > L)
        throw ValidationError(where + ": circle index l out of range");
      q.xi = grid.dirs[static_cast<std::size_t>(l - 1)];
    } else if (xi.contains("anchor") && xi.contains("vec")) {
      const ManifoldPoint a = point_from_json(M, xi["anchor"], where);
      const json& vj = xi["vec"];
      Eigen::VectorXd v(static_cast<Eigen::Index>(vj.size()));
      for (std::size_t i = 0; i < vj.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = vj[i].get<double>();
      q.xi = M.direction(a, v);
    } else {
      throw ValidationError(where + ": xi needs circle or anchor+vec");
    }
    check_index(M, q);
    out.push_back(std::move(q));
    ++idx;
  }
  return out;
}

ManifoldPoint solve_median(const Manifold& M,
                           const std::vector<ManifoldPoint>& data,
                           const DescentConfig& cfg) {
  const BoundaryDirection any =
      BoundaryDirection{M.orthonormal_basis(M.base_point())[0]};
  return descent(M, data, QuantileIndex{0.0, any}, cfg, GradientMode::Exact,
                 LossKind::DataBased)
      .point;
}

int run(int argc, char** argv) {
  CLI::App app{"Geometric quantiles on Hadamard manifolds"};
  app.require_subcommand(1);

  auto* cmd_q = app.add_subcommand("quantile", "Solve one sample quantile");
  std::string q_data, q_loss = "data", q_grad, q_out;
  double q_beta = 0.0;
  SolverFlags q_solver;
  DirectionFlags q_dir;
  cmd_q->add_option("--data", q_data, "Dataset file")->required();
  cmd_q->add_option("--beta", q_beta, "Quantile magnitude in [0,1)")
      ->required();
  add_direction_flags(cmd_q, &q_dir);
  cmd_q->add_option("--loss", q_loss, "Loss kind: data|param");
  cmd_q->add_option("--grad", q_grad,
                    "Step: exact|transport|radial|fd (default exact/fd)");
  add_solver_flags(cmd_q, &q_solver);
  cmd_q->add_option("--out", q_out, "JSON output path");

  auto* cmd_f = app.add_subcommand("field", "Quantile field over a grid");
  std::string f_data, f_betas = "0,0.2,0.4,0.6,0.8,0.98";
  std::string f_dirspec = "circle:8", f_anchor = "median";
  std::string f_loss = "data", f_grad = "exact", f_out;
  int f_threads = 0;
  SolverFlags f_solver;
  cmd_f->add_option("--data", f_data, "Dataset file")->required();
  cmd_f->add_option("--betas", f_betas, "Comma-separated ascending betas");
  cmd_f->add_option("--directions", f_dirspec, "circle:L or random:K");
  cmd_f->add_option("--anchor", f_anchor, "Grid anchor: median|origin");
  cmd_f->add_option("--loss", f_loss, "Loss kind: data|param");
  cmd_f->add_option("--grad", f_grad, "Step: exact|transport|radial|fd");
  cmd_f->add_option("--threads", f_threads, "Worker threads (0: hardware)");
  add_solver_flags(cmd_f, &f_solver);
  cmd_f->add_option("--out", f_out, "JSON output path");

  auto* cmd_m =
      app.add_subcommand("measures", "Quantile-based distributional measures");
  std::string m_data, m_dirspec = "random:16", m_out;
  double m_beta = 0.5, m_beta_prime = 0.8;
  int m_threads = 0;
  SolverFlags m_solver;
  cmd_m->add_option("--data", m_data, "Dataset file")->required();
  cmd_m->add_option("--beta", m_beta, "Measure level in (0,1)");
  cmd_m->add_option("--beta-prime", m_beta_prime,
                    "Second level for the kurtosis ratios");
  cmd_m->add_option("--directions", m_dirspec, "circle:L or random:K");
  cmd_m->add_option("--threads", m_threads, "Worker threads (0: hardware)");
  add_solver_flags(cmd_m, &m_solver);
  cmd_m->add_option("--out", m_out, "JSON output path");

  auto* cmd_p = app.add_subcommand("permtest", "Two-sample permutation test");
  std::string p_a, p_b, p_indices, p_out;
  int p_nperm = 500, p_threads = 0;
  SolverFlags p_solver;
  cmd_p->add_option("--data-a", p_a, "First dataset")->required();
  cmd_p->add_option("--data-b", p_b, "Second dataset")->required();
  cmd_p->add_option("--indices", p_indices, "Quantile index file")->required();
  cmd_p->add_option("--n-perm", p_nperm, "Number of permutations");
  cmd_p->add_option("--threads", p_threads, "Worker threads (0: hardware)");
  add_solver_flags(cmd_p, &p_solver);
  cmd_p->add_option("--out", p_out, "JSON output path");

  auto* cmd_t = app.add_subcommand(
      "table12", "Approximation-error table on simulated disk data");
  std::string t_data, t_betas = "0.2,0.4,0.6,0.8,0.98", t_out;
  int t_n = 100, t_L = 64, t_threads = 0;
  double t_sigma2 = 0.3, t_compress = 0.0;
  SolverFlags t_solver;
  cmd_t->add_option("--data", t_data,
                    "Hyperboloid dataset (default: simulate)");
  cmd_t->add_option("--n", t_n, "Simulated sample size");
  cmd_t->add_option("--sigma2", t_sigma2, "Gaussian variance of the draws");
  cmd_t->add_option("--compress-y", t_compress,
                    "Divide the second disk coordinate by this factor");
  cmd_t->add_option("--betas", t_betas, "Beta columns (no zeros)");
  cmd_t->add_option("--L", t_L, "Directions per column");
  cmd_t->add_option("--threads", t_threads, "Worker threads (0: hardware)");
  add_solver_flags(cmd_t, &t_solver);
  cmd_t->add_option("--out", t_out, "JSON output path");

  auto* cmd_c = app.add_subcommand(
      "contours", "Isoquantile polylines in disk coordinates");
  std::string c_data, c_betas = "0.2,0.4,0.6,0.8,0.98", c_out, c_csv;
  int c_n = 100, c_L = 64, c_threads = 0;
  double c_sigma2 = 0.3, c_compress = 0.0;
  SolverFlags c_solver;
  cmd_c->add_option("--data", c_data,
                    "Hyperboloid dataset (default: simulate)");
  cmd_c->add_option("--n", c_n, "Simulated sample size");
  cmd_c->add_option("--sigma2", c_sigma2, "Gaussian variance of the draws");
  cmd_c->add_option("--compress-y", c_compress,
                    "Divide the second disk coordinate by this factor");
  cmd_c->add_option("--betas", c_betas, "Contour levels");
  cmd_c->add_option("--L", c_L, "Vertices per contour");
  cmd_c->add_option("--threads", c_threads, "Worker threads (0: hardware)");
  add_solver_flags(cmd_c, &c_solver);
  cmd_c->add_option("--out", c_out, "JSON output path");
  cmd_c->add_option("--csv", c_csv, "Polyline CSV output path");

  auto* cmd_b = app.add_subcommand("breakdown", "Empirical breakdown probe");
  std::string b_data, b_magnitudes = "1e2,1e4,1e6", b_out;
  double b_beta = 0.0;
  int b_j = 1;
  SolverFlags b_solver;
  DirectionFlags b_dir;
  cmd_b->add_option("--data", b_data, "Dataset file")->required();
  cmd_b->add_option("--beta", b_beta, "Quantile magnitude in [0,1)");
  add_direction_flags(cmd_b, &b_dir);
  cmd_b->add_option("--j", b_j, "Number of corrupted points")->required();
  cmd_b->add_option("--magnitudes", b_magnitudes, "Corruption magnitudes");
  add_solver_flags(cmd_b, &b_solver);
  cmd_b->add_option("--out", b_out, "JSON output path");

  auto* cmd_g = app.add_subcommand(
      "gradcheck", "Compare analytic gradients against finite differences");
  std::string g_manifold = "hyperboloid:2:-1", g_out;
  int g_configs = 100;
  double g_h = 1e-4;
  std::uint64_t g_seed = 0;
  cmd_g->add_option("--manifold", g_manifold,
                    "euclidean:N | hyperboloid:N:kappa | spd:M");
  cmd_g->add_option("--configs", g_configs, "Number of random configurations");
  cmd_g->add_option("--fd-step", g_h, "Finite-difference step");
  cmd_g->add_option("--seed", g_seed, "Seed for the random configurations");
  cmd_g->add_option("--out", g_out, "JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 64;
  }

  OutputWriter writer;
  writer.argv.assign(argv, argv + argc);

  if (cmd_q->parsed()) {
    const Dataset ds = load_dataset(q_data);
    const LossKind kind = parse_kind(q_loss);
    const GradientMode mode = parse_mode(
        q_grad.empty() ? (kind == LossKind::DataBased ? "exact" : "fd")
                       : q_grad);
    const BoundaryDirection xi = q_dir.build(*ds.manifold);
    const QuantileIndex q{q_beta, xi};
    writer.command = "quantile";
    writer.seed = q_solver.seed;
    writer.config = {{"data", q_data},        {"beta", q_beta},
                     {"loss", q_loss},        {"grad", mode_name(mode)},
                     {"xi", q_dir.to_json()}, {"solver", q_solver.to_json()}};
    const QuantileResult res =
        descent(*ds.manifold, ds.points, q, q_solver.config(), mode, kind);
    std::ostringstream os;
    os << "quantile beta=" << q_beta << " objective=" << res.objective
       << " residual=" << res.first_order_residual << " iters=" << res.iters;
    writer.emit(q_out, result_json(*ds.manifold, res), os.str());
    return 0;
  }

  if (cmd_f->parsed()) {
    const Dataset ds = load_dataset(f_data);
    const auto betas = parse_number_list(f_betas, "--betas");
    const LossKind kind = parse_kind(f_loss);
    const GradientMode mode = parse_mode(f_grad);
    const DescentConfig cfg = f_solver.config();
    const int threads = f_threads > 0 ? f_threads : hardware_threads();
    ManifoldPoint anchor = ds.manifold->base_point();
    if (f_anchor == "median")
      anchor = solve_median(*ds.manifold, ds.points, cfg);
    else if (f_anchor != "origin")
      throw ValidationError("--anchor expects median or origin");
    const DirectionGrid grid =
        build_grid(*ds.manifold, anchor, f_dirspec, f_solver.seed);
    writer.command = "field";
    writer.seed = f_solver.seed;
    writer.config = {{"data", f_data},          {"betas", betas},
                     {"directions", f_dirspec}, {"anchor", f_anchor},
                     {"loss", f_loss},          {"grad", f_grad},
                     {"threads", f_threads},    {"solver", f_solver.to_json()}};
    const auto field = quantile_field(*ds.manifold, ds.points, betas,
                                      grid.dirs, cfg, mode, kind, threads);
    json results = json::array();
    for (std::size_t i = 0; i < field.size(); ++i) {
      json row = json::array();
      for (const auto& r : field[i])
        row.push_back(result_json(*ds.manifold, r));
      results.push_back(std::move(row));
    }
    json out;
    out["betas"] = betas;
    out["anchor"] = point_to_json(*ds.manifold, grid.anchor);
    out["results"] = std::move(results);
    std::ostringstream os;
    os << "field " << grid.dirs.size() << " directions x " << betas.size()
       << " betas solved";
    writer.emit(f_out, out, os.str());
    return 0;
  }

  if (cmd_m->parsed()) {
    const Dataset ds = load_dataset(m_data);
    const DescentConfig cfg = m_solver.config();
    const int threads = m_threads > 0 ? m_threads : hardware_threads();
    const ManifoldPoint median = solve_median(*ds.manifold, ds.points, cfg);
    const DirectionGrid grid =
        build_grid(*ds.manifold, median, m_dirspec, m_solver.seed);
    writer.command = "measures";
    writer.seed = m_solver.seed;
    writer.config = {{"data", m_data},
                     {"beta", m_beta},
                     {"beta_prime", m_beta_prime},
                     {"directions", m_dirspec},
                     {"threads", m_threads},
                     {"solver", m_solver.to_json()}};
    MeasureReport rep = measures(*ds.manifold, ds.points, m_beta, m_beta_prime,
                                 grid, cfg, threads);
    rep.seed = m_solver.seed;
    std::ostringstream os;
    os << "measures delta1=" << rep.delta1 << " delta2=" << rep.delta2
       << " gamma1=" << rep.gamma1 << " gamma2_norm=" << rep.gamma2_norm
       << " kappa1=" << rep.kappa1 << " kappa2=" << rep.kappa2
       << " alpha=" << rep.alpha;
    writer.emit(m_out, measures_json(rep), os.str());
    return 0;
  }

  if (cmd_p->parsed()) {
    const Dataset a = load_dataset(p_a);
    const Dataset b = load_dataset(p_b);
    if (a.manifold->name() != b.manifold->name())
      throw ValidationError("permtest datasets live on different manifolds");
    // Re-anchor the second dataset onto the first manifold instance.
    std::vector<ManifoldPoint> b_points;
    b_points.reserve(b.points.size());
    for (const auto& p : b.points)
      b_points.push_back(a.manifold->point(p.coords));
    const auto indices = load_indices(*a.manifold, p_indices);
    const int threads = p_threads > 0 ? p_threads : hardware_threads();
    writer.command = "permtest";
    writer.seed = p_solver.seed;
    writer.config = {{"data_a", p_a},         {"data_b", p_b},
                     {"indices", p_indices},  {"n_perm", p_nperm},
                     {"threads", p_threads},  {"solver", p_solver.to_json()}};
    const PermTestResult res =
        perm_test(*a.manifold, a.points, b_points, indices, p_nperm,
                  p_solver.seed, p_solver.config(), threads);
    json out{{"t0", res.t0}, {"t1", res.t1},         {"p0", res.p0},
             {"p1", res.p1}, {"n_perm", res.n_perm}, {"seed", res.seed}};
    std::ostringstream os;
    os << "permtest T0=" << res.t0 << " T1=" << res.t1 << " p0=" << res.p0
       << " p1=" << res.p1;
    writer.emit(p_out, out, os.str());
    return 0;
  }

  if (cmd_t->parsed() || cmd_c->parsed()) {
    const bool is_table = cmd_t->parsed();
    const std::string& data_path = is_table ? t_data : c_data;
    const std::string& betas_text = is_table ? t_betas : c_betas;
    const int L = is_table ? t_L : c_L;
    const int n = is_table ? t_n : c_n;
    const double sigma2 = is_table ? t_sigma2 : c_sigma2;
    const double compress = is_table ? t_compress : c_compress;
    const SolverFlags& solver = is_table ? t_solver : c_solver;
    const int threads_flag = is_table ? t_threads : c_threads;

    auto manifold = std::make_shared<Hyperboloid>(2, -1.0);
    std::vector<ManifoldPoint> points;
    if (!data_path.empty()) {
      Dataset ds = load_dataset(data_path);
      auto hyp = std::dynamic_pointer_cast<Hyperboloid>(ds.manifold);
      if (!hyp || hyp->dimension() != 2)
        throw ValidationError("this command needs a 2D hyperboloid dataset");
      manifold = hyp;
      points = std::move(ds.points);
    } else {
      SimulationSpec spec;
      spec.n_points = n;
      spec.sigma = std::sqrt(sigma2);
      spec.seed = solver.seed;
      if (compress > 0.0) spec.compress_y = compress;
      points = simulate_poincare_dataset(*manifold, spec);
    }
    const auto betas = parse_number_list(betas_text, "--betas");
    const int threads = threads_flag > 0 ? threads_flag : hardware_threads();
    writer.seed = solver.seed;

    if (is_table) {
      writer.command = "table12";
      writer.config = {{"data", data_path},       {"n", n},
                       {"sigma2", sigma2},        {"compress_y", compress},
                       {"betas", betas},          {"L", L},
                       {"threads", threads_flag}, {"solver", solver.to_json()}};
      const ErrorTable table = approximation_error_table(
          *manifold, points, betas, L, solver.config(), threads);
      std::ostringstream os;
      os << "table12 rows=" << table.rows.size() << " betas=" << betas.size()
         << " L=" << L;
      for (const auto& row : table.rows) {
        os << "\n  " << row.label << " [" << row.reference << "]:";
        for (const auto& cell : row.cells)
          if (cell.ok)
            os << " " << cell.value;
          else
            os << " err";
      }
      writer.emit(t_out, table_json(table), os.str());
      return 0;
    }

    writer.command = "contours";
    writer.config = {{"data", data_path},       {"n", n},
                     {"sigma2", sigma2},        {"compress_y", compress},
                     {"betas", betas},          {"L", L},
                     {"threads", threads_flag}, {"solver", solver.to_json()}};
    const IsoquantileContours contours = isoquantile_contours(
        *manifold, points, betas, L, solver.config(), threads);
    json polys = json::array();
    for (const auto& poly : contours.polylines) {
      json pj = json::array();
      for (const auto& v : poly) pj.push_back(json::array({v.x(), v.y()}));
      polys.push_back(std::move(pj));
    }
    json out{{"betas", betas}, {"L", L}, {"polylines", std::move(polys)}};
    if (!c_csv.empty()) {
      std::ofstream csv(c_csv);
      if (!csv) throw ValidationError("cannot write " + c_csv);
      csv << "beta,vertex,u1,u2\n";
      csv.precision(17);
      for (std::size_t j = 0; j < contours.polylines.size(); ++j)
        for (std::size_t k = 0; k < contours.polylines[j].size(); ++k)
          csv << betas[j] << "," << k << "," << contours.polylines[j][k].x()
              << "," << contours.polylines[j][k].y() << "\n";
    }
    std::ostringstream os;
    os << "contours " << betas.size() << " levels x " << L << " vertices";
    writer.emit(c_out, out, os.str());
    return 0;
  }

  if (cmd_b->parsed()) {
    const Dataset ds = load_dataset(b_data);
    const BoundaryDirection xi = b_dir.build(*ds.manifold);
    const auto magnitudes = parse_number_list(b_magnitudes, "--magnitudes");
    writer.command = "breakdown";
    writer.seed = b_solver.seed;
    writer.config = {{"data", b_data},        {"beta", b_beta},
                     {"j", b_j},              {"magnitudes", magnitudes},
                     {"xi", b_dir.to_json()}, {"solver", b_solver.to_json()}};
    const auto disp =
        breakdown_probe(*ds.manifold, ds.points, QuantileIndex{b_beta, xi},
                        b_j, magnitudes, b_solver.config());
    json out{{"j", b_j}, {"magnitudes", magnitudes}, {"displacements", disp}};
    std::ostringstream os;
    os << "breakdown j=" << b_j << " displacements:";
    for (double d : disp) os << " " << d;
    writer.emit(b_out, out, os.str());
    return 0;
  }

  if (cmd_g->parsed()) {
    std::shared_ptr<Manifold> M;
    {
      int n = 0, m = 0;
      double kappa = 0.0;
      if (std::sscanf(g_manifold.c_str(), "euclidean:%d", &n) == 1)
        M = std::make_shared<Euclidean>(n);
      else if (std::sscanf(g_manifold.c_str(), "hyperboloid:%d:%lf", &n,
                           &kappa) == 2)
        M = std::make_shared<Hyperboloid>(n, kappa);
      else if (std::sscanf(g_manifold.c_str(), "spd:%d", &m) == 1)
        M = std::make_shared<Spd>(m);
      else
        throw ValidationError(
            "--manifold expects euclidean:N, hyperboloid:N:kappa or spd:M");
    }
    writer.command = "gradcheck";
    writer.seed = g_seed;
    writer.config = {{"manifold", g_manifold},
                     {"configs", g_configs},
                     {"h", g_h},
                     {"seed", g_seed}};
    Rng rng = Rng::derive(g_seed, 0x67636865636BULL);
    const ManifoldPoint base = M->base_point();
    auto rand_point = [&]() {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(M->ambient_size());
      for (const auto& b : M->orthonormal_basis(base)) v += rng.normal() * b.vec;
      TangentVector t = M->tangent(base, v);
      const double nn = M->norm(base, t);
      if (nn > 1e-12) t.vec *= (0.2 + 1.3 * rng.uniform()) / nn;
      return M->exp_map(base, t);
    };
    double max_rel = 0.0, sum_rel = 0.0;
    double max_transport_gap = 0.0, max_radial_gap = 0.0;
    for (int rep = 0; rep < g_configs; ++rep) {
      ManifoldPoint x = rand_point();
      ManifoldPoint p = rand_point();
      while (M->distance(x, p) < 0.2) p = rand_point();
      Eigen::VectorXd dv = Eigen::VectorXd::Zero(M->ambient_size());
      for (const auto& b : M->orthonormal_basis(x)) dv += rng.normal() * b.vec;
      const QuantileIndex q{0.9 * rng.uniform(), M->direction(x, dv)};

      const TangentVector g = grad_exact(*M, x, p, q);
      const TangentVector fd = M->numerical_gradient(
          [&](const ManifoldPoint& cand) {
            return loss(*M, x, cand, q, LossKind::DataBased);
          },
          p, g_h);
      const double rel =
          M->norm(p, TangentVector{p, g.vec - fd.vec}) / M->norm(p, fd);
      max_rel = std::max(max_rel, rel);
      sum_rel += rel;
      const TangentVector gt = grad_transport_approx(*M, x, p, q);
      const TangentVector gr = grad_radial_approx(*M, x, p, q);
      max_transport_gap = std::max(
          max_transport_gap, M->norm(p, TangentVector{p, g.vec - gt.vec}));
      max_radial_gap = std::max(max_radial_gap,
                                M->norm(p, TangentVector{p, g.vec - gr.vec}));
    }
    json out{{"configs", g_configs},
             {"h", g_h},
             {"max_rel_error_vs_fd", max_rel},
             {"mean_rel_error_vs_fd", sum_rel / g_configs},
             {"max_transport_gap", max_transport_gap},
             {"max_radial_gap", max_radial_gap}};
    std::ostringstream os;
    os << "gradcheck max_rel=" << max_rel
       << " mean_rel=" << sum_rel / g_configs;
    writer.emit(g_out, out, os.str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid request: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
