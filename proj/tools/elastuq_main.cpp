// Batch driver: experiment runs, point-set dumps, coefficient snapshots, and
// mesh utilities. Single process, single thread at this layer; the worker
// count is forwarded to the experiments module.
//
// Exit codes: 0 success, 2 configuration error, 3 missing or malformed asset,
// 4 solver failure, 1 anything else (including usage errors).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "elastuq/common.hpp"
#include "elastuq/experiments.hpp"
#include "elastuq/fields.hpp"
#include "elastuq/mesh.hpp"
#include "elastuq/qmc.hpp"

namespace {

using namespace elastuq;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw AssetError("cli: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shared config resolution: defaults for the experiment/profile named
// anywhere in the inputs, then file assignments, then --set overrides (last
// wins). --profile is shorthand for --set profile=..., applied after the
// file so it participates in default resolution.
RunConfig resolve_config(const std::string& config_path,
                         const std::string& profile,
                         const std::vector<std::string>& sets,
                         const std::string& out_dir, int workers) {
  std::ostringstream text;
  if (!config_path.empty()) text << slurp(config_path) << '\n';
  if (!profile.empty()) text << "profile = " << profile << '\n';
  for (const auto& s : sets) {
    if (s.find('=') == std::string::npos)
      throw ConfigError("cli: --set expects key=value, got '" + s + "'");
    text << s << '\n';
  }
  RunConfig cfg = parse_config_text(text.str());
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (workers > 0) cfg.workers = workers;
  return cfg;
}

FieldSpec spec_from(const RunConfig& cfg) {
  FieldSpec spec;
  spec.mu0 = cfg.mu0;
  spec.lambda_hat0 = cfg.lambda_hat0;
  spec.Lambda = cfg.Lambda;
  spec.alpha = cfg.alpha;
  spec.s_mu = cfg.s_mu;
  spec.s_lambda = cfg.s_lambda;
  spec.grid_m = cfg.grid_m;
  spec.grid_m_grad = cfg.grid_m_grad;
  return spec;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw AssetError("cli: cannot write '" + path + "'");
  f << content;
}

int cmd_run(const std::string& config_path, const std::string& profile,
            const std::vector<std::string>& sets, const std::string& out_dir,
            int workers) {
  const RunConfig cfg = resolve_config(config_path, profile, sets, out_dir, workers);
  validate_config(cfg);
  const ExperimentReport rep = run_experiment(cfg);
  write_report(rep, cfg.out_dir);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "experiment " << cfg.experiment << ": wrote " << cfg.out_dir
            << "/report.csv, manifest.json, timing.txt\n";
  return 0;
}

int cmd_validate(const std::string& config_path, const std::string& profile,
                 const std::vector<std::string>& sets) {
  const RunConfig cfg = resolve_config(config_path, profile, sets, "", 0);
  validate_config(cfg);
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  std::cout << "ok: experiment " << cfg.experiment << ", profile " << cfg.profile
            << ", config_hash " << hex << '\n'
            << canonical_config(cfg);
  return 0;
}

int cmd_points(const std::string& genvec_dir, int m, int s, int interlace,
               bool shifted, const std::string& out) {
  const LatticeRule rule = load_genvec(genvec_path(genvec_dir, 2, m, interlace));
  PointSet ps = interlaced_points(truncate_rule(rule, s));
  if (shifted) shift_center(ps.pts);
  std::ostringstream os;
  for (Eigen::Index i = 0; i < ps.pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < ps.pts.cols(); ++j) {
      if (j) os << ',';
      os << format_exact(ps.pts(i, j));
    }
    os << '\n';
  }
  write_text(out, os.str());
  std::cerr << ps.provenance << '\n';
  return 0;
}

int cmd_field_snapshot(const std::string& config_path, const std::string& profile,
                       const std::vector<std::string>& sets,
                       const std::string& field, int grid, int node,
                       const std::string& coords, const std::string& out) {
  const RunConfig cfg = resolve_config(config_path, profile, sets, "", 0);
  const FieldSpec spec = spec_from(cfg);
  const int dims = spec.s_mu + spec.s_lambda;

  std::vector<double> y(spec.s_mu, 0.0), z(spec.s_lambda, 0.0);
  if (!coords.empty() && node >= 0)
    throw ConfigError("cli: --node and --coords are mutually exclusive");
  if (!coords.empty()) {
    std::vector<double> v;
    std::stringstream ss(coords);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (static_cast<int>(v.size()) != dims)
      throw ConfigError("cli: --coords needs " + std::to_string(dims) +
                        " comma-separated values");
    for (int j = 0; j < spec.s_mu; ++j) y[j] = v[j];
    for (int j = 0; j < spec.s_lambda; ++j) z[j] = v[spec.s_mu + j];
  } else if (node >= 0) {
    int m = 0;
    while ((1 << m) < cfg.n_ref) ++m;
    const LatticeRule rule =
        load_genvec(genvec_path(cfg.genvec_dir, 2, m, cfg.interlace));
    PointSet ps = combined_nodes(rule, spec.s_mu, spec.s_lambda);
    shift_center(ps.pts);
    if (node >= ps.pts.rows())
      throw ConfigError("cli: node index exceeds the rule size " +
                        std::to_string(ps.pts.rows()));
    for (int j = 0; j < spec.s_mu; ++j) y[j] = ps.pts(node, j);
    for (int j = 0; j < spec.s_lambda; ++j) z[j] = ps.pts(node, spec.s_mu + j);
  }

  const FieldSample smp = sample_fields(spec, y, z);
  std::ostringstream os;
  for (int i = 0; i < grid; ++i) {
    const double x1 = grid == 1 ? 0.0 : double(i) / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double x2 = grid == 1 ? 0.0 : double(j) / (grid - 1);
      if (j) os << ',';
      os << format_exact(field == "mu" ? smp.mu(x1, x2) : smp.lambda(x1, x2));
    }
    os << '\n';
  }
  write_text(out, os.str());
  return 0;
}

int cmd_mesh(int n, double jitter, std::uint64_t seed, const std::string& domain,
             const std::string& check, const std::string& out) {
  if (!check.empty()) {
    std::ifstream f(check);
    if (!f) throw AssetError("cli: cannot open '" + check + "'");
    const TriMesh m = read_mesh(f);
    validate_mesh(m);
    std::cout << "ok: " << m.n_vertices() << " vertices, " << m.n_triangles()
              << " triangles, " << m.n_edges() << " edges, h "
              << format_exact(m.h) << '\n';
    return 0;
  }
  Rect r;
  if (!domain.empty()) {
    std::stringstream ss(domain);
    std::string item;
    std::vector<double> v;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (v.size() != 4)
      throw ConfigError("cli: --domain expects x0,y0,x1,y1");
    r = {v[0], v[1], v[2], v[3]};
  }
  const TriMesh m = make_structured_mesh(r, n, jitter, seed);
  validate_mesh(m);
  std::ostringstream os;
  write_mesh(os, m);
  write_text(out, os.str());
  std::cerr << m.n_vertices() << " vertices, " << m.n_triangles()
            << " triangles, " << m.n_edges() << " edges, h " << format_exact(m.h)
            << ", quasi-uniformity " << format_exact(quasi_uniformity(m)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nearly incompressible elasticity with QMC-sampled coefficients"};
  app.require_subcommand(1);

  std::string config_path, profile, out_dir, out_file;
  std::vector<std::string> sets;
  int workers = 0;

  auto add_config_opts = [&](CLI::App* sub, bool with_positional) {
    if (with_positional)
      sub->add_option("CONFIG", config_path, "config file (key = value lines)");
    sub->add_option("--config", config_path, "config file (key = value lines)");
    sub->add_option("--profile", profile, "desk or paper");
    sub->add_option("--set", sets, "override, key=value (repeatable)");
  };

  CLI::App* run = app.add_subcommand("run", "run an experiment and write reports");
  add_config_opts(run, true);
  run->add_option("--out", out_dir, "output directory (default from config)");
  run->add_option("--workers", workers, "sample-level parallelism");

  CLI::App* validate =
      app.add_subcommand("validate-config", "parse and check a config, no compute");
  add_config_opts(validate, true);

  int m = 4, s = 2, interlace = 2, grid = 64, node = -1, n = 4;
  bool shifted = false;
  std::string genvec_dir = "data/genvec", field = "lambda", coords, domain, check;
  double jitter = 0.0;
  std::uint64_t seed = 0;

  CLI::App* points = app.add_subcommand("points", "dump interlaced QMC points");
  points->add_option("--m", m, "rule size exponent, N = 2^m")->required();
  points->add_option("--s", s, "dimensions")->required();
  points->add_option("--interlace", interlace, "interlacing factor d");
  points->add_option("--genvec-dir", genvec_dir, "generating vector directory");
  points->add_flag("--shifted", shifted, "translate to [-1/2, 1/2)");
  points->add_option("--out", out_file, "output file ('-' for stdout)");

  CLI::App* snap = app.add_subcommand(
      "field-snapshot", "evaluate a coefficient field on a square grid");
  add_config_opts(snap, false);
  snap->add_option("--field", field, "mu or lambda")
      ->check(CLI::IsMember({"mu", "lambda"}));
  snap->add_option("--grid", grid, "grid points per side")
      ->check(CLI::PositiveNumber);
  snap->add_option("--node", node, "QMC node index from the reference rule");
  snap->add_option("--coords", coords, "explicit y,z values, comma-separated");
  snap->add_option("--out", out_file, "output file ('-' for stdout)");

  CLI::App* mesh = app.add_subcommand("mesh", "generate or check a mesh file");
  mesh->add_option("--n", n, "cells per side");
  mesh->add_option("--jitter", jitter, "interior vertex perturbation in [0, 0.5)");
  mesh->add_option("--seed", seed, "jitter seed");
  mesh->add_option("--domain", domain, "x0,y0,x1,y1 (default unit square)");
  mesh->add_option("--check", check, "validate an existing mesh file instead");
  mesh->add_option("--out", out_file, "output file ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, profile, sets, out_dir, workers);
    if (validate->parsed()) return cmd_validate(config_path, profile, sets);
    if (points->parsed())
      return cmd_points(genvec_dir, m, s, interlace, shifted, out_file);
    if (snap->parsed())
      return cmd_field_snapshot(config_path, profile, sets, field, grid, node,
                                coords, out_file);
    if (mesh->parsed())
      return cmd_mesh(n, jitter, seed, domain, check, out_file);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const AssetError& e) {
    std::cerr << "asset error: " << e.what() << '\n';
    return 3;
  } catch (const SolveError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
