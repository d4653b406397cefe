#include "elastuq/experiments.hpp"

#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "elastuq/common.hpp"
#include "elastuq/qmc.hpp"
#include "elastuq/solver.hpp"

namespace elastuq {

namespace {

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_timing(std::string& timing, const std::string& phase, double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " %.3f s\n", seconds);
  timing += phase + buf;
}

std::string build_manifest(const RunConfig& cfg, const ExperimentReport& rep,
                           const std::vector<std::string>& rules) {
  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  j["config_hash"] = hex;
  j["config"] = canonical_config(cfg);
  j["scalars"] = rep.scalars;
  j["series"] = rep.series;
  j["warnings"] = rep.warnings;
  j["rules"] = rules;
  return j.dump(2) + "\n";
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

RichardsonResult richardson_extrapolate(const std::vector<double>& values) {
  if (values.empty())
    throw ConfigError("experiments: richardson needs at least one value");
  const int L = static_cast<int>(values.size());
  std::vector<std::vector<double>> T(L);
  for (int i = 0; i < L; ++i) {
    T[i].resize(i + 1);
    T[i][0] = values[i];
    double pow4 = 1.0;
    for (int k = 1; k <= i; ++k) {
      pow4 *= 4.0;
      T[i][k] = (pow4 * T[i][k - 1] - T[i - 1][k - 1]) / (pow4 - 1.0);
    }
  }
  RichardsonResult r;
  r.value = T[0][0];
  double prev_corr = std::numeric_limits<double>::infinity();
  for (int k = 1; k < L; ++k) {
    const double corr = std::abs(T[k][k] - T[k - 1][k - 1]);
    if (corr > prev_corr) {
      r.monotone = false;
      r.warning = "richardson: corrections grew at depth " + std::to_string(k) +
                  ", keeping depth " + std::to_string(k - 1);
      break;
    }
    r.value = T[k][k];
    r.depth = k;
    prev_corr = corr;
  }
  return r;
}

RateFit fit_rate(const std::vector<double>& errors, const std::vector<double>& xs) {
  if (errors.size() != xs.size() || errors.size() < 2)
    throw ConfigError("experiments: rate fit needs matching lists of >= 2 points");
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0))
      throw ConfigError("experiments: rate fit requires positive errors");
    if (!(xs[i] > 0.0))
      throw ConfigError("experiments: rate fit requires positive abscissae");
  }
  RateFit fit;
  for (std::size_t i = 1; i < errors.size(); ++i)
    fit.pairwise.push_back(std::log(errors[i - 1] / errors[i]) /
                           std::abs(std::log(xs[i] / xs[i - 1])));
  const std::size_t n = errors.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(xs[i]);
    my += std::log(errors[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  fit.ls_slope = sxy / sxx;
  return fit;
}

Manufactured example1_solution(double Lambda) {
  if (Lambda < 1.0)
    throw ConfigError("experiments: Lambda must be >= 1 for the manufactured case");
  const double li = 1.0 / Lambda;
  Manufactured man;
  man.domain = {0.0, 0.0, kPi, kPi};
  man.functional = 4.0 * li;

  man.u = [li](double x1, double x2) {
    const double ss = std::sin(x1) * std::sin(x2);
    return std::array<double, 2>{
        (std::cos(2.0 * x1) - 1.0) * std::sin(2.0 * x2) + li * ss,
        (1.0 - std::cos(2.0 * x2)) * std::sin(2.0 * x1) + li * ss};
  };
  man.grad_u = [li](double x1, double x2) {
    const double s1 = std::sin(x1), c1 = std::cos(x1);
    const double s2 = std::sin(x2), c2 = std::cos(x2);
    const double s21 = std::sin(2.0 * x1), c21 = std::cos(2.0 * x1);
    const double s22 = std::sin(2.0 * x2), c22 = std::cos(2.0 * x2);
    return std::array<double, 4>{-2.0 * s21 * s22 + li * c1 * s2,
                                 2.0 * (c21 - 1.0) * c22 + li * s1 * c2,
                                 2.0 * (1.0 - c22) * c21 + li * c1 * s2,
                                 2.0 * s21 * s22 + li * s1 * c2};
  };
  man.coeff.mu = [](double x1, double x2) { return 1.0 + x1 + x2; };
  man.coeff.grad_mu = [](double, double) { return std::array<double, 2>{1.0, 1.0}; };
  man.coeff.lambda = [Lambda](double x1, double) {
    return Lambda * (1.0 + 0.5 * std::sin(2.0 * x1));
  };

  // f = -div sigma(u) expanded for gradient coefficients:
  //   f_i = -d_i(lambda) div u - (lambda + mu) d_i(div u) - mu lap(u_i)
  //         - sum_j d_j(mu) (d_j u_i + d_i u_j)
  // with grad mu = (1, 1) and div u = sin(x1 + x2) / Lambda.
  auto grad_u = man.grad_u;
  auto lambda = man.coeff.lambda;
  auto mu = man.coeff.mu;
  man.f = [li, grad_u, lambda, mu, Lambda](double x1, double x2) {
    const double s1 = std::sin(x1);
    const double s2 = std::sin(x2);
    const double s21 = std::sin(2.0 * x1), c21 = std::cos(2.0 * x1);
    const double s22 = std::sin(2.0 * x2), c22 = std::cos(2.0 * x2);
    const double div = li * std::sin(x1 + x2);
    const double ddiv = li * std::cos(x1 + x2);  // same in both directions
    const double lap1 = -4.0 * s22 * (2.0 * c21 - 1.0) - 2.0 * li * s1 * s2;
    const double lap2 = 4.0 * s21 * (2.0 * c22 - 1.0) - 2.0 * li * s1 * s2;
    const double dlam1 = Lambda * c21;
    const auto g = grad_u(x1, x2);
    const double mv = mu(x1, x2);
    const double lv = lambda(x1, x2);
    const double gm1 = (g[0] + g[1]) + (g[0] + g[2]);  // grad-mu coupling, i = 1
    const double gm2 = (g[2] + g[3]) + (g[1] + g[3]);  // grad-mu coupling, i = 2
    return std::array<double, 2>{
        -dlam1 * div - (lv + mv) * ddiv - mv * lap1 - gm1,
        -(lv + mv) * ddiv - mv * lap2 - gm2};
  };
  return man;
}

ExperimentReport run_example1(const RunConfig& cfg) {
  validate_config(cfg);
  Eigen::setNbThreads(1);
  const Stopwatch total;
  ExperimentReport rep;

  std::vector<TriMesh> meshes;
  meshes.push_back(
      make_structured_mesh({0.0, 0.0, kPi, kPi}, cfg.n0, cfg.jitter, cfg.seed));
  for (int l = 1; l < cfg.levels; ++l)
    meshes.push_back(refine_uniform(meshes.back()));

  std::vector<double> hs;
  for (const auto& m : meshes) hs.push_back(m.h);
  rep.series["h"] = hs;

  std::ostringstream csv;
  csv << "space,lambda,level,h,dofs,l2_err,l2_rate,h1_err,h1_rate\n";

  for (SpaceKind kind : {SpaceKind::NonconformingCR, SpaceKind::ConformingP1}) {
    const std::string space = kind == SpaceKind::NonconformingCR ? "cr" : "p1";
    for (double Lambda : {1.0, 1000.0}) {
      const Stopwatch combo;
      const Manufactured man = example1_solution(Lambda);
      const std::string lam = format_exact(Lambda);
      std::vector<double> l2s, h1s, dofs;
      for (int l = 0; l < cfg.levels; ++l) {
        FemSystem sys = assemble(meshes[l], man.coeff, kind, cfg.quad_degree);
        sys.rhs = assemble_load(meshes[l], sys.dofs, man.f, 6);
        const Preconditioner pre =
            build_preconditioner(meshes[l], kind, Lambda, cfg.quad_degree);
        const PcgSolution sol = pcg_solve(sys, pre, cfg.tol, cfg.max_iter);
        const ErrorNorms err =
            error_norms(meshes[l], sys.dofs, sol.u, man.u, man.grad_u, 6);
        l2s.push_back(err.l2);
        h1s.push_back(err.h1);
        dofs.push_back(double(sys.dofs.n_dofs()));
      }
      const RateFit l2fit = fit_rate(l2s, hs);
      const RateFit h1fit = fit_rate(h1s, hs);
      const std::string tag = space + "_lam" + lam;
      rep.series["l2_err_" + tag] = l2s;
      rep.series["h1_err_" + tag] = h1s;
      rep.series["l2_rate_" + tag] = l2fit.pairwise;
      rep.series["h1_rate_" + tag] = h1fit.pairwise;
      rep.series["dofs_" + space] = dofs;
      rep.scalars["l2_rate_last_" + tag] = l2fit.pairwise.back();
      rep.scalars["h1_rate_last_" + tag] = h1fit.pairwise.back();
      for (int l = 0; l < cfg.levels; ++l) {
        csv << space << ',' << lam << ',' << l + 1 << ',' << format_sci(hs[l])
            << ',' << static_cast<long>(dofs[l]) << ',' << format_sci(l2s[l]) << ','
            << (l == 0 ? std::string("-") : format_sci(l2fit.pairwise[l - 1]))
            << ',' << format_sci(h1s[l]) << ','
            << (l == 0 ? std::string("-") : format_sci(h1fit.pairwise[l - 1]))
            << '\n';
      }
      append_timing(rep.timing, "example1 " + tag, combo.seconds());
    }
  }
  rep.csv = csv.str();
  append_timing(rep.timing, "total", total.seconds());
  rep.manifest = build_manifest(cfg, rep, {});
  return rep;
}

namespace {

// shared per-level state for the sampling pipeline; the load vector does not
// depend on the sample, so it is assembled once
struct LevelCtx {
  TriMesh mesh;
  Preconditioner pre;
  Eigen::VectorXd rhs;
};

std::vector<LevelCtx> build_levels(const Rect& domain, int n0, int levels,
                                   double Lambda, const RunConfig& cfg,
                                   const VecFn& body_force) {
  std::vector<LevelCtx> out;
  TriMesh mesh = make_structured_mesh(domain, n0, cfg.jitter, cfg.seed);
  for (int l = 0; l < levels; ++l) {
    LevelCtx ctx;
    ctx.mesh = l == 0 ? std::move(mesh) : refine_uniform(out.back().mesh);
    ctx.pre = build_preconditioner(ctx.mesh, SpaceKind::NonconformingCR, Lambda,
                                   cfg.quad_degree);
    const DofMap dofs = build_dof_map(ctx.mesh, SpaceKind::NonconformingCR);
    ctx.rhs = assemble_load(ctx.mesh, dofs, body_force, cfg.quad_degree);
    out.push_back(std::move(ctx));
  }
  return out;
}

struct NodeEval {
  double value = 0.0;
  double fem_inc = 0.0;
  bool monotone = true;
};

NodeEval eval_node(const std::vector<LevelCtx>& ctxs, const FieldSpec& spec,
                   const Eigen::MatrixXd& pts, int row, int s1,
                   const RunConfig& cfg, int* iters_out) {
  std::vector<double> y(s1), z(pts.cols() - s1);
  for (int j = 0; j < s1; ++j) y[j] = pts(row, j);
  for (int j = 0; j < int(z.size()); ++j) z[j] = pts(row, s1 + j);
  const FieldSample smp = sample_fields(spec, y, z);
  if (smp.bound_violation)
    throw SolveError("sample rejected: coefficient bound violated on the grid", {});
  const CoefficientField coeff = coefficients(smp);
  std::vector<double> L(ctxs.size());
  for (std::size_t l = 0; l < ctxs.size(); ++l) {
    FemSystem sys =
        assemble(ctxs[l].mesh, coeff, SpaceKind::NonconformingCR, cfg.quad_degree);
    sys.rhs = ctxs[l].rhs;
    const PcgSolution sol = pcg_solve(sys, ctxs[l].pre, cfg.tol, cfg.max_iter);
    iters_out[l] = sol.stats.iterations;
    L[l] = functional_average_u2(ctxs[l].mesh, sys.dofs, sol.u);
  }
  const RichardsonResult rich = richardson_extrapolate(L);
  return {rich.value, std::abs(rich.value - L.back()), rich.monotone};
}

struct SetOutcome {
  double mean = 0.0;
  double fem_inc_mean = 0.0;
  int non_monotone = 0;
  std::vector<int> max_iters;  // per level
};

SetOutcome evaluate_set(const std::vector<LevelCtx>& ctxs, const FieldSpec& spec,
                        const Eigen::MatrixXd& pts, int s1, const RunConfig& cfg,
                        const std::string& label) {
  const int n = static_cast<int>(pts.rows());
  const int levels = static_cast<int>(ctxs.size());
  std::vector<double> values(n), fem(n);
  std::vector<std::uint8_t> mono(n, 1);
  std::vector<int> iters(std::size_t(n) * levels, 0);

  std::exception_ptr first_error;
  std::mutex err_mtx;
  std::atomic<bool> failed{false};
  int fail_node = -1;

  auto body = [&](int i) {
    if (failed.load(std::memory_order_relaxed)) return;
    try {
      const NodeEval r =
          eval_node(ctxs, spec, pts, i, s1, cfg, &iters[std::size_t(i) * levels]);
      values[i] = r.value;
      fem[i] = r.fem_inc;
      mono[i] = r.monotone ? 1 : 0;
    } catch (...) {
      std::lock_guard<std::mutex> g(err_mtx);
      if (!first_error) {
        first_error = std::current_exception();
        fail_node = i;
      }
      failed.store(true, std::memory_order_relaxed);
    }
  };

  if (cfg.workers > 1) {
#pragma omp parallel for num_threads(cfg.workers) schedule(static)
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }

  if (first_error) {
    const std::string where = label + " node " + std::to_string(fail_node) + ": ";
    try {
      std::rethrow_exception(first_error);
    } catch (const SolveError& e) {
      throw SolveError(where + e.what(), e.residual_history);
    } catch (const AssetError& e) {
      throw AssetError(where + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }

  // reductions in node-index order keep the result identical at any worker
  // count
  SetOutcome out;
  double acc = 0.0, facc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += values[i];
    facc += fem[i];
    if (!mono[i]) ++out.non_monotone;
  }
  out.mean = acc / double(n);
  out.fem_inc_mean = facc / double(n);
  out.max_iters.assign(levels, 0);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < levels; ++l)
      out.max_iters[l] = std::max(out.max_iters[l], iters[std::size_t(i) * levels + l]);
  return out;
}

VecFn qmc_body_force() {
  return [](double x1, double x2) {
    return std::array<double, 2>{1.0 - x2 * x2, 2.0 * x1 - 20.0};
  };
}

FieldSpec field_spec_of(const RunConfig& cfg) {
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

int log2_exact(int n) {
  int m = 0;
  while ((1 << m) < n) ++m;
  return m;
}

std::uint64_t mc_seed(std::uint64_t seed, int N, int rep) {
  std::uint64_t h = fnv1a(&seed, sizeof seed);
  const std::uint64_t n64 = static_cast<std::uint64_t>(N);
  const std::uint64_t r64 = static_cast<std::uint64_t>(rep);
  h = fnv1a(&n64, sizeof n64, h);
  h = fnv1a(&r64, sizeof r64, h);
  return h;
}

void merge_iters(std::vector<int>& into, const std::vector<int>& from) {
  if (into.size() < from.size()) into.resize(from.size(), 0);
  for (std::size_t l = 0; l < from.size(); ++l)
    into[l] = std::max(into[l], from[l]);
}

}  // namespace

ExperimentReport run_qmc_study(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.experiment != "ex2" && cfg.experiment != "ex3" && cfg.experiment != "ex4")
    throw ConfigError("experiments: run_qmc_study needs an ex2/ex3/ex4 config");
  Eigen::setNbThreads(1);
  const Stopwatch total;
  ExperimentReport rep;
  std::vector<std::string> rules;

  const int s1 = cfg.s_mu, s2 = cfg.s_lambda;
  const FieldSpec spec = field_spec_of(cfg);
  const VecFn f = qmc_body_force();

  Stopwatch setup;
  const std::vector<LevelCtx> ctxs =
      build_levels({0.0, 0.0, 1.0, 1.0}, cfg.n0, cfg.levels, cfg.Lambda, cfg, f);
  append_timing(rep.timing, "levels_setup", setup.seconds());

  auto rule_points = [&](int m) {
    const LatticeRule rule =
        load_genvec(genvec_path(cfg.genvec_dir, 2, m, cfg.interlace));
    PointSet ps = combined_nodes(rule, s1, s2);
    shift_center(ps.pts);
    rules.push_back(ps.provenance);
    return ps.pts;
  };

  std::vector<int> max_iters;
  int non_monotone = 0;
  long node_count = 0;

  Stopwatch ref_watch;
  const Eigen::MatrixXd ref_pts = rule_points(log2_exact(cfg.n_ref));
  const SetOutcome ref = evaluate_set(ctxs, spec, ref_pts, s1, cfg, "reference");
  merge_iters(max_iters, ref.max_iters);
  non_monotone += ref.non_monotone;
  node_count += ref_pts.rows();
  append_timing(rep.timing, "reference", ref_watch.seconds());

  std::vector<double> ns, values, errors;
  for (int N : cfg.n_list) {
    const Stopwatch nw;
    const int m = log2_exact(N);
    double value = 0.0, error = 0.0;
    if (cfg.mode == "combined") {
      const Eigen::MatrixXd pts = rule_points(m);
      const SetOutcome out =
          evaluate_set(ctxs, spec, pts, s1, cfg, "N=" + std::to_string(N));
      merge_iters(max_iters, out.max_iters);
      non_monotone += out.non_monotone;
      node_count += pts.rows();
      value = out.mean;
      error = std::abs(out.mean - ref.mean);
    } else if (cfg.mode == "tensor") {
      const int m1 = (m + 1) / 2, m2 = m / 2;
      if (!tensor_balance_ok(m1, m2, 1.0, 1.0))
        rep.warnings.push_back("tensor factors unbalanced at N=" +
                               std::to_string(N));
      const LatticeRule r1 = truncate_rule(
          load_genvec(genvec_path(cfg.genvec_dir, 2, m1, cfg.interlace)), s1);
      const LatticeRule r2 = truncate_rule(
          load_genvec(genvec_path(cfg.genvec_dir, 2, m2, cfg.interlace)), s2);
      const PointSet p1 = interlaced_points(r1);
      const PointSet p2 = interlaced_points(r2);
      rules.push_back(p1.provenance);
      rules.push_back(p2.provenance);
      Eigen::MatrixXd pts = tensor_nodes(p1.pts, p2.pts);
      shift_center(pts);
      const SetOutcome out =
          evaluate_set(ctxs, spec, pts, s1, cfg, "N=" + std::to_string(N));
      merge_iters(max_iters, out.max_iters);
      non_monotone += out.non_monotone;
      node_count += pts.rows();
      value = out.mean;
      error = std::abs(out.mean - ref.mean);
    } else {  // mc
      double vacc = 0.0, eacc = 0.0;
      for (int rep_i = 0; rep_i < cfg.mc_replications; ++rep_i) {
        Eigen::MatrixXd pts = mc_points(N, s1 + s2, mc_seed(cfg.seed, N, rep_i));
        shift_center(pts);
        const SetOutcome out = evaluate_set(
            ctxs, spec, pts, s1, cfg,
            "N=" + std::to_string(N) + " rep=" + std::to_string(rep_i));
        merge_iters(max_iters, out.max_iters);
        non_monotone += out.non_monotone;
        node_count += pts.rows();
        vacc += out.mean;
        eacc += std::abs(out.mean - ref.mean);
      }
      value = vacc / double(cfg.mc_replications);
      error = eacc / double(cfg.mc_replications);
    }
    ns.push_back(double(N));
    values.push_back(value);
    errors.push_back(error);
    append_timing(rep.timing, "N=" + std::to_string(N), nw.seconds());
  }

  bool errors_positive = true;
  for (double e : errors) errors_positive = errors_positive && e > 0.0;
  RateFit fit;
  if (errors_positive) {
    fit = fit_rate(errors, ns);
    rep.scalars["ls_slope"] = fit.ls_slope;
    rep.series["rate"] = fit.pairwise;
  } else {
    rep.warnings.push_back("rate fit skipped: nonpositive error entries");
  }

  std::ostringstream csv;
  csv << "lambda,mode,N,value,error,rate\n";
  const std::string lam = format_exact(cfg.Lambda);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    csv << lam << ',' << cfg.mode << ',' << cfg.n_list[i] << ','
        << format_sci(values[i]) << ',' << format_sci(errors[i]) << ','
        << (i == 0 || !errors_positive ? std::string("-")
                                       : format_sci(fit.pairwise[i - 1]))
        << '\n';
  }
  rep.csv = csv.str();

  rep.series["n"] = ns;
  rep.series["value"] = values;
  rep.series["error"] = errors;
  {
    std::vector<double> mi(max_iters.begin(), max_iters.end());
    rep.series["max_pcg_iters_per_level"] = mi;
    rep.scalars["max_pcg_iters"] =
        mi.empty() ? 0.0 : *std::max_element(mi.begin(), mi.end());
  }
  rep.scalars["reference_value"] = ref.mean;

  const double tail = (s1 > 0 ? coefficient_tail_bound(s1, cfg.alpha) : 0.0) +
                      (s2 > 0 ? coefficient_tail_bound(s2, cfg.alpha) : 0.0);
  rep.scalars["decomp_truncation"] = tail;
  rep.scalars["decomp_fem"] = ref.fem_inc_mean;
  rep.scalars["decomp_qmc"] = errors.empty() ? 0.0 : errors.back();
  rep.scalars["decomp_recombined"] =
      tail + ref.fem_inc_mean + rep.scalars["decomp_qmc"];

  if (non_monotone > 0)
    rep.warnings.push_back("richardson: " + std::to_string(non_monotone) + " of " +
                           std::to_string(node_count) +
                           " nodes used a shallower table entry");

  append_timing(rep.timing, "total", total.seconds());
  rep.manifest = build_manifest(cfg, rep, rules);
  return rep;
}

ExperimentReport run_truncation_study(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.experiment != "truncation")
    throw ConfigError("experiments: run_truncation_study needs the truncation "
                      "experiment");
  Eigen::setNbThreads(1);
  const Stopwatch total;
  ExperimentReport rep;
  std::vector<std::string> rules;

  const bool mu_varies = cfg.s_mu > 0;
  const VecFn f = qmc_body_force();
  // single fixed mesh: truncation differences share the same FEM error
  std::vector<LevelCtx> ctxs =
      build_levels({0.0, 0.0, 1.0, 1.0}, cfg.trunc_n, 1, cfg.Lambda, cfg, f);

  const LatticeRule rule =
      load_genvec(genvec_path(cfg.genvec_dir, 2, cfg.trunc_m, cfg.interlace));
  PointSet ps = mu_varies ? combined_nodes(rule, cfg.s_ref, 0)
                          : combined_nodes(rule, 0, cfg.s_ref);
  shift_center(ps.pts);
  rules.push_back(ps.provenance);

  std::vector<int> max_iters;
  std::vector<int> s_values = cfg.s_list;
  s_values.push_back(cfg.s_ref);

  std::vector<double> means(s_values.size());
  for (std::size_t k = 0; k < s_values.size(); ++k) {
    const Stopwatch sw;
    const int s = s_values[k];
    FieldSpec spec = field_spec_of(cfg);
    if (mu_varies)
      spec.s_mu = s;
    else
      spec.s_lambda = s;
    const Eigen::MatrixXd pts = ps.pts.leftCols(s);
    const SetOutcome out = evaluate_set(ctxs, spec, pts, mu_varies ? s : 0, cfg,
                                        "s=" + std::to_string(s));
    merge_iters(max_iters, out.max_iters);
    means[k] = out.mean;
    append_timing(rep.timing, "s=" + std::to_string(s), sw.seconds());
  }

  const double ref = means.back();
  std::vector<double> ss, errors, tail_bounds;
  for (std::size_t k = 0; k + 1 < s_values.size(); ++k) {
    ss.push_back(double(s_values[k]));
    errors.push_back(std::abs(means[k] - ref));
    tail_bounds.push_back(coefficient_tail_bound(s_values[k], cfg.alpha));
  }

  bool errors_positive = true;
  for (double e : errors) errors_positive = errors_positive && e > 0.0;
  RateFit fit;
  if (errors_positive) {
    fit = fit_rate(errors, ss);
    rep.scalars["ls_slope"] = fit.ls_slope;
    rep.series["rate"] = fit.pairwise;
  } else {
    rep.warnings.push_back("rate fit skipped: nonpositive error entries");
  }

  std::ostringstream csv;
  csv << "s,value,error,rate\n";
  for (std::size_t k = 0; k < ss.size(); ++k) {
    csv << s_values[k] << ',' << format_sci(means[k]) << ',' << format_sci(errors[k])
        << ','
        << (k == 0 || !errors_positive ? std::string("-")
                                       : format_sci(fit.pairwise[k - 1]))
        << '\n';
  }
  csv << cfg.s_ref << ',' << format_sci(ref) << ',' << format_sci(0.0) << ",-\n";
  rep.csv = csv.str();

  rep.series["s"] = ss;
  rep.series["value"] = means;
  rep.series["error"] = errors;
  rep.series["tail_bound"] = tail_bounds;
  {
    std::vector<double> mi(max_iters.begin(), max_iters.end());
    rep.series["max_pcg_iters_per_level"] = mi;
    rep.scalars["max_pcg_iters"] =
        mi.empty() ? 0.0 : *std::max_element(mi.begin(), mi.end());
  }
  rep.scalars["reference_value"] = ref;
  rep.scalars["decomp_truncation"] =
      tail_bounds.empty() ? 0.0 : tail_bounds.front();
  rep.scalars["decomp_fem"] = 0.0;  // single level, cancels in the differences
  rep.scalars["decomp_qmc"] = errors.empty() ? 0.0 : errors.back();
  rep.scalars["decomp_recombined"] = rep.scalars["decomp_truncation"] +
                                     rep.scalars["decomp_fem"] +
                                     rep.scalars["decomp_qmc"];

  append_timing(rep.timing, "total", total.seconds());
  rep.manifest = build_manifest(cfg, rep, rules);
  return rep;
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  if (cfg.experiment == "ex1") return run_example1(cfg);
  if (cfg.experiment == "truncation") return run_truncation_study(cfg);
  return run_qmc_study(cfg);
}

void write_report(const ExperimentReport& rep, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec && !fs::is_directory(out_dir))
    throw AssetError("experiments: cannot create output directory '" + out_dir +
                     "'");
  auto dump = [&](const std::string& name, const std::string& content) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw AssetError("experiments: cannot write '" + p.string() + "'");
    f << content;
  };
  dump("report.csv", rep.csv);
  dump("manifest.json", rep.manifest);
  dump("timing.txt", rep.timing);
}

}  // namespace elastuq
