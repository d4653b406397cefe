#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "elastuq/common.hpp"
#include "elastuq/experiments.hpp"
#include "elastuq/fields.hpp"

namespace elastuq {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// %.17g round-trips doubles exactly, keeping the canonical form faithful
std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("config: invalid value '" + value + "' for key '" + key + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (pos != value.size()) bad_value(key, value);
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (pos != value.size()) bad_value(key, value);
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (pos != value.size()) bad_value(key, value);
  return v;
}

std::vector<int> parse_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
  return out;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "profile",     "lambda",          "levels",
      "n0",         "jitter",      "seed",            "mu0",
      "lambda_hat0", "alpha",      "s_mu",            "s_lambda",
      "grid_m",     "grid_m_grad", "mode",            "interlace",
      "n_list",     "n_ref",       "mc_replications", "genvec_dir",
      "s_list",     "s_ref",       "trunc_n",         "trunc_m",
      "tol",        "max_iter",    "quad_degree",     "out_dir",
      "workers"};
  return keys;
}

void apply_assignment(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  if (key == "experiment") cfg.experiment = value;
  else if (key == "profile") cfg.profile = value;
  else if (key == "lambda") cfg.Lambda = parse_double(key, value);
  else if (key == "levels") cfg.levels = parse_int(key, value);
  else if (key == "n0") cfg.n0 = parse_int(key, value);
  else if (key == "jitter") cfg.jitter = parse_double(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "mu0") cfg.mu0 = value;
  else if (key == "lambda_hat0") cfg.lambda_hat0 = value;
  else if (key == "alpha") cfg.alpha = parse_double(key, value);
  else if (key == "s_mu") cfg.s_mu = parse_int(key, value);
  else if (key == "s_lambda") cfg.s_lambda = parse_int(key, value);
  else if (key == "grid_m") cfg.grid_m = parse_int(key, value);
  else if (key == "grid_m_grad") cfg.grid_m_grad = parse_int(key, value);
  else if (key == "mode") cfg.mode = value;
  else if (key == "interlace") cfg.interlace = parse_int(key, value);
  else if (key == "n_list") cfg.n_list = parse_list(key, value);
  else if (key == "n_ref") cfg.n_ref = parse_int(key, value);
  else if (key == "mc_replications") cfg.mc_replications = parse_int(key, value);
  else if (key == "genvec_dir") cfg.genvec_dir = value;
  else if (key == "s_list") cfg.s_list = parse_list(key, value);
  else if (key == "s_ref") cfg.s_ref = parse_int(key, value);
  else if (key == "trunc_n") cfg.trunc_n = parse_int(key, value);
  else if (key == "trunc_m") cfg.trunc_m = parse_int(key, value);
  else if (key == "tol") cfg.tol = parse_double(key, value);
  else if (key == "max_iter") cfg.max_iter = parse_int(key, value);
  else if (key == "quad_degree") cfg.quad_degree = parse_int(key, value);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "workers") cfg.workers = parse_int(key, value);
  else {
    std::string msg = "config: unknown key '" + key + "'; valid keys:";
    for (const auto& k : config_keys()) msg += " " + k;
    throw ConfigError(msg);
  }
}

RunConfig default_config(const std::string& experiment, const std::string& profile) {
  if (profile != "desk" && profile != "paper")
    throw ConfigError("config: profile must be 'desk' or 'paper', got '" + profile +
                      "'");
  const bool paper = profile == "paper";
  RunConfig c;
  c.experiment = experiment;
  c.profile = profile;
  if (experiment == "ex1") {
    c.n0 = 17;
    c.levels = 5;
    c.mu0 = "one_plus_x1_plus_x2";
    c.lambda_hat0 = "one_plus_half_sin_2x1";
    c.s_mu = 0;
    c.s_lambda = 0;
  } else if (experiment == "ex2" || experiment == "ex3" || experiment == "ex4") {
    c.n0 = 4;
    c.levels = paper ? 5 : 4;
    c.grid_m = paper ? 256 : 64;
    c.grid_m_grad = paper ? 512 : 128;
    c.n_list = paper ? std::vector<int>{16, 32, 64, 128, 256}
                     : std::vector<int>{16, 32, 64, 128};
    c.n_ref = 512;
    if (experiment == "ex2") {
      c.mu0 = "one_plus_x1_plus_x2";
      c.lambda_hat0 = "one";
      c.s_mu = 0;
      c.s_lambda = paper ? 253 : 66;
    } else if (experiment == "ex3") {
      c.mu0 = "one";
      c.lambda_hat0 = "one_plus_half_sin_2pi_x1";
      c.s_mu = paper ? 253 : 66;
      c.s_lambda = 0;
    } else {
      c.mu0 = "one";
      c.lambda_hat0 = "one";
      c.s_mu = paper ? 120 : 66;
      c.s_lambda = paper ? 120 : 66;
      c.n_ref = 1024;
    }
  } else if (experiment == "truncation") {
    c.mu0 = "one_plus_x1_plus_x2";
    c.lambda_hat0 = "one";
    c.s_mu = 0;
    c.s_lambda = 253;
    c.s_ref = 253;
    c.s_list = {3, 6, 10, 15, 21, 28, 36, 45, 66};
    c.trunc_n = 8;
    c.trunc_m = 7;
  } else {
    throw ConfigError(
        "config: experiment must be one of ex1, ex2, ex3, ex4, truncation; got '" +
        experiment + "'");
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  struct Assignment {
    std::string key, value;
    int line = 0;
  };
  std::vector<Assignment> assignments;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not a key=value assignment: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    assignments.push_back({key, value, lineno});
  }

  // resolve experiment/profile first so the remaining assignments override
  // the right defaults
  std::string experiment = "ex2", profile = "desk";
  for (const auto& a : assignments) {
    if (a.key == "experiment") experiment = a.value;
    if (a.key == "profile") profile = a.value;
  }
  RunConfig cfg = default_config(experiment, profile);
  for (const auto& a : assignments) {
    try {
      apply_assignment(cfg, a.key, a.value);
    } catch (const ConfigError& e) {
      throw ConfigError("config: line " + std::to_string(a.line) + ": " +
                        e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw AssetError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

void validate_config(const RunConfig& cfg) {
  const bool qmc_experiment = cfg.experiment == "ex2" || cfg.experiment == "ex3" ||
                              cfg.experiment == "ex4";
  if (cfg.experiment != "ex1" && !qmc_experiment && cfg.experiment != "truncation")
    throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");
  if (cfg.profile != "desk" && cfg.profile != "paper")
    throw ConfigError("config: unknown profile '" + cfg.profile + "'");
  if (cfg.Lambda < 1.0) throw ConfigError("config: lambda must be >= 1");
  if (cfg.alpha <= 1.0) throw ConfigError("config: alpha must be > 1");
  if (cfg.n0 < 1) throw ConfigError("config: n0 must be >= 1");
  if (cfg.jitter < 0.0 || cfg.jitter >= 0.5)
    throw ConfigError("config: jitter must lie in [0, 0.5)");
  if (cfg.tol <= 0.0) throw ConfigError("config: tol must be positive");
  if (cfg.max_iter < 1) throw ConfigError("config: max_iter must be >= 1");
  if (cfg.quad_degree != 2 && cfg.quad_degree != 4 && cfg.quad_degree != 6)
    throw ConfigError("config: quad_degree must be 2, 4, or 6");
  if (cfg.workers < 1) throw ConfigError("config: workers must be >= 1");
  if (cfg.s_mu < 0 || cfg.s_lambda < 0)
    throw ConfigError("config: dimensions must be nonnegative");
  if (cfg.grid_m < 4 || cfg.grid_m_grad < 4)
    throw ConfigError("config: synthesis grids must have m >= 4");
  coefficient_form(cfg.mu0);
  coefficient_form(cfg.lambda_hat0);

  if (cfg.experiment == "ex1" || qmc_experiment) {
    if (cfg.levels < 2) throw ConfigError("config: levels must be >= 2");
  }
  if (qmc_experiment) {
    if (cfg.s_mu + cfg.s_lambda < 1)
      throw ConfigError("config: at least one random coefficient block required");
    if (cfg.mode != "combined" && cfg.mode != "tensor" && cfg.mode != "mc")
      throw ConfigError("config: mode must be combined, tensor, or mc");
    if (cfg.mode == "tensor" && (cfg.s_mu == 0 || cfg.s_lambda == 0))
      throw ConfigError("config: tensor mode needs both coordinate blocks");
    if (cfg.interlace < 1 || cfg.interlace > 3)
      throw ConfigError("config: interlace must be 1, 2, or 3");
    if (cfg.n_list.empty()) throw ConfigError("config: n_list must be nonempty");
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      if (!is_power_of_two(cfg.n_list[i]))
        throw ConfigError("config: n_list entries must be powers of two");
      if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1])
        throw ConfigError("config: n_list must be strictly increasing");
    }
    if (!is_power_of_two(cfg.n_ref) || cfg.n_ref <= cfg.n_list.back())
      throw ConfigError(
          "config: n_ref must be a power of two greater than every n_list entry");
    if (cfg.mc_replications < 1)
      throw ConfigError("config: mc_replications must be >= 1");
  }
  if (cfg.experiment == "truncation") {
    const bool mu_block = cfg.s_mu > 0;
    const bool lambda_block = cfg.s_lambda > 0;
    if (mu_block == lambda_block)
      throw ConfigError(
          "config: truncation study varies exactly one coefficient block");
    const int full = mu_block ? cfg.s_mu : cfg.s_lambda;
    if (full != cfg.s_ref)
      throw ConfigError("config: the varying block size must equal s_ref");
    if (cfg.s_list.empty()) throw ConfigError("config: s_list must be nonempty");
    for (std::size_t i = 0; i < cfg.s_list.size(); ++i) {
      if (cfg.s_list[i] < 1)
        throw ConfigError("config: s_list entries must be >= 1");
      if (i > 0 && cfg.s_list[i] <= cfg.s_list[i - 1])
        throw ConfigError("config: s_list must be strictly increasing");
    }
    if (cfg.s_list.back() >= cfg.s_ref)
      throw ConfigError("config: s_list entries must stay below s_ref");
    if (cfg.trunc_n < 1) throw ConfigError("config: trunc_n must be >= 1");
    if (cfg.trunc_m < 1 || cfg.trunc_m > 20)
      throw ConfigError("config: trunc_m must lie in [1, 20]");
    if (cfg.interlace < 1 || cfg.interlace > 3)
      throw ConfigError("config: interlace must be 1, 2, or 3");
  }
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "alpha = " << format_exact(cfg.alpha) << '\n';
  os << "experiment = " << cfg.experiment << '\n';
  os << "genvec_dir = " << cfg.genvec_dir << '\n';
  os << "grid_m = " << cfg.grid_m << '\n';
  os << "grid_m_grad = " << cfg.grid_m_grad << '\n';
  os << "interlace = " << cfg.interlace << '\n';
  os << "jitter = " << format_exact(cfg.jitter) << '\n';
  os << "lambda = " << format_exact(cfg.Lambda) << '\n';
  os << "lambda_hat0 = " << cfg.lambda_hat0 << '\n';
  os << "levels = " << cfg.levels << '\n';
  os << "max_iter = " << cfg.max_iter << '\n';
  os << "mc_replications = " << cfg.mc_replications << '\n';
  os << "mode = " << cfg.mode << '\n';
  os << "mu0 = " << cfg.mu0 << '\n';
  os << "n0 = " << cfg.n0 << '\n';
  os << "n_list = " << format_list(cfg.n_list) << '\n';
  os << "n_ref = " << cfg.n_ref << '\n';
  os << "profile = " << cfg.profile << '\n';
  os << "quad_degree = " << cfg.quad_degree << '\n';
  os << "s_lambda = " << cfg.s_lambda << '\n';
  os << "s_list = " << format_list(cfg.s_list) << '\n';
  os << "s_mu = " << cfg.s_mu << '\n';
  os << "s_ref = " << cfg.s_ref << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "tol = " << format_exact(cfg.tol) << '\n';
  os << "trunc_m = " << cfg.trunc_m << '\n';
  os << "trunc_n = " << cfg.trunc_n << '\n';
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a(canonical_config(cfg));
}

std::string genvec_path(const std::string& dir, int b, int m, int d) {
  return dir + "/b" + std::to_string(b) + "_m" + std::to_string(m) + "_d" +
         std::to_string(d) + "_s256.txt";
}

}  // namespace elastuq
