#include "glrsens/runner.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "glrsens/problems.hpp"
#include "glrsens/verify.hpp"

namespace glrsens {
namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void write_csv(std::ostream& out, const Problem& p, const std::vector<EstimateReport>& rows) {
  out << "estimator,theta,true_value,point,stderr,replications,seed\n";
  for (const auto& r : rows) {
    out << to_string(r.estimator) << ',' << fmt17(r.theta) << ',';
    if (p.analytic_derivative) out << fmt17(p.analytic_derivative(r.theta));
    out << ',' << fmt17(r.point) << ',' << fmt17(r.stderr_) << ',' << r.replications << ','
        << r.seed << '\n';
  }
}

void write_table(std::ostream& out, const Problem& p, const std::vector<EstimateReport>& rows) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-18s %8s %12s %12s %10s %6s %12s\n", "estimator", "theta",
                "true_value", "point", "stderr", "reps", "seed");
  out << line;
  for (const auto& r : rows) {
    const std::string truth =
        p.analytic_derivative ? fmt("%.3f", p.analytic_derivative(r.theta)) : std::string("-");
    std::snprintf(line, sizeof(line), "%-18s %8.4g %12s %12.4f %10.4f %6zu %12llu\n",
                  to_string(r.estimator).c_str(), r.theta, truth.c_str(), r.point, r.stderr_,
                  r.replications, static_cast<unsigned long long>(r.seed));
    out << line;
  }
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "table") return OutputFormat::table;
  throw ConfigError("format must be \"csv\" or \"table\", got \"" + text + "\"");
}

}  // namespace

ExperimentConfig fig2_preset() {
  ExperimentConfig cfg;
  cfg.problem_id = "toy_shifted_exp";
  cfg.estimators = {EstimatorKind::glr_full, EstimatorKind::pushout_lr};
  cfg.thetas = {0.2, 0.4, 0.6, 0.8};
  cfg.replications = 2500;
  cfg.format = OutputFormat::csv;
  return cfg;
}

std::uint64_t parse_seed_string(const std::string& text) {
  if (text.empty()) throw ConfigError("empty seed string");
  int base = 10;
  std::size_t start = 0;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    start = 2;
  }
  std::uint64_t value = 0;
  try {
    std::size_t used = 0;
    value = std::stoull(text.substr(start), &used, base);
    if (used != text.size() - start) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("seed must be decimal or 0x-hex, got \"" + text + "\"");
  }
  return value;
}

std::vector<double> parse_theta_list(const std::string& text) {
  std::vector<double> thetas;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument("trailing characters");
      thetas.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad theta value \"" + item + "\"");
    }
  }
  if (thetas.empty()) throw ConfigError("empty theta list");
  return thetas;
}

ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  if (!doc.contains("version")) throw ConfigError("config needs a \"version\" field");
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != 1) {
    throw ConfigError("unsupported config version (expected 1)");
  }

  static const char* known[] = {"version",      "problem", "estimators", "thetas",
                                "replications", "seed",    "out",        "format",
                                "parallel"};
  for (const auto& [key, _] : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config key \"" + key + "\"");
  }

  ExperimentConfig cfg;
  try {
    if (doc.contains("problem")) cfg.problem_id = doc["problem"].get<std::string>();
    if (doc.contains("estimators")) {
      cfg.estimators.clear();
      for (const auto& e : doc["estimators"]) {
        const auto kind = estimator_from_string(e.get<std::string>());
        if (!kind) throw ConfigError("unknown estimator \"" + e.get<std::string>() + "\"");
        cfg.estimators.push_back(*kind);
      }
    }
    if (doc.contains("thetas")) {
      cfg.thetas.clear();
      for (const auto& t : doc["thetas"]) cfg.thetas.push_back(t.get<double>());
    }
    if (doc.contains("replications")) {
      const auto reps = doc["replications"].get<long long>();
      if (reps < 1) throw ConfigError("replications must be >= 1");
      cfg.replications = static_cast<std::size_t>(reps);
    }
    if (doc.contains("seed")) {
      if (doc["seed"].is_string()) {
        cfg.seed = parse_seed_string(doc["seed"].get<std::string>());
      } else {
        cfg.seed = doc["seed"].get<std::uint64_t>();
      }
    }
    if (doc.contains("out")) cfg.out_path = doc["out"].get<std::string>();
    if (doc.contains("format")) cfg.format = parse_format(doc["format"].get<std::string>());
    if (doc.contains("parallel")) {
      cfg.parallel = doc["parallel"].get<int>();
      if (cfg.parallel < 1) throw ConfigError("parallel must be >= 1");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has wrong type: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_json(buffer.str());
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& fallback_out, std::ostream& diag) {
  Problem problem;
  try {
    problem = make_problem(cfg.problem_id);
    if (cfg.estimators.empty()) throw ConfigError("no estimators requested");
    if (cfg.thetas.empty()) throw ConfigError("no theta values requested");
    if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
    if (cfg.parallel < 1) throw ConfigError("parallel must be >= 1");
    for (double theta : cfg.thetas) {
      if (!problem.theta_interval.contains_strict(theta)) {
        throw ConfigError("theta " + fmt("%g", theta) + " outside parameter interval (" +
                          fmt("%g", problem.theta_interval.lo) + ", " +
                          fmt("%g", problem.theta_interval.hi) + ")");
      }
    }
  } catch (const Error& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const ValidationReport report = validate_problem(problem, 64, cfg.seed);
    if (!report.all_pass()) {
      diag << "problem validation failed:\n";
      for (const auto& c : report.checks) {
        if (!c.pass) diag << "  " << c.name << " residual " << c.max_residual << '\n';
      }
      return kExitValidation;
    }
  } catch (const Error& e) {
    diag << "problem validation failed: " << e.what() << '\n';
    return kExitValidation;
  }

  std::vector<EstimateReport> rows;
  for (EstimatorKind kind : cfg.estimators) {
    for (double theta : cfg.thetas) {
      try {
        rows.push_back(estimate(problem, kind, theta, cfg.replications, cfg.seed, cfg.parallel));
      } catch (const SmoothnessViolation& e) {
        diag << "config error: estimator " << to_string(kind) << " unsupported: " << e.what()
             << '\n';
        return kExitConfig;
      } catch (const Error& e) {
        diag << "estimator " << to_string(kind) << " failed at theta " << theta << ": " << e.what()
             << '\n';
        return kExitRuntime;
      }
    }
  }

  std::ofstream file;
  std::ostream* out = &fallback_out;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      diag << "config error: cannot open output path \"" << cfg.out_path << "\"\n";
      return kExitConfig;
    }
    out = &file;
  }
  if (cfg.format == OutputFormat::csv) {
    write_csv(*out, problem, rows);
  } else {
    write_table(*out, problem, rows);
  }
  return kExitOk;
}

namespace {

struct VerifyRow {
  std::string check;
  double theta = 0.0;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

void leibniz_scenarios(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  // Moving lower limit on the shifted-exponential integrand.
  for (double theta : {0.2, 0.5, 0.8}) {
    auto integrand = [](double z, double t) {
      return z < 0.0 ? t * std::exp(-t * (z + t)) : 0.0;
    };
    const LeibnizReport rep =
        leibniz_check_1d(integrand, [](double t) { return -t; }, 1.0, theta);
    rows.push_back({"leibniz_1d/shifted_exp", theta, rep.residual, cfg.leibniz_1d_tol,
                    rep.residual < cfg.leibniz_1d_tol});
  }

  // Unit square translated along the first axis, linear integrand.
  {
    Transform shift;
    shift.dims = 2;
    shift.map = [](const Vec& u, double t) { return Vec{u[0] + t, u[1]}; };
    shift.jacobian = [](const Vec&, double) { return Matrix::identity(2); };
    shift.dtheta = [](const Vec&, double) { return Vec{1.0, 0.0}; };
    const LeibnizReport rep = leibniz_check_nd(
        Support::box({0.0, 0.0}, {1.0, 1.0}), shift,
        [](const Vec& x, double) { return x[0]; }, 0.3);
    rows.push_back({"leibniz_nd/translating_box", 0.3, rep.residual, cfg.leibniz_nd_tol,
                    rep.residual < cfg.leibniz_nd_tol});
  }

  // Unit square dilated by theta, unit integrand.
  {
    Transform dilate;
    dilate.dims = 2;
    dilate.map = [](const Vec& u, double t) { return Vec{t * u[0], t * u[1]}; };
    dilate.jacobian = [](const Vec&, double t) {
      Matrix j(2, 2);
      j(0, 0) = t;
      j(1, 1) = t;
      return j;
    };
    dilate.dtheta = [](const Vec& u, double) { return Vec{u[0], u[1]}; };
    const LeibnizReport rep = leibniz_check_nd(
        Support::box({0.0, 0.0}, {1.0, 1.0}), dilate,
        [](const Vec&, double) { return 1.0; }, 0.7);
    rows.push_back({"leibniz_nd/dilating_box", 0.7, rep.residual, cfg.leibniz_nd_tol,
                    rep.residual < cfg.leibniz_nd_tol});
  }
}

}  // namespace

int run_verify_on(const Problem& p, const VerifyConfig& cfg, std::ostream& out,
                  std::ostream& diag) {
  std::vector<double> grid = cfg.thetas;
  if (grid.empty()) {
    for (int k = 1; k <= 5; ++k) {
      grid.push_back(p.theta_interval.lo +
                     p.theta_interval.width() * static_cast<double>(k) / 6.0);
    }
  }

  std::vector<VerifyRow> rows;
  try {
    for (double theta : grid) {
      const IdentityReport rep = glr_identity_check(p, theta);
      rows.push_back(
          {"glr_identity", theta, rep.residual, cfg.identity_tol, rep.residual < cfg.identity_tol});
    }
    for (double theta : grid) {
      for (const Vec& probe : p.verify_probes) {
        const Prop1Report rep = prop1_identity_check(p, probe, theta);
        const double residual = std::max(rep.cov1_residual, rep.cov2_residual);
        rows.push_back({"prop1_cov", theta, residual, cfg.prop1_tol, residual < cfg.prop1_tol});
      }
    }
    leibniz_scenarios(cfg, rows);
  } catch (const Error& e) {
    diag << "verify aborted: " << e.what() << '\n';
    return kExitVerifyFailed;
  }

  char line[160];
  std::snprintf(line, sizeof(line), "%-28s %8s %14s %10s %6s\n", "check", "theta", "residual",
                "tol", "");
  out << line;
  bool all_pass = true;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-28s %8.4g %14.4e %10.1e %6s\n", r.check.c_str(), r.theta,
                  r.residual, r.tol, r.pass ? "PASS" : "FAIL");
    out << line;
    all_pass = all_pass && r.pass;
  }
  if (!all_pass) {
    diag << "failing checks:";
    for (const auto& r : rows) {
      if (!r.pass) diag << ' ' << r.check << "@theta=" << r.theta;
    }
    diag << '\n';
    return kExitVerifyFailed;
  }
  return kExitOk;
}

int run_verify(const VerifyConfig& cfg, std::ostream& out, std::ostream& diag) {
  Problem problem;
  try {
    problem = make_problem(cfg.problem_id);
    if (problem.support.dims > 3) throw ConfigError("verify supports dims <= 3");
    for (double theta : cfg.thetas) {
      if (!problem.theta_interval.contains_strict(theta)) {
        throw ConfigError("theta " + fmt("%g", theta) + " outside parameter interval");
      }
    }
  } catch (const Error& e) {
    diag << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return run_verify_on(problem, cfg, out, diag);
}

int list_problems(std::ostream& out) {
  for (const auto& id : builtin_problem_ids()) {
    const Problem p = make_problem(id);
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s dims=%d  theta=(%g, %g)  %s\n", id.c_str(),
                  p.support.dims, p.theta_interval.lo, p.theta_interval.hi, p.summary.c_str());
    out << line;
  }
  return kExitOk;
}

}  // namespace glrsens
