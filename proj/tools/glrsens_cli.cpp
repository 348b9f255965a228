// Command-line front end: runs estimator experiments, verification suites,
// and lists the compiled-in problems.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "glrsens/runner.hpp"

namespace {

using glrsens::ConfigError;
using glrsens::ExperimentConfig;
using glrsens::VerifyConfig;

int do_run(const std::string& config_path, const std::string& preset, const std::string& problem,
           const std::string& theta_list, const std::string& estimator_list, long long reps,
           const std::string& seed_text, const std::string& out_path, const std::string& format,
           int parallel) {
  ExperimentConfig cfg;
  if (!preset.empty()) {
    if (preset != "fig2") {
      std::cerr << "config error: unknown preset \"" << preset << "\"\n";
      return glrsens::kExitConfig;
    }
    if (!config_path.empty()) {
      std::cerr << "config error: --preset and --config are mutually exclusive\n";
      return glrsens::kExitConfig;
    }
    cfg = glrsens::fig2_preset();
  } else if (!config_path.empty()) {
    try {
      cfg = glrsens::load_config_file(config_path);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return glrsens::kExitConfig;
    }
  }

  try {
    if (!problem.empty()) cfg.problem_id = problem;
    if (!theta_list.empty()) cfg.thetas = glrsens::parse_theta_list(theta_list);
    if (!estimator_list.empty()) {
      cfg.estimators.clear();
      std::string item;
      std::stringstream ss(estimator_list);
      while (std::getline(ss, item, ',')) {
        const auto kind = glrsens::estimator_from_string(item);
        if (!kind) throw ConfigError("unknown estimator \"" + item + "\"");
        cfg.estimators.push_back(*kind);
      }
    }
    if (cfg.estimators.empty()) cfg.estimators = {glrsens::EstimatorKind::glr_full};
    if (reps >= 0) {
      if (reps < 1) throw ConfigError("replications must be >= 1");
      cfg.replications = static_cast<std::size_t>(reps);
    }
    if (!seed_text.empty()) {
      cfg.seed = glrsens::parse_seed_string(seed_text);
    } else if (config_path.empty()) {
      if (const char* env = std::getenv("GLR_SENS_SEED")) {
        cfg.seed = glrsens::parse_seed_string(env);
      }
    }
    if (!out_path.empty()) cfg.out_path = out_path;
    if (!format.empty()) {
      if (format == "csv") {
        cfg.format = glrsens::OutputFormat::csv;
      } else if (format == "table") {
        cfg.format = glrsens::OutputFormat::table;
      } else {
        throw ConfigError("format must be csv or table");
      }
    }
    if (parallel > 0) cfg.parallel = parallel;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return glrsens::kExitConfig;
  }

  return glrsens::run_experiment(cfg, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic derivative estimation experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string problem;
  std::string theta_list;
  std::string estimator_list;
  long long reps = -1;
  std::string seed_text;
  std::string out_path;
  std::string format;
  int parallel = 0;

  CLI::App* run = app.add_subcommand("run", "run estimator experiments");
  run->add_option("--config", config_path, "JSON config path");
  run->add_option("--preset", preset, "named preset (fig2)");
  run->add_option("--problem", problem, "builtin problem id");
  run->add_option("--theta", theta_list, "comma-separated theta values");
  run->add_option("--estimators", estimator_list, "comma-separated estimator kinds");
  run->add_option("--reps", reps, "replications per estimate");
  run->add_option("--seed", seed_text, "seed (decimal or 0x-hex)");
  run->add_option("--out", out_path, "output path (stdout when omitted)");
  run->add_option("--format", format, "csv or table");
  run->add_option("--parallel", parallel, "worker threads for replications");

  std::string v_problem = "toy_shifted_exp";
  std::string v_theta_list;
  double v_identity_tol = 1e-5;
  double v_prop1_tol = 1e-6;

  CLI::App* verify = app.add_subcommand("verify", "run the numerical identity checkers");
  verify->add_option("--problem", v_problem, "builtin problem id");
  verify->add_option("--theta", v_theta_list, "comma-separated theta grid");
  verify->add_option("--tol-identity", v_identity_tol, "identity-check tolerance");
  verify->add_option("--tol-prop1", v_prop1_tol, "change-of-variables tolerance");

  CLI::App* list = app.add_subcommand("list-problems", "list builtin problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return glrsens::kExitConfig;
  }

  if (run->parsed()) {
    return do_run(config_path, preset, problem, theta_list, estimator_list, reps, seed_text,
                  out_path, format, parallel);
  }
  if (verify->parsed()) {
    VerifyConfig cfg;
    cfg.problem_id = v_problem;
    cfg.identity_tol = v_identity_tol;
    cfg.prop1_tol = v_prop1_tol;
    try {
      if (!v_theta_list.empty()) cfg.thetas = glrsens::parse_theta_list(v_theta_list);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return glrsens::kExitConfig;
    }
    return glrsens::run_verify(cfg, std::cout, std::cerr);
  }
  if (list->parsed()) {
    return glrsens::list_problems(std::cout);
  }
  return glrsens::kExitConfig;
}
