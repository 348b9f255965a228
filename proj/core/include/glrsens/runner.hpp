#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "glrsens/estimators.hpp"
#include "glrsens/model.hpp"

namespace glrsens {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitRuntime = 4;
inline constexpr int kExitVerifyFailed = 5;

inline constexpr std::uint64_t kDefaultSeed = 42;

enum class OutputFormat { csv, table };

struct ExperimentConfig {
  std::string problem_id = "toy_shifted_exp";
  std::vector<EstimatorKind> estimators;
  std::vector<double> thetas;
  std::size_t replications = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::string out_path;  // empty -> stdout
  OutputFormat format = OutputFormat::csv;
  int parallel = 1;
};

// Toy problem, glr_full + pushout_lr, theta in {0.2, 0.4, 0.6, 0.8}, 2500
// replications.
ExperimentConfig fig2_preset();

// Loads the JSON config documented in the README; throws ConfigError.
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);

// Decimal or 0x-prefixed hex; throws ConfigError.
std::uint64_t parse_seed_string(const std::string& text);

// Comma-separated list of reals; throws ConfigError.
std::vector<double> parse_theta_list(const std::string& text);

// Runs every (estimator, theta) pair and writes the result table to
// cfg.out_path (or `fallback_out` when no path is set). Diagnostics go to
// `diag`. Returns a process exit code.
int run_experiment(const ExperimentConfig& cfg, std::ostream& fallback_out, std::ostream& diag);

struct VerifyConfig {
  std::string problem_id = "toy_shifted_exp";
  std::vector<double> thetas;  // empty -> 5 evenly spaced interior points
  double identity_tol = 1e-5;
  double prop1_tol = 1e-6;
  double leibniz_1d_tol = 1e-6;
  double leibniz_nd_tol = 1e-7;
};

// Residual table for the identity / change-of-variables / transport checks.
// Exit 0 when every residual is under its tolerance, kExitVerifyFailed
// otherwise (failing checks listed on diag).
int run_verify(const VerifyConfig& cfg, std::ostream& out, std::ostream& diag);

// Same, with the problem supplied directly (lets tests inject corrupted
// fixtures that are not in the registry).
int run_verify_on(const Problem& p, const VerifyConfig& cfg, std::ostream& out, std::ostream& diag);

int list_problems(std::ostream& out);

}  // namespace glrsens
