#pragma once

#include "conecount/counting.hpp"
#include "conecount/geometry.hpp"
#include "conecount/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace conecount {

// Flat "key = value" configuration; '#' starts a comment.
//
//   kind     equidistribution | generic | khintchine | wellroundedness | valdist | sum_integral
//   form     standard:<n> or a form file            (default standard:2)
//   T        comma separated grid                    (required except wellroundedness)
//   trials   alpha / (g,h) trials per grid point     (default 50)
//   seed     master seed                             (default 1)
//   threads  worker count, 0 = all cores             (default 0)
//   kappa_T  height used for the kappa estimate      (default max T)
// Kind specific keys: r, gamma, c (equidistribution); lambda (generic);
// psi, control_psi (khintchine); checks, eps_max, region, psi (wellroundedness);
// m, omega, vl_samples, omega_mode, kappa_T, map (valdist); psi_list, n_list (sum_integral).
struct ExperimentConfig {
  std::map<std::string, std::string> values;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::string kind() const { return get("kind"); }
};

struct TrialRow {
  std::string kind;
  int n = 0;
  double T = 0.0;
  std::string param;
  int trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  double main = 0.0;
  double disc = 0.0;
  double relerr = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  bool has_prediction = false;
  double predicted_slope = 0.0;
  double margin = 0.0;  // allowed excess of slope over the prediction
};

// Least squares of log y on log x; needs >= 3 positive points.
FitResult fit_exponent(const std::vector<std::pair<double, double>>& pairs);

struct Verdict {
  std::string tag;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string kind;
  std::vector<TrialRow> rows;
  std::vector<FitResult> fits;
  std::vector<Verdict> verdicts;
  nlohmann::json stats = nlohmann::json::object();

  bool passed() const;
  std::string csv() const;
  std::string verdict_text() const;
  nlohmann::json fit_json() const;
};

// True when sum q^{n-1} psi(q)^n diverges.
bool psi_divergent(const Psi& psi, int n);

ExperimentResult run_equidistribution(const ExperimentConfig& cfg);
ExperimentResult run_generic(const ExperimentConfig& cfg);
ExperimentResult run_khintchine(const ExperimentConfig& cfg);
ExperimentResult run_wellroundedness(const ExperimentConfig& cfg);
ExperimentResult run_valdist(const ExperimentConfig& cfg);
ExperimentResult run_sum_integral(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes trials.csv, fit.json and verdict.txt into dir (created if needed).
void write_outputs(const ExperimentResult& result, const std::string& dir, const RunManifest& manifest);

}  // namespace conecount
