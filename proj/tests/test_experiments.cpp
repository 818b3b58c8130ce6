#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conecount/experiments.hpp"
#include "conecount/rng.hpp"

using namespace conecount;

TEST(Experiments, FitExponentExact) {
  std::vector<std::pair<double, double>> sq, flat;
  for (double x : {1.0, 2.0, 5.0, 10.0}) sq.emplace_back(x, x * x), flat.emplace_back(x, 5.0);
  const FitResult a = fit_exponent(sq);
  EXPECT_NEAR(a.slope, 2.0, 1e-12);
  EXPECT_NEAR(a.residual_rms, 0.0, 1e-12);
  EXPECT_NEAR(fit_exponent(flat).slope, 0.0, 1e-12);
  EXPECT_THROW(fit_exponent({{1, 1}, {2, 2}}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({{1, 1}, {2, -2}, {3, 3}}), std::invalid_argument);
}

TEST(Experiments, FitExponentNoisy) {
  Rng rng(2024);
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 40; ++i) {
    const double x = i * 2.5;
    pts.emplace_back(x, std::pow(x, 1.5) * (1 + 0.01 * rng.normal()));
  }
  const double s = fit_exponent(pts).slope;
  EXPECT_GE(s, 1.45);
  EXPECT_LE(s, 1.55);
}

TEST(Experiments, ConfigGrammar) {
  const ExperimentConfig c = ExperimentConfig::parse("# comment\nkind = generic\nT = 10, 20,40 # trailing\n\nlambda=1/2\n");
  EXPECT_EQ(c.kind(), "generic");
  EXPECT_EQ(c.get_list("T"), (std::vector<double>{10, 20, 40}));
  EXPECT_DOUBLE_EQ(c.get_double("lambda", 0), 0.5);
  EXPECT_EQ(c.get_int("trials", 7), 7);
  EXPECT_THROW(ExperimentConfig::parse("novalue\n"), std::invalid_argument);
  EXPECT_THROW(run_experiment(ExperimentConfig::parse("kind = nope\n")), std::invalid_argument);
  EXPECT_THROW(run_experiment(ExperimentConfig::parse("kind = generic\nT = 10, 5, 20\n")), std::invalid_argument);
}

TEST(Experiments, DivergenceClassification) {
  EXPECT_TRUE(psi_divergent(Psi::power(0.5, 1.0), 2));
  EXPECT_TRUE(psi_divergent(Psi::power(1.0, 0.4), 2));
  EXPECT_FALSE(psi_divergent(Psi::power(1.0, 2.0), 1));
  EXPECT_TRUE(psi_divergent(Psi::constant(1.0), 3));
  EXPECT_TRUE(psi_divergent(Psi::logpower(1.0), 2));
  EXPECT_THROW(run_experiment(ExperimentConfig::parse("kind = khintchine\nT = 100,200,400\npsi = pow:c=1,lambda=2\n")),
               std::invalid_argument);
}

TEST(Experiments, SumIntegralSmall) {
  const ExperimentResult r = run_experiment(ExperimentConfig::parse("kind = sum_integral\n"));
  EXPECT_TRUE(r.passed()) << r.verdict_text();
  EXPECT_EQ(r.verdicts.size(), 3u);
  // psi = 1, n = 1: integral T against sum T - 1.
  EXPECT_DOUBLE_EQ(r.rows[0].disc, 1.0);
}

TEST(Experiments, EquidistributionSmallRunIsDeterministic) {
  const std::string cfg = "kind = equidistribution\nform = standard:1\nT = 500, 1000, 2000, 4000\nr = 0.2\ntrials = 50\nseed = 3\n";
  ExperimentConfig a = ExperimentConfig::parse(cfg), b = a;
  a.values["threads"] = "1";
  b.values["threads"] = "3";
  const ExperimentResult ra = run_experiment(a), rb = run_experiment(b);
  EXPECT_EQ(ra.csv(), rb.csv());
  EXPECT_EQ(ra.rows.size(), 200u);
  EXPECT_TRUE(ra.passed()) << ra.verdict_text();
  const std::string header = ra.csv().substr(0, ra.csv().find('\n'));
  EXPECT_EQ(header, "kind,n,T,param,trial,seed,count,main,disc,relerr");
}

TEST(Experiments, WellRoundednessSmall) {
  const ExperimentResult r = run_experiment(ExperimentConfig::parse("kind = wellroundedness\nn = 3\nchecks = 1500\nseed = 8\n"));
  EXPECT_TRUE(r.passed()) << r.verdict_text();
  EXPECT_EQ(r.rows.size(), 3000u);
}

TEST(Experiments, OutputsCarryValidManifest) {
  const ExperimentResult r = run_experiment(ExperimentConfig::parse("kind = sum_integral\n"));
  const auto dir = std::filesystem::temp_directory_path() / "conecount_exp_test";
  std::filesystem::remove_all(dir);
  RunManifest m;
  m.seed = 1;
  m.command_line = "test";
  write_outputs(r, dir.string(), m);
  std::ifstream f(dir / "fit.json");
  const auto doc = nlohmann::json::parse(f);
  EXPECT_TRUE(validate_manifest(doc));
  EXPECT_TRUE(std::filesystem::exists(dir / "trials.csv"));
  std::ifstream v(dir / "verdict.txt");
  std::stringstream ss;
  ss << v.rdbuf();
  EXPECT_NE(ss.str().find("overall: PASS"), std::string::npos);
}

TEST(Experiments, CsvQuotesCommaParams) {
  ExperimentResult r;
  r.rows.push_back({"k", 1, 2.0, "a,b", 0, 1, 3, 1.5, 1.5, 1.0});
  EXPECT_NE(r.csv().find("\"a,b\""), std::string::npos);
}
