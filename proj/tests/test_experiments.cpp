#include <doctest.h>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qclock/experiments.hpp"

using namespace qclock;
namespace fs = std::filesystem;

namespace {

ExperimentConfig disorder_config(ExperimentKind kind, int samples) {
  ExperimentConfig c;
  c.kind = kind;
  c.sizes = {6};
  c.strengths = {0.0, 0.05, 0.1, 0.2};
  c.samples = samples;
  c.seed = 12;
  c.profile = "uniform";
  c.uniform_g = 0.5;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config JSON round trip, validation and hashing") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Thermal;
  c.sigmas = {4.0, std::numeric_limits<double>::infinity()};
  c.tick_grid = {10, 100};
  c.seed = 5;
  const nlohmann::json j = c;
  CHECK(j["sigmas"][1] == "inf");
  const auto back = j.get<ExperimentConfig>();
  CHECK(back.hash() == c.hash());
  CHECK(std::isinf(back.sigmas[1]));

  ExperimentConfig d = c;
  d.samples += 1;
  CHECK(d.hash() != c.hash());
  d = c;
  d.optimizer.budget += 1;
  CHECK(d.hash() != c.hash());
  d = c;
  d.output_dir = "elsewhere";
  CHECK(d.hash() != c.hash());

  CHECK_THROWS_AS(nlohmann::json({{"kind", "nope"}}).get<ExperimentConfig>(), ConfigError);
  CHECK_THROWS_AS(nlohmann::json({{"kind", "scaling"}, {"typo", 1}}).get<ExperimentConfig>(), ConfigError);
  ExperimentConfig bad;
  bad.sizes.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ExperimentConfig{};
  bad.samples = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = disorder_config(ExperimentKind::DisorderOnsite, 4);
  bad.strengths.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("tables format numbers independently of the locale") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
  ResultTable t({"a", "b"});
  t.add_row({1.0, 0.25});
  t.add_row({2.0, 1e-20});
  CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
  std::setlocale(LC_ALL, "de_DE.UTF-8");  // may be unavailable; to_chars ignores it anyway
  CHECK(t.to_csv() == "a,b\n1,0.25\n2,1e-20\n");
  std::setlocale(LC_ALL, "C");
  CHECK(t.at(1, "b") == 1e-20);
  CHECK_THROWS_AS(t.column("c"), DomainError);

  const fs::path dir = fs::temp_directory_path() / "qclock_table_test";
  fs::remove_all(dir);
  t.manifest.name = "demo";
  write_table(t, dir.string(), "demo");
  CHECK(slurp(dir / "demo.csv") == t.to_csv());
  const auto m = nlohmann::json::parse(slurp(dir / "demo.manifest.json"));
  CHECK(m["rows"] == 2);
  CHECK(m["errors"] == "standard error of the mean");
  CHECK_FALSE(fs::exists(dir / "demo.csv.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("scaling run on a single size reports the fit error but keeps the data") {
  ExperimentConfig c;
  c.sizes = {4};
  c.optimizer.restarts = 1;
  c.optimizer.budget = 800;
  const auto r = run_scaling(c);
  CHECK(r.table.rows() == 1);
  CHECK_FALSE(r.fit.has_value());
  CHECK_FALSE(r.fit_error.empty());
  CHECK(r.table.at(0, "fano") > 0.0);
  const auto again = run_scaling(c);
  CHECK(again.table.to_csv() == r.table.to_csv());
}

TEST_CASE("on-site disorder sweep") {
  const auto c = disorder_config(ExperimentKind::DisorderOnsite, 60);
  const auto r = run_disorder(c);
  REQUIRE(r.table.rows() == 4);
  CHECK(r.table.at(0, "D_W") == r.table.at(0, "D"));
  CHECK(r.table.at(0, "D_W_err") == 0.0);
  REQUIRE(r.alpha.size() == 1);
  CHECK(std::abs(r.alpha[0].second.exponent - 2.0) < 0.15);
  CHECK(run_disorder(c).table.to_csv() == r.table.to_csv());

  // Standard errors shrink like 1/sqrt(samples).
  const auto big = run_disorder(disorder_config(ExperimentKind::DisorderOnsite, 240));
  const double ratio = r.table.at(3, "D_W_err") / big.table.at(3, "D_W_err");
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("coupling disorder sweep") {
  const auto r = run_disorder(disorder_config(ExperimentKind::DisorderCoupling, 60));
  CHECK(r.table.at(0, "excess") == 0.0);
  REQUIRE(r.alpha.size() == 1);
  CHECK(std::abs(r.alpha[0].second.exponent - 2.0) < 0.15);
  auto c = disorder_config(ExperimentKind::DisorderCoupling, 4);
  c.strengths = {2.5};
  CHECK_THROWS_AS(run_disorder(c), ConfigError);
}

TEST_CASE("thermal sweep without Monte Carlo") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Thermal;
  c.sizes = {8};
  c.profile = "uniform";
  c.sigmas = {4.0, 5.5, 7.0, 10.0, std::numeric_limits<double>::infinity()};
  const auto r = run_thermal(c);
  REQUIRE(r.summary.rows() == 5);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(r.summary.at(i, "D_wbl") / r.summary.at(i, "D_moments") - 1.0) < 1e-6);
  CHECK(r.summary.at(4, "D_wbl") == doctest::Approx(r.summary.at(4, "D_moments")).epsilon(1e-6));
  REQUIRE(r.log_diffusion.has_value());
  CHECK(std::abs(r.log_diffusion->slope + 1.0) < 0.05);
  CHECK(r.curves.rows() == 0);
}

TEST_CASE("crossover and validation tables") {
  ExperimentConfig c;
  c.kind = ExperimentKind::Crossover;
  c.sizes = {10};
  c.profile = "uniform";
  const auto t = run_crossover(c);
  CHECK(t.rows() == 1);

  c.kind = ExperimentKind::Validate;
  c.sizes = {1, 2, 3};
  const auto v = run_validation(c);
  CHECK(v.rows() == 9);
  for (double e : v.column("max_err")) CHECK(e < 1e-8);
  c.sizes = {5};
  CHECK_THROWS_AS(run_validation(c), ConfigError);
}

TEST_CASE("departure tick and linear fit") {
  const std::vector<double> n{1, 2, 4, 8}, clean{1, 1, 1, 1}, var{1.1, 1.5, 2.0, 3.0};
  CHECK(departure_tick(n, var, clean) == 4.0);
  CHECK(std::isnan(departure_tick(n, clean, clean)));
  const std::vector<double> x{0, 1, 2}, y{1, 3, 5};
  const auto f = fit_linear(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_linear(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
}
