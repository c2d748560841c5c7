#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qclock/chain.hpp"
#include "qclock/optimizer.hpp"

namespace qclock {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kInterfaceVersion = "1.0";

enum class ExperimentKind { Scaling, DisorderOnsite, DisorderCoupling, Thermal, Crossover, Validate };
const char* kind_name(ExperimentKind k) noexcept;
ExperimentKind parse_kind(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Scaling;
  std::vector<int> sizes{10, 20, 40, 80};
  std::vector<double> strengths;  // disorder strength in units of the bulk coupling
  std::vector<double> sigmas;     // entropy per tick; +inf is the clean limit
  int samples = 200;
  std::uint64_t seed = 0;
  std::string output_dir;
  double gamma = 1.0;
  // Baseline chains: "optimized" or "uniform" (all couplings uniform_g).
  std::string profile = "optimized";
  double uniform_g = 0.5;
  OptimizerOptions optimizer;
  // Monte Carlo (thermal): trajectories per Σ, ticks per trajectory, T_n grid.
  int trajectories = 0;
  long ticks = 2000;
  std::vector<int> tick_grid;

  // Throws ConfigError.
  void validate() const;
  // FNV-1a of the canonical JSON form; changes with every field.
  std::string hash() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::string& path);

struct RunManifest {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string code_version = kVersion;
  double wall_time = 0.0;  // seconds
  nlohmann::json extra = nlohmann::json::object();
};
void to_json(nlohmann::json& j, const RunManifest& m);

// Named columns of equal length.
class ResultTable {
 public:
  explicit ResultTable(std::vector<std::string> columns = {});
  void add_row(const std::vector<double>& row);
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& column(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const { return column(name).at(row); }
  // Locale-independent CSV, one header line, newline-terminated.
  std::string to_csv() const;

  RunManifest manifest;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
};

// Shortest round-trip decimal form with '.' separator ("inf", "-inf", "nan" for non-finite values).
std::string format_number(double v);

// Atomic writes: the content goes to a temporary sibling that is renamed into place.
void write_text_atomic(const std::string& path, const std::string& content);
void write_table(const ResultTable& t, const std::string& dir, const std::string& stem);

ChainSpec baseline_chain(const ExperimentConfig& c, int n_sites);

struct ScalingResult {
  ResultTable table;
  std::optional<PowerLawFit> fit;
  std::string fit_error;  // set when the grid cannot be fitted
  std::vector<std::vector<double>> profiles;
};
ScalingResult run_scaling(const ExperimentConfig& c);

struct DisorderResult {
  ResultTable table;  // one row per (N, strength)
  // (D_W - D)/J = c_N (W/g)^α per N, fitted on the smallest third of the positive strengths.
  std::vector<std::pair<int, PowerLawFit>> alpha;
  std::optional<PowerLawFit> prefactor_scaling;   // c_N vs N
  std::string fit_error;
};
// Disorder draws come in antithetic pairs (δ, -δ) and are shared across the
// strength grid: the estimator of E[D_W] stays unbiased while the O(W) part of
// the sample noise cancels within each pair.
DisorderResult run_disorder(const ExperimentConfig& c);

struct LinearFit {
  double slope = 0.0, intercept = 0.0;
  double slope_err = 0.0;
  int points = 0;
};
// Ordinary least squares; throws DomainError with fewer than two points.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

struct ThermalResult {
  ResultTable summary;  // per Σ: J, D from both routes, t*
  // Per (Σ, n): MC Var[T_n] with its error, the exact prediction J⁻²Var[N_{n/J}],
  // the clean (Σ = ∞) prediction and its log-law part (clean minus D n/J³).
  ResultTable curves;
  // log(D_Σ - tanh²(Σ/2) D) vs Σ over finite Σ in [4, 10] for the first size,
  // with D_Σ from the moments route.
  std::optional<LinearFit> log_diffusion;
};
ThermalResult run_thermal(const ExperimentConfig& c);

ResultTable run_crossover(const ExperimentConfig& c);
ResultTable run_validation(const ExperimentConfig& c);

// First tick count on the grid where the excess of var over the reference
// (the clean log-law curve) reaches the reference itself; NaN when it never does.
double departure_tick(const std::vector<double>& n, const std::vector<double>& var,
                      const std::vector<double>& clean);

}  // namespace qclock
