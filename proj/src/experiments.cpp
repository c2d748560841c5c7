#include "qclock/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "qclock/asymptotics.hpp"
#include "qclock/dense_oracle.hpp"
#include "qclock/landauer.hpp"
#include "qclock/moments.hpp"
#include "qclock/parallel.hpp"
#include "qclock/trajectories.hpp"

namespace qclock {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::Scaling, "scaling"},   {ExperimentKind::DisorderOnsite, "disorder_onsite"},
    {ExperimentKind::DisorderCoupling, "disorder_coupling"}, {ExperimentKind::Thermal, "thermal"},
    {ExperimentKind::Crossover, "crossover"}, {ExperimentKind::Validate, "validate"},
};

double wall_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// JSON has no infinity; Σ = ∞ is written as the string "inf".
json sigma_to_json(double s) { return std::isinf(s) ? json("inf") : json(s); }

double sigma_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("sigma must be a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

const char* kind_name(ExperimentKind k) noexcept {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

ExperimentKind parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (s == name) return kind;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (samples < 1) throw ConfigError("samples must be at least 1");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (profile != "optimized" && profile != "uniform") throw ConfigError("profile must be 'optimized' or 'uniform'");
  if (profile == "uniform" && !(uniform_g > 0.0)) throw ConfigError("uniform_g must be positive");
  for (int n : sizes)
    if (n < 1) throw ConfigError("chain sizes must be positive");
  const bool disorder = kind == ExperimentKind::DisorderOnsite || kind == ExperimentKind::DisorderCoupling;
  if (sizes.empty()) throw ConfigError("size grid is empty");
  if (disorder && strengths.empty()) throw ConfigError("strength grid is empty");
  for (double w : strengths)
    if (!(w >= 0.0)) throw ConfigError("disorder strengths must be non-negative");
  if (kind == ExperimentKind::Thermal) {
    if (sigmas.empty()) throw ConfigError("sigma grid is empty");
    for (double s : sigmas)
      if (!(s > 0.0)) throw ConfigError("sigma must be positive");
    if (trajectories < 0 || ticks < 1) throw ConfigError("bad Monte Carlo settings");
    for (int n : tick_grid)
      if (n < 1) throw ConfigError("tick grid must be positive");
  }
  if (kind == ExperimentKind::Validate)
    for (int n : sizes)
      if (n > 4) throw ConfigError("dense validation is limited to N <= 4");
}

std::string ExperimentConfig::hash() const {
  json j = *this;
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void to_json(json& j, const ExperimentConfig& c) {
  json sig = json::array();
  for (double s : c.sigmas) sig.push_back(sigma_to_json(s));
  j = json{{"kind", kind_name(c.kind)},
           {"sizes", c.sizes},
           {"strengths", c.strengths},
           {"sigmas", sig},
           {"samples", c.samples},
           {"seed", c.seed},
           {"output_dir", c.output_dir},
           {"gamma", c.gamma},
           {"profile", c.profile},
           {"uniform_g", c.uniform_g},
           {"optimizer",
            {{"window_m", c.optimizer.window_m},
             {"tail", c.optimizer.tail},
             {"monotone", c.optimizer.monotone},
             {"budget", c.optimizer.budget},
             {"restarts", c.optimizer.restarts},
             {"rel_tol", c.optimizer.rel_tol},
             {"initial_g", c.optimizer.initial_g},
             {"max_coupling", c.optimizer.max_coupling}}},
           {"trajectories", c.trajectories},
           {"ticks", c.ticks},
           {"tick_grid", c.tick_grid}};
}

void from_json(const json& j, ExperimentConfig& c) {
  static const char* known[] = {"kind",    "sizes",     "strengths", "sigmas",       "samples", "seed",
                                "output_dir", "gamma", "profile",   "uniform_g",    "optimizer",
                                "trajectories", "ticks", "tick_grid"};
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ConfigError("unknown config field '" + key + "'");
  try {
    c = ExperimentConfig{};
    c.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("sizes")) c.sizes = j["sizes"].get<std::vector<int>>();
    if (j.contains("strengths")) c.strengths = j["strengths"].get<std::vector<double>>();
    if (j.contains("sigmas")) {
      c.sigmas.clear();
      for (const auto& s : j["sigmas"]) c.sigmas.push_back(sigma_from_json(s));
    }
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.gamma = j.value("gamma", c.gamma);
    c.profile = j.value("profile", c.profile);
    c.uniform_g = j.value("uniform_g", c.uniform_g);
    if (j.contains("optimizer")) {
      const json& o = j["optimizer"];
      c.optimizer.window_m = o.value("window_m", c.optimizer.window_m);
      c.optimizer.tail = o.value("tail", c.optimizer.tail);
      c.optimizer.monotone = o.value("monotone", c.optimizer.monotone);
      c.optimizer.budget = o.value("budget", c.optimizer.budget);
      c.optimizer.restarts = o.value("restarts", c.optimizer.restarts);
      c.optimizer.rel_tol = o.value("rel_tol", c.optimizer.rel_tol);
      c.optimizer.initial_g = o.value("initial_g", c.optimizer.initial_g);
      c.optimizer.max_coupling = o.value("max_coupling", c.optimizer.max_coupling);
    }
    c.trajectories = j.value("trajectories", c.trajectories);
    c.ticks = j.value("ticks", c.ticks);
    if (j.contains("tick_grid")) c.tick_grid = j["tick_grid"].get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.optimizer.seed = c.seed;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  ExperimentConfig c = j.get<ExperimentConfig>();
  c.validate();
  return c;
}

void to_json(json& j, const RunManifest& m) {
  j = json{{"name", m.name},
           {"config_hash", m.config_hash},
           {"seed", m.seed},
           {"code_version", m.code_version},
           {"wall_time_s", m.wall_time},
           {"errors", "standard error of the mean"}};
  for (const auto& [k, v] : m.extra.items()) j[k] = v;
}

ResultTable::ResultTable(std::vector<std::string> columns) : names_(std::move(columns)), data_(names_.size()) {}

void ResultTable::add_row(const std::vector<double>& row) {
  if (row.size() != names_.size()) throw DomainError("row length does not match the table");
  for (std::size_t i = 0; i < row.size(); ++i) data_[i].push_back(row[i]);
}

std::size_t ResultTable::rows() const noexcept { return data_.empty() ? 0 : data_[0].size(); }

const std::vector<double>& ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return data_[i];
  throw DomainError("no column '" + name + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < names_.size(); ++i) out += (i ? "," : "") + names_[i];
  out += '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t i = 0; i < names_.size(); ++i) out += (i ? "," : "") + format_number(data_[i][r]);
    out += '\n';
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
    if (!out.flush()) throw ConfigError("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

void write_table(const ResultTable& t, const std::string& dir, const std::string& stem) {
  write_text_atomic((fs::path(dir) / (stem + ".csv")).string(), t.to_csv());
  json m = t.manifest;
  m["rows"] = t.rows();
  m["columns"] = t.names();
  write_text_atomic((fs::path(dir) / (stem + ".manifest.json")).string(), m.dump(2));
}

namespace {

// Short chains cannot hold the configured boundary window.
OptimizerOptions optimizer_for(const ExperimentConfig& c, int n_sites) {
  OptimizerOptions o = c.optimizer;
  o.seed = c.seed;
  o.window_m = std::min(o.window_m, std::max(0, (n_sites - 1) / 2));
  return o;
}

}  // namespace

ChainSpec baseline_chain(const ExperimentConfig& c, int n_sites) {
  if (c.profile == "uniform") return ChainSpec::uniform(n_sites, c.uniform_g, c.gamma);
  const CouplingProfile p = optimize_couplings(n_sites, c.gamma, optimizer_for(c, n_sites));
  return ChainSpec::from_couplings(p.values, c.gamma);
}

namespace {

RunManifest manifest_for(const ExperimentConfig& c, const std::string& name,
                         std::chrono::steady_clock::time_point start) {
  RunManifest m;
  m.name = name;
  m.config_hash = c.hash();
  m.seed = c.seed;
  m.wall_time = wall_seconds(start);
  return m;
}

double bulk_coupling(const ChainSpec& s) {
  if (s.couplings.empty()) return 1.0;
  return s.couplings[s.couplings.size() / 2];
}

}  // namespace

ScalingResult run_scaling(const ExperimentConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  ScalingResult out;
  out.table = ResultTable({"N", "J", "D", "fano", "evaluations", "window", "boundary_ratio"});
  std::vector<CouplingProfile> profiles(c.sizes.size());
  // The optimizer parallelizes internally, so sizes run one after another.
  for (std::size_t i = 0; i < c.sizes.size(); ++i)
    profiles[i] = optimize_couplings(c.sizes[i], c.gamma, optimizer_for(c, c.sizes[i]));
  std::vector<double> ns, fanos;
  for (std::size_t i = 0; i < c.sizes.size(); ++i) {
    const auto& p = profiles[i];
    const auto t = zero_t_transport(ChainSpec::from_couplings(p.values, c.gamma)).summary;
    const auto ap = apodization_report(p.values);
    out.table.add_row({double(c.sizes[i]), t.current, t.diffusion, t.fano, double(p.evaluations),
                       double(ap.window_length), ap.boundary_ratio});
    out.profiles.push_back(p.values);
    if (c.sizes[i] > 1) {
      ns.push_back(c.sizes[i]);
      fanos.push_back(t.fano);
    }
  }
  if (ns.size() >= 3) {
    out.fit = fit_power_law(ns, fanos);
  } else {
    out.fit_error = "need at least three chain lengths above 1 to fit an exponent";
  }
  out.table.manifest = manifest_for(c, "scaling", start);
  if (out.fit)
    out.table.manifest.extra["fit"] = {{"exponent", out.fit->exponent}, {"exponent_err", out.fit->exponent_err}};
  else
    out.table.manifest.extra["fit_error"] = out.fit_error;
  return out;
}

DisorderResult run_disorder(const ExperimentConfig& c) {
  c.validate();
  if (c.kind != ExperimentKind::DisorderOnsite && c.kind != ExperimentKind::DisorderCoupling)
    throw ConfigError("run_disorder needs a disorder kind");
  const bool onsite = c.kind == ExperimentKind::DisorderOnsite;
  const auto start = std::chrono::steady_clock::now();
  DisorderResult out;
  out.table = ResultTable({"N", "strength", "J", "D", "D_W", "D_W_err", "excess", "excess_err", "samples"});
  std::vector<double> fit_n, fit_c;

  for (int n : c.sizes) {
    const ChainSpec base = baseline_chain(c, n);
    const auto clean = zero_t_transport(base).summary;
    const double g = bulk_coupling(base);
    const int draws = onsite ? n : n - 1;
    const int pairs = (c.samples + 1) / 2;
    // Unit draws on [-1/2, 1/2], one stream per antithetic pair.
    std::vector<std::vector<double>> unit(static_cast<std::size_t>(pairs));
    for (int p = 0; p < pairs; ++p) {
      RngStream rng(stream_seed(c.seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(p));
      unit[p] = sample_onsite_disorder(std::max(draws, 1), 1.0, rng);
    }
    std::vector<double> ws, excess;
    for (double s : c.strengths) {
      const double w = s * g;
      if (!onsite && w >= 2.0 * *std::min_element(base.couplings.begin(), base.couplings.end()))
        throw ConfigError("coupling disorder would make couplings negative");
      std::vector<double> values(static_cast<std::size_t>(c.samples));
      parallel_for(values.size(), [&](std::size_t k) {
        const auto& u = unit[k / 2];
        const double sign = k % 2 == 0 ? 1.0 : -1.0;
        if (onsite) {
          std::vector<double> shifts(u.size());
          for (std::size_t i = 0; i < u.size(); ++i) shifts[i] = sign * w * u[i];
          values[k] = zero_t_transport(base, shifts).summary.diffusion;
        } else {
          ChainSpec d = base;
          for (std::size_t i = 0; i < d.couplings.size(); ++i) d.couplings[i] += sign * w * u[i];
          values[k] = zero_t_transport(d).summary.diffusion;
        }
      });
      // Standard error from pair means, which are independent.
      // Deviations from the clean value keep W = 0 rows exact.
      for (double& v : values) v -= clean.diffusion;
      std::vector<double> pair_means;
      for (std::size_t k = 0; k < values.size(); k += 2)
        pair_means.push_back(k + 1 < values.size() ? 0.5 * (values[k] + values[k + 1]) : values[k]);
      const double shift = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
      const double mean = clean.diffusion + shift;
      double var = 0.0;
      const double pm = std::accumulate(pair_means.begin(), pair_means.end(), 0.0) / double(pair_means.size());
      for (double v : pair_means) var += (v - pm) * (v - pm);
      const double np = double(pair_means.size());
      const double err = np > 1 ? std::sqrt(var / (np - 1.0) / np) : 0.0;
      const double ex = shift / clean.current;
      out.table.add_row({double(n), s, clean.current, clean.diffusion, mean, err, ex, err / clean.current,
                         double(c.samples)});
      if (s > 0.0 && ex > 0.0) {
        ws.push_back(s);
        excess.push_back(ex);
      }
    }
    // Fit on the smallest third of the strengths (at least three), where the
    // leading order in W dominates.
    std::vector<std::size_t> order(ws.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ws[a] < ws[b]; });
    order.resize(std::min(order.size(), std::max<std::size_t>(3, (order.size() + 2) / 3)));
    std::vector<double> fit_w, fit_ex;
    for (std::size_t i : order) {
      fit_w.push_back(ws[i]);
      fit_ex.push_back(excess[i]);
    }
    if (fit_w.size() >= 3) {
      const PowerLawFit f = fit_power_law(fit_w, fit_ex);
      out.alpha.emplace_back(n, f);
      fit_n.push_back(n);
      fit_c.push_back(std::exp(f.prefactor));
    }
  }
  if (fit_n.size() >= 3) out.prefactor_scaling = fit_power_law(fit_n, fit_c);
  if (out.alpha.empty()) out.fit_error = "need at least three positive excess values per size to fit";

  out.table.manifest = manifest_for(c, kind_name(c.kind), start);
  json fits = json::array();
  for (const auto& [n, f] : out.alpha)
    fits.push_back({{"N", n}, {"alpha", f.exponent}, {"alpha_err", f.exponent_err}, {"c_N", std::exp(f.prefactor)}});
  out.table.manifest.extra["fits"] = fits;
  if (out.prefactor_scaling)
    out.table.manifest.extra["c_N_exponent"] = {{"value", out.prefactor_scaling->exponent},
                                                {"err", out.prefactor_scaling->exponent_err}};
  out.table.manifest.extra["sampling"] = "antithetic pairs, common random numbers across strengths";
  return out;
}

LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("linear fit needs at least two points");
  const double n = double(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("linear fit needs distinct abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = static_cast<int>(xs.size());
  if (xs.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - f.intercept - f.slope * xs[i];
      rss += r * r;
    }
    f.slope_err = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return f;
}

double departure_tick(const std::vector<double>& n, const std::vector<double>& var,
                      const std::vector<double>& clean) {
  for (std::size_t i = 0; i < n.size(); ++i)
    if (var[i] - clean[i] >= clean[i]) return n[i];
  return std::numeric_limits<double>::quiet_NaN();
}

ThermalResult run_thermal(const ExperimentConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  ThermalResult out;
  out.summary = ResultTable({"N", "sigma", "J", "D_wbl", "D_moments", "t_star", "t_star_ticks", "t_star_scaling",
                             "departure_ticks"});
  out.curves = ResultTable({"N", "sigma", "n", "var_Tn", "var_Tn_err", "predicted", "clean", "log_law"});
  std::vector<double> fit_s, fit_logd;
  for (int n_sites : c.sizes) {
    const ChainSpec base = baseline_chain(c, n_sites);
    const auto clean = zero_t_transport(base).summary;
    const double d_clean_me = MomentEngine(base).diffusion();
    std::vector<double> grid(c.tick_grid.begin(), c.tick_grid.end());
    // Clean J⁻²Var[N_{n/J}] and its log-law part, the same curve without the
    // linear D t term.
    std::vector<double> clean_curve, log_law;
    if (!grid.empty()) {
      std::vector<double> times;
      for (double k : grid) times.push_back(k / clean.current);
      const VarianceCurve vc = number_variance_exact(base, times);
      const double j2 = clean.current * clean.current;
      for (std::size_t i = 0; i < times.size(); ++i) {
        clean_curve.push_back(vc.variance[i] / j2);
        log_law.push_back((vc.variance[i] - vc.diffusion * times[i]) / j2);
      }
    }
    for (std::size_t si = 0; si < c.sigmas.size(); ++si) {
      const double sigma = c.sigmas[si];
      const ChainSpec spec = std::isinf(sigma) ? base : base.with_entropy(sigma);
      const TransportSummary wbl = std::isinf(sigma) ? clean : wbl_finite_bias(clean.current, clean.diffusion, sigma);
      const MomentEngine me(spec);
      const double d_me = me.diffusion();
      double ts = std::numeric_limits<double>::infinity(), ticks = ts;
      try {
        const Crossover x = crossover_time(me.current(), d_me);
        ts = x.time;
        ticks = x.ticks;
      } catch (const NoCrossing&) {
        ts = ticks = std::numeric_limits<double>::quiet_NaN();
      }
      const double scaling = std::isinf(sigma) || sigma <= 1.0 ? std::numeric_limits<double>::quiet_NaN()
                                                               : thermal_crossover(me.current(), sigma);
      double departure = std::numeric_limits<double>::quiet_NaN();
      if (c.trajectories > 0 && !grid.empty()) {
        TrajectoryOptions opt;
        opt.n_ticks = c.ticks;
        opt.method = TrajectoryMethod::Exact;
        const auto ens = simulate_ensemble(spec, c.trajectories, stream_seed(c.seed, 1000 * n_sites + si), opt);
        const auto st = waiting_time_stats(ens, c.tick_grid);
        std::vector<double> times;
        for (double k : grid) times.push_back(k / me.current());
        const VarianceCurve vc = number_variance_exact(spec, times);
        std::vector<double> var;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const double pred = vc.variance[i] / (me.current() * me.current());
          out.curves.add_row(
              {double(n_sites), sigma, grid[i], st[i].var, st[i].var_err, pred, clean_curve[i], log_law[i]});
          var.push_back(st[i].var);
        }
        departure = departure_tick(grid, var, log_law);
      }
      out.summary.add_row({double(n_sites), sigma, me.current(), wbl.diffusion, d_me, ts, ticks, scaling, departure});
      if (!std::isinf(sigma) && sigma >= 4.0 && sigma <= 10.0 && n_sites == c.sizes.front()) {
        fit_s.push_back(sigma);
        // Thermal part of the noise, the D → 0 limit in which D_Σ ∼ J e^{-Σ}.
        const double th = std::tanh(0.5 * sigma);
        fit_logd.push_back(std::log(d_me - th * th * d_clean_me));
      }
    }
  }
  if (fit_s.size() >= 2) out.log_diffusion = fit_linear(fit_s, fit_logd);
  out.summary.manifest = manifest_for(c, "thermal", start);
  if (out.log_diffusion)
    out.summary.manifest.extra["log_D_slope"] = {{"value", out.log_diffusion->slope},
                                                 {"err", out.log_diffusion->slope_err}};
  out.curves.manifest = out.summary.manifest;
  out.curves.manifest.name = "thermal_curves";
  return out;
}

ResultTable run_crossover(const ExperimentConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  ResultTable t({"N", "J", "D", "fano", "t_star", "t_star_ticks", "t_star_leading"});
  for (int n : c.sizes) {
    const auto s = zero_t_transport(baseline_chain(c, n)).summary;
    double ts = std::numeric_limits<double>::quiet_NaN(), ticks = ts;
    try {
      const Crossover x = crossover_time(s.current, s.diffusion);
      ts = x.time;
      ticks = x.ticks;
    } catch (const NoCrossing&) {
    }
    t.add_row({double(n), s.current, s.diffusion, s.fano, ts, ticks, std::log(s.current / s.diffusion) / s.diffusion});
  }
  t.manifest = manifest_for(c, "crossover", start);
  return t;
}

ResultTable run_validation(const ExperimentConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  ResultTable t({"N", "sigma", "covariance_err", "current_err", "activity_err", "diffusion_err", "jump_dressed_err",
                 "max_err"});
  std::vector<double> sigmas = c.sigmas;
  if (sigmas.empty()) sigmas = {std::numeric_limits<double>::infinity(), 1.0, 3.0};
  for (int n : c.sizes) {
    const ChainSpec base = c.profile == "uniform" ? ChainSpec::uniform(n, c.uniform_g, c.gamma)
                                                  : ChainSpec::uniform(n, 0.5 * c.gamma, c.gamma);
    for (double s : sigmas) {
      const ChainSpec spec = std::isinf(s) ? base : base.with_entropy(s);
      const OracleReport r = validate_against_dense_oracle(spec);
      t.add_row({double(n), s, r.covariance_err, r.current_err, r.activity_err, r.diffusion_err, r.jump_dressed_err,
                 r.max_err()});
    }
  }
  t.manifest = manifest_for(c, "validate", start);
  return t;
}

}  // namespace qclock
