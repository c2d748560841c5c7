// Command-line front end. Exit codes: 0 success, 1 domain error, 2 usage error.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qclock/asymptotics.hpp"
#include "qclock/chain.hpp"
#include "qclock/dense_oracle.hpp"
#include "qclock/experiments.hpp"
#include "qclock/landauer.hpp"
#include "qclock/moments.hpp"
#include "qclock/optimizer.hpp"
#include "qclock/parallel.hpp"
#include "qclock/trajectories.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qclock;

namespace {

constexpr const char* kOutputEnv = "QCLOCK_OUTPUT_ROOT";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A failed acceptance-tagged comparison inside an experiment.
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// State shared by every subcommand for one invocation.
struct Run {
  std::string subcommand;
  std::string out_dir;
  bool force = false;
  std::optional<std::uint64_t> seed_flag;
  std::uint64_t seed = 0;
  bool seed_drawn = false;
  bool seeded = false;  // false for deterministic subcommands that draw no random numbers
  json config = json::object();  // whatever defines the run; hashed into the manifest
  std::vector<std::string> outputs;
  std::string started;

  std::uint64_t resolve_seed(std::optional<std::uint64_t> from_config) {
    seeded = true;
    if (seed_flag) {
      seed = *seed_flag;
    } else if (from_config) {
      seed = *from_config;
    } else {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      seed_drawn = true;
    }
    return seed;
  }

  std::string root() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv(kOutputEnv); env && *env) return (fs::path(env) / subcommand).string();
    return (fs::path("qclock-out") / subcommand).string();
  }

  std::string path(const std::string& name) const { return (fs::path(root()) / name).string(); }

  void claim(const std::string& name) {
    const std::string p = path(name);
    if (fs::exists(p) && !force) throw UsageError("output " + p + " exists; pass --force to overwrite");
    outputs.push_back(p);
  }

  void write(const std::string& name, const std::string& content) {
    claim(name);
    write_text_atomic(path(name), content);
  }

  void write_table_files(const ResultTable& t, const std::string& stem) {
    claim(stem + ".csv");
    claim(stem + ".manifest.json");
    write_table(t, root(), stem);
  }

  void write_manifest() {
    json m{{"subcommand", subcommand},
           {"config_hash", fnv_hash(config.dump())},
           {"config", config},
           {"seed", seeded ? json(seed) : json(nullptr)},
           {"seed_source", !seeded ? "unused" : seed_flag ? "flag" : (seed_drawn ? "random" : "config")},
           {"versions", {{"code", kVersion}, {"interface", kInterfaceVersion}}},
           {"threads", thread_count()},
           {"started", started},
           {"finished", utc_now()},
           {"outputs", outputs}};
    const std::string p = path("manifest.json");
    if (fs::exists(p) && !force && std::find(outputs.begin(), outputs.end(), p) == outputs.end())
      throw UsageError("output " + p + " exists; pass --force to overwrite");
    write_text_atomic(p, m.dump(2));
  }
};

std::string num(double v) { return format_number(v); }

ChainSpec load_chain(const std::string& path) {
  try {
    return load_chain_spec(path);
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("cannot load chain spec " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

// "min:max:steps" or "log:t0:t1:steps".
std::vector<double> parse_grid(const std::string& text, bool log_scale) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (log_scale) {
    if (parts.size() != 4 || parts[0] != "log") throw UsageError("grid must read log:t0:t1:steps");
    parts.erase(parts.begin());
  }
  if (parts.size() != 3) throw UsageError("grid must read min:max:steps");
  double lo, hi;
  int steps;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    steps = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("cannot parse grid '" + text + "'");
  }
  if (!(hi > lo) || steps < 2) throw UsageError("grid needs max > min and at least 2 steps");
  if (log_scale) {
    if (!(lo > 0.0)) throw UsageError("log grid needs t0 > 0");
    return log_spaced(lo, hi, steps);
  }
  std::vector<double> out(steps);
  for (int i = 0; i < steps; ++i) out[i] = lo + (hi - lo) * i / (steps - 1);
  return out;
}

void cmd_optimize(Run& run, int n, double gamma, const OptimizerOptions& base) {
  OptimizerOptions o = base;
  o.seed = run.resolve_seed(std::nullopt);
  o.window_m = std::min(o.window_m, std::max(0, (n - 1) / 2));
  run.config = {{"n", n},
                {"gamma", gamma},
                {"window_m", o.window_m},
                {"budget", o.budget},
                {"restarts", o.restarts},
                {"max_coupling", o.max_coupling}};
  const CouplingProfile p = optimize_couplings(n, gamma, o);
  ChainSpec spec = ChainSpec::from_couplings(p.values, gamma);
  spec.seed = o.seed;
  const auto t = zero_t_transport(spec).summary;
  const auto ap = apodization_report(p.values);
  json chain = spec;
  run.write("chain.json", chain.dump(2));
  json s{{"objective", p.objective},
         {"iterations", p.iterations},
         {"evaluations", p.evaluations},
         {"converged", p.converged},
         {"best_restart", p.best_restart},
         {"J", t.current},
         {"D", t.diffusion},
         {"window_stats",
          {{"window_m", o.window_m},
           {"bulk_value", ap.bulk_value},
           {"window_length", ap.window_length},
           {"boundary_ratio", ap.boundary_ratio}}}};
  run.write("report.json", s.dump(2));
  std::cout << "N=" << n << " J=" << num(t.current) << " D=" << num(t.diffusion) << " D/J=" << num(t.fano) << "\n";
}

struct TransportFlags {
  std::string energy_grid;
  std::optional<double> beta, mu_l, mu_r;
  std::string method = "residue";
};

void cmd_transport(Run& run, const ChainSpec& spec, const TransportFlags& f) {
  const bool fermi = f.beta || f.mu_l || f.mu_r;
  if (f.method != "residue" && f.method != "quadrature") throw UsageError("--method must be residue or quadrature");
  if (fermi && f.method == "residue")
    throw UsageError("energy-dependent leads (--beta, --mu-l, --mu-r) need --method quadrature");
  const EffectiveHamiltonian h = build_effective_hamiltonian(spec);
  const double w = quadrature_half_width(h);
  const auto energies = parse_grid(f.energy_grid.empty() ? num(-w) + ":" + num(w) + ":401" : f.energy_grid, false);
  run.config = {{"chain", spec},
                {"energy_grid", f.energy_grid},
                {"beta", f.beta ? json(*f.beta) : json(nullptr)},
                {"mu_l", f.mu_l ? json(*f.mu_l) : json(nullptr)},
                {"mu_r", f.mu_r ? json(*f.mu_r) : json(nullptr)},
                {"method", f.method}};

  std::vector<double> tr(energies.size());
  transmission(h, energies, tr);
  std::string csv = "energy,transmission\n";
  for (std::size_t i = 0; i < energies.size(); ++i) csv += num(energies[i]) + "," + num(tr[i]) + "\n";
  run.write("transmission.csv", csv);

  TransportSummary lb;
  std::string method = f.method;
  double tolerance = 0.0;
  const QuadratureSettings q;
  if (fermi) {
    const double inf = std::numeric_limits<double>::infinity();
    lb = lb_numeric(h, f.mu_l.value_or(inf), f.mu_r.value_or(-inf), f.beta.value_or(inf), q);
    tolerance = q.rel_tol;
  } else if (f.method == "quadrature") {
    lb = lb_numeric(h, LeadPair::constant(spec.occ_left, spec.occ_right), q);
    tolerance = q.rel_tol;
  } else {
    const auto r = zero_t_transport(h);
    lb = spec.full_bias() ? r.summary
                          : constant_bias_transport(r.summary.current, r.summary.diffusion, spec.occ_left,
                                                    spec.occ_right);
    if (r.used_quadrature) {
      method = "quadrature";
      tolerance = q.rel_tol;
    }
  }
  json s{{"J", lb.current}, {"D", lb.diffusion}, {"fano", lb.fano}, {"method", method}, {"tolerance", tolerance}};
  if (!fermi) {
    // The master-equation route covers the constant-occupation leads only.
    const MomentEngine me(spec);
    s["master_equation"] = {{"J", me.current()}, {"D", me.diffusion()}, {"A", me.activity()}};
  }
  run.write("transport.json", s.dump(2));
  std::cout << "J=" << num(lb.current) << " D=" << num(lb.diffusion) << " D/J=" << num(lb.fano) << " (" << method
            << ")\n";
}

struct SimulateFlags {
  int trajectories = 10;
  long ticks = 0;
  double t_max = 0.0;
  double dt = 0.0;
  std::string method = "exact";
  int reproject_every = 50;
  int discard_first = 200;
};

void cmd_simulate(Run& run, const ChainSpec& spec, const SimulateFlags& f) {
  if (f.ticks <= 0 && !(f.t_max > 0.0)) throw UsageError("simulate needs --ticks or --t-max");
  TrajectoryOptions opt;
  opt.n_ticks = f.ticks;
  opt.t_max = f.t_max > 0.0 ? f.t_max : std::numeric_limits<double>::infinity();
  opt.dt = f.dt;
  opt.reproject_every = f.reproject_every;
  if (f.method == "rk4")
    opt.method = TrajectoryMethod::Rk4;
  else if (f.method == "exact")
    opt.method = TrajectoryMethod::Exact;
  else
    throw UsageError("--method must be rk4 or exact");
  const std::uint64_t seed = run.resolve_seed(spec.seed);
  run.config = {{"chain", spec},         {"trajectories", f.trajectories}, {"ticks", f.ticks},
                {"t_max", f.t_max},      {"method", f.method},             {"dt", f.dt},
                {"reproject_every", f.reproject_every}, {"discard_first", f.discard_first}};
  const auto ens = simulate_ensemble(spec, f.trajectories, seed, opt);

  const int width = static_cast<int>(std::to_string(std::max(0, f.trajectories - 1)).size());
  long total = 0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    std::string id = std::to_string(i);
    id.insert(0, static_cast<std::size_t>(width) - id.size(), '0');
    std::string csv = "tick_time\n";
    for (double t : ens[i].tick_times) csv += num(t) + "\n";
    run.write("trajectory_" + id + ".csv", csv);
    total += static_cast<long>(ens[i].tick_times.size());
  }

  double t_sum = 0.0, net = 0.0;
  for (const auto& r : ens) {
    t_sum += r.t_end;
    net += static_cast<double>(r.tick_times.size()) - static_cast<double>(r.right_in_times.size());
  }
  json s{{"trajectories", f.trajectories}, {"seed", seed}, {"J_hat", t_sum > 0.0 ? net / t_sum : 0.0}};

  // T_n on a doubling grid that fits the shortest trajectory after burn-in.
  long shortest = std::numeric_limits<long>::max();
  for (const auto& r : ens) shortest = std::min(shortest, static_cast<long>(net_tick_times(r).size()));
  std::vector<int> grid;
  for (long n = 1; n <= (shortest - f.discard_first) / 4; n *= 2) grid.push_back(static_cast<int>(n));
  json var_table = json::array();
  if (!grid.empty())
    for (const auto& e : waiting_time_stats(ens, grid, f.discard_first))
      var_table.push_back({{"n", e.x}, {"mean_Tn", e.mean}, {"mean_err", e.mean_err}, {"var_Tn", e.var},
                           {"var_err", e.var_err}, {"samples", e.samples}});
  s["var_table"] = var_table;

  json hist = nullptr;
  if (shortest > f.discard_first + 2) {
    const auto w = conditional_waiting_histogram(ens, f.discard_first);
    auto pack = [](const Histogram& h) {
      return json{{"lo", h.lo}, {"hi", h.hi}, {"samples", h.samples}, {"mean", h.mean}, {"prob", h.prob}};
    };
    hist = {{"all", pack(w.all)},
            {"after_fast", pack(w.fast)},
            {"after_slow", pack(w.slow)},
            {"mean_after_fast", w.mean_fast},
            {"mean_after_fast_err", w.mean_fast_err},
            {"mean_after_slow", w.mean_slow},
            {"mean_after_slow_err", w.mean_slow_err},
            {"wigner_dyson_residual", wigner_dyson_fit(w.all).goodness},
            {"exponential_residual", exponential_fit(w.all).goodness}};
  }
  s["histograms"] = hist;
  json per = json::array();
  for (const auto& r : ens)
    per.push_back({{"seed", r.seed}, {"t_end", r.t_end}, {"left_in", r.jumps[0]}, {"left_out", r.jumps[1]},
                   {"right_in", r.jumps[2]}, {"right_out", r.jumps[3]},
                   {"reprojection_warnings", r.reprojection_warnings}});
  s["per_trajectory"] = per;
  run.write("simulate.json", s.dump(2));
  std::cout << "trajectories=" << f.trajectories << " ticks=" << total << " J_hat=" << num(s["J_hat"].get<double>())
            << "\n";
}

void cmd_variance(Run& run, const ChainSpec& spec, const std::string& times_text, int bond) {
  const auto times = parse_grid(times_text, true);
  run.config = {{"chain", spec}, {"times", times_text}, {"bond", bond}};
  const VarianceCurve c = bond > 0 ? bulk_number_variance(spec, bond, times) : number_variance_exact(spec, times);
  std::string csv = "t,var,slope\n";
  for (std::size_t i = 0; i < c.times.size(); ++i)
    csv += num(c.times[i]) + "," + num(c.variance[i]) + "," + num(c.slope[i]) + "\n";
  run.write("variance.csv", csv);
  json s{{"J", c.current}, {"D", c.diffusion}, {"A", c.activity}, {"bond", bond}};
  run.write("variance.json", s.dump(2));
  std::cout << "J=" << num(c.current) << " D=" << num(c.diffusion) << " A=" << num(c.activity) << "\n";
}

void cmd_asymptotics(Run& run, const std::string& what, double g, double t_max, int points, double j, double d,
                     double e, double w) {
  run.config = {{"what", what}, {"g", g}, {"t_max", t_max}, {"points", points}, {"J", j}, {"D", d}, {"E", e},
                {"W", w}};
  std::string csv;
  if (what == "variance") {
    csv = "t,closed_form,asymptotic\n";
    for (double t : log_spaced(t_max * 1e-3, t_max, points))
      csv += num(t) + "," + num(bulk_variance_closed_form(g, t)) + "," + num(bulk_variance_asymptotic(g, t)) + "\n";
  } else if (what == "correlator") {
    csv = "tau,correlator\n";
    for (int i = 0; i < points; ++i) {
      const double tau = t_max * i / (points - 1);
      csv += num(tau) + "," + num(bulk_correlator(g, tau)) + "\n";
    }
  } else if (what == "crossover") {
    const Crossover c = crossover_time(j, d);
    csv = "J,D,t_star,t_star_ticks,t_star_leading\n" + num(j) + "," + num(d) + "," + num(c.time) + "," +
          num(c.ticks) + "," + num(c.leading) + "\n";
  } else if (what == "localization") {
    csv = "E,W,g,xi\n" + num(e) + "," + num(w) + "," + num(g) + "," + num(localization_length(e, w, g)) + "\n";
  } else {
    throw UsageError("--what must be variance, correlator, crossover or localization");
  }
  run.write("asymptotics_" + what + ".csv", csv);
  std::cout << csv;
}

void check(json& checks, bool& ok, const std::string& name, double value, double lo, double hi) {
  const bool pass = value >= lo && value <= hi;
  checks.push_back({{"name", name}, {"value", value}, {"lo", lo}, {"hi", hi}, {"pass", pass}});
  ok = ok && pass;
}

void cmd_experiment(Run& run, const std::string& config_path) {
  ExperimentConfig c = load_experiment_config(config_path);
  // The struct cannot tell a zero seed from a missing one; the document can.
  std::ifstream in(config_path);
  const bool has_seed = json::parse(in, nullptr, false).contains("seed");
  c.seed = run.resolve_seed(has_seed ? std::optional<std::uint64_t>(c.seed) : std::nullopt);
  c.optimizer.seed = c.seed;
  if (!c.output_dir.empty() && run.out_dir.empty()) run.out_dir = c.output_dir;
  run.config = c;
  json checks = json::array();
  bool ok = true;
  switch (c.kind) {
    case ExperimentKind::Scaling: {
      const auto r = run_scaling(c);
      run.write_table_files(r.table, "scaling");
      json profiles = r.profiles;
      run.write("profiles.json", profiles.dump(2));
      if (r.fit) check(checks, ok, "fano_exponent", r.fit->exponent, -1.96, -1.76);
      break;
    }
    case ExperimentKind::DisorderOnsite:
    case ExperimentKind::DisorderCoupling: {
      const auto r = run_disorder(c);
      run.write_table_files(r.table, kind_name(c.kind));
      for (const auto& [n, f] : r.alpha) check(checks, ok, "alpha_N" + std::to_string(n), f.exponent, 1.85, 2.15);
      break;
    }
    case ExperimentKind::Thermal: {
      const auto r = run_thermal(c);
      run.write_table_files(r.summary, "thermal");
      if (r.curves.rows() > 0) run.write_table_files(r.curves, "thermal_curves");
      for (std::size_t i = 0; i < r.summary.rows(); ++i)
        check(checks, ok, "wbl_identity_row" + std::to_string(i),
              std::abs(r.summary.at(i, "D_wbl") / r.summary.at(i, "D_moments") - 1.0), 0.0, 1e-6);
      if (r.log_diffusion) check(checks, ok, "log_D_slope", r.log_diffusion->slope, -1.05, -0.95);
      break;
    }
    case ExperimentKind::Crossover:
      run.write_table_files(run_crossover(c), "crossover");
      break;
    case ExperimentKind::Validate: {
      const auto t = run_validation(c);
      run.write_table_files(t, "validate");
      for (std::size_t i = 0; i < t.rows(); ++i)
        check(checks, ok, "oracle_row" + std::to_string(i), t.at(i, "max_err"), 0.0, 1e-8);
      break;
    }
  }
  run.write("checks.json", checks.dump(2));
  std::cout << "experiment " << kind_name(c.kind) << ": " << checks.size() << " checks, "
            << (ok ? "all passed" : "FAILED") << "\n";
  if (!ok) throw CheckFailed("an acceptance check failed; see checks.json");
}

void cmd_validate(Run& run, int n, const std::vector<double>& sigmas) {
  if (n < 1 || n > 4) throw UsageError("--n must lie in [1, 4]");
  ExperimentConfig c;
  c.kind = ExperimentKind::Validate;
  c.sizes = {n};
  c.sigmas = sigmas;
  run.config = c;
  const ResultTable t = run_validation(c);
  run.write_table_files(t, "validate");
  double worst = 0.0;
  for (double e : t.column("max_err")) worst = std::max(worst, e);
  std::cout << "N=" << n << " max deviation " << num(worst) << "\n";
  if (!(worst < 1e-8)) throw CheckFailed("dense oracle disagrees with the covariance route");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum clock chain: transport, noise, trajectories and asymptotics"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", std::string("qclock ") + kVersion + " (interface " + kInterfaceVersion + ")");

  Run run;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "Worker threads (default: logical cores)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out", run.out_dir, std::string("Output directory (default: $") + kOutputEnv + "/<subcommand>)");
  app.add_flag("--force", run.force, "Overwrite existing outputs");

  // optimize
  auto* opt = app.add_subcommand("optimize", "Minimize D/J over coupling profiles");
  int opt_n = 20;
  double opt_gamma = 1.0;
  OptimizerOptions oo;
  opt->add_option("--n", opt_n, "Chain length")->required()->check(CLI::Range(2, 100000));
  opt->add_option("--gamma", opt_gamma, "Boundary rate")->check(CLI::PositiveNumber);
  opt->add_option("--window", oo.window_m, "Explicit boundary couplings per side");
  opt->add_option("--budget", oo.budget, "Objective evaluations per restart");
  opt->add_option("--restarts", oo.restarts, "Restarts");
  opt->add_option("--max-coupling", oo.max_coupling, "Upper bound on any coupling in units of Γ");

  // transport
  auto* tr = app.add_subcommand("transport", "Transmission, current and noise of a chain");
  std::string tr_config;
  TransportFlags tf;
  tr->add_option("--config", tr_config, "Chain spec JSON")->required();
  tr->add_option("--energy-grid", tf.energy_grid, "Transmission grid min:max:steps");
  tr->add_option("--beta", tf.beta, "Inverse lead temperature (Fermi leads)");
  tr->add_option("--mu-l", tf.mu_l, "Left chemical potential (Fermi leads)");
  tr->add_option("--mu-r", tf.mu_r, "Right chemical potential (Fermi leads)");
  tr->add_option("--method", tf.method, "residue or quadrature");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Quantum-jump trajectories");
  std::string sim_config;
  SimulateFlags sf;
  sim->add_option("--config", sim_config, "Chain spec JSON")->required();
  sim->add_option("--trajectories", sf.trajectories, "Number of trajectories")->check(CLI::PositiveNumber);
  sim->add_option("--ticks", sf.ticks, "Ticks per trajectory")->check(CLI::NonNegativeNumber);
  sim->add_option("--t-max", sf.t_max, "Time limit per trajectory");
  sim->add_option("--method", sf.method, "exact (orbital propagation) or rk4 (fixed-step thinning)");
  sim->add_option("--dt", sf.dt, "RK4 step (default 0.01/max(Γ, 2 max g))");
  sim->add_option("--reproject-every", sf.reproject_every, "RK4 steps between reprojections")
      ->check(CLI::PositiveNumber);
  sim->add_option("--discard-first", sf.discard_first, "Burn-in ticks before statistics")
      ->check(CLI::NonNegativeNumber);

  // variance
  auto* var = app.add_subcommand("variance", "Exact Var[N_t] at the right lead or across a bond");
  std::string var_config, var_times = "log:0.1:1000:60";
  int var_bond = 0;
  var->add_option("--config", var_config, "Chain spec JSON")->required();
  var->add_option("--times", var_times, "Time grid log:t0:t1:steps");
  var->add_option("--bond", var_bond, "Bond counted from the right end (default: the right lead)");

  // asymptotics
  auto* as = app.add_subcommand("asymptotics", "Infinite-chain closed forms");
  std::string as_what;
  double as_g = 1.0, as_tmax = 100.0, as_j = 0.1, as_d = 1e-4, as_e = 0.0, as_w = 0.1;
  int as_points = 50;
  as->add_option("--what", as_what, "variance, correlator, crossover or localization")->required();
  as->add_option("--g", as_g, "Bulk coupling");
  as->add_option("--t-max", as_tmax, "Largest time");
  as->add_option("--points", as_points, "Grid points")->check(CLI::Range(2, 1000000));
  as->add_option("--J", as_j, "Current (crossover)");
  as->add_option("--D", as_d, "Diffusion constant (crossover)");
  as->add_option("--E", as_e, "Energy (localization)");
  as->add_option("--W", as_w, "Disorder strength (localization)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Config-driven campaign");
  std::string ex_config;
  ex->add_option("--config", ex_config, "Experiment config JSON")->required();

  // validate
  auto* va = app.add_subcommand("validate", "Compare with the dense Lindblad oracle");
  int va_n = 3;
  std::vector<double> va_sigmas;
  va->add_option("--n", va_n, "Chain length (1..4)");
  va->add_option("--sigma", va_sigmas, "Entropies to check besides full bias");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  set_thread_count(threads);
  if (*seed_opt) run.seed_flag = seed;
  run.started = utc_now();
  try {
    if (*opt) {
      run.subcommand = "optimize";
      cmd_optimize(run, opt_n, opt_gamma, oo);
    } else if (*tr) {
      run.subcommand = "transport";
      cmd_transport(run, load_chain(tr_config), tf);
    } else if (*sim) {
      run.subcommand = "simulate";
      cmd_simulate(run, load_chain(sim_config), sf);
    } else if (*var) {
      run.subcommand = "variance";
      cmd_variance(run, load_chain(var_config), var_times, var_bond);
    } else if (*as) {
      run.subcommand = "asymptotics";
      cmd_asymptotics(run, as_what, as_g, as_tmax, as_points, as_j, as_d, as_e, as_w);
    } else if (*ex) {
      run.subcommand = "experiment";
      cmd_experiment(run, ex_config);
    } else if (*va) {
      run.subcommand = "validate";
      std::vector<double> sig{std::numeric_limits<double>::infinity()};
      sig.insert(sig.end(), va_sigmas.begin(), va_sigmas.end());
      cmd_validate(run, va_n, sig);
    }
    run.write_manifest();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const CheckFailed& e) {
    run.write_manifest();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
