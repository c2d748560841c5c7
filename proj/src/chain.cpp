#include "qclock/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qclock {

namespace {

bool in_unit_interval(double f) { return std::isfinite(f) && f >= 0.0 && f <= 1.0; }

}  // namespace

void ChainSpec::validate() const {
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  if (static_cast<int>(couplings.size()) != n_sites - 1)
    throw DomainError("couplings must have length n_sites - 1");
  for (double g : couplings)
    if (!std::isfinite(g) || g < 0.0) throw DomainError("couplings must be finite and non-negative");
  if (!std::isfinite(boundary_rate) || boundary_rate <= 0.0)
    throw DomainError("boundary_rate must be positive");
  if (boundary_rate_right && (!std::isfinite(*boundary_rate_right) || *boundary_rate_right <= 0.0))
    throw DomainError("boundary_rate_right must be positive");
  if (!in_unit_interval(occ_left) || !in_unit_interval(occ_right))
    throw DomainError("bath occupations must lie in [0, 1]");
  if (entropy) {
    if (!(*entropy >= 0.0)) throw DomainError("entropy must be non-negative");
    if (std::abs(occ_left + occ_right - 1.0) > 1e-12)
      throw DomainError("entropy parametrization requires f_L + f_R = 1");
  }
}

ChainSpec ChainSpec::uniform(int n, double g, double gamma) {
  if (n < 1) throw DomainError("n_sites must be positive");
  ChainSpec s;
  s.n_sites = n;
  s.couplings.assign(static_cast<std::size_t>(n - 1), g);
  s.boundary_rate = gamma;
  s.validate();
  return s;
}

ChainSpec ChainSpec::from_couplings(std::vector<double> g, double gamma) {
  ChainSpec s;
  s.n_sites = static_cast<int>(g.size()) + 1;
  s.couplings = std::move(g);
  s.boundary_rate = gamma;
  s.validate();
  return s;
}

double occupation_from_entropy(double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("entropy must be non-negative");
  if (std::isinf(sigma)) return 1.0;
  return 1.0 / (1.0 + std::exp(-sigma));
}

ChainSpec ChainSpec::with_entropy(double sigma) const {
  ChainSpec s = *this;
  s.occ_left = occupation_from_entropy(sigma);
  s.occ_right = 1.0 - s.occ_left;
  s.entropy = sigma;
  s.validate();
  return s;
}

ChainSpec ChainSpec::with_occupations(double f_left, double f_right) const {
  ChainSpec s = *this;
  s.occ_left = f_left;
  s.occ_right = f_right;
  s.entropy.reset();
  s.validate();
  return s;
}

void to_json(nlohmann::json& j, const ChainSpec& spec) {
  j = nlohmann::json{{"n_sites", spec.n_sites},
                     {"couplings", spec.couplings},
                     {"boundary_rate", spec.boundary_rate},
                     {"occ_left", spec.occ_left},
                     {"occ_right", spec.occ_right}};
  if (spec.boundary_rate_right) j["boundary_rate_right"] = *spec.boundary_rate_right;
  j["entropy"] = spec.entropy ? nlohmann::json(*spec.entropy) : nlohmann::json(nullptr);
  j["seed"] = spec.seed ? nlohmann::json(*spec.seed) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ChainSpec& spec) {
  if (!j.is_object()) throw ConfigError("chain spec must be a JSON object");
  static const char* known[] = {"n_sites",  "couplings", "boundary_rate", "boundary_rate_right",
                                "occ_left", "occ_right", "entropy",       "seed"};
  for (const auto& [key, _] : j.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      throw ConfigError("unknown chain spec key: " + key);
  try {
    ChainSpec s;
    s.n_sites = j.at("n_sites").get<int>();
    s.couplings = j.value("couplings", std::vector<double>{});
    s.boundary_rate = j.value("boundary_rate", 1.0);
    if (j.contains("boundary_rate_right") && !j["boundary_rate_right"].is_null())
      s.boundary_rate_right = j["boundary_rate_right"].get<double>();
    s.occ_left = j.value("occ_left", 1.0);
    s.occ_right = j.value("occ_right", 0.0);
    if (j.contains("entropy") && !j["entropy"].is_null()) {
      double sigma = j["entropy"].get<double>();
      if (!j.contains("occ_left") && !j.contains("occ_right")) {
        s.occ_left = occupation_from_entropy(sigma);
        s.occ_right = 1.0 - s.occ_left;
      }
      s.entropy = sigma;
    }
    if (j.contains("seed") && !j["seed"].is_null()) s.seed = j["seed"].get<std::uint64_t>();
    s.validate();
    spec = std::move(s);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed chain spec: ") + e.what());
  }
}

ChainSpec load_chain_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  // Experiment-style documents nest the chain under "chain".
  if (j.contains("chain")) return j["chain"].get<ChainSpec>();
  return j.get<ChainSpec>();
}

void save_chain_spec(const ChainSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << nlohmann::json(spec).dump(2) << '\n';
}

RealMatrix EffectiveHamiltonian::hermitian_part() const {
  const int n = size();
  RealMatrix h = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = diagonal[i].real();
  for (int i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = offdiag[static_cast<std::size_t>(i)];
  return h;
}

EffectiveHamiltonian build_effective_hamiltonian(const ChainSpec& spec,
                                                 std::span<const double> shifts) {
  spec.validate();
  const int n = spec.n_sites;
  if (!shifts.empty() && static_cast<int>(shifts.size()) != n)
    throw DomainError("onsite shifts must have length n_sites");

  EffectiveHamiltonian h;
  h.gamma_left = spec.gamma_left();
  h.gamma_right = spec.gamma_right();
  h.onsite_shifts = RealVector::Zero(n);
  for (int i = 0; i < static_cast<int>(shifts.size()); ++i) h.onsite_shifts[i] = shifts[i];

  h.diagonal = h.onsite_shifts.cast<cplx>();
  h.diagonal[0] += cplx(0.0, -0.5 * h.gamma_left);
  h.diagonal[n - 1] += cplx(0.0, -0.5 * h.gamma_right);
  h.offdiag = spec.couplings;

  h.matrix = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) h.matrix(i, i) = h.diagonal[i];
  for (int i = 0; i + 1 < n; ++i) h.matrix(i, i + 1) = h.matrix(i + 1, i) = spec.couplings[i];
  return h;
}

std::vector<double> sample_onsite_disorder(int n_sites, double strength, RngStream& rng) {
  if (!(strength >= 0.0) || !std::isfinite(strength))
    throw DomainError("disorder strength must be non-negative");
  std::vector<double> shifts(static_cast<std::size_t>(n_sites));
  for (double& s : shifts) s = strength * (rng.uniform() - 0.5);
  return shifts;
}

DisorderedChain apply_onsite_disorder(const ChainSpec& spec, double strength, RngStream& rng) {
  spec.validate();
  return {spec, sample_onsite_disorder(spec.n_sites, strength, rng)};
}

ChainSpec apply_coupling_disorder(const ChainSpec& spec, double strength, RngStream& rng) {
  spec.validate();
  if (!(strength >= 0.0) || !std::isfinite(strength))
    throw DomainError("disorder strength must be non-negative");
  if (!spec.couplings.empty()) {
    double gmin = *std::min_element(spec.couplings.begin(), spec.couplings.end());
    if (strength >= 2.0 * gmin)
      throw DomainError("coupling disorder strength must stay below twice the smallest coupling");
  }
  ChainSpec out = spec;
  for (double& g : out.couplings) g += strength * (rng.uniform() - 0.5);
  return out;
}

}  // namespace qclock
