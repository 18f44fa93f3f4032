#include "gringotts/shocks.hpp"

#include <cmath>
#include <ostream>

#include "gringotts/errors.hpp"
#include "gringotts/format.hpp"
#include "gringotts/parallel.hpp"
#include "gringotts/special_functions.hpp"

namespace gringotts {

namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

void ShockModel::validate() const {
  if (!(mean_drop >= 0.0 && mean_drop < 1.0)) throw DomainError("shock: mean_drop must lie in [0,1)");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) throw DomainError("shock: concentration must be positive");
  if (!(correlation >= 0.0 && correlation <= 1.0)) throw DomainError("shock: correlation must lie in [0,1]");
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t scenario, std::uint64_t stream) {
  return mix64(mix64(mix64(seed) ^ scenario) ^ stream);
}

double counter_uniform(std::uint64_t seed, std::uint64_t scenario, std::uint64_t stream) {
  return (static_cast<double>(counter_hash(seed, scenario, stream) >> 11) + 0.5) * 0x1.0p-53;
}

double shock_multiplier(const ShockModel& model, std::uint64_t seed, std::uint64_t scenario, std::uint64_t bank) {
  if (model.degenerate()) return 1.0;
  const double common = standard_normal_inverse_cdf(counter_uniform(seed, scenario, kCommonFactorStream));
  const double own = standard_normal_inverse_cdf(counter_uniform(seed, scenario, bank));
  const double latent = std::sqrt(model.correlation) * common + std::sqrt(1.0 - model.correlation) * own;
  return beta_inverse_cdf(standard_normal_cdf(latent), model.shape_a(), model.shape_b());
}

ScenarioSet sample_scenarios(const ShockModel& model, Eigen::Index n_banks, Eigen::Index n_scenarios,
                             std::uint64_t seed, unsigned threads) {
  model.validate();
  if (n_banks <= 0 || n_scenarios <= 0) throw DomainError("sample_scenarios: counts must be positive");
  ScenarioSet set;
  set.seed = seed;
  set.model = model;
  set.multipliers.resize(n_scenarios, n_banks);
  parallel_for(static_cast<std::size_t>(n_scenarios), threads, [&](std::size_t s) {
    for (Eigen::Index i = 0; i < n_banks; ++i)
      set.multipliers(static_cast<Eigen::Index>(s), i) = shock_multiplier(model, seed, s, static_cast<std::uint64_t>(i));
  });
  return set;
}

double monopoly_assets_from_split(const FinancialNetwork& split, const Eigen::Ref<const Eigen::RowVectorXd>& multipliers) {
  if (multipliers.size() != split.size())
    throw DomainError("monopoly_assets_from_split: multiplier row length does not match bank count");
  return multipliers.dot(split.external_assets.transpose());
}

void write_scenarios_csv(std::ostream& out, const ScenarioSet& set) {
  out << "scenario,bank,multiplier\n";
  for (Eigen::Index s = 0; s < set.scenarios(); ++s)
    for (Eigen::Index i = 0; i < set.banks(); ++i)
      out << s << ',' << i << ',' << format_double(set.multipliers(s, i)) << '\n';
}

}  // namespace gringotts
