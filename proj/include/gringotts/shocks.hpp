#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>

#include "gringotts/network.hpp"

namespace gringotts {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Multiplicative asset shock: each bank's external assets are scaled by a
/// Beta(a, b) multiplier with mean 1 - mean_drop and a + b = concentration.
/// Banks are coupled by a one-factor Gaussian copula with pairwise
/// correlation `correlation`.
struct ShockModel {
  double mean_drop = 0.27;
  double concentration = 10.0;
  double correlation = 0.25;

  double shape_a() const { return (1.0 - mean_drop) * concentration; }
  double shape_b() const { return mean_drop * concentration; }
  /// mean_drop == 0: no shock at all, every multiplier is exactly 1.
  bool degenerate() const { return mean_drop == 0.0; }

  void validate() const;
};

struct ScenarioSet {
  RowMatrix multipliers;  // scenarios x banks, entries in [0,1]
  std::uint64_t seed = 0;
  ShockModel model;

  Eigen::Index scenarios() const { return multipliers.rows(); }
  Eigen::Index banks() const { return multipliers.cols(); }
};

/// Counter-based stream: a uniform in (0,1) that depends only on
/// (seed, scenario, stream). Stream kCommonFactorStream carries the copula's
/// common factor; streams 0..n-1 are the banks' idiosyncratic draws.
inline constexpr std::uint64_t kCommonFactorStream = std::numeric_limits<std::uint64_t>::max();
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t scenario, std::uint64_t stream);
double counter_uniform(std::uint64_t seed, std::uint64_t scenario, std::uint64_t stream);

/// Multiplier for one (scenario, bank) cell. Pure function of its arguments.
double shock_multiplier(const ShockModel& model, std::uint64_t seed, std::uint64_t scenario, std::uint64_t bank);

ScenarioSet sample_scenarios(const ShockModel& model, Eigen::Index n_banks, Eigen::Index n_scenarios,
                             std::uint64_t seed, unsigned threads = 1);

/// Monopoly assets under the split system's realized shocks: Σ e_i X_i.
double monopoly_assets_from_split(const FinancialNetwork& split, const Eigen::Ref<const Eigen::RowVectorXd>& multipliers);

/// `scenario,bank,multiplier`, scenario-major.
void write_scenarios_csv(std::ostream& out, const ScenarioSet& set);

}  // namespace gringotts
