#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "gringotts/calibration.hpp"
#include "gringotts/clearing.hpp"
#include "gringotts/json_io.hpp"
#include "gringotts/risk.hpp"
#include "gringotts/shocks.hpp"

namespace gringotts {

enum class SweepAxis { BankruptcyCost, Correlation, ShockMean };
enum class SystemSelection { Monopoly, Split, Both };

std::string_view to_string(SweepAxis axis);
std::string_view to_string(SystemKind kind);
std::string_view to_string(SystemSelection selection);
SweepAxis parse_sweep_axis(std::string_view name);
SystemSelection parse_system_selection(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::BankruptcyCost;
  double from = 0.0;
  double to = 0.5;
  int steps = 11;

  std::vector<double> points() const;
};

/// Default ranges: bankruptcy cost [0, 0.5] x 11, correlation [0, 0.9] x 10,
/// mean drop [0.05, 0.5] x 10.
SweepSpec default_sweep(SweepAxis axis);

struct ExperimentConfig {
  CalibrationInputs calibration;
  ShockModel shock;
  double bankruptcy_cost = 0.10;
  std::optional<double> alpha;  // overrides 1 - bankruptcy_cost
  std::optional<double> beta;
  LossDefinition loss_definition = LossDefinition::Additive;
  InjectionMode injection_mode = InjectionMode::ShockExempt;
  std::vector<double> levels{0.01, 0.05, 0.10};
  std::optional<double> threshold;  // defaults to 1% of GDP
  Eigen::Index scenarios = 10'000;
  std::uint64_t seed = 2016;
  SystemSelection system = SystemSelection::Both;
  std::optional<SweepSpec> sweep;
  unsigned threads = 1;

  ClearingParams clearing_params() const;
  double threshold_for(const EconomyCalibration& calib) const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Copy with the swept parameter set to `value`.
  ExperimentConfig at(SweepAxis axis, double value) const;
};

/// Parses the lower_snake_case JSON mirror of ExperimentConfig on top of the
/// defaults. Unknown keys and type mismatches are ConfigErrors.
ExperimentConfig config_from_json(const Json& json);
Json config_to_json(const ExperimentConfig& config);

/// One system's minimal injections at every criterion level of a config.
struct SystemInjections {
  SystemKind system;
  FinancialNetwork network;
  std::vector<InjectionResult> results;  // same order as config.levels
};

/// Minimal injections for the selected systems at one parameter point. Both
/// systems consume the same 5-bank scenario set; the monopoly sees the summed
/// shocked assets. Levels are solved tightest first and each answer seeds the
/// next as a known-feasible bound.
std::vector<SystemInjections> evaluate_point(const ExperimentConfig& config);

struct SweepRow {
  SweepAxis axis;
  double axis_value = 0.0;
  SystemKind system;
  double level = 0.0;
  double total_injection = 0.0;
  double achieved_tail_loss = 0.0;
  Eigen::Index scenarios = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd allocation;
};

/// Rows sorted by (axis value, system, level). Requires config.sweep.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
Json sweep_to_json(const ExperimentConfig& config, const std::vector<SweepRow>& rows);
/// Parameters a reader needs to interpret sweep output (κ, fixed axes, ...).
Json run_metadata(const ExperimentConfig& config);

struct Comparison {
  std::vector<double> levels;
  std::optional<SystemInjections> monopoly;
  std::optional<SystemInjections> split;
  /// split total - monopoly total per level, when both systems ran.
  std::vector<double> difference;
};

Comparison compare_systems(const ExperimentConfig& config);
Json comparison_to_json(const ExperimentConfig& config, const Comparison& comparison);

struct MergerCounterexample {
  Eigen::Index scenario = 0;
  double split_loss = 0.0;
  double merged_loss = 0.0;
};

struct MergerReport {
  Eigen::Index scenarios = 0;
  Eigen::Index eligible = 0;  // scenarios with at least one split-system default
  Eigen::Index dominated = 0; // of those, merged loss <= split loss
  std::vector<MergerCounterexample> counterexamples;

  double dominated_fraction() const { return eligible == 0 ? 1.0 : double(dominated) / double(eligible); }
};

/// Compares the split system against the fully merged institution on every
/// scenario of the config's Monte Carlo run, without injections.
MergerReport merger_dominance(const ExperimentConfig& config);

}  // namespace gringotts
