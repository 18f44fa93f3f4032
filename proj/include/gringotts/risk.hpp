#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "gringotts/clearing.hpp"
#include "gringotts/network.hpp"
#include "gringotts/shocks.hpp"

namespace gringotts {

/// Number of scenarios in the worst-q tail of N: ⌈qN⌉, at least one.
std::size_t tail_count(std::size_t n, double q);

/// Mean of the ⌈qN⌉ largest losses.
double expected_shortfall(std::span<const double> losses, double q);

/// Accept an allocation when ES_q of the loss sample is at most `threshold`.
struct InjectionCriterion {
  double level = 0.01;
  double threshold = 0.0;

  void validate() const;
};

/// Where injected capital sits: as riskless cash added after the shock, or
/// inside the shocked portfolio.
enum class InjectionMode { ShockExempt, ShockExposed };

/// Shocked external assets, scenarios x banks, for one network.
struct AssetScenarios {
  RowMatrix assets;
  RowMatrix exposure;  // multiplier on injected capital under ShockExposed

  Eigen::Index scenarios() const { return assets.rows(); }
  Eigen::Index banks() const { return assets.cols(); }
};

/// e(i)·X(s,i) for a network whose banks line up with the scenario columns.
AssetScenarios shocked_assets(const FinancialNetwork& net, const ScenarioSet& scenarios);

/// Single-column assets of the fully merged institution: the split system's
/// realized shocks summed bank by bank.
AssetScenarios merged_shocked_assets(const FinancialNetwork& split, const ScenarioSet& scenarios);

/// Societal loss per scenario with capital `injection` added to each bank.
Eigen::VectorXd loss_distribution(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                  const ClearingParams& params, const Eigen::VectorXd& injection,
                                  InjectionMode mode = InjectionMode::ShockExempt, unsigned threads = 1);

struct InjectionResult {
  Eigen::VectorXd allocation;
  double total = 0.0;
  double achieved_tail_loss = 0.0;
  InjectionCriterion criterion;
  Eigen::Index scenario_count = 0;
  /// Largest budget for which every allocation tried was infeasible.
  double infeasible_budget = 0.0;
  long evaluations = 0;
};

struct OptimizerOptions {
  /// Reference size for absolute tolerances, normally GDP. Zero means Σp̄.
  double scale = 0.0;
  InjectionMode mode = InjectionMode::ShockExempt;
  double bisection_tolerance = 1e-6;  // bracket width, fraction of scale
  double feasibility_slack = 1e-6;    // absolute slack on ES vs threshold, fraction of scale
  double resolution = 1e-4;           // smallest pattern step, fraction of budget
  double certificate_gap = 1e-4;      // answer minus this (fraction of scale) must be infeasible
  /// An allocation already known to be feasible; bounds the budget search
  /// from above and seeds the simplex search.
  std::optional<Eigen::VectorXd> known_feasible;
};

/// Outcome of searching the simplex {k >= 0, Σk = budget}.
struct BudgetSearch {
  Eigen::VectorXd allocation;
  double tail_loss = 0.0;
  bool feasible = false;
};

/// Minimal-injection problem for one network, scenario set and criterion.
///
/// Scenarios with zero loss before any injection are dropped up front:
/// losses are non-increasing in every bank's assets, so they stay at zero
/// for all k >= 0 and only pad the tail average.
class InjectionProblem {
 public:
  InjectionProblem(const FinancialNetwork& net, const AssetScenarios& scenarios, const ClearingParams& params,
                   const InjectionCriterion& criterion, OptimizerOptions options = {});

  /// ES_q of the loss sample under allocation k.
  double tail_loss(const Eigen::VectorXd& k) const;
  bool feasible(double tail_loss) const;

  /// Coordinate pattern search over the budget simplex. Candidate starts are
  /// the p̄-proportional and standalone-shortfall-proportional allocations
  /// (plus the known-feasible one, rescaled). The search runs from each start
  /// in order of its score and stops at the first feasible allocation.
  BudgetSearch search_budget(double budget) const;

  /// Bisection on the total budget. Each step searches from the best start
  /// only; the answer is then certified by a search from every start at
  /// answer - certificate_gap, which must come up infeasible.
  InjectionResult solve() const;

  long evaluations() const { return evaluations_; }
  Eigen::Index active_scenarios() const { return static_cast<Eigen::Index>(active_.size()); }

 private:
  struct Score {
    double es = 0.0;
    double sum = 0.0;
    bool complete = true;
  };

  Score score(const Eigen::VectorXd& k, double abort_above) const;
  bool better(const Score& candidate, const Score& incumbent) const;
  BudgetSearch pattern_search(Eigen::VectorXd start, double budget) const;
  std::vector<Eigen::VectorXd> starts(double budget, const Eigen::VectorXd* hint) const;
  BudgetSearch search_budget(double budget, const Eigen::VectorXd* hint, bool every_start) const;

  const FinancialNetwork& net_;
  const AssetScenarios& scenarios_;
  ClearingSystem<double> system_;
  InjectionCriterion criterion_;
  OptimizerOptions options_;
  std::size_t tail_ = 1;
  std::vector<Eigen::Index> active_;
  Eigen::VectorXd standalone_shortfall_;
  double scale_ = 1.0;
  mutable ClearingSystem<double>::Workspace workspace_;
  mutable Eigen::VectorXd cash_;
  mutable std::vector<double> heap_;
  mutable long evaluations_ = 0;
};

/// Bisection for a single-bank network.
InjectionResult minimal_injection_scalar(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                         const ClearingParams& params, const InjectionCriterion& criterion,
                                         const OptimizerOptions& options = {});

/// Minimal total injection over any number of banks.
InjectionResult minimal_injection(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                  const ClearingParams& params, const InjectionCriterion& criterion,
                                  const OptimizerOptions& options = {});

}  // namespace gringotts
