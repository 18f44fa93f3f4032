#include "gringotts/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "gringotts/errors.hpp"
#include "gringotts/parallel.hpp"

namespace gringotts {

std::size_t tail_count(std::size_t n, double q) {
  if (n == 0) throw DomainError("tail_count: empty sample");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("tail_count: level must lie in (0,1)");
  // Guard against q·N landing a hair above an integer (0.07 * 100 = 7.000000000000001).
  const auto m = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(m, 1, n);
}

double expected_shortfall(std::span<const double> losses, double q) {
  if (losses.empty()) throw DomainError("expected_shortfall: empty loss sample");
  const auto m = tail_count(losses.size(), q);
  std::vector<double> sorted(losses.begin(), losses.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m), sorted.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += sorted[i];
  return sum / static_cast<double>(m);
}

void InjectionCriterion::validate() const {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("criterion: level must lie in (0,1)");
  if (!(threshold >= 0.0)) throw DomainError("criterion: threshold must be non-negative");
}

AssetScenarios shocked_assets(const FinancialNetwork& net, const ScenarioSet& scenarios) {
  if (scenarios.banks() != net.size()) throw DomainError("shocked_assets: scenario width does not match bank count");
  AssetScenarios out;
  out.exposure = scenarios.multipliers;
  out.assets = scenarios.multipliers * net.external_assets.asDiagonal();
  return out;
}

AssetScenarios merged_shocked_assets(const FinancialNetwork& split, const ScenarioSet& scenarios) {
  if (scenarios.banks() != split.size())
    throw DomainError("merged_shocked_assets: scenario width does not match bank count");
  const double total = split.external_assets.sum();
  AssetScenarios out;
  out.assets.resize(scenarios.scenarios(), 1);
  out.exposure.resize(scenarios.scenarios(), 1);
  for (Eigen::Index s = 0; s < scenarios.scenarios(); ++s) {
    out.assets(s, 0) = monopoly_assets_from_split(split, scenarios.multipliers.row(s));
    out.exposure(s, 0) = total > 0.0 ? out.assets(s, 0) / total : 1.0;
  }
  return out;
}

namespace {

void check_injection(const FinancialNetwork& net, const Eigen::VectorXd& injection) {
  if (injection.size() != net.size()) throw DomainError("injection length does not match bank count");
  if (!injection.allFinite() || (injection.array() < 0.0).any())
    throw DomainError("injection entries must be finite and non-negative");
}

void add_cash(const AssetScenarios& scenarios, Eigen::Index s, const Eigen::VectorXd& injection, InjectionMode mode,
              Eigen::VectorXd& out) {
  out = scenarios.assets.row(s).transpose();
  if (mode == InjectionMode::ShockExempt)
    out += injection;
  else
    out += injection.cwiseProduct(scenarios.exposure.row(s).transpose());
}

}  // namespace

Eigen::VectorXd loss_distribution(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                  const ClearingParams& params, const Eigen::VectorXd& injection, InjectionMode mode,
                                  unsigned threads) {
  check_injection(net, injection);
  if (scenarios.banks() != net.size()) throw DomainError("loss_distribution: scenario width does not match bank count");
  const ClearingSystem<double> system(net, params);
  Eigen::VectorXd losses(scenarios.scenarios());
  const auto n = static_cast<std::size_t>(scenarios.scenarios());
  threads = std::max(1u, threads);
  const std::size_t block = (n + threads - 1) / threads;
  parallel_for(threads, threads, [&](std::size_t w) {
    ClearingSystem<double>::Workspace ws;
    Eigen::VectorXd assets;
    for (std::size_t s = w * block; s < std::min(n, (w + 1) * block); ++s) {
      add_cash(scenarios, static_cast<Eigen::Index>(s), injection, mode, assets);
      try {
        losses(static_cast<Eigen::Index>(s)) = system.loss(assets, ws);
      } catch (const SolverError& e) {
        throw SolverError("scenario " + std::to_string(s) + ": " + e.what(), e.last_iterate());
      }
    }
  });
  return losses;
}

InjectionProblem::InjectionProblem(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                   const ClearingParams& params, const InjectionCriterion& criterion,
                                   OptimizerOptions options)
    : net_(net), scenarios_(scenarios), system_(net, params), criterion_(criterion), options_(std::move(options)) {
  criterion_.validate();
  if (scenarios.banks() != net.size()) throw DomainError("injection: scenario width does not match bank count");
  if (scenarios.scenarios() == 0) throw DomainError("injection: empty scenario set");
  if (options_.known_feasible) check_injection(net, *options_.known_feasible);
  tail_ = tail_count(static_cast<std::size_t>(scenarios.scenarios()), criterion_.level);
  scale_ = options_.scale > 0.0 ? options_.scale : std::max(1.0, system_.total_obligations().sum());

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(net.size());
  const Eigen::VectorXd base = loss_distribution(net, scenarios, params, zero, options_.mode);
  for (Eigen::Index s = 0; s < base.size(); ++s)
    if (base(s) > 0.0) active_.push_back(s);
  // Worst scenarios first so that hopeless candidates are rejected early.
  std::stable_sort(active_.begin(), active_.end(), [&](Eigen::Index a, Eigen::Index b) { return base(a) > base(b); });

  const Eigen::VectorXd full_receipts = system_.receipts() * system_.total_obligations();
  standalone_shortfall_ = Eigen::VectorXd::Zero(net.size());
  for (auto s : active_)
    standalone_shortfall_ +=
        (system_.total_obligations() - scenarios.assets.row(s).transpose() - full_receipts).cwiseMax(0.0);
}

InjectionProblem::Score InjectionProblem::score(const Eigen::VectorXd& k, double abort_above) const {
  ++evaluations_;
  Score out;
  const double m = static_cast<double>(tail_);
  const bool use_heap = active_.size() > tail_;
  heap_.clear();
  double top = 0.0;
  for (auto s : active_) {
    add_cash(scenarios_, s, k, options_.mode, cash_);
    const double loss = system_.loss(cash_, workspace_);
    out.sum += loss;
    if (!use_heap) {
      top += loss;
    } else if (heap_.size() < tail_) {
      heap_.push_back(loss);
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
      top += loss;
    } else if (loss > heap_.front()) {
      top += loss - heap_.front();
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
      heap_.back() = loss;
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }
    // The running top-m sum only grows, so it already bounds the final ES.
    if (top / m > abort_above) {
      out.es = top / m;
      out.complete = false;
      return out;
    }
  }
  if (use_heap) {
    // Recompute in a fixed order so the value does not depend on heap layout.
    std::sort(heap_.begin(), heap_.end(), std::greater<>());
    top = std::accumulate(heap_.begin(), heap_.end(), 0.0);
  }
  out.es = top / m;
  return out;
}

double InjectionProblem::tail_loss(const Eigen::VectorXd& k) const {
  check_injection(net_, k);
  return score(k, std::numeric_limits<double>::infinity()).es;
}

bool InjectionProblem::feasible(double tail_loss) const {
  return tail_loss <= criterion_.threshold + options_.feasibility_slack * scale_;
}

bool InjectionProblem::better(const Score& candidate, const Score& incumbent) const {
  if (!candidate.complete) return false;
  const double eps = 1e-12 * scale_;
  if (candidate.es < incumbent.es - eps) return true;
  return candidate.es <= incumbent.es + eps && candidate.sum < incumbent.sum - eps;
}

BudgetSearch InjectionProblem::pattern_search(Eigen::VectorXd k, double budget) const {
  const auto n = net_.size();
  Score best = score(k, std::numeric_limits<double>::infinity());
  if (feasible(best.es) || n == 1 || budget <= 0.0) return {k, best.es, feasible(best.es)};

  const double eps = 1e-12 * scale_;
  double step = 0.25 * budget;
  const double min_step = options_.resolution * budget;
  Eigen::VectorXd candidate(n);
  while (step >= min_step) {
    bool improved = false;
    for (Eigen::Index to = 0; to < n; ++to) {
      for (Eigen::Index from = 0; from < n; ++from) {
        if (from == to || k(from) <= 0.0) continue;
        const double move = std::min(step, k(from));
        candidate = k;
        candidate(to) += move;
        candidate(from) -= move;
        const Score trial = score(candidate, best.es + eps);
        if (!better(trial, best)) continue;
        k = candidate;
        best = trial;
        improved = true;
        if (feasible(best.es)) return {k, best.es, true};
      }
    }
    if (!improved) step *= 0.5;
  }
  return {k, best.es, false};
}

BudgetSearch InjectionProblem::search_budget(double budget) const { return search_budget(budget, nullptr, true); }

std::vector<Eigen::VectorXd> InjectionProblem::starts(double budget, const Eigen::VectorXd* hint) const {
  const auto n = net_.size();
  const Eigen::VectorXd& totals = system_.total_obligations();
  std::vector<Eigen::VectorXd> out;
  const double total_sum = totals.sum();
  out.push_back(total_sum > 0.0 ? Eigen::VectorXd(totals * (budget / total_sum))
                                : Eigen::VectorXd::Constant(n, budget / static_cast<double>(n)));
  const double shortfall_sum = standalone_shortfall_.sum();
  if (shortfall_sum > 0.0) out.push_back(standalone_shortfall_ * (budget / shortfall_sum));
  if (options_.known_feasible && options_.known_feasible->sum() > 0.0)
    out.push_back(*options_.known_feasible * (budget / options_.known_feasible->sum()));
  if (hint && hint->sum() > 0.0) out.push_back(*hint * (budget / hint->sum()));
  return out;
}

BudgetSearch InjectionProblem::search_budget(double budget, const Eigen::VectorXd* hint, bool every_start) const {
  const auto candidates = starts(budget, hint);
  std::vector<std::pair<Score, std::size_t>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Score sc = score(candidates[i], std::numeric_limits<double>::infinity());
    if (feasible(sc.es)) return {candidates[i], sc.es, true};
    ranked.emplace_back(sc, i);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](const auto& a, const auto& b) { return better(a.first, b.first); });
  if (!every_start) ranked.resize(1);

  BudgetSearch best;
  for (const auto& [sc, i] : ranked) {
    auto found = pattern_search(candidates[i], budget);
    if (found.feasible) return found;
    if (best.allocation.size() == 0 || found.tail_loss < best.tail_loss) best = std::move(found);
  }
  return best;
}

InjectionResult InjectionProblem::solve() const {
  const auto n = net_.size();
  InjectionResult result;
  result.criterion = criterion_;
  result.scenario_count = scenarios_.scenarios();

  auto finish = [&](Eigen::VectorXd allocation, double infeasible_budget) {
    result.allocation = std::move(allocation);
    result.total = result.allocation.sum();
    result.achieved_tail_loss = score(result.allocation, std::numeric_limits<double>::infinity()).es;
    result.infeasible_budget = infeasible_budget;
    result.evaluations = evaluations_;
    return result;
  };

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  if (feasible(score(zero, std::numeric_limits<double>::infinity()).es)) return finish(zero, 0.0);

  // Upper end of the bracket: a known feasible allocation, or full payment of
  // every obligation in cash (solvent in every scenario when shock-exempt).
  Eigen::VectorXd upper = options_.known_feasible.value_or(system_.total_obligations());
  int doublings = 0;
  while (!feasible(score(upper, std::numeric_limits<double>::infinity()).es)) {
    if (++doublings > 60) throw SolverError("injection: no feasible allocation found");
    upper = upper.cwiseMax(system_.total_obligations()) * 2.0;
  }

  // Bisection with the single-start search, then a certificate: a search
  // from every start just below the answer. If that search succeeds, the
  // answer drops to it and bisection resumes from zero.
  double lo = 0.0;
  double hi = upper.sum();
  const double width = options_.bisection_tolerance * scale_;
  const double gap = options_.certificate_gap * scale_;
  for (;;) {
    while (hi - lo > width) {
      const double mid = 0.5 * (lo + hi);
      auto found = search_budget(mid, &upper, false);
      if (found.feasible) {
        hi = mid;
        upper = std::move(found.allocation);
      } else {
        lo = mid;
      }
    }
    const double probe = hi - gap;
    if (probe <= 0.0) break;
    auto found = search_budget(probe, &upper, true);
    if (!found.feasible) break;
    hi = probe;
    upper = std::move(found.allocation);
    lo = 0.0;
  }
  return finish(upper, lo);
}

InjectionResult minimal_injection_scalar(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                         const ClearingParams& params, const InjectionCriterion& criterion,
                                         const OptimizerOptions& options) {
  if (net.size() != 1) throw DomainError("minimal_injection_scalar: network must have exactly one bank");
  return InjectionProblem(net, scenarios, params, criterion, options).solve();
}

InjectionResult minimal_injection(const FinancialNetwork& net, const AssetScenarios& scenarios,
                                  const ClearingParams& params, const InjectionCriterion& criterion,
                                  const OptimizerOptions& options) {
  return InjectionProblem(net, scenarios, params, criterion, options).solve();
}

}  // namespace gringotts
