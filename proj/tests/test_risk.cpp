#include "doctest.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gringotts/risk.hpp"
#include "support/random_networks.hpp"

using namespace gringotts;

namespace {

ScenarioSet constant_scenarios(Eigen::Index scenarios, Eigen::Index banks, double multiplier) {
  ScenarioSet set;
  set.multipliers = RowMatrix::Constant(scenarios, banks, multiplier);
  return set;
}

// Monopoly-shaped bank standing alone: assets `e`, owes society `owed`.
FinancialNetwork standalone_banks(Eigen::Index n, double e, double owed) {
  FinancialNetwork net;
  for (Eigen::Index i = 0; i < n; ++i) net.banks.push_back("g" + std::to_string(i));
  net.external_assets = Eigen::VectorXd::Constant(n, e);
  net.liabilities = Eigen::MatrixXd::Zero(n, n + 1);
  net.liabilities.col(n).setConstant(owed);
  return net;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("expected shortfall on constructed samples") {
  std::vector<double> one_to_hundred(100);
  std::iota(one_to_hundred.begin(), one_to_hundred.end(), 1.0);
  CHECK(expected_shortfall(one_to_hundred, 0.05) == 98.0);

  std::vector<double> zero_to_99(100);
  std::iota(zero_to_99.begin(), zero_to_99.end(), 0.0);
  // (90 + ... + 99) / 10
  CHECK(expected_shortfall(zero_to_99, 0.10) == 94.5);

  const std::vector<double> flat(37, 4.25);
  for (double q : {0.01, 0.3, 0.99}) CHECK(expected_shortfall(flat, q) == 4.25);

  CHECK(tail_count(100, 0.07) == 7);
  CHECK(tail_count(10'000, 0.01) == 100);
  CHECK(tail_count(10, 0.01) == 1);
  CHECK_THROWS_AS(expected_shortfall(std::vector<double>{}, 0.1), DomainError);
  CHECK_THROWS_AS(expected_shortfall(flat, 0.0), DomainError);
  CHECK_THROWS_AS(expected_shortfall(flat, 1.0), DomainError);
}

TEST_CASE("property: ES is monotone in the level and bracketed by mean and max") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 500);
  std::exponential_distribution<double> loss(1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> sample(size(rng));
    for (auto& x : sample) x = loss(rng);
    const double e1 = expected_shortfall(sample, 0.01);
    const double e5 = expected_shortfall(sample, 0.05);
    const double e10 = expected_shortfall(sample, 0.10);
    CHECK(e1 >= e5);
    CHECK(e5 >= e10);
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / double(sample.size());
    CHECK(e10 >= mean - 1e-12);
    CHECK(e1 <= *std::max_element(sample.begin(), sample.end()));
  }
}

TEST_CASE("loss distribution") {
  const auto calib = default_calibration();
  const auto mono = build_monopoly_network(calib);
  const auto split = build_split_network(calib);
  const ClearingParams params = ClearingParams::from_bankruptcy_cost(0.10);

  const auto shocked = shocked_assets(mono, constant_scenarios(20, 1, 0.3));
  const auto losses = loss_distribution(mono, shocked, params, Eigen::VectorXd::Zero(1));
  for (double l : as_vector(losses)) CHECK(std::abs(l - 56'250'000.0) < 0.01);

  const auto rescued = loss_distribution(mono, shocked, params, Eigen::VectorXd::Constant(1, 0.6 * calib.gdp_galleons));
  CHECK(rescued.isZero());

  const auto calm = constant_scenarios(5, 5, 1.0);
  CHECK(loss_distribution(mono, merged_shocked_assets(split, calm), params, Eigen::VectorXd::Zero(1)).isZero());
  // The central bank cannot cover its 20% obligations from 11% external plus
  // 6% receivables, even unshocked; it pays 0.9 * 17%.
  const auto split_calm = loss_distribution(split, shocked_assets(split, calm), params, Eigen::VectorXd::Zero(5));
  for (double l : as_vector(split_calm)) CHECK(l == doctest::Approx(0.047 * calib.gdp_galleons));
  Eigen::VectorXd bailout = Eigen::VectorXd::Zero(5);
  bailout(0) = 0.03 * calib.gdp_galleons;
  CHECK(loss_distribution(split, shocked_assets(split, calm), params, bailout).isZero());

  const auto sampled = sample_scenarios(ShockModel{}, 5, 500, 1);
  const auto full = relative_liabilities(split).total;
  CHECK(loss_distribution(split, shocked_assets(split, sampled), params, full).isZero());

  CHECK_THROWS_AS(loss_distribution(mono, shocked, params, Eigen::VectorXd::Zero(2)), DomainError);
  CHECK_THROWS_AS(loss_distribution(mono, shocked, params, Eigen::VectorXd::Constant(1, -1.0)), DomainError);
}

TEST_CASE("loss distribution is independent of thread count") {
  const auto split = build_split_network(default_calibration());
  const auto assets = shocked_assets(split, sample_scenarios(ShockModel{}, 5, 2000, 9));
  const auto one = loss_distribution(split, assets, ClearingParams{}, Eigen::VectorXd::Zero(5), InjectionMode::ShockExempt, 1);
  const auto four = loss_distribution(split, assets, ClearingParams{}, Eigen::VectorXd::Zero(5), InjectionMode::ShockExempt, 4);
  CHECK(one == four);
}

TEST_CASE("scalar injection for the deterministic monopoly shock") {
  const auto calib = default_calibration();
  const auto mono = build_monopoly_network(calib);
  const auto assets = shocked_assets(mono, constant_scenarios(1, 1, 0.3));
  const ClearingParams params = ClearingParams::from_bankruptcy_cost(0.10);
  const InjectionCriterion criterion{0.01, calib.loss_threshold_galleons};
  OptimizerOptions options;
  options.scale = calib.gdp_galleons;

  // Oracle: scan k on a 100 G grid for the first point whose loss meets θ.
  const double owed = mono.liabilities(0, 1);
  double grid_answer = std::numeric_limits<double>::infinity();
  for (double k = 0.0; k <= owed; k += 100.0) {
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, assets.assets(0, 0) + k);
    if (clear_fictitious_default(mono, a, params).societal_loss <= criterion.threshold) {
      grid_answer = k;
      break;
    }
  }
  CHECK(std::abs(grid_answer - 51'136'363.64) <= 100.0);

  const auto result = minimal_injection_scalar(mono, assets, params, criterion, options);
  CHECK(std::abs(result.total - 51'136'363.64) <= 200.0);
  CHECK(std::abs(result.total - grid_answer) <= 200.0);
  CHECK(result.allocation(0) == result.total);
  CHECK(result.achieved_tail_loss <= criterion.threshold + 1e-6 * calib.gdp_galleons);
  CHECK(result.infeasible_budget < result.total);

  // Injected capital that is itself hit by the 0.3 multiplier must be 1/0.3 as large.
  options.mode = InjectionMode::ShockExposed;
  const auto exposed = minimal_injection_scalar(mono, assets, params, criterion, options);
  CHECK(std::abs(exposed.total - calib.gdp_galleons) <= 1e-5 * calib.gdp_galleons);
}

TEST_CASE("scalar injection trivial cases") {
  const auto calib = default_calibration();
  const auto mono = build_monopoly_network(calib);
  const ClearingParams params;
  OptimizerOptions options;
  options.scale = calib.gdp_galleons;
  const auto calm = shocked_assets(mono, constant_scenarios(100, 1, 1.0));
  CHECK(minimal_injection_scalar(mono, calm, params, {0.01, calib.loss_threshold_galleons}, options).total == 0.0);

  const auto hit = shocked_assets(mono, constant_scenarios(100, 1, 0.3));
  const InjectionCriterion vacuous{0.01, std::numeric_limits<double>::infinity()};
  CHECK(minimal_injection_scalar(mono, hit, params, vacuous, options).total == 0.0);

  const auto split = build_split_network(calib);
  CHECK_THROWS_AS(minimal_injection_scalar(split, shocked_assets(split, constant_scenarios(1, 5, 1.0)), params,
                                           {0.01, 0.0}, options),
                  DomainError);
}

TEST_CASE("multi-bank injection reduces to the scalar search for one bank") {
  const auto calib = default_calibration();
  const auto split = build_split_network(calib);
  const auto mono = build_monopoly_network(calib);
  const auto assets = merged_shocked_assets(split, sample_scenarios(ShockModel{}, 5, 2000, 4));
  const ClearingParams params;
  OptimizerOptions options;
  options.scale = calib.gdp_galleons;
  for (double q : {0.01, 0.05, 0.10}) {
    const InjectionCriterion criterion{q, calib.loss_threshold_galleons};
    const auto scalar = minimal_injection_scalar(mono, assets, params, criterion, options);
    const auto general = minimal_injection(mono, assets, params, criterion, options);
    CHECK(std::abs(scalar.total - general.total) <= 2e-6 * calib.gdp_galleons);
    CHECK(scalar.total > 0.0);
  }
}

TEST_CASE("no shock means no injection") {
  const auto calib = default_calibration();
  const auto mono = build_monopoly_network(calib);
  OptimizerOptions options;
  options.scale = calib.gdp_galleons;
  const auto result = minimal_injection(mono, shocked_assets(mono, constant_scenarios(50, 1, 1.0)), ClearingParams{},
                                        {0.05, calib.loss_threshold_galleons}, options);
  CHECK(result.total == 0.0);
  CHECK(result.allocation.isZero());
}

TEST_CASE("separable two-bank problem doubles the scalar answer") {
  const auto calib = default_calibration();
  const double g = calib.gdp_galleons;
  const auto one = standalone_banks(1, g, 0.6 * g);
  const auto two = standalone_banks(2, g, 0.6 * g);
  const ClearingParams params;
  const InjectionCriterion criterion{0.01, calib.loss_threshold_galleons};
  OptimizerOptions options;
  options.scale = g;

  const auto alone = minimal_injection_scalar(one, shocked_assets(one, constant_scenarios(1, 1, 0.3)), params,
                                              criterion, options);
  const auto pair = minimal_injection(two, shocked_assets(two, constant_scenarios(1, 2, 0.3)), params, criterion,
                                      options);
  CHECK(std::abs(pair.total - 2.0 * alone.total) <= 400.0);
  CHECK(std::abs(pair.allocation(0) - pair.allocation(1)) <= 1e-4 * pair.total);
  CHECK(pair.allocation.sum() == doctest::Approx(pair.total));
}

TEST_CASE("property: optimizer answers are feasible and near-minimal") {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> level(0.02, 0.2);
  for (int trial = 0; trial < 12; ++trial) {
    auto net = testing::random_network(rng, 4);
    const auto set = sample_scenarios(ShockModel{0.3, 8.0, 0.4}, net.size(), 400, 1000 + trial);
    const auto assets = shocked_assets(net, set);
    const ClearingParams params;
    const double scale = relative_liabilities(net).total.sum();
    const InjectionCriterion criterion{level(rng), 0.01 * scale};
    OptimizerOptions options;
    options.scale = scale;
    const InjectionProblem problem(net, assets, params, criterion, options);
    const auto result = problem.solve();

    CHECK(result.allocation.minCoeff() >= 0.0);
    CHECK(result.allocation.sum() == doctest::Approx(result.total).epsilon(1e-12));
    const auto losses = loss_distribution(net, assets, params, result.allocation);
    const double es = expected_shortfall(as_vector(losses), criterion.level);
    CHECK(es <= criterion.threshold + 1e-6 * scale);
    CHECK(es == doctest::Approx(result.achieved_tail_loss).epsilon(1e-9).scale(scale));

    if (result.total > 1e-4 * scale) {
      CHECK_FALSE(problem.search_budget(result.total - 1e-4 * scale).feasible);
    }

    // Adding capital anywhere keeps the allocation feasible.
    Eigen::VectorXd more = result.allocation;
    more(trial % net.size()) += 0.05 * scale;
    CHECK(expected_shortfall(as_vector(loss_distribution(net, assets, params, more)), criterion.level) <=
          criterion.threshold + 1e-6 * scale);
  }
}

TEST_CASE("a known feasible allocation bounds the search") {
  const auto calib = default_calibration();
  const auto split = build_split_network(calib);
  const auto assets = shocked_assets(split, sample_scenarios(ShockModel{}, 5, 1000, 12));
  const InjectionCriterion tight{0.01, calib.loss_threshold_galleons};
  const InjectionCriterion loose{0.10, calib.loss_threshold_galleons};
  OptimizerOptions options;
  options.scale = calib.gdp_galleons;
  const auto first = minimal_injection(split, assets, ClearingParams{}, tight, options);
  options.known_feasible = first.allocation;
  const auto second = minimal_injection(split, assets, ClearingParams{}, loose, options);
  CHECK(second.total <= first.total);
  CHECK(first.total > 0.0);
}
