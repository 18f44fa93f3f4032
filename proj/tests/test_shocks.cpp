#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "gringotts/shocks.hpp"
#include "gringotts/special_functions.hpp"

#ifdef GRINGOTTS_HAVE_BOOST_MATH
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#endif

using namespace gringotts;

namespace {

double simpson(double (*f)(double), double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double sum = f(lo) + f(hi);
  for (int k = 1; k < panels; ++k) sum += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double beta_density(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return std::numeric_limits<double>::infinity();
  return std::exp((a - 1) * std::log(x) + (b - 1) * std::log1p(-x) + std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
}

double normal_density(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double bisect(double (*f)(double), double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) < 0) == (f(mid) < 0) ? lo = mid : hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> ranks(std::vector<double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = double(k);
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const ScenarioSet& set, Eigen::Index i, Eigen::Index j) {
  std::vector<double> x(set.scenarios()), y(set.scenarios());
  for (Eigen::Index s = 0; s < set.scenarios(); ++s) {
    x[s] = set.multipliers(s, i);
    y[s] = set.multipliers(s, j);
  }
  return pearson(ranks(x), ranks(y));
}

}  // namespace

TEST_CASE("standard normal CDF") {
  CHECK(standard_normal_cdf(0.0) == 0.5);
  for (double z : {0.1, 0.5, 1.0, 1.96, 3.0, 6.0}) CHECK(standard_normal_cdf(-z) == doctest::Approx(1.0 - standard_normal_cdf(z)).epsilon(1e-14));
  const double oracle = 0.5 + simpson(normal_density, 0.0, 1.96, 2000);
  CHECK(std::abs(standard_normal_cdf(1.96) - oracle) < 1e-12);
  CHECK(std::abs(standard_normal_cdf(1.96) - 0.9750) < 1e-4);
}

TEST_CASE("standard normal inverse") {
  for (double u : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.8, 0.975, 1 - 1e-9}) {
    const double z = standard_normal_inverse_cdf(u);
    CHECK(std::abs(standard_normal_cdf(z) - u) <= 1e-14 + 1e-12 * u);
  }
  CHECK(std::abs(standard_normal_inverse_cdf(0.5)) < 1e-15);
  CHECK_THROWS_AS(standard_normal_inverse_cdf(0.0), DomainError);
  CHECK_THROWS_AS(standard_normal_inverse_cdf(1.0), DomainError);
  CHECK_THROWS_AS(standard_normal_inverse_cdf(-0.2), DomainError);
}

TEST_CASE("beta quantiles") {
  CHECK(beta_inverse_cdf(0.3, 1, 1) == doctest::Approx(0.3).epsilon(1e-12));
  for (double a : {0.5, 1.0, 2.0, 7.3, 30.0}) CHECK(std::abs(beta_inverse_cdf(0.5, a, a) - 0.5) < 1e-12);
  // Beta(2,2) CDF is 3x^2 - 2x^3.
  const double root = bisect([](double x) { return 3 * x * x - 2 * x * x * x - 0.25; }, 0.0, 0.5);
  CHECK(std::abs(root - 0.3264) < 1e-4);
  CHECK(std::abs(beta_inverse_cdf(0.25, 2, 2) - root) < 1e-12);
  CHECK(beta_inverse_cdf(0.0, 3, 4) == 0.0);
  CHECK(beta_inverse_cdf(1.0, 3, 4) == 1.0);
  CHECK_THROWS_AS(beta_inverse_cdf(1.2, 1, 1), DomainError);
  CHECK_THROWS_AS(beta_inverse_cdf(0.5, 0, 1), DomainError);
  CHECK_THROWS_AS(beta_cdf(0.5, 1, -1), DomainError);
}

TEST_CASE("property: beta quantile inverts the CDF on the parameter grid") {
  const double grid[] = {0.5, 1, 2, 5, 10};
  for (double a : grid)
    for (double b : grid)
      for (int k = 0; k <= 40; ++k) {
        const double x = k / 40.0;
        const double u = beta_cdf(x, a, b);
        const double back = beta_inverse_cdf(u, a, b);
        // Rounding u moves x by about ulp(u) / density. Where the density is
        // tiny no double quantile can recover x; there the returned point must
        // still reproduce u.
        if (beta_density(x, a, b) >= 1e-4) {
          CHECK(std::abs(back - x) < 1e-10);
        } else {
          CHECK(std::abs(beta_cdf(back, a, b) - u) <= 2e-16);
        }
      }
}

#ifdef GRINGOTTS_HAVE_BOOST_MATH
TEST_CASE("special functions agree with Boost.Math") {
  const double grid[] = {0.5, 1, 2, 5, 7.3, 10};
  for (double a : grid)
    for (double b : grid)
      for (double x : {0.001, 0.05, 0.3, 0.5, 0.77, 0.999}) {
        CHECK(std::abs(beta_cdf(x, a, b) - boost::math::ibeta(a, b, x)) < 1e-13);
        const double mine = beta_inverse_cdf(x, a, b);
        double reference = std::nan("");
        try {
          reference = boost::math::ibeta_inv(a, b, x);
        } catch (const std::exception&) {
          // Boost's own Newton solver gives up on a few flat cases.
        }
        if (std::isnan(reference)) {
          CHECK(std::abs(boost::math::ibeta(a, b, mine) - x) < 1e-13);
        } else {
          CHECK(std::abs(mine - reference) < 1e-12);
        }
      }
  const boost::math::normal_distribution<double> normal;
  for (double z : {-8.0, -3.0, -1.0, 0.3, 2.5, 7.0})
    CHECK(std::abs(standard_normal_cdf(z) - boost::math::cdf(normal, z)) < 1e-15);
  for (double u : {1e-10, 0.001, 0.3, 0.99})
    CHECK(std::abs(standard_normal_inverse_cdf(u) - boost::math::quantile(normal, u)) < 1e-12 * std::max(1.0, std::abs(boost::math::quantile(normal, u))));
}
#endif

TEST_CASE("shock model parameters") {
  const ShockModel model;
  CHECK(model.shape_a() == doctest::Approx(7.3));
  CHECK(model.shape_b() == doctest::Approx(2.7));
  CHECK(!model.degenerate());
  ShockModel bad;
  bad.correlation = 1.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = model;
  bad.concentration = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = model;
  bad.mean_drop = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("counter stream") {
  CHECK(counter_hash(1, 2, 3) == counter_hash(1, 2, 3));
  CHECK(counter_hash(1, 2, 3) != counter_hash(1, 3, 2));
  CHECK(counter_hash(1, 2, 3) != counter_hash(2, 2, 3));
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const double u = counter_uniform(9, s, kCommonFactorStream);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("comonotone and degenerate limits") {
  ShockModel model;
  model.correlation = 1.0;
  const auto set = sample_scenarios(model, 5, 200, 1);
  for (Eigen::Index s = 0; s < set.scenarios(); ++s)
    for (Eigen::Index i = 1; i < 5; ++i) CHECK(set.multipliers(s, i) == set.multipliers(s, 0));

  ShockModel none;
  none.mean_drop = 0.0;
  CHECK(none.degenerate());
  const auto flat = sample_scenarios(none, 5, 100, 1);
  CHECK((flat.multipliers.array() == 1.0).all());
}

TEST_CASE("sampler marginals match the beta moments") {
  const ShockModel model{0.27, 10.0, 0.0};
  const Eigen::Index n = 100'000;
  const auto set = sample_scenarios(model, 3, n, 42);
  CHECK((set.multipliers.array() >= 0.0).all());
  CHECK((set.multipliers.array() <= 1.0).all());
  const double a = model.shape_a(), b = model.shape_b();
  const double mean = a / (a + b);
  const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
  for (Eigen::Index i = 0; i < 3; ++i) {
    const auto col = set.multipliers.col(i);
    const double m = col.mean();
    const double v = (col.array() - m).square().sum() / double(n - 1);
    CHECK(std::abs(m - 0.73) < 0.005);
    CHECK(std::abs(m - mean) < 3.0 * std::sqrt(var / n));
    // Var of the sample variance is about (μ4 - σ^4)/n; 5% is well beyond 3 SE here.
    CHECK(std::abs(v - var) / var < 0.05);
  }
}

TEST_CASE("sampler dependence grows with correlation") {
  const Eigen::Index n = 100'000;
  double previous = -1.0;
  for (double rho : {0.0, 0.25, 0.5, 0.75}) {
    const auto set = sample_scenarios(ShockModel{0.27, 10.0, rho}, 2, n, 7);
    const double rs = spearman(set, 0, 1);
    if (rho == 0.0) CHECK(std::abs(rs) < 0.01);
    CHECK(rs > previous);
    previous = rs;
  }
}

TEST_CASE("sampling is deterministic and independent of thread count") {
  const ShockModel model;
  const auto one = sample_scenarios(model, 5, 3001, 2016, 1);
  const auto again = sample_scenarios(model, 5, 3001, 2016, 1);
  const auto many = sample_scenarios(model, 5, 3001, 2016, 4);
  CHECK(one.multipliers == again.multipliers);
  CHECK(one.multipliers == many.multipliers);
  CHECK(one.multipliers(1234, 3) == shock_multiplier(model, 2016, 1234, 3));
  const auto other = sample_scenarios(model, 5, 3001, 2017, 1);
  CHECK(one.multipliers != other.multipliers);
  // Scenario s does not depend on how many scenarios were drawn.
  const auto shorter = sample_scenarios(model, 5, 10, 2016, 1);
  CHECK(shorter.multipliers == one.multipliers.topRows(10));
}

TEST_CASE("monopoly assets from split shocks") {
  const auto split = build_split_network(calibration_for_gdp(100.0));
  CHECK(monopoly_assets_from_split(split, Eigen::RowVectorXd::Ones(5)) == doctest::Approx(100.0));
  CHECK(monopoly_assets_from_split(split, Eigen::RowVectorXd::Zero(5)) == 0.0);
  Eigen::RowVectorXd x(5);
  x << 1, 0.5, 0.5, 0.5, 0.5;
  CHECK(monopoly_assets_from_split(split, x) == doctest::Approx(55.5));
  CHECK_THROWS_AS(monopoly_assets_from_split(split, Eigen::RowVectorXd::Ones(4)), DomainError);
}

TEST_CASE("scenario dump") {
  const auto set = sample_scenarios(ShockModel{}, 2, 2, 3);
  std::ostringstream out;
  write_scenarios_csv(out, set);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "scenario,bank,multiplier");
  std::getline(in, line);
  CHECK(line.rfind("0,0,", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("0,1,", 0) == 0);
  std::getline(in, line);
  CHECK(line.rfind("1,0,", 0) == 0);
  CHECK(std::stod(line.substr(4)) == set.multipliers(1, 0));
}
