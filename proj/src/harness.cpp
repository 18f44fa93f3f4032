#include "gringotts/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "gringotts/errors.hpp"
#include "gringotts/format.hpp"
#include "gringotts/parallel.hpp"

namespace gringotts {

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::BankruptcyCost: return "bankruptcy-cost";
    case SweepAxis::Correlation: return "correlation";
    case SweepAxis::ShockMean: return "shock-mean";
  }
  return "?";
}

std::string_view to_string(SystemKind kind) { return kind == SystemKind::Monopoly ? "monopoly" : "split"; }

std::string_view to_string(SystemSelection selection) {
  switch (selection) {
    case SystemSelection::Monopoly: return "monopoly";
    case SystemSelection::Split: return "split";
    case SystemSelection::Both: return "both";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "bankruptcy-cost") return SweepAxis::BankruptcyCost;
  if (name == "correlation") return SweepAxis::Correlation;
  if (name == "shock-mean") return SweepAxis::ShockMean;
  throw DomainError("unknown sweep axis '" + std::string(name) + "' (bankruptcy-cost | correlation | shock-mean)");
}

SystemSelection parse_system_selection(std::string_view name) {
  if (name == "monopoly") return SystemSelection::Monopoly;
  if (name == "split") return SystemSelection::Split;
  if (name == "both") return SystemSelection::Both;
  throw DomainError("unknown system '" + std::string(name) + "' (monopoly | split | both)");
}

std::vector<double> SweepSpec::points() const {
  std::vector<double> out(static_cast<std::size_t>(steps));
  // Snap to 12 decimals so grid points print as 0.3 rather than 0.30000000000000004.
  for (int i = 0; i < steps; ++i) out[i] = std::round((from + (to - from) * double(i) / double(steps - 1)) * 1e12) / 1e12;
  return out;
}

SweepSpec default_sweep(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::BankruptcyCost: return {axis, 0.0, 0.5, 11};
    case SweepAxis::Correlation: return {axis, 0.0, 0.9, 10};
    case SweepAxis::ShockMean: return {axis, 0.05, 0.5, 10};
  }
  return {};
}

ClearingParams ExperimentConfig::clearing_params() const {
  auto params = ClearingParams::from_bankruptcy_cost(bankruptcy_cost);
  if (alpha) params.alpha = *alpha;
  if (beta) params.beta = *beta;
  params.loss_definition = loss_definition;
  return params;
}

double ExperimentConfig::threshold_for(const EconomyCalibration& calib) const {
  return threshold.value_or(calib.loss_threshold_galleons);
}

namespace {

void check(bool ok, const char* path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

bool axis_value_valid(SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::BankruptcyCost: return v >= 0.0 && v <= 1.0;
    case SweepAxis::Correlation: return v >= 0.0 && v <= 1.0;
    case SweepAxis::ShockMean: return v >= 0.0 && v < 1.0;
  }
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    calibration.validate();
  } catch (const DomainError& e) {
    throw ConfigError("calibration", e.what());
  }
  check(shock.mean_drop >= 0.0 && shock.mean_drop < 1.0, "shock.mean_drop", "must lie in [0,1)");
  check(shock.concentration > 0.0 && std::isfinite(shock.concentration), "shock.concentration", "must be positive");
  check(shock.correlation >= 0.0 && shock.correlation <= 1.0, "shock.correlation", "must lie in [0,1]");
  check(bankruptcy_cost >= 0.0 && bankruptcy_cost <= 1.0, "clearing.bankruptcy_cost", "must lie in [0,1]");
  check(!alpha || (*alpha >= 0.0 && *alpha <= 1.0), "clearing.alpha", "must lie in [0,1]");
  check(!beta || (*beta >= 0.0 && *beta <= 1.0), "clearing.beta", "must lie in [0,1]");
  check(!levels.empty(), "levels", "must list at least one tail level");
  for (double q : levels) check(q > 0.0 && q < 1.0, "levels", "every level must lie in (0,1)");
  check(!threshold || *threshold >= 0.0, "threshold", "must be non-negative");
  check(scenarios > 0, "scenarios", "must be positive");
  check(threads >= 1, "threads", "must be at least 1");
  if (sweep) {
    check(sweep->steps >= 2, "sweep.steps", "must be at least 2");
    check(axis_value_valid(sweep->axis, sweep->from), "sweep.from", "outside the axis domain");
    check(axis_value_valid(sweep->axis, sweep->to), "sweep.to", "outside the axis domain");
  }
}

ExperimentConfig ExperimentConfig::at(SweepAxis axis, double value) const {
  ExperimentConfig out = *this;
  switch (axis) {
    case SweepAxis::BankruptcyCost:
      out.bankruptcy_cost = value;
      out.alpha.reset();
      out.beta.reset();
      break;
    case SweepAxis::Correlation: out.shock.correlation = value; break;
    case SweepAxis::ShockMean: out.shock.mean_drop = value; break;
  }
  out.sweep.reset();
  return out;
}

namespace {

template <typename T>
T read(const Json& json, const std::string& path) {
  try {
    return json.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(path, std::string("wrong type, found ") + json.type_name());
  }
}

double read_number(const Json& json, const std::string& path) {
  if (!json.is_number()) throw ConfigError(path, std::string("expected a number, found ") + json.type_name());
  return json.get<double>();
}

void require_object(const Json& json, const std::string& path) {
  if (!json.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
}

template <typename Fn>
void for_each_field(const Json& json, const std::string& prefix, const std::set<std::string>& known, Fn&& fn) {
  require_object(json, prefix);
  for (const auto& [key, value] : json.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.count(key)) throw ConfigError(path, "unknown field");
    fn(key, value, path);
  }
}

template <typename Parse>
auto read_enum(const Json& json, const std::string& path, Parse&& parse) {
  const auto text = read<std::string>(json, path);
  try {
    return parse(text);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

LossDefinition parse_loss_definition(std::string_view s) {
  if (s == "additive") return LossDefinition::Additive;
  if (s == "society_only") return LossDefinition::SocietyOnly;
  throw DomainError("expected additive | society_only");
}

InjectionMode parse_injection_mode(std::string_view s) {
  if (s == "shock_exempt") return InjectionMode::ShockExempt;
  if (s == "shock_exposed") return InjectionMode::ShockExposed;
  throw DomainError("expected shock_exempt | shock_exposed");
}

}  // namespace

ExperimentConfig config_from_json(const Json& json) {
  ExperimentConfig config;
  const std::set<std::string> top = {"calibration", "shock", "clearing", "levels", "threshold", "scenarios",
                                     "seed", "system", "injection_mode", "sweep", "threads"};
  for_each_field(json, "", top, [&](const std::string& key, const Json& value, const std::string& path) {
    if (key == "calibration") {
      auto& c = config.calibration;
      for_each_field(value, path,
                     {"students_per_year", "tuition_galleons_per_year", "education_share_of_gdp", "population",
                      "banking_assets_share_of_gdp", "central_bank_share_of_gdp"},
                     [&](const std::string& k, const Json& v, const std::string& p) {
                       const double x = read_number(v, p);
                       if (k == "students_per_year") c.students_per_year = x;
                       if (k == "tuition_galleons_per_year") c.tuition_galleons_per_year = x;
                       if (k == "education_share_of_gdp") c.education_share_of_gdp = x;
                       if (k == "population") c.population = x;
                       if (k == "banking_assets_share_of_gdp") c.banking_assets_share_of_gdp = x;
                       if (k == "central_bank_share_of_gdp") c.central_bank_share_of_gdp = x;
                     });
    } else if (key == "shock") {
      for_each_field(value, path, {"mean_drop", "concentration", "correlation"},
                     [&](const std::string& k, const Json& v, const std::string& p) {
                       const double x = read_number(v, p);
                       if (k == "mean_drop") config.shock.mean_drop = x;
                       if (k == "concentration") config.shock.concentration = x;
                       if (k == "correlation") config.shock.correlation = x;
                     });
    } else if (key == "clearing") {
      for_each_field(value, path, {"bankruptcy_cost", "alpha", "beta", "loss_definition"},
                     [&](const std::string& k, const Json& v, const std::string& p) {
                       if (k == "loss_definition") {
                         config.loss_definition = read_enum(v, p, parse_loss_definition);
                         return;
                       }
                       const double x = read_number(v, p);
                       if (k == "bankruptcy_cost") config.bankruptcy_cost = x;
                       if (k == "alpha") config.alpha = x;
                       if (k == "beta") config.beta = x;
                     });
    } else if (key == "levels") {
      if (!value.is_array()) throw ConfigError(path, "expected an array of tail levels");
      config.levels.clear();
      for (std::size_t i = 0; i < value.size(); ++i)
        config.levels.push_back(read_number(value[i], path + "[" + std::to_string(i) + "]"));
    } else if (key == "threshold") {
      config.threshold = read_number(value, path);
    } else if (key == "scenarios") {
      if (!value.is_number_integer()) throw ConfigError(path, "expected an integer");
      config.scenarios = value.get<Eigen::Index>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "system") {
      config.system = read_enum(value, path, parse_system_selection);
    } else if (key == "injection_mode") {
      config.injection_mode = read_enum(value, path, parse_injection_mode);
    } else if (key == "threads") {
      if (!value.is_number_unsigned()) throw ConfigError(path, "expected a positive integer");
      config.threads = value.get<unsigned>();
    } else if (key == "sweep") {
      SweepSpec spec;
      bool has_axis = false, has_from = false, has_to = false, has_steps = false;
      for_each_field(value, path, {"axis", "from", "to", "steps"},
                     [&](const std::string& k, const Json& v, const std::string& p) {
                       if (k == "axis") spec.axis = read_enum(v, p, parse_sweep_axis), has_axis = true;
                       if (k == "from") spec.from = read_number(v, p), has_from = true;
                       if (k == "to") spec.to = read_number(v, p), has_to = true;
                       if (k == "steps") {
                         if (!v.is_number_integer()) throw ConfigError(p, "expected an integer");
                         spec.steps = v.get<int>();
                         has_steps = true;
                       }
                     });
      if (!has_axis) throw ConfigError(path + ".axis", "required");
      const auto defaults = default_sweep(spec.axis);
      if (!has_from) spec.from = defaults.from;
      if (!has_to) spec.to = defaults.to;
      if (!has_steps) spec.steps = defaults.steps;
      config.sweep = spec;
    }
  });
  config.validate();
  return config;
}

namespace {

std::string_view to_string(LossDefinition d) { return d == LossDefinition::Additive ? "additive" : "society_only"; }
std::string_view to_string(InjectionMode m) { return m == InjectionMode::ShockExempt ? "shock_exempt" : "shock_exposed"; }

}  // namespace

Json config_to_json(const ExperimentConfig& config) {
  const auto& c = config.calibration;
  Json clearing = {{"bankruptcy_cost", config.bankruptcy_cost}, {"loss_definition", to_string(config.loss_definition)}};
  if (config.alpha) clearing["alpha"] = *config.alpha;
  if (config.beta) clearing["beta"] = *config.beta;
  Json out = {
      {"calibration",
       {{"students_per_year", c.students_per_year},
        {"tuition_galleons_per_year", c.tuition_galleons_per_year},
        {"education_share_of_gdp", c.education_share_of_gdp},
        {"population", c.population},
        {"banking_assets_share_of_gdp", c.banking_assets_share_of_gdp},
        {"central_bank_share_of_gdp", c.central_bank_share_of_gdp}}},
      {"shock",
       {{"mean_drop", config.shock.mean_drop},
        {"concentration", config.shock.concentration},
        {"correlation", config.shock.correlation}}},
      {"clearing", std::move(clearing)},
      {"levels", config.levels},
      {"scenarios", config.scenarios},
      {"seed", config.seed},
      {"system", to_string(config.system)},
      {"injection_mode", to_string(config.injection_mode)},
      {"threads", config.threads},
  };
  if (config.threshold) out["threshold"] = *config.threshold;
  if (config.sweep)
    out["sweep"] = {{"axis", to_string(config.sweep->axis)},
                    {"from", config.sweep->from},
                    {"to", config.sweep->to},
                    {"steps", config.sweep->steps}};
  return out;
}

std::vector<SystemInjections> evaluate_point(const ExperimentConfig& config) {
  config.validate();
  const auto calib = derive_gdp(config.calibration);
  const auto params = config.clearing_params();
  const auto split = build_split_network(calib);
  const auto scenarios = sample_scenarios(config.shock, split.size(), config.scenarios, config.seed, config.threads);

  std::vector<SystemKind> kinds;
  if (config.system != SystemSelection::Split) kinds.push_back(SystemKind::Monopoly);
  if (config.system != SystemSelection::Monopoly) kinds.push_back(SystemKind::Split);

  std::vector<std::size_t> order(config.levels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return config.levels[a] < config.levels[b]; });

  std::vector<SystemInjections> out;
  for (auto kind : kinds) {
    SystemInjections sys{kind, build_network(kind, calib), {}};
    const auto assets = kind == SystemKind::Monopoly ? merged_shocked_assets(split, scenarios)
                                                     : shocked_assets(split, scenarios);
    sys.results.resize(config.levels.size());
    OptimizerOptions options;
    options.scale = calib.gdp_galleons;
    options.mode = config.injection_mode;
    for (auto idx : order) {
      const InjectionCriterion criterion{config.levels[idx], config.threshold_for(calib)};
      sys.results[idx] = minimal_injection(sys.network, assets, params, criterion, options);
      // Feasible at a tighter level stays feasible at a looser one.
      options.known_feasible = sys.results[idx].allocation;
    }
    out.push_back(std::move(sys));
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  config.validate();
  if (!config.sweep) throw ConfigError("sweep", "required for a sweep run");
  const auto spec = *config.sweep;
  const auto points = spec.points();

  std::vector<std::vector<SystemInjections>> per_point(points.size());
  parallel_for(points.size(), config.threads, [&](std::size_t i) {
    auto point = config.at(spec.axis, points[i]);
    point.threads = 1;
    per_point[i] = evaluate_point(point);
  });

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (const auto& sys : per_point[i])
      for (std::size_t l = 0; l < config.levels.size(); ++l) {
        const auto& r = sys.results[l];
        rows.push_back({spec.axis, points[i], sys.system, config.levels[l], r.total, r.achieved_tail_loss,
                        config.scenarios, config.seed, r.allocation});
      }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
    if (a.system != b.system) return to_string(a.system) < to_string(b.system);
    return a.level < b.level;
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "axis,axis_value,system,level,total_injection,achieved_tail_loss,scenarios,seed\n";
  for (const auto& r : rows)
    out << to_string(r.axis) << ',' << format_double(r.axis_value) << ',' << to_string(r.system) << ','
        << format_double(r.level) << ',' << format_double(r.total_injection) << ','
        << format_double(r.achieved_tail_loss) << ',' << r.scenarios << ',' << r.seed << '\n';
}

Json run_metadata(const ExperimentConfig& config) {
  const auto calib = derive_gdp(config.calibration);
  const auto params = config.clearing_params();
  Json meta = {
      {"concentration", config.shock.concentration},
      {"correlation", config.shock.correlation},
      {"mean_drop", config.shock.mean_drop},
      {"bankruptcy_cost", config.bankruptcy_cost},
      {"alpha", params.alpha},
      {"beta", params.beta},
      {"levels", config.levels},
      {"threshold", config.threshold_for(calib)},
      {"gdp", calib.gdp_galleons},
      {"scenarios", config.scenarios},
      {"seed", config.seed},
      {"config", config_to_json(config)},
  };
  if (config.sweep) meta["axis"] = to_string(config.sweep->axis);
  return meta;
}

Json sweep_to_json(const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
  Json out_rows = Json::array();
  for (const auto& r : rows)
    out_rows.push_back({{"axis", to_string(r.axis)},
                        {"axis_value", r.axis_value},
                        {"system", to_string(r.system)},
                        {"level", r.level},
                        {"total_injection", r.total_injection},
                        {"achieved_tail_loss", r.achieved_tail_loss},
                        {"scenarios", r.scenarios},
                        {"seed", r.seed},
                        {"allocation", std::vector<double>(r.allocation.data(), r.allocation.data() + r.allocation.size())}});
  return {{"metadata", run_metadata(config)}, {"rows", std::move(out_rows)}};
}

Comparison compare_systems(const ExperimentConfig& config) {
  Comparison out;
  out.levels = config.levels;
  for (auto& sys : evaluate_point(config)) {
    if (sys.system == SystemKind::Monopoly)
      out.monopoly = std::move(sys);
    else
      out.split = std::move(sys);
  }
  if (out.monopoly && out.split)
    for (std::size_t l = 0; l < out.levels.size(); ++l)
      out.difference.push_back(out.split->results[l].total - out.monopoly->results[l].total);
  return out;
}

Json comparison_to_json(const ExperimentConfig& config, const Comparison& comparison) {
  Json out = {{"metadata", run_metadata(config)}, {"levels", comparison.levels}};
  auto systems = Json::object();
  for (const auto* sys : {comparison.monopoly ? &*comparison.monopoly : nullptr,
                          comparison.split ? &*comparison.split : nullptr}) {
    if (!sys) continue;
    Json results = Json::array();
    for (const auto& r : sys->results) results.push_back(injection_to_json(r, sys->network));
    systems[std::string(to_string(sys->system))] = std::move(results);
  }
  out["systems"] = std::move(systems);
  if (!comparison.difference.empty()) out["difference"] = comparison.difference;
  return out;
}

MergerReport merger_dominance(const ExperimentConfig& config) {
  config.validate();
  const auto calib = derive_gdp(config.calibration);
  const auto params = config.clearing_params();
  const auto split = build_split_network(calib);
  std::set<Eigen::Index> everyone;
  for (Eigen::Index i = 0; i < split.size(); ++i) everyone.insert(i);
  const auto merged = merge(split, everyone);
  const auto scenarios = sample_scenarios(config.shock, split.size(), config.scenarios, config.seed, config.threads);
  const auto split_assets = shocked_assets(split, scenarios);
  const auto merged_assets = merged_shocked_assets(split, scenarios);

  const ClearingSystem<double> split_system(split, params);
  const ClearingSystem<double> merged_system(merged, params);
  MergerReport report;
  report.scenarios = scenarios.scenarios();
  for (Eigen::Index s = 0; s < scenarios.scenarios(); ++s) {
    const Eigen::VectorXd a = split_assets.assets.row(s).transpose();
    const auto outcome = split_system.clear(a);
    if (outcome.default_count() == 0) continue;
    ++report.eligible;
    const Eigen::VectorXd m = merged_assets.assets.row(s).transpose();
    const double merged_loss = merged_system.clear(m).societal_loss;
    if (merged_loss <= outcome.societal_loss + 1e-9 * std::max(1.0, outcome.societal_loss))
      ++report.dominated;
    else
      report.counterexamples.push_back({s, outcome.societal_loss, merged_loss});
  }
  return report;
}

}  // namespace gringotts
