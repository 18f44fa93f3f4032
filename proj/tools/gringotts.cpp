// Command-line driver: calibrate, clear, simulate, inject, sweep, compare, merger.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gringotts/calibration.hpp"
#include "gringotts/clearing.hpp"
#include "gringotts/errors.hpp"
#include "gringotts/format.hpp"
#include "gringotts/harness.hpp"
#include "gringotts/json_io.hpp"
#include "gringotts/network.hpp"
#include "gringotts/risk.hpp"
#include "gringotts/shocks.hpp"

namespace {

using namespace gringotts;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<Eigen::Index> scenarios;
  std::string out_path;
  std::string format;
  std::optional<unsigned> threads;

  std::optional<double> mean_drop, concentration, correlation;
  std::optional<double> bankruptcy_cost, alpha, beta, threshold;
  std::vector<double> levels;
  std::string system;
  std::string loss_definition;
};

void add_common(CLI::App* app, CommonOptions& o, const std::string& default_format) {
  o.format = default_format;
  app->add_option("--config", o.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "Scenario seed");
  app->add_option("--scenarios", o.scenarios, "Monte Carlo scenario count");
  app->add_option("--out", o.out_path, "Write output here instead of stdout");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json", "text"}));
  app->add_option("--threads", o.threads, "Worker threads");
}

void add_model(CLI::App* app, CommonOptions& o) {
  app->add_option("--mean-drop", o.mean_drop, "Mean relative asset drop");
  app->add_option("--concentration", o.concentration, "Beta concentration a+b");
  app->add_option("--correlation", o.correlation, "Gaussian copula correlation");
  app->add_option("--bankruptcy-cost", o.bankruptcy_cost, "Bankruptcy cost c (alpha = beta = 1 - c)");
  app->add_option("--alpha", o.alpha, "Recovery on external assets");
  app->add_option("--beta", o.beta, "Recovery on interbank receipts");
  app->add_option("--threshold", o.threshold, "Tail-loss threshold in Galleons (default 1% of GDP)");
  app->add_option("--level", o.levels, "Tail level(s) q");
  app->add_option("--system", o.system, "monopoly | split | both")->check(CLI::IsMember({"monopoly", "split", "both"}));
  app->add_option("--loss-definition", o.loss_definition, "additive | society_only")
      ->check(CLI::IsMember({"additive", "society_only"}));
}

ExperimentConfig load_config(const CommonOptions& o) {
  ExperimentConfig config;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    Json json;
    try {
      json = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(o.config_path, std::string("invalid JSON: ") + e.what());
    }
    config = config_from_json(json);
  }
  if (o.seed) config.seed = *o.seed;
  if (o.scenarios) config.scenarios = *o.scenarios;
  if (o.threads) config.threads = *o.threads;
  if (o.mean_drop) config.shock.mean_drop = *o.mean_drop;
  if (o.concentration) config.shock.concentration = *o.concentration;
  if (o.correlation) config.shock.correlation = *o.correlation;
  if (o.bankruptcy_cost) config.bankruptcy_cost = *o.bankruptcy_cost;
  if (o.alpha) config.alpha = *o.alpha;
  if (o.beta) config.beta = *o.beta;
  if (o.threshold) config.threshold = *o.threshold;
  if (!o.levels.empty()) config.levels = o.levels;
  if (!o.system.empty()) config.system = parse_system_selection(o.system);
  if (o.loss_definition == "society_only") config.loss_definition = LossDefinition::SocietyOnly;
  if (o.loss_definition == "additive") config.loss_definition = LossDefinition::Additive;
  config.validate();
  return config;
}

void emit(const CommonOptions& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw ConfigError("--out", "cannot open " + o.out_path);
  out << text;
}

std::string calibration_text(const Json& j) {
  std::ostringstream out;
  auto section = [&](const char* title, const Json& obj) {
    out << title << '\n';
    for (const auto& [key, value] : obj.items())
      out << "  " << std::left << std::setw(34) << key << std::right << std::setw(22) << std::fixed
          << std::setprecision(4) << value.get<double>() << '\n';
  };
  section("inputs", j.at("inputs"));
  section("rates", j.at("rates"));
  section("derived", j.at("derived"));
  return out.str();
}

int run_calibrate(const CommonOptions& o) {
  const auto config = load_config(o);
  const auto calib = derive_gdp(config.calibration);
  const auto json = calibration_to_json(config.calibration, calib);
  emit(o, o.format == "text" ? calibration_text(json) : json.dump(2) + "\n");
  return 0;
}

struct ClearOptions {
  std::string network_path;
  std::vector<double> multipliers;
};

int run_clear(const CommonOptions& o, const ClearOptions& c) {
  const auto config = load_config(o);
  const auto calib = derive_gdp(config.calibration);
  FinancialNetwork net;
  if (!c.network_path.empty()) {
    std::ifstream in(c.network_path);
    if (!in) throw ConfigError("--network", "cannot open " + c.network_path);
    try {
      net = network_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
      throw ConfigError("--network", e.what());
    }
  } else {
    net = build_network(config.system == SystemSelection::Monopoly ? SystemKind::Monopoly : SystemKind::Split, calib);
  }
  Eigen::VectorXd multipliers = Eigen::VectorXd::Ones(net.size());
  if (c.multipliers.size() == 1)
    multipliers.setConstant(c.multipliers[0]);
  else if (!c.multipliers.empty()) {
    if (static_cast<Eigen::Index>(c.multipliers.size()) != net.size())
      throw ConfigError("--multipliers", "expected one value or one per bank");
    multipliers = Eigen::Map<const Eigen::VectorXd>(c.multipliers.data(), net.size());
  }
  const Eigen::VectorXd assets = net.external_assets.cwiseProduct(multipliers);
  const auto outcome = clear_fictitious_default(net, assets, config.clearing_params());
  emit(o, outcome_to_json(outcome, net).dump(2) + "\n");
  return 0;
}

struct SimulateOptions {
  std::string dump_scenarios;
};

int run_simulate(const CommonOptions& o, const SimulateOptions& s) {
  const auto config = load_config(o);
  const auto calib = derive_gdp(config.calibration);
  const auto params = config.clearing_params();
  const auto split = build_split_network(calib);
  const auto scenarios = sample_scenarios(config.shock, split.size(), config.scenarios, config.seed, config.threads);
  if (!s.dump_scenarios.empty()) {
    std::ofstream dump(s.dump_scenarios, std::ios::binary);
    if (!dump) throw ConfigError("--dump-scenarios", "cannot open " + s.dump_scenarios);
    write_scenarios_csv(dump, scenarios);
  }

  std::vector<std::pair<SystemKind, Eigen::VectorXd>> losses;
  for (auto kind : {SystemKind::Monopoly, SystemKind::Split}) {
    if (config.system == SystemSelection::Monopoly && kind == SystemKind::Split) continue;
    if (config.system == SystemSelection::Split && kind == SystemKind::Monopoly) continue;
    const auto net = build_network(kind, calib);
    const auto assets = kind == SystemKind::Monopoly ? merged_shocked_assets(split, scenarios) : shocked_assets(split, scenarios);
    losses.emplace_back(kind, loss_distribution(net, assets, params, Eigen::VectorXd::Zero(net.size()),
                                                config.injection_mode, config.threads));
  }

  if (o.format == "json") {
    Json systems = Json::object();
    for (const auto& [kind, l] : losses) {
      Json es = Json::object();
      for (double q : config.levels) es[format_double(q)] = expected_shortfall({l.data(), std::size_t(l.size())}, q);
      systems[std::string(to_string(kind))] = {{"losses", std::vector<double>(l.data(), l.data() + l.size())},
                                               {"expected_shortfall", es},
                                               {"mean", l.mean()}};
    }
    emit(o, Json{{"metadata", run_metadata(config)}, {"systems", systems}}.dump(2) + "\n");
    return 0;
  }
  std::ostringstream out;
  out << "scenario,system,loss\n";
  for (Eigen::Index i = 0; i < scenarios.scenarios(); ++i)
    for (const auto& [kind, l] : losses) out << i << ',' << to_string(kind) << ',' << format_double(l(i)) << '\n';
  emit(o, out.str());
  return 0;
}

struct InjectOptions {
  std::string network_path;
};

int run_inject(const CommonOptions& o, const InjectOptions& io) {
  auto config = load_config(o);
  const auto calib = derive_gdp(config.calibration);
  if (io.network_path.empty()) {
    if (o.system.empty()) config.system = SystemSelection::Split;
    const auto systems = evaluate_point(config);
    Json out = {{"metadata", run_metadata(config)}};
    for (const auto& sys : systems) {
      Json results = Json::array();
      for (const auto& r : sys.results) results.push_back(injection_to_json(r, sys.network));
      out[std::string(to_string(sys.system))] = std::move(results);
    }
    emit(o, out.dump(2) + "\n");
    return 0;
  }

  std::ifstream in(io.network_path);
  if (!in) throw ConfigError("--network", "cannot open " + io.network_path);
  FinancialNetwork net;
  try {
    net = network_from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw ConfigError("--network", e.what());
  }
  const auto scenarios = sample_scenarios(config.shock, net.size(), config.scenarios, config.seed, config.threads);
  const auto assets = shocked_assets(net, scenarios);
  OptimizerOptions options;
  options.scale = calib.gdp_galleons;
  options.mode = config.injection_mode;
  Json results = Json::array();
  for (double q : config.levels)
    results.push_back(injection_to_json(
        minimal_injection(net, assets, config.clearing_params(), {q, config.threshold_for(calib)}, options), net));
  emit(o, Json{{"metadata", run_metadata(config)}, {"network", std::move(results)}}.dump(2) + "\n");
  return 0;
}

struct SweepOptions {
  std::string axis;
  std::optional<double> from, to;
  std::optional<int> steps;
};

int run_sweep_command(const CommonOptions& o, const SweepOptions& s) {
  auto config = load_config(o);
  if (!s.axis.empty()) config.sweep = default_sweep(parse_sweep_axis(s.axis));
  if (!config.sweep) throw ConfigError("sweep.axis", "required (--axis or config)");
  if (s.from) config.sweep->from = *s.from;
  if (s.to) config.sweep->to = *s.to;
  if (s.steps) config.sweep->steps = *s.steps;
  config.validate();
  const auto rows = run_sweep(config);
  if (o.format == "json") {
    emit(o, sweep_to_json(config, rows).dump(2) + "\n");
    return 0;
  }
  std::ostringstream out;
  write_sweep_csv(out, rows);
  emit(o, out.str());
  if (!o.out_path.empty()) {
    std::ofstream meta(o.out_path + ".meta.json", std::ios::binary);
    meta << run_metadata(config).dump(2) << '\n';
  }
  return 0;
}

int run_compare(const CommonOptions& o) {
  const auto config = load_config(o);
  emit(o, comparison_to_json(config, compare_systems(config)).dump(2) + "\n");
  return 0;
}

int run_merger(const CommonOptions& o) {
  const auto config = load_config(o);
  const auto report = merger_dominance(config);
  Json examples = Json::array();
  for (const auto& c : report.counterexamples)
    examples.push_back({{"scenario", c.scenario}, {"split_loss", c.split_loss}, {"merged_loss", c.merged_loss}});
  emit(o, Json{{"metadata", run_metadata(config)},
               {"scenarios", report.scenarios},
               {"eligible", report.eligible},
               {"dominated", report.dominated},
               {"dominated_fraction", report.dominated_fraction()},
               {"counterexamples", examples}}
                  .dump(2) +
              "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gringotts systemic-risk simulator: monopoly vs. five-bank system"};
  app.require_subcommand(1);

  CommonOptions calibrate_o, clear_o, simulate_o, inject_o, sweep_o, compare_o, merger_o;
  ClearOptions clear_extra;
  SimulateOptions simulate_extra;
  InjectOptions inject_extra;
  SweepOptions sweep_extra;

  auto* calibrate = app.add_subcommand("calibrate", "Print the economy calibration table");
  add_common(calibrate, calibrate_o, "json");

  auto* clear = app.add_subcommand("clear", "Clear one shocked network and print the outcome");
  add_common(clear, clear_o, "json");
  add_model(clear, clear_o);
  clear->add_option("--network", clear_extra.network_path, "Network JSON (default: built-in system)");
  clear->add_option("--multipliers", clear_extra.multipliers, "Asset multipliers, one value or one per bank")->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "Dump the Monte Carlo loss distribution");
  add_common(simulate, simulate_o, "csv");
  add_model(simulate, simulate_o);
  simulate->add_option("--dump-scenarios", simulate_extra.dump_scenarios, "Also write scenario multipliers CSV");

  auto* inject = app.add_subcommand("inject", "Minimal capital injection for one parameter point");
  add_common(inject, inject_o, "json");
  add_model(inject, inject_o);
  inject->add_option("--network", inject_extra.network_path, "Custom network JSON");

  auto* sweep = app.add_subcommand("sweep", "Sweep one parameter and compare both systems");
  add_common(sweep, sweep_o, "csv");
  add_model(sweep, sweep_o);
  sweep->add_option("--axis", sweep_extra.axis, "bankruptcy-cost | correlation | shock-mean")
      ->check(CLI::IsMember({"bankruptcy-cost", "correlation", "shock-mean"}));
  sweep->add_option("--from", sweep_extra.from, "Axis start");
  sweep->add_option("--to", sweep_extra.to, "Axis end");
  sweep->add_option("--steps", sweep_extra.steps, "Axis points (>= 2)");

  auto* compare = app.add_subcommand("compare", "Monopoly vs. split at one parameter point");
  add_common(compare, compare_o, "json");
  add_model(compare, compare_o);

  auto* merger = app.add_subcommand("merger", "Merged vs. split societal loss, scenario by scenario");
  add_common(merger, merger_o, "json");
  add_model(merger, merger_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*calibrate) return run_calibrate(calibrate_o);
    if (*clear) return run_clear(clear_o, clear_extra);
    if (*simulate) return run_simulate(simulate_o, simulate_extra);
    if (*inject) return run_inject(inject_o, inject_extra);
    if (*sweep) return run_sweep_command(sweep_o, sweep_extra);
    if (*compare) return run_compare(compare_o);
    if (*merger) return run_merger(merger_o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return 1;
}
