#include "gringotts/json_io.hpp"

#include "gringotts/errors.hpp"

namespace gringotts {

namespace {

Json vector_to_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

Json network_to_json(const FinancialNetwork& net) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < net.liabilities.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < net.liabilities.cols(); ++j) row.push_back(net.liabilities(i, j));
    rows.push_back(std::move(row));
  }
  return {
      {"banks", net.banks},
      {"external_assets", vector_to_json(net.external_assets)},
      {"liabilities", std::move(rows)},
      {"central_bank", net.central_bank ? Json(*net.central_bank) : Json(nullptr)},
  };
}

FinancialNetwork network_from_json(const Json& json) {
  FinancialNetwork net;
  try {
    net.banks = json.at("banks").get<std::vector<std::string>>();
    const auto assets = json.at("external_assets").get<std::vector<double>>();
    const auto rows = json.at("liabilities").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(assets.size());
    net.external_assets = Eigen::Map<const Eigen::VectorXd>(assets.data(), n);
    if (static_cast<Eigen::Index>(rows.size()) != n) throw DomainError("network json: liabilities must have one row per bank");
    net.liabilities.resize(n, n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != n + 1)
        throw DomainError("network json: each liabilities row needs n+1 entries (society last)");
      for (Eigen::Index j = 0; j <= n; ++j) net.liabilities(i, j) = rows[i][j];
    }
    const auto& cb = json.contains("central_bank") ? json.at("central_bank") : Json(nullptr);
    if (!cb.is_null()) net.central_bank = cb.get<Eigen::Index>();
  } catch (const Json::exception& e) {
    throw DomainError(std::string("network json: ") + e.what());
  }
  net.validate();
  return net;
}

Json outcome_to_json(const ClearingOutcome<double>& outcome, const FinancialNetwork& net) {
  std::vector<bool> defaults(outcome.defaults.data(), outcome.defaults.data() + outcome.defaults.size());
  return {
      {"banks", net.banks},
      {"payments", vector_to_json(outcome.payments)},
      {"defaults", defaults},
      {"equities", vector_to_json(outcome.equities)},
      {"loss", outcome.societal_loss},
      {"iterations", outcome.iterations},
  };
}

Json injection_to_json(const InjectionResult& result, const FinancialNetwork& net) {
  return {
      {"banks", net.banks},
      {"allocation", vector_to_json(result.allocation)},
      {"total", result.total},
      {"achieved_tail_loss", result.achieved_tail_loss},
      {"criterion", {{"level", result.criterion.level}, {"threshold", result.criterion.threshold}}},
      {"scenario_count", result.scenario_count},
      {"infeasible_budget", result.infeasible_budget},
      {"evaluations", result.evaluations},
  };
}

Json calibration_to_json(const CalibrationInputs& inputs, const EconomyCalibration& calib, const ExchangeRates& rates) {
  return {
      {"inputs",
       {{"students_per_year", inputs.students_per_year},
        {"tuition_galleons_per_year", inputs.tuition_galleons_per_year},
        {"education_share_of_gdp", inputs.education_share_of_gdp},
        {"population", inputs.population},
        {"banking_assets_share_of_gdp", inputs.banking_assets_share_of_gdp},
        {"central_bank_share_of_gdp", inputs.central_bank_share_of_gdp}}},
      {"rates",
       {{"knuts_per_galleon", kKnutsPerGalleon},
        {"official_gbp_per_galleon", rates.official_gbp_per_galleon},
        {"official_usd_per_galleon", rates.official_usd_per_galleon},
        {"ppp_usd_per_galleon", rates.ppp_usd_per_galleon},
        {"ppp_gbp_per_galleon", rates.ppp_gbp_per_galleon},
        {"max_gold_grams_per_galleon", max_gold_content(rates.official_usd_per_galleon, kGoldUsdPerGram)}}},
      {"derived",
       {{"tuition_official_gbp", convert(inputs.tuition_galleons_per_year, RateSelector::OfficialGbp, rates)},
        {"tuition_ppp_usd", convert(inputs.tuition_galleons_per_year, RateSelector::PppUsd, rates)},
        {"education_budget_galleons", calib.education_budget_galleons},
        {"gdp_galleons", calib.gdp_galleons},
        {"gdp_per_capita_galleons", calib.gdp_per_capita_galleons},
        {"loss_threshold_galleons", calib.loss_threshold_galleons},
        {"total_bank_assets_galleons", calib.total_bank_assets_galleons},
        {"central_bank_assets_galleons", calib.central_bank_assets_galleons}}},
  };
}

}  // namespace gringotts
