#include "gringotts/calibration.hpp"

#include <cmath>
#include <string>

#include "gringotts/errors.hpp"

namespace gringotts {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw DomainError("to_knuts: coin count overflows int64");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw DomainError("to_knuts: coin count overflows int64");
  return out;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DomainError(std::string(what) + " must be positive and finite");
}

void require_share(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DomainError(std::string(what) + " must be a positive fraction");
}

}  // namespace

CurrencyAmount to_knuts(std::int64_t galleons, std::int64_t sickles, std::int64_t knuts) {
  if (galleons < 0 || sickles < 0 || knuts < 0) throw DomainError("to_knuts: negative coin count");
  const auto from_galleons = checked_mul(galleons, kKnutsPerGalleon);
  const auto from_sickles = checked_mul(sickles, kKnutsPerSickle);
  return {checked_add(checked_add(from_galleons, from_sickles), knuts)};
}

Coins from_knuts(CurrencyAmount amount) {
  if (amount.knuts < 0) throw DomainError("from_knuts: negative amount");
  Coins coins;
  coins.galleons = amount.knuts / kKnutsPerGalleon;
  const auto rest = amount.knuts % kKnutsPerGalleon;
  coins.sickles = rest / kKnutsPerSickle;
  coins.knuts = rest % kKnutsPerSickle;
  return coins;
}

void ExchangeRates::validate() const {
  require_positive(official_gbp_per_galleon, "official_gbp_per_galleon");
  require_positive(official_usd_per_galleon, "official_usd_per_galleon");
  require_positive(ppp_usd_per_galleon, "ppp_usd_per_galleon");
  require_positive(ppp_gbp_per_galleon, "ppp_gbp_per_galleon");
}

RateSelector parse_rate_selector(std::string_view name) {
  if (name == "official-GBP") return RateSelector::OfficialGbp;
  if (name == "official-USD") return RateSelector::OfficialUsd;
  if (name == "ppp-USD") return RateSelector::PppUsd;
  if (name == "ppp-GBP") return RateSelector::PppGbp;
  throw DomainError("unknown rate selector '" + std::string(name) + "'");
}

std::string_view to_string(RateSelector selector) {
  switch (selector) {
    case RateSelector::OfficialGbp: return "official-GBP";
    case RateSelector::OfficialUsd: return "official-USD";
    case RateSelector::PppUsd: return "ppp-USD";
    case RateSelector::PppGbp: return "ppp-GBP";
  }
  return "?";
}

double convert(double galleons, RateSelector selector, const ExchangeRates& rates) {
  rates.validate();
  if (!std::isfinite(galleons)) throw DomainError("convert: amount must be finite");
  switch (selector) {
    case RateSelector::OfficialGbp: return galleons * rates.official_gbp_per_galleon;
    case RateSelector::OfficialUsd: return galleons * rates.official_usd_per_galleon;
    case RateSelector::PppUsd: return galleons * rates.ppp_usd_per_galleon;
    case RateSelector::PppGbp: return galleons * rates.ppp_gbp_per_galleon;
  }
  throw DomainError("convert: bad selector");
}

double max_gold_content(double usd_per_galleon, double gold_usd_per_gram) {
  require_positive(usd_per_galleon, "usd_per_galleon");
  require_positive(gold_usd_per_gram, "gold_usd_per_gram");
  return usd_per_galleon / gold_usd_per_gram;
}

void CalibrationInputs::validate() const {
  require_positive(students_per_year, "students_per_year");
  require_positive(tuition_galleons_per_year, "tuition_galleons_per_year");
  require_positive(population, "population");
  require_share(education_share_of_gdp, "education_share_of_gdp");
  if (education_share_of_gdp > 1.0) throw DomainError("education_share_of_gdp must lie in (0,1]");
  // Banking assets may exceed GDP (the 450% sizing override).
  require_share(banking_assets_share_of_gdp, "banking_assets_share_of_gdp");
  require_share(central_bank_share_of_gdp, "central_bank_share_of_gdp");
  if (central_bank_share_of_gdp > banking_assets_share_of_gdp)
    throw DomainError("central_bank_share_of_gdp exceeds banking_assets_share_of_gdp");
}

EconomyCalibration derive_gdp(const CalibrationInputs& inputs) {
  inputs.validate();
  EconomyCalibration calib;
  calib.education_budget_galleons = inputs.students_per_year * inputs.tuition_galleons_per_year;
  calib.gdp_galleons = calib.education_budget_galleons / inputs.education_share_of_gdp;
  calib.gdp_per_capita_galleons = calib.gdp_galleons / inputs.population;
  calib.loss_threshold_galleons = 0.01 * calib.gdp_galleons;
  calib.total_bank_assets_galleons = inputs.banking_assets_share_of_gdp * calib.gdp_galleons;
  calib.central_bank_assets_galleons = inputs.central_bank_share_of_gdp * calib.gdp_galleons;
  return calib;
}

EconomyCalibration calibration_for_gdp(double gdp) {
  require_positive(gdp, "gdp");
  CalibrationInputs inputs;
  inputs.students_per_year = 1.0;
  inputs.tuition_galleons_per_year = gdp;
  inputs.education_share_of_gdp = 1.0;
  return derive_gdp(inputs);
}

}  // namespace gringotts
