#pragma once

#include <cstdint>
#include <string_view>

namespace gringotts {

inline constexpr std::int64_t kKnutsPerSickle = 29;
inline constexpr std::int64_t kSicklesPerGalleon = 17;
inline constexpr std::int64_t kKnutsPerGalleon = kKnutsPerSickle * kSicklesPerGalleon;  // 493

/// An amount of Wizarding coin, stored in Knuts.
struct CurrencyAmount {
  std::int64_t knuts = 0;

  friend bool operator==(const CurrencyAmount&, const CurrencyAmount&) = default;
};

/// Canonical coin breakdown with 0 <= sickles < 17 and 0 <= knuts < 29.
struct Coins {
  std::int64_t galleons = 0;
  std::int64_t sickles = 0;
  std::int64_t knuts = 0;

  friend bool operator==(const Coins&, const Coins&) = default;
};

/// Throws DomainError on negative counts or int64 overflow.
CurrencyAmount to_knuts(std::int64_t galleons, std::int64_t sickles, std::int64_t knuts);
Coins from_knuts(CurrencyAmount amount);

struct ExchangeRates {
  double official_gbp_per_galleon = 5.01;
  double official_usd_per_galleon = 7.35;  // via 1.467 USD/GBP, never recomputed
  double ppp_usd_per_galleon = 493.0;      // purchasing-power rate: $1 per Knut
  double ppp_gbp_per_galleon = 376.90;

  void validate() const;
};

enum class RateSelector { OfficialGbp, OfficialUsd, PppUsd, PppGbp };

RateSelector parse_rate_selector(std::string_view name);
std::string_view to_string(RateSelector selector);

/// Galleons to Muggle currency at the selected rate.
double convert(double galleons, RateSelector selector, const ExchangeRates& rates = {});

/// No-arbitrage upper bound on grams of gold in one Galleon.
double max_gold_content(double usd_per_galleon, double gold_usd_per_gram);

inline constexpr double kGoldUsdPerGram = 9.61;

struct CalibrationInputs {
  double students_per_year = 1000.0;
  double tuition_galleons_per_year = 7500.0;
  double education_share_of_gdp = 0.044;
  double population = 10000.0;
  double banking_assets_share_of_gdp = 1.00;
  double central_bank_share_of_gdp = 0.11;

  void validate() const;
};

struct EconomyCalibration {
  double education_budget_galleons = 0.0;
  double gdp_galleons = 0.0;
  double gdp_per_capita_galleons = 0.0;
  double loss_threshold_galleons = 0.0;  // 1% of GDP
  double total_bank_assets_galleons = 0.0;
  double central_bank_assets_galleons = 0.0;
};

EconomyCalibration derive_gdp(const CalibrationInputs& inputs);

/// Calibration with every input at its canonical value.
inline EconomyCalibration default_calibration() { return derive_gdp(CalibrationInputs{}); }

/// Calibration for an arbitrary GDP with canonical asset shares; handy for
/// scale-free checks (e.g. gdp = 100 turns Galleons into percentages).
EconomyCalibration calibration_for_gdp(double gdp);

}  // namespace gringotts
