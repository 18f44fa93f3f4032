#pragma once

#include "json.hpp"

#include "gringotts/calibration.hpp"
#include "gringotts/clearing.hpp"
#include "gringotts/network.hpp"
#include "gringotts/risk.hpp"

namespace gringotts {

using Json = nlohmann::json;

/// {"banks", "external_assets", "liabilities" (row-major, trailing society
/// column), "central_bank" (index or null)}. Doubles round-trip exactly.
Json network_to_json(const FinancialNetwork& net);
/// Throws DomainError on malformed or invalid input.
FinancialNetwork network_from_json(const Json& json);

Json outcome_to_json(const ClearingOutcome<double>& outcome, const FinancialNetwork& net);
Json injection_to_json(const InjectionResult& result, const FinancialNetwork& net);
Json calibration_to_json(const CalibrationInputs& inputs, const EconomyCalibration& calib,
                         const ExchangeRates& rates = {});

}  // namespace gringotts
