#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "roughsk/harness.hpp"

namespace roughsk {

/// Key order and number formatting are fixed, so equal reports serialise to
/// equal bytes. Wall time is deliberately left out.
nlohmann::ordered_json report_to_json(const ConvergenceReport& report);
nlohmann::ordered_json holder_to_json(const std::vector<HolderScaling>& scaling);
nlohmann::ordered_json averaging_to_json(const AveragingValidation& validation);

/// Flat table `epsilon,metric,mean,stderr,n`.
void write_report_csv(std::ostream& os, const ConvergenceReport& report);

/// Pretty-printed JSON followed by a newline.
void write_json(std::ostream& os, const nlohmann::ordered_json& j);

}  // namespace roughsk
