#pragma once

// JSON documents for the reports and the run manifest. Keys are stable;
// non-finite numbers are written as null.

#include <string>

#include "homog/config.hpp"
#include "homog/corrector.hpp"
#include "homog/diffusion.hpp"
#include "homog/sobolev.hpp"
#include "homog/weights.hpp"
#include "json.hpp"

namespace homog {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchemaVersion = "1";

Json to_json(const WeightReport& r);
Json to_json(const InequalityReport& r);
Json to_json(const ClassicalSobolev& c);
Json to_json(const DiffusivityMatrix& m);
Json to_json(const RefinementTable& t);
Json to_json(const McReport& r);
Json to_json(const ExperimentConfig& c);

/// Full resolved config plus the command; no timestamps or host details,
/// so equal inputs give equal bytes.
Json manifest(const ExperimentConfig& c, const std::string& command);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace homog
