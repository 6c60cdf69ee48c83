#pragma once

// JSON conversion of library objects and results. Internal to the core and
// the C API; the public headers stay free of the JSON dependency.

#include "qrisk/classify.hpp"
#include "qrisk/distortion.hpp"
#include "qrisk/distribution.hpp"
#include "qrisk/properties.hpp"
#include "qrisk/risk.hpp"
#include "qrisk/suite.hpp"

#include <json.hpp>

#include <string>

namespace qrisk::detail {

using json = nlohmann::ordered_json;

inline constexpr const char* kResultSchema = "qrisk.result/1";

Distribution distribution_from_json(const json& j, const std::string& path = "");
Distortion distortion_from_json(const json& j, const std::string& path = "");
json distortion_json(const Distortion& d);

/// Parses text, translating syntax errors into ParseError with a line number.
json parse_json_text(const std::string& text);

/// A number, "-inf" or "not-in-domain".
json risk_value_json(const ExtendedRisk& r);

json risk_record(const std::string& measure, const Distribution& x, const std::string& distortion,
                 const ExtendedRisk& value, const std::string& representation, double tolerance);
json convexity_json(const Distortion& d, const ConvexityReport& r);
json spectrum_json(const Distortion& d);
json counterexample_json(const CounterexampleReport& r);
json verdict_json(const Distribution& x, const Distortion& d, const MembershipVerdict& v);
json comparison_json(const Distortion& d1, const Distortion& d2, const DomainComparison& c);
json search_json(const Distortion& d, const SearchOptions& o, const SubadditivityReport& r);
json table_json(const JointTable& t);
json suite_json(const SuiteReport& r);

} // namespace qrisk::detail
