#pragma once

// JSON loading, subcommand dispatch and deterministic report rendering.
//
// A request is {"input": <document or null>, "options": {...},
// "tolerance_profile": <name>,
// "tolerances": {...}, "seed": <int or null>}. Reports are objects with
// lexicographically sorted keys and a "manifest" member.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "emergence/capacity.hpp"
#include "emergence/kernel.hpp"
#include "emergence/lens.hpp"
#include "emergence/paths.hpp"
#include "emergence/protocol.hpp"

namespace emergence {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitAuditFailure = 1, kExitInputError = 2 };

/// Subcommand names in dispatch order.
const std::vector<std::string>& report_commands();

/// Named tolerance profiles: "default", "strict", "loose".
ToleranceConfig tolerance_profile(std::string_view name);
ToleranceConfig tolerances_from_json(const Json& j, const ToleranceConfig& base = {});
Json to_json(const ToleranceConfig& cfg);

// Loaders; each throws Error(SchemaError) on malformed documents and the
// module's own error on semantically invalid ones.
Kernel load_kernel(const Json& j, const ToleranceConfig& cfg);
Dist load_dist(const Json& j);
Lens load_lens(const Json& j);
PrototypeSet load_prototypes(const Json& j, const Lens& lens);
ProtocolFamily load_protocol(const Json& j, const ToleranceConfig& cfg);
CapacitySchedule load_schedule(const Json& j);
ConvolutionBridge load_bridge(const Json& j);
Matrix load_matrix(const Json& j);

Json to_json(const KLResult& r);
Json to_json(const PathLaw& law);
Json to_json(const Kernel& k);

/// Hex SHA-256 of the canonical serialization of {"input", "options"}.
std::string input_digest(const Json& request);

/// Byte-stable serialization: sorted keys, shortest round-trip doubles,
/// two-space indentation, trailing newline.
std::string render(const Json& report);

struct ReportOutcome {
  Json report;
  int exit_code = kExitOk;
};

/// Runs one subcommand. Input and module errors become an error report
/// with exit code 2; they are never thrown.
ReportOutcome run_report(std::string_view command, const Json& request);

}  // namespace emergence
