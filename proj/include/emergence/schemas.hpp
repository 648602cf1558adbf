#pragma once

// JSON schemas shipped under schemas/ and compiled into the library.

namespace emergence {

/// Schema text for a name such as "kernel" or "report.sigma", or nullptr.
const char* find_schema(const char* name);
/// Comma-separated schema names in sorted order.
const char* schema_names();

}  // namespace emergence
