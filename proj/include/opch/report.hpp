#pragma once

#include <string>
#include <vector>

#include "opch/varieties.hpp"

namespace opch {

inline constexpr const char* kToolVersion = "0.1.0";

// One executed check. `pass` is exact string equality of expected and
// computed; `note` carries free-form detail and never affects `pass`.
struct CheckRecord {
    std::string check_id;
    std::string variety;
    int arity = 0;
    std::string expected;
    std::string computed;
    bool pass = false;
    long long millis = 0;
    std::string note;
};

struct Report {
    std::string tool_version = kToolVersion;
    int schema = 1;
    int max_arity = 4;
    std::vector<CheckRecord> records;  // sorted by check_id
    int passed = 0;
    int failed = 0;
};

// Runs the whole verification suite with arities capped at max_arity (>= 2,
// else InvalidArgument) and assembles the records ordered by check_id.
// Content is deterministic apart from the millis fields.
Report run_report(Workspace& ws, int max_arity);

// JSON rendering: schema field first, rationals as "p/q" strings.
std::string report_to_json(const Report& r);
// Errors: Io when the path cannot be written.
void write_report(const Report& r, const std::string& path);

} // namespace opch
