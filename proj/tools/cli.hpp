#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "expjump/model.hpp"

namespace expjump::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitGateFailed = 2;

struct Environment {
  SpeedField field;
  Roadblocks rb;
  ModelParams params;
};

// Parses JSON text; ConfigError carries the line and column of syntax errors.
json parse_json(const std::string& text, const std::string& source);
json load_json_file(const std::string& path);

// Environment document: q, lambda, xi0, breakpoints, segment_values,
// optional roadblocks [{b, p, xi_override?}], band_min, band_max. Unknown keys are rejected.
Environment parse_environment(const json& doc);

struct Manifest {
  std::string command;
  json environment;  // environment document (may be empty for commands that do not use it)
  json options = json::object();
  std::uint64_t master_seed = 1;
  std::string output_path;  // prefix for <prefix>.csv and <prefix>.json; empty prints to stdout

  json to_json() const;
};

Manifest parse_manifest(const json& doc);

// FNV-1a 64-bit hash of the canonical manifest serialization, as 16 hex digits.
std::string manifest_hash(const Manifest& m);

std::string version();

// Dispatches to the command; returns an exit code. Errors propagate as exceptions.
int run(const Manifest& m, std::ostream& out);

}  // namespace expjump::cli
