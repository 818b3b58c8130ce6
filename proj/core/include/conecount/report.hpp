#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace conecount {

std::string tool_version();

// Shortest round-trip decimal ('.' separator, no grouping).
std::string format_double(double x);

struct RunManifest {
  std::string command_line;
  std::uint64_t seed = 0;
  std::string form_fingerprint;
  std::string started;
  std::string finished;
  int threads = 1;
};

std::string utc_timestamp();

// Embeds the manifest under "manifest" with a hash over the whole document
// (the hash field itself excluded), serialized canonically.
void attach_manifest(nlohmann::json& doc, const RunManifest& m);
bool validate_manifest(const nlohmann::json& doc);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace conecount
