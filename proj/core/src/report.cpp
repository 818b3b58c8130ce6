#include "conecount/report.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>

#ifndef CONECOUNT_VERSION
#define CONECOUNT_VERSION "unknown"
#endif

namespace conecount {

std::string tool_version() { return CONECOUNT_VERSION; }

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string canonical_without_hash(nlohmann::json doc) {
  if (doc.contains("manifest")) doc["manifest"].erase("hash");
  // nlohmann::json keeps object keys sorted, so dump() is canonical.
  return doc.dump();
}

}  // namespace

void attach_manifest(nlohmann::json& doc, const RunManifest& m) {
  doc["manifest"] = {{"tool_version", tool_version()},
                     {"command_line", m.command_line},
                     {"seed", m.seed},
                     {"form_fingerprint", m.form_fingerprint},
                     {"started", m.started},
                     {"finished", m.finished},
                     {"threads", m.threads}};
  doc["manifest"]["hash"] = fnv1a_hex(canonical_without_hash(doc));
}

bool validate_manifest(const nlohmann::json& doc) {
  if (!doc.contains("manifest") || !doc["manifest"].contains("hash")) return false;
  return doc["manifest"]["hash"].get<std::string>() == fnv1a_hex(canonical_without_hash(doc));
}

}  // namespace conecount
