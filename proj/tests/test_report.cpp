#include <gtest/gtest.h>

#include "conecount/report.hpp"

using namespace conecount;

TEST(Report, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3, 1e-300, 123456789.0, -2.5}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(0.25), "0.25");
  EXPECT_EQ(format_double(1e6), "1e+06");
}

TEST(Report, ManifestHashValidates) {
  nlohmann::json doc = {{"count", 12}, {"main_term", 11.5}};
  RunManifest m;
  m.seed = 42;
  m.command_line = "conecount x";
  m.threads = 2;
  attach_manifest(doc, m);
  EXPECT_TRUE(validate_manifest(doc));
  const auto reparsed = nlohmann::json::parse(doc.dump(2));
  EXPECT_TRUE(validate_manifest(reparsed));
  doc["count"] = 13;
  EXPECT_FALSE(validate_manifest(doc));
  EXPECT_FALSE(validate_manifest(nlohmann::json{{"a", 1}}));
}

TEST(Report, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
