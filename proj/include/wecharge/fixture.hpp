#ifndef WECHARGE_FIXTURE_HPP
#define WECHARGE_FIXTURE_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "wecharge/error.hpp"
#include "wecharge/matching.hpp"

namespace wecharge {

// One published row of the case-study performance table: normalized
// features plus the two published scenario scores.
struct FixtureRow {
  std::string id;
  FeatureTuple normalized;
  double published_s1 = 0.0;
  double published_s2 = 0.0;
};

/// Comma-separated, `#` comments, header line
/// `id,wait,distance,cost,charge_time,s1,s2`.
inline std::vector<FixtureRow> parse_fixture(std::istream& in) {
  std::vector<FixtureRow> rows;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header_seen) {
      header_seen = true;
      std::string compact;
      for (char ch : line) {
        if (ch != ' ' && ch != '\t' && ch != '\r') compact += ch;
      }
      if (compact != "id,wait,distance,cost,charge_time,s1,s2") {
        throw Error(ErrorCode::ParseError,
                    "fixture line " + std::to_string(line_no) + ": unexpected header");
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7) {
      throw Error(ErrorCode::ParseError, "fixture line " + std::to_string(line_no) +
                                             ": expected 7 fields, got " +
                                             std::to_string(fields.size()));
    }
    auto number = [&](std::size_t i) {
      const char* begin = fields[i].c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
      if (end == begin || (end && *end != '\0')) {
        throw Error(ErrorCode::ParseError, "fixture line " + std::to_string(line_no) +
                                               ": field " + std::to_string(i + 1) +
                                               " is not a number");
      }
      return v;
    };
    FixtureRow row;
    row.id = fields[0];
    row.id.erase(0, row.id.find_first_not_of(" \t"));
    row.id.erase(row.id.find_last_not_of(" \t\r") + 1);
    row.normalized.wait_hours = number(1);
    row.normalized.distance_km = number(2);
    row.normalized.cost = number(3);
    row.normalized.charge_hours = number(4);
    row.published_s1 = number(5);
    row.published_s2 = number(6);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<FixtureRow> load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FixtureMissing, "cannot open fixture " + path.string());
  }
  return parse_fixture(in);
}

inline std::vector<FeatureTuple> fixture_features(const std::vector<FixtureRow>& rows) {
  std::vector<FeatureTuple> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.normalized);
  return out;
}

}  // namespace wecharge

#endif
