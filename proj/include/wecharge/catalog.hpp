#ifndef WECHARGE_CATALOG_HPP
#define WECHARGE_CATALOG_HPP

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wecharge/error.hpp"
#include "wecharge/registry.hpp"
#include "wecharge/serialization.hpp"

// Station catalog files: a JSON array of station objects in the service's
// wire format. Records are parsed independently so one bad record does not
// block the rest.
namespace wecharge::catalog {

struct Record {
  std::size_t index = 0;
  int line = 0;  // 1-based line where the record starts
  std::optional<Station> station;
  ErrorCode error_code = ErrorCode::ParseError;
  std::string error;  // set iff station is empty
};

struct Reject {
  std::size_t index = 0;
  int line = 0;
  std::string station_id;  // empty when the record had no readable id
  ErrorCode code = ErrorCode::ParseError;
  std::string message;
};

struct LoadReport {
  std::size_t registered = 0;
  std::vector<Reject> rejects;
};

namespace detail {

inline int line_of(std::string_view text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Byte offsets where each top-level array element begins. Assumes the text
// already parsed as JSON.
inline std::vector<std::size_t> element_offsets(std::string_view text) {
  std::vector<std::size_t> out;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  bool expect_element = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    if (expect_element && depth == 1 && c != ']') {
      out.push_back(i);
      expect_element = false;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '[':
      case '{':
        ++depth;
        if (depth == 1) expect_element = true;
        break;
      case ']':
      case '}':
        --depth;
        break;
      case ',':
        if (depth == 1) expect_element = true;
        break;
      default:
        break;
    }
  }
  return out;
}

}  // namespace detail

/// Splits a catalog into per-record results. Throws ParseError (with line
/// and column) only when the text is not a JSON array at all.
inline std::vector<Record> parse(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    const std::size_t line_start = text.rfind('\n', at == 0 ? 0 : at - 1);
    const std::size_t col = line_start == std::string_view::npos ? at + 1 : at - line_start;
    throw Error(ErrorCode::ParseError, "line " + std::to_string(detail::line_of(text, at)) +
                                           ", column " + std::to_string(col) +
                                           ": malformed JSON");
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::ParseError, "line 1: catalog must be a JSON array of stations");
  }
  const auto offsets = detail::element_offsets(text);
  std::vector<Record> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    Record rec;
    rec.index = i;
    rec.line = i < offsets.size() ? detail::line_of(text, offsets[i]) : 0;
    try {
      Station s = station_from_json(doc[i], "[" + std::to_string(i) + "]");
      validate(s);
      rec.station = std::move(s);
    } catch (const Error& e) {
      rec.error_code = e.code();
      rec.error = e.what();
      if (doc[i].is_object() && doc[i].contains("id") && doc[i]["id"].is_string()) {
        rec.error = "station '" + doc[i]["id"].get<std::string>() + "': " + rec.error;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<Station> load_stations(const std::filesystem::path& path) {
  std::vector<Station> out;
  for (auto& rec : parse(read_file(path))) {
    if (!rec.station) {
      throw Error(rec.error_code, path.string() + ":" + std::to_string(rec.line) + ": " + rec.error);
    }
    out.push_back(std::move(*rec.station));
  }
  return out;
}

/// Registers every parsable record; anything rejected by parsing or by the
/// registry lands in the report.
inline LoadReport load_into(StationRegistry& registry, const std::vector<Record>& records) {
  LoadReport report;
  for (const auto& rec : records) {
    if (!rec.station) {
      report.rejects.push_back({rec.index, rec.line, {}, rec.error_code, rec.error});
      continue;
    }
    try {
      registry.register_station(*rec.station);
      ++report.registered;
    } catch (const Error& e) {
      report.rejects.push_back({rec.index, rec.line, rec.station->id, e.code(), e.what()});
    }
  }
  return report;
}

}  // namespace wecharge::catalog

#endif
