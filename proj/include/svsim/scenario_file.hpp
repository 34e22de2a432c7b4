#pragma once

// Scenario files are a small TOML subset:
//
//   # comment
//   [section.name]
//   key = 12.5            # numbers (underscores and exponents allowed)
//   key = "text"          # strings
//   key = true            # booleans
//   key = [1, [2, "x"]]   # arrays, may span lines, may nest
//
// Section and key names are documented in README.md.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "svsim/core_model.hpp"

namespace svsim {

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what);

  int line() const { return line_; }
  int column() const { return column_; }
  // Message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

struct Value {
  enum class Kind { kNumber, kString, kBool, kArray };

  Kind kind = Kind::kNumber;
  double number = 0.0;
  bool integral = false;
  std::string text;
  bool boolean = false;
  std::vector<Value> items;
  int line = 0;
  int column = 0;
};

struct Entry {
  std::string key;
  Value value;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;

  const Value* find(std::string_view key) const;
};

struct Document {
  std::vector<Section> sections;

  const Section* find(std::string_view name) const;
};

Document parse_document(std::string_view text);

// Parses scenario text. Relative topology files resolve against base_dir.
ScenarioConfig scenario_from_text(std::string_view text,
                                  const std::filesystem::path& base_dir = {});

// Reads and parses a scenario file. The returned config is raw; pass it
// through validate_scenario before running it.
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace svsim
