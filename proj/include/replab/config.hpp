#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace replab {

/// Flat typed key-value experiment configuration with [section] grouping.
/// Unknown keys are rejected against the built-in schema; every run can emit
/// the fully resolved document (defaults materialized, sorted) for
/// reproducibility.
class ExperimentConfig {
 public:
  /// Schema defaults only.
  ExperimentConfig();

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_text(const std::string& text);

  /// `section.key=value`; validates against the schema.
  void apply_override(const std::string& assignment);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Fully resolved INI text, sections and keys sorted.
  std::string resolved_text() const;

 private:
  // section -> key -> value (string form; schema gives the type)
  std::map<std::string, std::map<std::string, std::string>> values_;

  void check_known(const std::string& section, const std::string& key) const;
};

}  // namespace replab
