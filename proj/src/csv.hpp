#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "gibbs.hpp"
#include "model.hpp"
#include "simulate.hpp"

namespace co3 {

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvOptions {
  bool has_header = false;
  bool zero_based_codes = false;  // maps raw {0,...} codes to {1,...}
  int categories = 0;             // 0 = infer as the maximum observed code
};

/// Parses an ordinal data matrix: comma-separated integer codes, blank or
/// NA/na for censored entries. Errors name the offending row and column.
Dataset parse_dataset_csv(std::istream& in, const CsvOptions& opts);
Dataset load_dataset_csv(const std::string& path, const CsvOptions& opts);

/// Canonical form: no header, bare codes, empty fields for censored cells.
std::string dataset_to_csv(const Dataset& data);
void save_dataset_csv(const Dataset& data, const std::string& path);

/// Flat key=value configuration with a fixed key schema and defaults.
/// Unknown keys and malformed values are parse errors with line context.
class Options {
 public:
  Options();

  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;

  /// All keys in schema order as "key=value" lines.
  std::string dump() const;

  ModelConfig model_config() const;
  GibbsControls gibbs_controls() const;
  ScenarioConfig scenario_config() const;
  CsvOptions csv_options() const;

  /// Cutoffs for c categories honoring a "cutoffs" override.
  Cutoffs cutoffs_for(int c) const;

  static const std::vector<std::pair<std::string, std::string>>& schema();

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace co3
