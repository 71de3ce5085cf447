#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "basisrisk/evaluate.hpp"
#include "basisrisk/report.hpp"
#include "basisrisk/simulate.hpp"
#include "basisrisk/types.hpp"

namespace basisrisk {

// Flat declarative text: [section] headers, key = value lines, '#' or ';'
// comments. Values keep internal spaces, outer whitespace trimmed.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text,
                                     const std::string& origin = "<config>");

  void set(const std::string& section, const std::string& key,
           const std::string& value);
  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;

  std::string get_string(const std::string& sec, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& sec, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& sec, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& sec, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& sec, const std::string& key, bool fallback) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class InputMode { synthetic, file };
enum class EvalMode { simulated, raw };

struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir = "out";

  InputMode input_mode = InputMode::synthetic;
  std::string input_path;
  bool archetype_preset = false;
  SyntheticConfig synthetic;
  bool persist_panel = false;

  int min_years = 8;
  EvalMode eval_mode = EvalMode::simulated;
  SimulationSpec sim;
  bool persist_simulated = false;

  ContractPlan plan;
  PreferenceSpec pref;
  EvaluateOptions eval_opts;
  ReportOptions report;
  std::vector<int> sweep_sizes = {20, 30, 60, 100, 250, 500};

  KeyValueConfig raw;  // echoed into the run manifest
};

// Accepts "0.2,0.35,0.9" lists or "0.20:0.95:0.05" ranges; every value must
// sit on the contract grid.
std::vector<double> parse_trigger_list(const std::string& text);

// Validates and assembles the typed run configuration. The seed must be
// given explicitly ([run] seed or --seed); there is no wall-clock default.
RunConfig load_run_config(const KeyValueConfig& kv);

}  // namespace basisrisk
