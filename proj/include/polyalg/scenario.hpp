#ifndef POLYALG_SCENARIO_HPP
#define POLYALG_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polyalg/dynamics.hpp"
#include "polyalg/errors.hpp"
#include "polyalg/json_io.hpp"
#include "polyalg/polarization.hpp"
#include "polyalg/report.hpp"

namespace polyalg {

/// Malformed JSON in a scenario file.
class ConfigParseError : public Error {
 public:
  ConfigParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class ModelKind { mps, polarization };

struct EvolveSettings {
  /// Blocks (k, 2j) for mps; empty selects every fitting block with 2 <= dim <= 11.
  std::vector<std::pair<int, int>> blocks;
  /// Doubled quasispin values for polarization sectors.
  std::vector<int> two_p{0, 2};
  /// Conservation window in units of 1 / |H_block|.
  double t_norm_max = 50.0;
  int points = 1001;
  /// Ehrenfest window in units of 1 / |H_block| (sampled with the same number of points).
  double ehrenfest_window = 5.0;
};

struct BlochSettings {
  std::optional<std::pair<int, int>> block;
  /// Time window in units of 1 / (|g| (2j)^{(s-1)/2}).
  double horizon = 10.0;
  int points = 4001;
  /// Initial classical point; defaults to the expectations in the reference vector.
  std::optional<BlochState> init;
};

struct CompareSettings {
  std::vector<int> two_j{4, 10, 20, 40};
  double horizon = 1.0;
  int points = 401;
};

struct PscalarSettings {
  std::vector<std::array<int, 3>> clusters{{1, 2, 1}};
  int max_order = 4;
};

struct ScenarioConfig {
  ModelKind model = ModelKind::mps;
  int n = 1;
  int s = 2;
  int n_spatial = 2;
  int cutoff = 8;
  int margin = 0;
  std::size_t max_states = FockBasis::kDefaultMaxStates;
  std::vector<std::string> tasks;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  bool random_hamiltonian = false;
  MpsHamiltonianParams mps_params;
  PolarizationHamiltonianParams pol_params;
  /// Largest 2j considered by the hp task.
  int hp_max_two_j = 10;
  EvolveSettings evolve;
  BlochSettings bloch;
  CompareSettings compare;
  PscalarSettings pscalar;
};

/// Parses a scenario document. Throws ConfigParseError for malformed JSON and
/// ValidationError naming the offending field for schema violations.
ScenarioConfig parse_config(const std::string& text);

struct SummaryEntry {
  std::string task;
  Check check;
};

struct ScenarioResult {
  std::vector<SummaryEntry> entries;
  ArtifactWriter artifacts;
  bool all_pass() const;
  nlohmann::ordered_json summary_json() const;
};

struct RunOptions {
  int threads = 1;
  bool verbose = false;
};

/// Runs every task of the scenario and collects the artifacts in memory
/// (summary.json last). Library errors raised inside a task are recorded as a
/// failing check named after the task.
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace polyalg

#endif  // POLYALG_SCENARIO_HPP
