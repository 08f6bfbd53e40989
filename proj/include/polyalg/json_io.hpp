#ifndef POLYALG_JSON_IO_HPP
#define POLYALG_JSON_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace polyalg {

/// "%.17g"; non-finite values become "nan", "inf" or "-inf".
std::string format_double(double value);

/// Serializes JSON with every floating-point number printed to 17 significant
/// digits (non-finite numbers become null). Object keys keep insertion order.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

struct CsvColumn {
  std::string name;
  std::vector<double> values;
};

/// Header row of column names, then one row per index, 17 significant digits.
/// Throws StructuralError when column lengths differ.
std::string format_csv(const std::vector<CsvColumn>& columns);

/// Collects artifacts in memory and writes them from a single thread, in the
/// order they were added.
class ArtifactWriter {
 public:
  void add(std::string file_name, std::string content);
  void add_json(std::string file_name, const nlohmann::ordered_json& value);
  void add_csv(std::string file_name, const std::vector<CsvColumn>& columns);
  const std::vector<std::pair<std::string, std::string>>& artifacts() const { return files_; }
  /// Creates `directory` if needed and writes every artifact; returns the paths written.
  std::vector<std::filesystem::path> flush(const std::filesystem::path& directory) const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace polyalg

#endif  // POLYALG_JSON_IO_HPP
