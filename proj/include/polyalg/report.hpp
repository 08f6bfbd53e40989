#ifndef POLYALG_REPORT_HPP
#define POLYALG_REPORT_HPP

#include <string>
#include <vector>

#include "json.hpp"

namespace polyalg {

/// One verified identity: residual compared against a fixed tolerance.
struct Check {
  std::string identity_name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

class Report {
 public:
  Report() = default;
  explicit Report(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  const std::vector<Check>& checks() const { return checks_; }

  /// Records a residual check; pass iff residual <= tolerance (NaN fails).
  const Check& add(std::string identity, double residual, double tolerance);
  /// Records a boolean condition as residual 0 (holds) or 1 (violated).
  const Check& add_condition(std::string identity, bool holds);
  void append(const Report& other);

  bool all_pass() const;
  double max_residual() const;
  const Check* find(const std::string& identity) const;

  nlohmann::ordered_json to_json() const;

 private:
  std::string name_;
  std::vector<Check> checks_;
};

nlohmann::ordered_json to_json(const Check& check);

}  // namespace polyalg

#endif  // POLYALG_REPORT_HPP
