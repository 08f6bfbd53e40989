#include "polyalg/report.hpp"

#include <algorithm>
#include <cmath>

namespace polyalg {

const Check& Report::add(std::string identity, double residual, double tolerance) {
  Check c;
  c.identity_name = std::move(identity);
  c.max_residual = residual;
  c.tolerance = tolerance;
  c.pass = !std::isnan(residual) && residual <= tolerance;
  checks_.push_back(std::move(c));
  return checks_.back();
}

const Check& Report::add_condition(std::string identity, bool holds) {
  return add(std::move(identity), holds ? 0.0 : 1.0, 0.0);
}

void Report::append(const Report& other) {
  for (const auto& c : other.checks()) {
    Check copy = c;
    if (!other.name().empty()) copy.identity_name = other.name() + "/" + c.identity_name;
    checks_.push_back(std::move(copy));
  }
}

bool Report::all_pass() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
}

double Report::max_residual() const {
  double m = 0.0;
  for (const auto& c : checks_) m = std::max(m, c.max_residual);
  return m;
}

const Check* Report::find(const std::string& identity) const {
  for (const auto& c : checks_) {
    if (c.identity_name == identity) return &c;
  }
  return nullptr;
}

nlohmann::ordered_json to_json(const Check& check) {
  nlohmann::ordered_json j;
  j["identity_name"] = check.identity_name;
  j["max_residual"] = check.max_residual;
  j["tolerance"] = check.tolerance;
  j["pass"] = check.pass;
  return j;
}

nlohmann::ordered_json Report::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks_) arr.push_back(polyalg::to_json(c));
  return arr;
}

}  // namespace polyalg
