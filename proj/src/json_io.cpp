#include "polyalg/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "polyalg/errors.hpp"

namespace polyalg {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

void emit(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::ordered_json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        emit(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        emit(e, indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  emit(value, indent, 0, out);
  out += '\n';
  return out;
}

std::string format_csv(const std::vector<CsvColumn>& columns) {
  std::string out;
  std::size_t rows = columns.empty() ? 0 : columns.front().values.size();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].values.size() != rows) throw StructuralError("format_csv: column '" + columns[c].name + "' has a different length");
    if (c) out += ',';
    out += columns[c].name;
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c].values[r]);
    }
    out += '\n';
  }
  return out;
}

void ArtifactWriter::add(std::string file_name, std::string content) {
  files_.emplace_back(std::move(file_name), std::move(content));
}

void ArtifactWriter::add_json(std::string file_name, const nlohmann::ordered_json& value) {
  add(std::move(file_name), dump_json(value));
}

void ArtifactWriter::add_csv(std::string file_name, const std::vector<CsvColumn>& columns) {
  add(std::move(file_name), format_csv(columns));
}

std::vector<std::filesystem::path> ArtifactWriter::flush(const std::filesystem::path& directory) const {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : files_) {
    const auto path = directory / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw Error("failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace polyalg
