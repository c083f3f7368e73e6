#include "owkg/table.hpp"

#include <fmt/format.h>

#include <cmath>

#include "json.hpp"
#include "owkg/common.hpp"

namespace owkg {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw DomainError(fmt::format("table {}: row has {} cells, expected {}", schema, row.size(),
                                  columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double x) const { return fmt::format("{}", x); }
    std::string operator()(std::int64_t x) const { return fmt::format("{}", x); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, cell);
}

void write_csv(std::ostream& os, const Table& table) {
  os << "# schema: owkg." << table.schema << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
}

void write_json(std::ostream& os, const Table& table) {
  nlohmann::ordered_json doc;
  doc["schema"] = "owkg." + table.schema;
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Cell& c = row[i];
      if (std::holds_alternative<std::monostate>(c)) {
        obj[table.columns[i]] = nullptr;
      } else if (const double* d = std::get_if<double>(&c)) {
        // JSON has no nan/inf
        obj[table.columns[i]] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nullptr;
      } else if (const auto* n = std::get_if<std::int64_t>(&c)) {
        obj[table.columns[i]] = *n;
      } else {
        obj[table.columns[i]] = std::get<std::string>(c);
      }
    }
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << '\n';
}

}  // namespace owkg
