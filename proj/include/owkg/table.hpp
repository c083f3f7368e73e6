#pragma once

// Small result tables written as CSV (with a schema comment line) or JSON.

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace owkg {

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::string schema;  // "<name>/<version>", e.g. "simulate/1"
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);  // throws DomainError on a width mismatch
};

// Shortest representation that round-trips; empty for monostate.
std::string format_cell(const Cell& cell);

// First line "# schema: owkg.<schema>", then the header and rows.
void write_csv(std::ostream& os, const Table& table);
// {"schema": ..., "columns": [...], "rows": [{column: value}, ...]}
void write_json(std::ostream& os, const Table& table);

}  // namespace owkg
