#include "owkg/kg_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace owkg {

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_id(std::string_view s, EntityId& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_in(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

}  // namespace

void write_facts(std::ostream& os, std::span<const Fact> facts) {
  std::vector<Fact> sorted(facts.begin(), facts.end());
  std::sort(sorted.begin(), sorted.end());
  for (const Fact& f : sorted) {
    os << f.head << '\t' << relation_name(f.relation) << '\t' << f.tail << '\n';
  }
}

void write_entities(std::ostream& os, const std::vector<Gender>& genders) {
  for (std::size_t i = 0; i < genders.size(); ++i) {
    os << i << '\t' << gender_name(genders[i]) << '\n';
  }
}

std::vector<Fact> read_facts(std::istream& is, std::size_t num_entities) {
  std::vector<Fact> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) malformed(line_no, "expected 3 tab-separated fields");
    Fact f{};
    if (!parse_id(fields[0], f.head) || !parse_id(fields[2], f.tail)) {
      malformed(line_no, "bad entity id");
    }
    const auto r = parse_relation(fields[1]);
    if (!r) malformed(line_no, "unknown relation '" + std::string(fields[1]) + "'");
    f.relation = *r;
    if (f.head >= num_entities || f.tail >= num_entities) {
      malformed(line_no, "entity id out of range");
    }
    out.push_back(f);
  }
  return out;
}

std::vector<Gender> read_entities(std::istream& is) {
  std::vector<Gender> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) malformed(line_no, "expected 2 tab-separated fields");
    EntityId id = 0;
    if (!parse_id(fields[0], id) || id != out.size()) {
      malformed(line_no, "entity ids must be dense and ascending");
    }
    const auto g = parse_gender(fields[1]);
    if (!g) malformed(line_no, "unknown gender '" + std::string(fields[1]) + "'");
    out.push_back(*g);
  }
  return out;
}

void save_facts(const std::filesystem::path& file, std::span<const Fact> facts) {
  auto out = open_out(file);
  write_facts(out, facts);
}

std::vector<Fact> load_facts(const std::filesystem::path& file,
                             std::size_t num_entities) {
  auto in = open_in(file);
  return read_facts(in, num_entities);
}

void save_graph(const std::filesystem::path& dir, const KnowledgeGraph& kg) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / kEntitiesFile);
    write_entities(out, kg.genders());
  }
  save_facts(dir / kFactsFile, kg.facts());
}

KnowledgeGraph load_graph(const std::filesystem::path& dir, bool closed,
                          const char* facts_file) {
  auto in = open_in(dir / kEntitiesFile);
  KnowledgeGraph kg(read_entities(in));
  for (const Fact& f : load_facts(dir / facts_file, kg.num_entities())) {
    kg.add_fact(f);
  }
  if (closed) kg.mark_closed();
  return kg;
}

}  // namespace owkg
