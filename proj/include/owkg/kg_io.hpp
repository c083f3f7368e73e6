#pragma once

// Line formats for knowledge graphs:
//   facts file:    head<TAB>relation<TAB>tail, sorted by (relation, head, tail)
//   entities file: id<TAB>gender, sorted by id

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "owkg/kinship.hpp"

namespace owkg {

void write_facts(std::ostream& os, std::span<const Fact> facts);
void write_entities(std::ostream& os, const std::vector<Gender>& genders);

// Throws std::runtime_error with the offending line number on malformed input.
std::vector<Fact> read_facts(std::istream& is, std::size_t num_entities);
std::vector<Gender> read_entities(std::istream& is);

inline constexpr const char* kEntitiesFile = "entities.tsv";
inline constexpr const char* kFactsFile = "facts.tsv";

// Writes entities.tsv and facts.tsv into `dir` (created if needed).
void save_graph(const std::filesystem::path& dir, const KnowledgeGraph& kg);

// Reads entities.tsv and `facts_file` from `dir`. The closed flag is set when
// `closed` is true; callers take that from the run manifest.
KnowledgeGraph load_graph(const std::filesystem::path& dir, bool closed,
                          const char* facts_file = kFactsFile);

std::vector<Fact> load_facts(const std::filesystem::path& file,
                             std::size_t num_entities);
void save_facts(const std::filesystem::path& file, std::span<const Fact> facts);

}  // namespace owkg
