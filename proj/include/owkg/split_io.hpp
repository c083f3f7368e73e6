#pragma once

// On-disk form of a WorldSplit:
//   split.json    manifest (config, alpha, per-set counts, seed)
//   entities.tsv  id<TAB>gender
//   full.tsv, test.tsv, train.tsv   fact files in the kg_io line format
// test.tsv includes the training facts, mirroring G_train ⊆ G_test.
//
// Query sets are JSON lines, one QueryAnswerPartition per line:
//   {"relation":"sisterOf","head":12,"train":[..],"test":[..],"missing":[..]}

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "owkg/world_split.hpp"

namespace owkg {

inline constexpr int kSplitSchemaVersion = 1;

void save_split(const std::filesystem::path& dir, const WorldSplit& split);

// Rebuilds roles from the three fact files. Throws std::runtime_error when the
// files are not nested or disagree with the manifest counts.
WorldSplit load_split(const std::filesystem::path& dir);

void write_queries(std::ostream& os, const std::vector<QueryAnswerPartition>& queries);
std::vector<QueryAnswerPartition> read_queries(std::istream& is);

void save_queries(const std::filesystem::path& file,
                  const std::vector<QueryAnswerPartition>& queries);
std::vector<QueryAnswerPartition> load_queries(const std::filesystem::path& file);

}  // namespace owkg
