#include "owkg/split_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "owkg/kg_io.hpp"

namespace owkg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  return in;
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

}  // namespace

void save_split(const fs::path& dir, const WorldSplit& split) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / kEntitiesFile);
    write_entities(out, split.genders);
  }
  save_facts(dir / "full.tsv", split.full);
  save_facts(dir / "test.tsv", split.g_test());
  save_facts(dir / "train.tsv", split.g_train());

  json manifest = {
      {"schema_version", kSplitSchemaVersion},
      {"density", split.config.density},
      {"train_ratio", split.config.train_ratio},
      {"seed", split.config.seed},
      {"alpha", split.alpha()},
      {"beta", split.sparsity()},
      {"counts",
       {{"full", split.full.size()},
        {"test", split.full.size() - split.count(FactRole::kMissing)},
        {"train", split.count(FactRole::kTrain)},
        {"missing", split.count(FactRole::kMissing)}}},
      {"num_entities", split.num_entities()},
  };
  auto out = open_out(dir / "split.json");
  out << manifest.dump(2) << '\n';
}

WorldSplit load_split(const fs::path& dir) {
  json manifest;
  {
    auto in = open_in(dir / "split.json");
    manifest = json::parse(in);
  }
  if (manifest.at("schema_version").get<int>() != kSplitSchemaVersion) {
    throw std::runtime_error("unsupported split schema version");
  }
  WorldSplit split;
  split.config.density = manifest.at("density").get<double>();
  split.config.train_ratio = manifest.at("train_ratio").get<double>();
  split.config.seed = manifest.at("seed").get<std::uint64_t>();
  {
    auto in = open_in(dir / kEntitiesFile);
    split.genders = read_entities(in);
  }
  const std::size_t n = split.genders.size();
  split.full = load_facts(dir / "full.tsv", n);
  std::sort(split.full.begin(), split.full.end());
  auto test = load_facts(dir / "test.tsv", n);
  auto train = load_facts(dir / "train.tsv", n);
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  if (!std::includes(split.full.begin(), split.full.end(), test.begin(), test.end()) ||
      !std::includes(test.begin(), test.end(), train.begin(), train.end())) {
    throw std::runtime_error("split files are not nested (train ⊆ test ⊆ full)");
  }
  split.roles.resize(split.full.size());
  for (std::size_t i = 0; i < split.full.size(); ++i) {
    const Fact& f = split.full[i];
    if (std::binary_search(train.begin(), train.end(), f)) {
      split.roles[i] = FactRole::kTrain;
    } else if (std::binary_search(test.begin(), test.end(), f)) {
      split.roles[i] = FactRole::kTest;
    } else {
      split.roles[i] = FactRole::kMissing;
    }
  }
  const auto& counts = manifest.at("counts");
  if (counts.at("full").get<std::size_t>() != split.full.size() ||
      counts.at("test").get<std::size_t>() != test.size() ||
      counts.at("train").get<std::size_t>() != train.size()) {
    throw std::runtime_error("split files disagree with split.json counts");
  }
  return split;
}

void write_queries(std::ostream& os, const std::vector<QueryAnswerPartition>& queries) {
  for (const auto& q : queries) {
    const json line = {{"relation", std::string(relation_name(q.relation))},
                       {"head", q.head},
                       {"train", q.train},
                       {"test", q.test},
                       {"missing", q.missing}};
    os << line.dump() << '\n';
  }
}

std::vector<QueryAnswerPartition> read_queries(std::istream& is) {
  std::vector<QueryAnswerPartition> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto rel = parse_relation(j.at("relation").get<std::string>());
      if (!rel) throw std::runtime_error("unknown relation");
      QueryAnswerPartition q{*rel, j.at("head").get<EntityId>(),
                             j.at("train").get<std::vector<EntityId>>(),
                             j.at("test").get<std::vector<EntityId>>(),
                             j.at("missing").get<std::vector<EntityId>>()};
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_queries(const fs::path& file, const std::vector<QueryAnswerPartition>& queries) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  auto out = open_out(file);
  write_queries(out, queries);
}

std::vector<QueryAnswerPartition> load_queries(const fs::path& file) {
  auto in = open_in(file);
  return read_queries(in);
}

}  // namespace owkg
