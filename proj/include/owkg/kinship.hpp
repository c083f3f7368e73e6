#pragma once

// Synthetic closed-world family-tree knowledge graph: base population
// sampling, rule closure and closed-world validation.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace owkg {

using EntityId = std::uint32_t;

enum class Gender : std::uint8_t { kFemale, kMale };

// The 23 kinship relations. Order is fixed; it is the serialization order.
enum class Relation : std::uint8_t {
  kParentOf,
  kSisterOf,
  kBrotherOf,
  kSiblingOf,
  kMotherOf,
  kFatherOf,
  kWifeOf,
  kHusbandOf,
  kGrandmotherOf,
  kGrandfatherOf,
  kAuntOf,
  kUncleOf,
  kGirlCousinOf,
  kBoyCousinOf,
  kCousinOf,
  kDaughterOf,
  kSonOf,
  kChildOf,
  kGranddaughterOf,
  kGrandsonOf,
  kGrandchildOf,
  kNieceOf,
  kNephewOf,
};

inline constexpr std::size_t kNumRelations = 23;

std::string_view relation_name(Relation r);
std::optional<Relation> parse_relation(std::string_view name);
const std::array<Relation, kNumRelations>& all_relations();

std::string_view gender_name(Gender g);
std::optional<Gender> parse_gender(std::string_view name);

struct Fact {
  Relation relation;
  EntityId head;
  EntityId tail;

  friend auto operator<=>(const Fact&, const Fact&) = default;
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  explicit KnowledgeGraph(std::vector<Gender> genders);

  EntityId add_entity(Gender g);

  // Throws DomainError on unknown entities or head == tail. Duplicates are
  // ignored. Returns true when the fact was new.
  bool add_fact(const Fact& f);
  bool contains(const Fact& f) const;

  std::size_t num_entities() const { return genders_.size(); }
  std::size_t num_facts() const { return facts_.size(); }
  Gender gender(EntityId e) const { return genders_.at(e); }
  const std::vector<Gender>& genders() const { return genders_; }

  // Facts in canonical (relation, head, tail) order.
  const std::vector<Fact>& facts() const;

  bool closed() const { return closed_; }
  void mark_closed() { closed_ = true; }

  std::size_t count(Relation r) const;

  // Removes a fact; clears the closed flag. Test hook for fault injection.
  bool erase_fact(const Fact& f);

 private:
  std::vector<Gender> genders_;
  mutable std::vector<Fact> facts_;
  mutable bool sorted_ = true;
  std::unordered_set<std::uint64_t> keys_;
  std::array<std::size_t, kNumRelations> per_relation_{};
  bool closed_ = false;

  void ensure_sorted() const;
};

struct TreeGenConfig {
  int n_trees = 20;
  int depth = 3;  // married generations below the root couple
  int entities_per_tree = 300;
  int max_branching = 20;
  std::uint64_t seed = 0;
};

// Largest tree the (depth, branching) shape admits: a full tree where every
// non-leaf child is married.
std::uint64_t max_tree_size(int depth, int max_branching);

// Samples n_trees disjoint families. Each tree starts from a root couple
// (generation 0) and grows one child at a time: an open couple (fewer than
// max_branching children) is picked with weight 1/(children + 1) and gets a
// child of uniformly random gender. Children in generations 1..depth marry a
// new entity of the opposite gender and become couples themselves; children
// in generation depth + 1 are leaves. Growth stops at entities_per_tree
// entities.
KnowledgeGraph generate_base_population(const TreeGenConfig& config);

// Least fixpoint of the kinship rule set. Sets the closed flag.
KnowledgeGraph deduce_closure(const KnowledgeGraph& kg);

struct Violation {
  Fact fact;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Compares the graph against the closed-world kinship semantics computed
// directly from parentOf, the spouse relations and gender (without the rule
// engine). Reports one violation per spurious or missing fact, plus one per
// malformed spouse fact.
ValidationReport validate_closed_world(const KnowledgeGraph& kg);

}  // namespace owkg
