#include "owkg/kinship.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "owkg/common.hpp"
#include "owkg/rule_engine.hpp"

namespace owkg {

namespace {

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "parentOf",       "sisterOf",        "brotherOf",     "siblingOf",
    "motherOf",       "fatherOf",        "wifeOf",        "husbandOf",
    "grandmotherOf",  "grandfatherOf",   "auntOf",        "uncleOf",
    "girlCousinOf",   "boyCousinOf",     "cousinOf",      "daughterOf",
    "sonOf",          "childOf",         "granddaughterOf", "grandsonOf",
    "grandchildOf",   "nieceOf",         "nephewOf",
};

std::uint64_t pack(const Fact& f) {
  return (static_cast<std::uint64_t>(f.relation) << 58) |
         (static_cast<std::uint64_t>(f.head) << 29) | f.tail;
}

constexpr EntityId kMaxEntities = (1u << 29) - 1;

Gender opposite(Gender g) {
  return g == Gender::kFemale ? Gender::kMale : Gender::kFemale;
}

}  // namespace

std::string_view relation_name(Relation r) {
  return kRelationNames.at(static_cast<std::size_t>(r));
}

std::optional<Relation> parse_relation(std::string_view name) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (kRelationNames[i] == name) return static_cast<Relation>(i);
  }
  return std::nullopt;
}

const std::array<Relation, kNumRelations>& all_relations() {
  static const auto relations = [] {
    std::array<Relation, kNumRelations> out{};
    for (std::size_t i = 0; i < kNumRelations; ++i) {
      out[i] = static_cast<Relation>(i);
    }
    return out;
  }();
  return relations;
}

std::string_view gender_name(Gender g) {
  return g == Gender::kFemale ? "female" : "male";
}

std::optional<Gender> parse_gender(std::string_view name) {
  if (name == "female") return Gender::kFemale;
  if (name == "male") return Gender::kMale;
  return std::nullopt;
}

// --- KnowledgeGraph ---------------------------------------------------------

KnowledgeGraph::KnowledgeGraph(std::vector<Gender> genders)
    : genders_(std::move(genders)) {
  if (genders_.size() > kMaxEntities) throw DomainError("too many entities");
}

EntityId KnowledgeGraph::add_entity(Gender g) {
  if (genders_.size() >= kMaxEntities) throw DomainError("too many entities");
  genders_.push_back(g);
  closed_ = false;
  return static_cast<EntityId>(genders_.size() - 1);
}

bool KnowledgeGraph::add_fact(const Fact& f) {
  if (f.head >= genders_.size() || f.tail >= genders_.size()) {
    throw DomainError("fact references an unknown entity");
  }
  if (f.head == f.tail) throw DomainError("fact head equals tail");
  if (static_cast<std::size_t>(f.relation) >= kNumRelations) {
    throw DomainError("unknown relation");
  }
  if (!keys_.insert(pack(f)).second) return false;
  if (sorted_ && !facts_.empty() && f < facts_.back()) sorted_ = false;
  facts_.push_back(f);
  ++per_relation_[static_cast<std::size_t>(f.relation)];
  closed_ = false;
  return true;
}

bool KnowledgeGraph::contains(const Fact& f) const {
  return keys_.contains(pack(f));
}

bool KnowledgeGraph::erase_fact(const Fact& f) {
  if (keys_.erase(pack(f)) == 0) return false;
  facts_.erase(std::find(facts_.begin(), facts_.end(), f));
  --per_relation_[static_cast<std::size_t>(f.relation)];
  closed_ = false;
  return true;
}

void KnowledgeGraph::ensure_sorted() const {
  if (!sorted_) {
    std::sort(facts_.begin(), facts_.end());
    sorted_ = true;
  }
}

const std::vector<Fact>& KnowledgeGraph::facts() const {
  ensure_sorted();
  return facts_;
}

std::size_t KnowledgeGraph::count(Relation r) const {
  return per_relation_[static_cast<std::size_t>(r)];
}

// --- Generation -------------------------------------------------------------

std::uint64_t max_tree_size(int depth, int max_branching) {
  if (depth < 1 || max_branching < 1) return 0;
  // Root couple, then generations 1..depth + 1. Generations 1..depth are
  // married; generation depth + 1 is leaves.
  constexpr std::uint64_t kCap = std::uint64_t{1} << 40;
  std::uint64_t total = 2;
  std::uint64_t width = 1;
  for (int g = 1; g <= depth + 1; ++g) {
    width = std::min(kCap, width * static_cast<std::uint64_t>(max_branching));
    total = std::min(kCap, total + (g <= depth ? 2 * width : width));
  }
  return total;
}

KnowledgeGraph generate_base_population(const TreeGenConfig& config) {
  if (config.n_trees < 1 || config.depth < 1 || config.entities_per_tree < 1 ||
      config.max_branching < 1) {
    throw DomainError("tree generation counts must be >= 1");
  }
  const std::uint64_t capacity = max_tree_size(config.depth, config.max_branching);
  if (config.entities_per_tree < 2 ||
      static_cast<std::uint64_t>(config.entities_per_tree) > capacity) {
    std::ostringstream msg;
    msg << "entities_per_tree=" << config.entities_per_tree
        << " is unsatisfiable for depth=" << config.depth
        << ", max_branching=" << config.max_branching << " (feasible range [2, "
        << capacity << "])";
    throw DomainError(msg.str());
  }
  const std::uint64_t total = static_cast<std::uint64_t>(config.n_trees) *
                              static_cast<std::uint64_t>(config.entities_per_tree);
  if (total > kMaxEntities) throw DomainError("too many entities requested");

  struct Couple {
    EntityId blood;
    EntityId spouse;
    int generation;
    int children = 0;
  };

  KnowledgeGraph kg;
  const auto marry = [&kg](EntityId a, EntityId b) {
    const EntityId wife = kg.gender(a) == Gender::kFemale ? a : b;
    const EntityId husband = wife == a ? b : a;
    kg.add_fact({Relation::kWifeOf, wife, husband});
    kg.add_fact({Relation::kHusbandOf, husband, wife});
  };

  for (int tree = 0; tree < config.n_trees; ++tree) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(tree)));
    const auto random_gender = [&rng] {
      return bernoulli(rng, 0.5) ? Gender::kFemale : Gender::kMale;
    };
    int size = 0;
    std::vector<Couple> couples;
    std::vector<std::size_t> open;  // indices into couples

    const EntityId root = kg.add_entity(random_gender());
    const EntityId root_spouse = kg.add_entity(opposite(kg.gender(root)));
    size += 2;
    marry(root, root_spouse);
    couples.push_back({root, root_spouse, 0});
    open.push_back(0);

    std::vector<double> weights;
    while (size < config.entities_per_tree && !open.empty()) {
      weights.clear();
      double sum = 0.0;
      for (std::size_t idx : open) {
        const double w = 1.0 / (couples[idx].children + 1);
        weights.push_back(w);
        sum += w;
      }
      double u = uniform01(rng) * sum;
      std::size_t pick = open.size() - 1;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) {
          pick = i;
          break;
        }
        u -= weights[i];
      }
      const std::size_t couple_index = open[pick];
      Couple& parents = couples[couple_index];
      const int generation = parents.generation + 1;
      const EntityId blood = parents.blood;
      const EntityId spouse = parents.spouse;

      const EntityId child = kg.add_entity(random_gender());
      ++size;
      kg.add_fact({Relation::kParentOf, blood, child});
      kg.add_fact({Relation::kParentOf, spouse, child});
      if (++parents.children >= config.max_branching) {
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      if (generation <= config.depth && size < config.entities_per_tree) {
        const EntityId partner = kg.add_entity(opposite(kg.gender(child)));
        ++size;
        marry(child, partner);
        couples.push_back({child, partner, generation});
        open.push_back(couples.size() - 1);
      }
    }
  }
  return kg;
}

// --- Closure ----------------------------------------------------------------

namespace {

constexpr int kFemalePredicate = 0;
constexpr int kMalePredicate = 1;

int rel(Relation r) { return static_cast<int>(r); }

std::vector<rules::Rule> kinship_rules() {
  using rules::Atom;
  using rules::Rule;
  const Atom parent{rel(Relation::kParentOf)};
  const Atom child{rel(Relation::kChildOf)};
  const Atom sibling{rel(Relation::kSiblingOf)};

  std::vector<Rule> out;
  const auto gendered = [&out](Relation female, Relation male, std::vector<Atom> body,
                               bool distinct = false) {
    out.push_back({rel(female), body, kFemalePredicate, distinct});
    out.push_back({rel(male), body, kMalePredicate, distinct});
  };

  // Inverse pairs.
  const auto inverse = [&out](Relation head, Relation body) {
    out.push_back({rel(head), {{rel(body), true}}, std::nullopt, false});
  };
  inverse(Relation::kChildOf, Relation::kParentOf);
  inverse(Relation::kParentOf, Relation::kChildOf);
  inverse(Relation::kWifeOf, Relation::kHusbandOf);
  inverse(Relation::kHusbandOf, Relation::kWifeOf);

  // Neutral relations by composition.
  out.push_back({rel(Relation::kSiblingOf), {child, parent}, std::nullopt, true});
  out.push_back({rel(Relation::kGrandchildOf), {child, child}, std::nullopt, true});
  out.push_back({rel(Relation::kCousinOf),
                 {child, {rel(Relation::kAuntOf)}}, std::nullopt, true});
  out.push_back({rel(Relation::kCousinOf),
                 {child, {rel(Relation::kUncleOf)}}, std::nullopt, true});

  // Gendered refinements, keyed on the head entity.
  gendered(Relation::kMotherOf, Relation::kFatherOf, {parent});
  gendered(Relation::kDaughterOf, Relation::kSonOf, {child});
  gendered(Relation::kSisterOf, Relation::kBrotherOf, {sibling});
  gendered(Relation::kGrandmotherOf, Relation::kGrandfatherOf, {parent, parent}, true);
  gendered(Relation::kGranddaughterOf, Relation::kGrandsonOf,
           {{rel(Relation::kGrandchildOf)}});
  gendered(Relation::kAuntOf, Relation::kUncleOf, {sibling, parent}, true);
  gendered(Relation::kNieceOf, Relation::kNephewOf, {child, sibling}, true);
  gendered(Relation::kGirlCousinOf, Relation::kBoyCousinOf,
           {{rel(Relation::kCousinOf)}});
  return out;
}

}  // namespace

KnowledgeGraph deduce_closure(const KnowledgeGraph& kg) {
  if (kg.closed()) return kg;
  const std::size_t n = kg.num_entities();
  rules::UnaryTable unary(2, std::vector<bool>(n, false));
  for (std::size_t e = 0; e < n; ++e) {
    const int pred = kg.gender(static_cast<EntityId>(e)) == Gender::kFemale
                         ? kFemalePredicate
                         : kMalePredicate;
    unary[static_cast<std::size_t>(pred)][e] = true;
  }
  rules::Engine engine(n, static_cast<int>(kNumRelations), std::move(unary));
  for (auto& rule : kinship_rules()) engine.add_rule(std::move(rule));
  for (const Fact& f : kg.facts()) engine.insert(rel(f.relation), f.head, f.tail);
  engine.saturate();

  KnowledgeGraph out(kg.genders());
  engine.for_each([&out](int r, rules::Node h, rules::Node t) {
    out.add_fact({static_cast<Relation>(r), h, t});
  });
  out.facts();  // sort once up front
  out.mark_closed();
  return out;
}

// --- Validation -------------------------------------------------------------

namespace {

std::string describe(const Fact& f) {
  std::ostringstream os;
  os << relation_name(f.relation) << '(' << f.head << ", " << f.tail << ')';
  return os.str();
}

// Expected closed-world fact set, computed directly from the parent and
// spouse structure. Returns facts with a short provenance label.
std::map<Fact, std::string> expected_facts(const KnowledgeGraph& kg) {
  const std::size_t n = kg.num_entities();
  std::vector<std::vector<EntityId>> parents(n);
  std::vector<std::vector<EntityId>> children(n);
  std::set<std::pair<EntityId, EntityId>> couples;  // (wife, husband)
  for (const Fact& f : kg.facts()) {
    switch (f.relation) {
      case Relation::kParentOf:
        parents[f.tail].push_back(f.head);
        children[f.head].push_back(f.tail);
        break;
      case Relation::kWifeOf:
        couples.insert({f.head, f.tail});
        break;
      case Relation::kHusbandOf:
        couples.insert({f.tail, f.head});
        break;
      default:
        break;
    }
  }
  const auto female = [&kg](EntityId e) { return kg.gender(e) == Gender::kFemale; };

  std::map<Fact, std::string> out;
  const auto put = [&out](Relation r, EntityId h, EntityId t, const char* why) {
    if (h != t) out.emplace(Fact{r, h, t}, why);
  };
  for (const auto& [wife, husband] : couples) {
    put(Relation::kWifeOf, wife, husband, "spouse pair");
    put(Relation::kHusbandOf, husband, wife, "spouse pair");
  }

  std::vector<std::set<EntityId>> siblings(n);
  for (EntityId x = 0; x < n; ++x) {
    for (EntityId p : parents[x]) {
      for (EntityId y : children[p]) {
        if (y != x) siblings[x].insert(y);
      }
    }
  }

  for (EntityId x = 0; x < n; ++x) {
    for (EntityId p : parents[x]) {
      put(Relation::kParentOf, p, x, "base parent");
      put(Relation::kChildOf, x, p, "inverse of parentOf");
      put(female(p) ? Relation::kMotherOf : Relation::kFatherOf, p, x,
          "gendered parentOf");
      put(female(x) ? Relation::kDaughterOf : Relation::kSonOf, x, p,
          "gendered childOf");
      for (EntityId g : parents[p]) {
        put(female(g) ? Relation::kGrandmotherOf : Relation::kGrandfatherOf, g, x,
            "parent of parent");
        put(Relation::kGrandchildOf, x, g, "inverse of grandparent");
        put(female(x) ? Relation::kGranddaughterOf : Relation::kGrandsonOf, x, g,
            "gendered grandchildOf");
      }
      for (EntityId s : siblings[p]) {
        put(female(s) ? Relation::kAuntOf : Relation::kUncleOf, s, x,
            "sibling of parent");
        put(female(x) ? Relation::kNieceOf : Relation::kNephewOf, x, s,
            "inverse of aunt/uncle");
        for (EntityId c : children[s]) {
          put(Relation::kCousinOf, x, c, "child of parent's sibling");
          put(female(x) ? Relation::kGirlCousinOf : Relation::kBoyCousinOf, x, c,
              "gendered cousinOf");
        }
      }
    }
    for (EntityId y : siblings[x]) {
      put(Relation::kSiblingOf, x, y, "shared parent");
      put(female(x) ? Relation::kSisterOf : Relation::kBrotherOf, x, y,
          "gendered siblingOf");
    }
  }
  return out;
}

}  // namespace

ValidationReport validate_closed_world(const KnowledgeGraph& kg) {
  ValidationReport report;
  const auto expected = expected_facts(kg);

  for (const Fact& f : kg.facts()) {
    if (f.relation == Relation::kWifeOf || f.relation == Relation::kHusbandOf) {
      const bool head_female = kg.gender(f.head) == Gender::kFemale;
      const bool tail_female = kg.gender(f.tail) == Gender::kFemale;
      const bool want_female_head = f.relation == Relation::kWifeOf;
      if (head_female != want_female_head || tail_female == want_female_head) {
        report.violations.push_back(
            {f, describe(f) + ": spouse genders do not match the relation"});
        continue;
      }
    }
    if (!expected.contains(f)) {
      report.violations.push_back(
          {f, describe(f) + ": not implied by the kinship semantics"});
    }
  }
  for (const auto& [f, why] : expected) {
    if (!kg.contains(f)) {
      report.violations.push_back({f, describe(f) + ": missing (" + why + ")"});
    }
  }
  return report;
}

}  // namespace owkg
