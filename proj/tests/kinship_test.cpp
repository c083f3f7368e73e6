#include "owkg/kinship.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "owkg/common.hpp"
#include "owkg/kg_io.hpp"

namespace owkg {
namespace {

using R = Relation;

KnowledgeGraph three_person_family() {
  // a (female) and b (male) are the parents of c (female).
  KnowledgeGraph kg({Gender::kFemale, Gender::kMale, Gender::kFemale});
  kg.add_fact({R::kParentOf, 0, 2});
  kg.add_fact({R::kParentOf, 1, 2});
  return kg;
}

TEST(RelationNames, RoundTripAllTwentyThree) {
  std::set<std::string_view> names;
  for (Relation r : all_relations()) {
    names.insert(relation_name(r));
    EXPECT_EQ(parse_relation(relation_name(r)), r);
  }
  EXPECT_EQ(names.size(), kNumRelations);
  EXPECT_FALSE(parse_relation("cousinOfCousin").has_value());
}

TEST(KnowledgeGraph, RejectsSelfLoopsAndUnknownEntities) {
  KnowledgeGraph kg({Gender::kFemale, Gender::kMale});
  EXPECT_THROW(kg.add_fact({R::kParentOf, 0, 0}), DomainError);
  EXPECT_THROW(kg.add_fact({R::kParentOf, 0, 7}), DomainError);
  EXPECT_TRUE(kg.add_fact({R::kWifeOf, 0, 1}));
  EXPECT_FALSE(kg.add_fact({R::kWifeOf, 0, 1}));
  EXPECT_EQ(kg.num_facts(), 1u);
}

TEST(DeduceClosure, ThreePersonFamily) {
  const KnowledgeGraph closed = deduce_closure(three_person_family());
  EXPECT_TRUE(closed.closed());
  EXPECT_TRUE(closed.contains({R::kMotherOf, 0, 2}));
  EXPECT_TRUE(closed.contains({R::kFatherOf, 1, 2}));
  EXPECT_TRUE(closed.contains({R::kChildOf, 2, 0}));
  EXPECT_TRUE(closed.contains({R::kChildOf, 2, 1}));
  EXPECT_TRUE(closed.contains({R::kDaughterOf, 2, 0}));
  EXPECT_TRUE(closed.contains({R::kDaughterOf, 2, 1}));
  EXPECT_FALSE(closed.contains({R::kSonOf, 2, 0}));
  // 2 parentOf + 2 childOf + motherOf + fatherOf + 2 daughterOf
  EXPECT_EQ(closed.num_facts(), 8u);
}

TEST(DeduceClosure, GrandparentsAuntsAndCousins) {
  // 0,1: root couple. 2 (f), 3 (m): their children. 4: spouse of 2, 5: spouse of 3.
  // 6: child of 2 and 4 (m). 7: child of 3 and 5 (f).
  std::vector<Gender> g = {Gender::kFemale, Gender::kMale,   Gender::kFemale, Gender::kMale,
                           Gender::kMale,   Gender::kFemale, Gender::kMale,   Gender::kFemale};
  KnowledgeGraph kg(g);
  for (EntityId p : {0u, 1u}) {
    kg.add_fact({R::kParentOf, p, 2});
    kg.add_fact({R::kParentOf, p, 3});
  }
  kg.add_fact({R::kWifeOf, 0, 1});
  kg.add_fact({R::kWifeOf, 2, 4});
  kg.add_fact({R::kWifeOf, 5, 3});
  kg.add_fact({R::kParentOf, 2, 6});
  kg.add_fact({R::kParentOf, 4, 6});
  kg.add_fact({R::kParentOf, 3, 7});
  kg.add_fact({R::kParentOf, 5, 7});
  const KnowledgeGraph c = deduce_closure(kg);

  EXPECT_TRUE(c.contains({R::kHusbandOf, 1, 0}));
  EXPECT_TRUE(c.contains({R::kSisterOf, 2, 3}));
  EXPECT_TRUE(c.contains({R::kBrotherOf, 3, 2}));
  EXPECT_TRUE(c.contains({R::kGrandmotherOf, 0, 6}));
  EXPECT_TRUE(c.contains({R::kGrandfatherOf, 1, 7}));
  EXPECT_TRUE(c.contains({R::kGrandsonOf, 6, 0}));
  EXPECT_TRUE(c.contains({R::kGranddaughterOf, 7, 1}));
  EXPECT_TRUE(c.contains({R::kAuntOf, 2, 7}));
  EXPECT_TRUE(c.contains({R::kUncleOf, 3, 6}));
  EXPECT_TRUE(c.contains({R::kNephewOf, 6, 3}));
  EXPECT_TRUE(c.contains({R::kNieceOf, 7, 2}));
  EXPECT_TRUE(c.contains({R::kBoyCousinOf, 6, 7}));
  EXPECT_TRUE(c.contains({R::kGirlCousinOf, 7, 6}));
  // Blood-only aunts and uncles: spouses of siblings are not included.
  EXPECT_FALSE(c.contains({R::kUncleOf, 4, 7}));
  EXPECT_FALSE(c.contains({R::kAuntOf, 5, 6}));
  EXPECT_FALSE(c.contains({R::kSiblingOf, 2, 2}));
  EXPECT_TRUE(validate_closed_world(c).ok());
}

TEST(DeduceClosure, IdempotentAndMonotone) {
  TreeGenConfig cfg{2, 3, 40, 5, 11};
  const KnowledgeGraph base = generate_base_population(cfg);
  const KnowledgeGraph once = deduce_closure(base);
  for (const Fact& f : base.facts()) EXPECT_TRUE(once.contains(f));

  KnowledgeGraph reopened(once.genders());
  for (const Fact& f : once.facts()) reopened.add_fact(f);
  const KnowledgeGraph twice = deduce_closure(reopened);
  EXPECT_EQ(twice.facts(), once.facts());
}

TEST(GenerateBasePopulation, SingleCouple) {
  const KnowledgeGraph kg = generate_base_population({1, 1, 2, 20, 3});
  EXPECT_EQ(kg.num_entities(), 2u);
  EXPECT_EQ(kg.num_facts(), 2u);
  EXPECT_EQ(kg.count(R::kParentOf), 0u);
  EXPECT_EQ(kg.count(R::kWifeOf), 1u);
  EXPECT_EQ(kg.count(R::kHusbandOf), 1u);
}

TEST(GenerateBasePopulation, ShapeConstraints) {
  const TreeGenConfig cfg{5, 3, 100, 4, 42};
  const KnowledgeGraph kg = generate_base_population(cfg);
  EXPECT_EQ(kg.num_entities(), 500u);
  std::vector<std::vector<EntityId>> parents(kg.num_entities());
  std::vector<int> children(kg.num_entities(), 0);
  for (const Fact& f : kg.facts()) {
    EXPECT_TRUE(f.relation == R::kParentOf || f.relation == R::kWifeOf ||
                f.relation == R::kHusbandOf);
    if (f.relation == R::kParentOf) {
      parents[f.tail].push_back(f.head);
      ++children[f.head];
    }
  }
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    EXPECT_LE(children[e], cfg.max_branching);
    if (parents[e].empty()) continue;
    ASSERT_EQ(parents[e].size(), 2u);
    const EntityId a = parents[e][0], b = parents[e][1];
    EXPECT_TRUE(kg.contains({R::kWifeOf, a, b}) || kg.contains({R::kWifeOf, b, a}));
  }
}

TEST(GenerateBasePopulation, RejectsUnsatisfiableShapes) {
  EXPECT_THROW(generate_base_population({1, 1, 11, 2, 0}), DomainError);
  EXPECT_THROW(generate_base_population({1, 3, 1, 20, 0}), DomainError);
  EXPECT_THROW(generate_base_population({0, 3, 300, 20, 0}), DomainError);
  EXPECT_EQ(max_tree_size(1, 2), 10u);
  EXPECT_EQ(max_tree_size(3, 4), 426u);
}

TEST(GenerateBasePopulation, DeterministicGivenSeed) {
  const TreeGenConfig cfg{3, 3, 80, 6, 99};
  std::ostringstream a, b;
  write_facts(a, generate_base_population(cfg).facts());
  write_facts(b, generate_base_population(cfg).facts());
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  write_facts(c, generate_base_population({3, 3, 80, 6, 100}).facts());
  EXPECT_NE(a.str(), c.str());
}

TEST(ValidateClosedWorld, DetectsWrongGender) {
  // 0 and 1 are brothers.
  KnowledgeGraph kg({Gender::kMale, Gender::kFemale, Gender::kMale, Gender::kMale});
  kg.add_fact({R::kParentOf, 2, 0});
  kg.add_fact({R::kParentOf, 2, 1});
  kg.add_fact({R::kParentOf, 3, 0});
  kg.add_fact({R::kParentOf, 3, 1});
  KnowledgeGraph closed = deduce_closure(kg);
  ASSERT_TRUE(validate_closed_world(closed).ok());
  KnowledgeGraph faulty(closed.genders());
  for (const Fact& f : closed.facts()) faulty.add_fact(f);
  faulty.add_fact({R::kSisterOf, 0, 1});  // 0 is male
  faulty.mark_closed();
  EXPECT_EQ(validate_closed_world(faulty).violations.size(), 1u);
}

TEST(ValidateClosedWorld, DetectsMissingInverse) {
  KnowledgeGraph c = deduce_closure(three_person_family());
  ASSERT_TRUE(c.erase_fact({R::kChildOf, 2, 0}));
  c.mark_closed();
  const auto report = validate_closed_world(c);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].fact, (Fact{R::kChildOf, 2, 0}));
}

TEST(KgIo, RoundTrip) {
  const KnowledgeGraph kg = deduce_closure(generate_base_population({2, 2, 20, 4, 5}));
  std::stringstream facts, ents;
  write_facts(facts, kg.facts());
  write_entities(ents, kg.genders());
  const auto genders = read_entities(ents);
  EXPECT_EQ(genders, kg.genders());
  EXPECT_EQ(read_facts(facts, genders.size()), kg.facts());
}

TEST(KgIo, ReportsLineNumbers) {
  std::istringstream in("0\tparentOf\t1\n0\tfriendOf\t1\n");
  try {
    read_facts(in, 2);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace owkg
