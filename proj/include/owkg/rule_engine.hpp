#pragma once

// Forward-chaining evaluation of chain rules over binary relations, with
// semi-naive iteration to the least fixpoint.
//
// A rule has the shape
//
//   head(X, Z) :- a1(X, Y), a2(Y, Z) [, X != Z] [, unary(X)]
//
// with one or two body atoms. Each atom may be read inverted, i.e. a(Y, X).
// Single-atom rules copy (or invert) a relation, optionally restricted by a
// unary predicate on the head variable.

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

namespace owkg::rules {

using Node = std::uint32_t;

struct Atom {
  int relation;
  bool inverted = false;
};

struct Rule {
  int head;
  std::vector<Atom> body;          // size 1 or 2
  std::optional<int> head_filter;  // unary predicate id on X
  bool distinct = false;           // require X != Z
};

// Unary predicates are dense boolean tables indexed by node.
using UnaryTable = std::vector<std::vector<bool>>;

class Engine {
 public:
  Engine(std::size_t num_nodes, int num_relations, UnaryTable unary);

  void add_rule(Rule rule);

  // Inserts a fact; returns true when new. Self loops are dropped.
  bool insert(int relation, Node head, Node tail);

  // Runs to the fixpoint and returns the number of derived facts.
  std::size_t saturate();

  // Visits every fact currently known.
  void for_each(const std::function<void(int, Node, Node)>& visit) const;

  std::size_t size() const { return total_; }

 private:
  struct Relation {
    std::vector<std::vector<Node>> out;
    std::vector<std::vector<Node>> in;
    std::unordered_set<std::uint64_t> keys;
  };
  struct Pair {
    Node head;
    Node tail;
  };

  std::size_t num_nodes_;
  std::vector<Relation> relations_;
  std::vector<Rule> rules_;
  UnaryTable unary_;
  std::vector<std::vector<Pair>> pending_;  // delta for the next round
  std::size_t total_ = 0;

  bool emit(int relation, Node head, Node tail);
  bool passes(const Rule& rule, Node x, Node z) const;
};

}  // namespace owkg::rules
