#include "owkg/rule_engine.hpp"

#include <stdexcept>
#include <utility>

namespace owkg::rules {

namespace {

std::uint64_t pack(Node head, Node tail) {
  return (static_cast<std::uint64_t>(head) << 32) | tail;
}

}  // namespace

Engine::Engine(std::size_t num_nodes, int num_relations, UnaryTable unary)
    : num_nodes_(num_nodes),
      relations_(static_cast<std::size_t>(num_relations)),
      unary_(std::move(unary)),
      pending_(static_cast<std::size_t>(num_relations)) {
  for (auto& rel : relations_) {
    rel.out.resize(num_nodes_);
    rel.in.resize(num_nodes_);
  }
  for (const auto& table : unary_) {
    if (table.size() != num_nodes_) {
      throw std::invalid_argument("unary table size does not match nodes");
    }
  }
}

void Engine::add_rule(Rule rule) {
  const auto check = [&](int r) {
    if (r < 0 || r >= static_cast<int>(relations_.size())) {
      throw std::invalid_argument("rule references unknown relation");
    }
  };
  check(rule.head);
  if (rule.body.empty() || rule.body.size() > 2) {
    throw std::invalid_argument("rule body must have one or two atoms");
  }
  for (const auto& atom : rule.body) check(atom.relation);
  if (rule.head_filter &&
      (*rule.head_filter < 0 ||
       *rule.head_filter >= static_cast<int>(unary_.size()))) {
    throw std::invalid_argument("rule references unknown unary predicate");
  }
  rules_.push_back(std::move(rule));
}

bool Engine::emit(int relation, Node head, Node tail) {
  if (head == tail) return false;
  auto& rel = relations_[static_cast<std::size_t>(relation)];
  if (!rel.keys.insert(pack(head, tail)).second) return false;
  rel.out[head].push_back(tail);
  rel.in[tail].push_back(head);
  pending_[static_cast<std::size_t>(relation)].push_back({head, tail});
  ++total_;
  return true;
}

bool Engine::insert(int relation, Node head, Node tail) {
  if (relation < 0 || relation >= static_cast<int>(relations_.size()) ||
      head >= num_nodes_ || tail >= num_nodes_) {
    throw std::invalid_argument("fact outside engine domain");
  }
  return emit(relation, head, tail);
}

bool Engine::passes(const Rule& rule, Node x, Node z) const {
  if (rule.distinct && x == z) return false;
  if (rule.head_filter && !unary_[static_cast<std::size_t>(*rule.head_filter)][x]) {
    return false;
  }
  return true;
}

std::size_t Engine::saturate() {
  const std::size_t before = total_;
  for (;;) {
    std::vector<std::vector<Pair>> delta(relations_.size());
    bool any = false;
    for (std::size_t r = 0; r < relations_.size(); ++r) {
      delta[r].swap(pending_[r]);
      any = any || !delta[r].empty();
    }
    if (!any) break;

    // Oriented view of an atom's delta: (x, y) with x the left variable.
    const auto oriented = [](const Atom& a, const Pair& p) {
      return a.inverted ? Pair{p.tail, p.head} : p;
    };
    // Right-hand neighbours of y through atom a (full relation).
    const auto forward = [this](const Atom& a, Node y) -> const std::vector<Node>& {
      const auto& rel = relations_[static_cast<std::size_t>(a.relation)];
      return a.inverted ? rel.in[y] : rel.out[y];
    };
    // Left-hand neighbours of y through atom a (full relation).
    const auto backward = [this](const Atom& a, Node y) -> const std::vector<Node>& {
      const auto& rel = relations_[static_cast<std::size_t>(a.relation)];
      return a.inverted ? rel.out[y] : rel.in[y];
    };

    std::vector<std::pair<int, Pair>> derived;
    for (const auto& rule : rules_) {
      const Atom& first = rule.body[0];
      if (rule.body.size() == 1) {
        for (const Pair& p : delta[static_cast<std::size_t>(first.relation)]) {
          const Pair xy = oriented(first, p);
          if (passes(rule, xy.head, xy.tail)) derived.push_back({rule.head, xy});
        }
        continue;
      }
      const Atom& second = rule.body[1];
      for (const Pair& p : delta[static_cast<std::size_t>(first.relation)]) {
        const Pair xy = oriented(first, p);
        for (Node z : forward(second, xy.tail)) {
          if (passes(rule, xy.head, z)) derived.push_back({rule.head, {xy.head, z}});
        }
      }
      for (const Pair& p : delta[static_cast<std::size_t>(second.relation)]) {
        const Pair yz = oriented(second, p);
        for (Node x : backward(first, yz.head)) {
          if (passes(rule, x, yz.tail)) derived.push_back({rule.head, {x, yz.tail}});
        }
      }
    }
    for (const auto& [relation, pair] : derived) {
      emit(relation, pair.head, pair.tail);
    }
  }
  return total_ - before;
}

void Engine::for_each(const std::function<void(int, Node, Node)>& visit) const {
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    for (Node h = 0; h < num_nodes_; ++h) {
      for (Node t : relations_[r].out[h]) visit(static_cast<int>(r), h, t);
    }
  }
}

}  // namespace owkg::rules
