#pragma once

// Open-world views of a closed-world graph: every fact of G_full becomes a
// training fact, a (sparse) test fact or a missing fact, so that
// G_train ⊆ G_test ⊆ G_full holds by construction.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "owkg/common.hpp"
#include "owkg/kinship.hpp"

namespace owkg {

struct SplitConfig {
  double density = 0.75;     // |G_test| / |G_full|, in (0, 1]
  double train_ratio = 0.7;  // |G_train| / |G_test|, in (0, 1)
  std::uint64_t seed = 0;

  void validate() const;
};

// Probability that a full test fact (a fact outside G_train) is a sparse
// test fact: d(1 - eta) / (1 - d eta). The sparsity is 1 - alpha.
double alpha_from_density(double density, double train_ratio);

enum class FactRole : std::uint8_t { kTrain, kTest, kMissing };

struct WorldSplit {
  std::vector<Gender> genders;
  std::vector<Fact> full;       // canonical order
  std::vector<FactRole> roles;  // parallel to `full`
  SplitConfig config;

  std::size_t num_entities() const { return genders.size(); }
  double alpha() const { return alpha_from_density(config.density, config.train_ratio); }
  double sparsity() const { return 1.0 - alpha(); }

  std::vector<Fact> g_train() const;
  std::vector<Fact> g_test() const;  // training facts included
  std::size_t count(FactRole role) const;
};

struct FeasibleInterval {
  double lo;
  double hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

class InfeasibleCorrelation : public DomainError {
 public:
  InfeasibleCorrelation(const std::string& what, FeasibleInterval feasible)
      : DomainError(what), feasible_(feasible) {}
  FeasibleInterval feasible() const { return feasible_; }

 private:
  FeasibleInterval feasible_;
};

struct CorrelationTarget {
  double rho = 0.0;
  // One entry per fact of the full graph, in canonical order: whether the
  // reference model predicts the fact (event Y). Entries for training facts
  // are ignored.
  std::vector<bool> predictions;
};

// Conditional missing probabilities P(X|Y), P(X|not Y) that keep the
// marginal missing rate at `sparsity` and realize correlation `rho` when a
// fraction `positive_rate` of facts is predicted.
struct MissingLaw {
  double given_predicted;
  double given_unpredicted;
};
MissingLaw missing_law(double sparsity, double positive_rate, double rho);
FeasibleInterval feasible_split_rho(double sparsity, double positive_rate);

// Requires kg_full.closed().
WorldSplit split_independent(const KnowledgeGraph& kg_full, const SplitConfig& config);

// Training facts are drawn first, with the same probability and random
// stream as split_independent; the remaining facts are then made missing
// according to missing_law with the positive rate measured on them. With
// rho == 0 the result equals split_independent bit for bit.
WorldSplit split_correlated(const KnowledgeGraph& kg_full, const SplitConfig& config,
                            const CorrelationTarget& target);

// Plug-in estimate of the event correlation between two boolean masks.
double empirical_correlation(const std::vector<bool>& missing,
                             const std::vector<bool>& predicted);

// Missing indicator for every non-training fact, in canonical order, and the
// matching slice of a per-fact prediction vector.
std::vector<bool> missing_mask(const WorldSplit& split);
std::vector<bool> non_train_slice(const WorldSplit& split, const std::vector<bool>& per_fact);

struct QueryAnswerPartition {
  Relation relation;
  EntityId head;
  std::vector<EntityId> train;  // sorted
  std::vector<EntityId> test;
  std::vector<EntityId> missing;

  std::size_t full_answers() const { return train.size() + test.size() + missing.size(); }
  // Answers outside G_train: the N of the analytic model.
  std::size_t full_test_answers() const { return test.size() + missing.size(); }
};

// Samples n_queries distinct (relation, head) pairs uniformly among those with
// at least min_full_answers tails in G_full and at least one sparse test
// answer. Throws DomainError naming the shortfall when too few exist.
std::vector<QueryAnswerPartition> build_query_set(const WorldSplit& split,
                                                  std::size_t min_full_answers,
                                                  std::size_t n_queries,
                                                  std::uint64_t seed);

// Every (relation, head) pair meeting the eligibility rule, canonical order.
std::vector<QueryAnswerPartition> eligible_queries(const WorldSplit& split,
                                                   std::size_t min_full_answers);

}  // namespace owkg
