#pragma once

// Parametric stand-in for a trained completion model. Each true answer is
// classified positive with probability l (or l1 / l2 on missing / test
// answers when correlated with the split), and scores are drawn from a
// positive or negative band so that positives always outrank negatives.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "owkg/analytic.hpp"
#include "owkg/metrics.hpp"
#include "owkg/world_split.hpp"

namespace owkg {

// Positive scores lie in (positive_low, positive_high], negative scores in
// [negative_low, negative_high). Needs positive_low >= negative_high.
struct ScoreBands {
  double positive_low = 0.5;
  double positive_high = 1.0;
  double negative_low = 0.0;
  double negative_high = 0.5;

  void validate() const;
};

struct OracleSpec {
  double l = 0.7;
  double rho = 0.0;  // correlation with the split's missing mask
  ScoreBands bands;
  std::uint64_t seed = 0;

  void validate() const;
};

// Scores for every entity. `beta` is the split's sparsity, used for l1/l2.
// Training answers are classified with l; they are filtered in both modes.
ScoreTable score_query(const OracleSpec& spec, const QueryAnswerPartition& partition,
                       std::size_t num_entities, double beta, std::uint64_t seed);

struct PipelinePoint {
  std::string metric;
  double l_nominal = 0.0;
  double rho = 0.0;
  double density = 0.0;
  Aggregate sparse;  // per-query mean over test answers, sparse ranks
  Aggregate full;    // per-query mean over test and missing answers, full ranks
  std::size_t n_queries = 0;
};

// Query q is scored with derive_seed(spec.seed, q, 0); sparse ties use
// derive_seed(spec.seed, q, 1) and full ties derive_seed(spec.seed, q, 2).
// One point per metric, in the given order.
std::vector<PipelinePoint> run_pipeline(const WorldSplit& split,
                                        std::span<const QueryAnswerPartition> queries,
                                        const OracleSpec& spec,
                                        std::span<const RankingFunction> metrics);

// Point i uses seed derive_seed(seed, i). Output is l-major, metric-minor.
std::vector<PipelinePoint> sweep_strength(const WorldSplit& split,
                                          std::span<const QueryAnswerPartition> queries,
                                          std::span<const double> l_grid, double rho,
                                          std::span<const RankingFunction> metrics,
                                          std::uint64_t seed, const ScoreBands& bands = {});

// Analytic prediction of the sparse mean for an uncorrelated oracle: per
// query, the selection-adjusted Ê with N = |test| + |missing| and
// N_entity = num_entities - |train|, averaged over the query set.
struct SparseReference {
  double mean = 0.0;
  double mean_delta = 0.0;  // averaged delta_upper
};
SparseReference sparse_reference(const WorldSplit& split,
                                 std::span<const QueryAnswerPartition> queries, double l,
                                 const RankingFunction& rf);

// Curve statistics over points of one metric sorted by full mean:
// mean of second divided differences of sparse against full, and
// max |sparse - full|.
double concavity_statistic(std::span<const PipelinePoint> points);
double max_identity_deviation(std::span<const PipelinePoint> points);

}  // namespace owkg
