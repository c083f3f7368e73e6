#pragma once

// Filtered ranking and the 1/f(rank) metric family.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "owkg/kinship.hpp"
#include "owkg/world_split.hpp"

namespace owkg {

class RankingFunction {
 public:
  enum class Kind { kMrr, kHitsAtK, kLogMrr, kPMrr };

  static RankingFunction mrr() { return RankingFunction(Kind::kMrr, 0, 1.0); }
  static RankingFunction hits_at(int k);
  static RankingFunction log_mrr() { return RankingFunction(Kind::kLogMrr, 0, 1.0); }
  static RankingFunction p_mrr(double p);

  // "mrr", "hits@10", "log_mrr", "p_mrr@0.25". Throws DomainError otherwise.
  static RankingFunction parse(const std::string& tag);

  Kind kind() const { return kind_; }
  int k() const { return k_; }
  double p() const { return p_; }

  // f(rank); +inf for Hits@K beyond K.
  double denominator(std::uint64_t rank) const;
  // 1/f(rank), exactly 0 for Hits@K beyond K.
  double value(std::uint64_t rank) const;
  std::string tag() const;

  friend bool operator==(const RankingFunction&, const RankingFunction&) = default;

 private:
  RankingFunction(Kind kind, int k, double p) : kind_(kind), k_(k), p_(p) {}
  Kind kind_;
  int k_;
  double p_;
};

// Throws DomainError for rank 0.
double metric_of_rank(std::uint64_t rank, const RankingFunction& rf);

// Scores for every entity of one query, indexed by EntityId.
using ScoreTable = std::vector<double>;

// 1 + #(unfiltered entities scoring strictly higher) + T, with T uniform on
// {0..ties} over the unfiltered entities tied with the target. The filter may
// contain duplicates but not the target.
std::uint64_t filtered_rank(std::span<const double> scores, EntityId target,
                            std::span<const EntityId> filter, std::uint64_t tie_seed);

enum class EvalMode { kSparse, kFull };
const char* eval_mode_name(EvalMode mode);

struct QueryMetricReport {
  // Ranks of the test answers, then (full mode only) the missing answers.
  std::vector<std::uint64_t> test_ranks;
  std::vector<std::uint64_t> missing_ranks;
  double mean = 0.0;       // over every ranked answer of the mode
  double test_mean = 0.0;  // over the test answers only
  std::size_t n_test = 0;
  std::size_t n_missing = 0;
  std::size_t n_train = 0;
};

// Ranks of every answer of the mode. Sparse mode ranks test answers with
// train ∪ test filtered; full mode ranks test ∪ missing with all answers
// filtered. The tie seed of answer t is derive_seed(tie_seed, t).
struct QueryRanks {
  std::vector<std::uint64_t> test;
  std::vector<std::uint64_t> missing;
};
QueryRanks rank_query(std::span<const double> scores, const QueryAnswerPartition& partition,
                      EvalMode mode, std::uint64_t tie_seed);

QueryMetricReport report_from_ranks(const QueryRanks& ranks,
                                    const QueryAnswerPartition& partition,
                                    const RankingFunction& rf);

// Throws DomainError when the mode has no answers to rank.
QueryMetricReport evaluate_query(std::span<const double> scores,
                                 const QueryAnswerPartition& partition,
                                 const RankingFunction& rf, EvalMode mode,
                                 std::uint64_t tie_seed);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 when n == 1
  std::size_t n = 0;
};
Aggregate aggregate(std::span<const double> values);
// Aggregates report.mean over queries.
Aggregate aggregate_reports(std::span<const QueryMetricReport> reports);

}  // namespace owkg
