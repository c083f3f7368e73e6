#include "owkg/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "owkg/common.hpp"

namespace owkg {

RankingFunction RankingFunction::hits_at(int k) {
  if (k < 1) throw DomainError("Hits@K needs K >= 1");
  return RankingFunction(Kind::kHitsAtK, k, 1.0);
}

RankingFunction RankingFunction::p_mrr(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("p-MRR needs p in (0, 1)");
  return RankingFunction(Kind::kPMrr, 0, p);
}

RankingFunction RankingFunction::parse(const std::string& tag) {
  if (tag == "mrr") return mrr();
  if (tag == "log_mrr") return log_mrr();
  const auto at = tag.find('@');
  if (at != std::string::npos) {
    const std::string head = tag.substr(0, at);
    const char* first = tag.data() + at + 1;
    const char* last = tag.data() + tag.size();
    if (head == "hits") {
      int k = 0;
      const auto [ptr, ec] = std::from_chars(first, last, k);
      if (ec == std::errc() && ptr == last) return hits_at(k);
    } else if (head == "p_mrr") {
      double p = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, p);
      if (ec == std::errc() && ptr == last) return p_mrr(p);
    }
  }
  throw DomainError("unknown metric '" + tag + "' (expected mrr, hits@K, log_mrr, p_mrr@P)");
}

double RankingFunction::denominator(std::uint64_t rank) const {
  if (rank == 0) throw DomainError("ranks start at 1");
  const auto r = static_cast<double>(rank);
  switch (kind_) {
    case Kind::kMrr: return r;
    case Kind::kHitsAtK:
      return rank <= static_cast<std::uint64_t>(k_) ? 1.0
                                                    : std::numeric_limits<double>::infinity();
    case Kind::kLogMrr: return std::log2(r + 1.0);
    case Kind::kPMrr: return std::pow(r, p_);
  }
  return r;
}

double RankingFunction::value(std::uint64_t rank) const {
  if (kind_ == Kind::kHitsAtK) {
    if (rank == 0) throw DomainError("ranks start at 1");
    return rank <= static_cast<std::uint64_t>(k_) ? 1.0 : 0.0;
  }
  return 1.0 / denominator(rank);
}

std::string RankingFunction::tag() const {
  switch (kind_) {
    case Kind::kMrr: return "mrr";
    case Kind::kHitsAtK: return "hits@" + std::to_string(k_);
    case Kind::kLogMrr: return "log_mrr";
    case Kind::kPMrr: {
      std::ostringstream os;
      os << "p_mrr@" << p_;
      return os.str();
    }
  }
  return "";
}

double metric_of_rank(std::uint64_t rank, const RankingFunction& rf) { return rf.value(rank); }

const char* eval_mode_name(EvalMode mode) {
  return mode == EvalMode::kSparse ? "sparse" : "full";
}

namespace {

std::uint64_t break_tie(std::uint64_t ties, std::uint64_t seed) {
  if (ties == 0) return 0;
  Rng rng(seed);
  return uniform_below(rng, ties + 1);
}

// Descending copy of the scores, for O(log n) greater/equal counts.
class SortedScores {
 public:
  explicit SortedScores(std::span<const double> scores)
      : sorted_(scores.begin(), scores.end()) {
    std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
  }
  std::uint64_t greater(double s) const {
    return static_cast<std::uint64_t>(
        std::lower_bound(sorted_.begin(), sorted_.end(), s, std::greater<>()) -
        sorted_.begin());
  }
  std::uint64_t not_less(double s) const {
    return static_cast<std::uint64_t>(
        std::upper_bound(sorted_.begin(), sorted_.end(), s, std::greater<>()) -
        sorted_.begin());
  }

 private:
  std::vector<double> sorted_;
};

// `filter` must be sorted and unique and must not contain the target.
std::uint64_t rank_with(const SortedScores& sorted, std::span<const double> scores,
                        EntityId target, std::span<const EntityId> filter,
                        std::uint64_t tie_seed) {
  const double s = scores[target];
  std::uint64_t greater = sorted.greater(s);
  std::uint64_t ties = sorted.not_less(s) - greater - 1;  // excludes the target
  for (EntityId e : filter) {
    if (scores[e] > s) {
      --greater;
    } else if (scores[e] == s) {
      --ties;
    }
  }
  return 1 + greater + break_tie(ties, tie_seed);
}

void check_entity(std::span<const double> scores, EntityId e) {
  if (e >= scores.size()) throw DomainError("entity " + std::to_string(e) + " has no score");
}

}  // namespace

std::uint64_t filtered_rank(std::span<const double> scores, EntityId target,
                            std::span<const EntityId> filter, std::uint64_t tie_seed) {
  check_entity(scores, target);
  std::vector<EntityId> f(filter.begin(), filter.end());
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  for (EntityId e : f) check_entity(scores, e);
  if (std::binary_search(f.begin(), f.end(), target)) {
    throw DomainError("target " + std::to_string(target) + " is in the filter set");
  }
  const double s = scores[target];
  std::uint64_t greater = 0;
  std::uint64_t ties = 0;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (e == target || std::binary_search(f.begin(), f.end(), static_cast<EntityId>(e))) {
      continue;
    }
    if (scores[e] > s) {
      ++greater;
    } else if (scores[e] == s) {
      ++ties;
    }
  }
  return 1 + greater + break_tie(ties, tie_seed);
}

QueryRanks rank_query(std::span<const double> scores, const QueryAnswerPartition& partition,
                      EvalMode mode, std::uint64_t tie_seed) {
  std::vector<EntityId> known(partition.train);
  known.insert(known.end(), partition.test.begin(), partition.test.end());
  if (mode == EvalMode::kFull) {
    known.insert(known.end(), partition.missing.begin(), partition.missing.end());
  }
  for (EntityId e : known) check_entity(scores, e);
  for (EntityId e : partition.missing) check_entity(scores, e);
  std::sort(known.begin(), known.end());
  if (std::adjacent_find(known.begin(), known.end()) != known.end()) {
    throw DomainError("answer sets of a query must be disjoint");
  }
  const SortedScores sorted(scores);
  std::vector<EntityId> others;
  const auto rank_of = [&](EntityId t) {
    others.clear();
    for (EntityId e : known) {
      if (e != t) others.push_back(e);
    }
    return rank_with(sorted, scores, t, others, derive_seed(tie_seed, t));
  };
  QueryRanks ranks;
  for (EntityId t : partition.test) ranks.test.push_back(rank_of(t));
  if (mode == EvalMode::kFull) {
    for (EntityId t : partition.missing) ranks.missing.push_back(rank_of(t));
  }
  return ranks;
}

QueryMetricReport report_from_ranks(const QueryRanks& ranks,
                                    const QueryAnswerPartition& partition,
                                    const RankingFunction& rf) {
  const std::size_t total = ranks.test.size() + ranks.missing.size();
  if (total == 0) throw DomainError("query has no answers to evaluate in this mode");
  QueryMetricReport r;
  r.test_ranks = ranks.test;
  r.missing_ranks = ranks.missing;
  double test_sum = 0.0;
  for (auto k : ranks.test) test_sum += rf.value(k);
  double missing_sum = 0.0;
  for (auto k : ranks.missing) missing_sum += rf.value(k);
  r.mean = (test_sum + missing_sum) / static_cast<double>(total);
  r.test_mean = ranks.test.empty() ? 0.0 : test_sum / static_cast<double>(ranks.test.size());
  r.n_test = partition.test.size();
  r.n_missing = partition.missing.size();
  r.n_train = partition.train.size();
  return r;
}

QueryMetricReport evaluate_query(std::span<const double> scores,
                                 const QueryAnswerPartition& partition,
                                 const RankingFunction& rf, EvalMode mode,
                                 std::uint64_t tie_seed) {
  if (mode == EvalMode::kSparse && partition.test.empty()) {
    throw DomainError("sparse evaluation needs at least one test answer");
  }
  return report_from_ranks(rank_query(scores, partition, mode, tie_seed), partition, rf);
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw DomainError("cannot aggregate an empty set");
  Aggregate a;
  a.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  return a;
}

Aggregate aggregate_reports(std::span<const QueryMetricReport> reports) {
  std::vector<double> means;
  means.reserve(reports.size());
  for (const auto& r : reports) means.push_back(r.mean);
  return aggregate(means);
}

}  // namespace owkg
