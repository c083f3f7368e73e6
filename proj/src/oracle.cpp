#include "owkg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace owkg {

void ScoreBands::validate() const {
  if (!(positive_low < positive_high) || !(negative_low < negative_high)) {
    throw DomainError("score bands must have low < high");
  }
  if (!(positive_low >= negative_high)) {
    throw DomainError("positive band must lie above the negative band");
  }
}

void OracleSpec::validate() const {
  if (!(l >= 0.0 && l <= 1.0)) throw DomainError("oracle strength must lie in [0, 1]");
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
  bands.validate();
}

ScoreTable score_query(const OracleSpec& spec, const QueryAnswerPartition& partition,
                       std::size_t num_entities, double beta, std::uint64_t seed) {
  spec.validate();
  const StrengthPair s = spec.rho == 0.0 ? StrengthPair{spec.l, spec.l}
                                         : conditional_strengths(spec.l, beta, spec.rho);
  const ScoreBands& b = spec.bands;
  Rng rng(seed);
  ScoreTable scores(num_entities);
  // 1 - u lies in (0, 1], so positives land in (low, high].
  for (double& x : scores) x = b.negative_low + (b.negative_high - b.negative_low) * uniform01(rng);
  auto classify = [&](std::span<const EntityId> answers, double strength) {
    for (EntityId e : answers) {
      if (e >= num_entities) throw DomainError("answer id out of range");
      const bool positive = uniform01(rng) < strength;
      const double u = uniform01(rng);
      scores[e] = positive ? b.positive_low + (b.positive_high - b.positive_low) * (1.0 - u)
                           : b.negative_low + (b.negative_high - b.negative_low) * u;
    }
  };
  classify(partition.train, spec.l);
  classify(partition.test, s.l2);
  classify(partition.missing, s.l1);
  return scores;
}

std::vector<PipelinePoint> run_pipeline(const WorldSplit& split,
                                        std::span<const QueryAnswerPartition> queries,
                                        const OracleSpec& spec,
                                        std::span<const RankingFunction> metrics) {
  if (queries.empty()) throw DomainError("pipeline needs at least one query");
  if (metrics.empty()) throw DomainError("pipeline needs at least one metric");
  spec.validate();
  const double beta = split.sparsity();
  if (spec.rho != 0.0) conditional_strengths(spec.l, beta, spec.rho);  // feasibility

  const std::size_t nq = queries.size();
  const std::size_t nm = metrics.size();
  std::vector<double> sparse(nq * nm), full(nq * nm);
  const auto n = static_cast<std::int64_t>(nq);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t qi = 0; qi < n; ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    const auto& part = queries[q];
    const ScoreTable scores =
        score_query(spec, part, split.num_entities(), beta, derive_seed(spec.seed, q, 0));
    const QueryRanks sr = rank_query(scores, part, EvalMode::kSparse, derive_seed(spec.seed, q, 1));
    const QueryRanks fr = rank_query(scores, part, EvalMode::kFull, derive_seed(spec.seed, q, 2));
    for (std::size_t m = 0; m < nm; ++m) {
      sparse[q * nm + m] = report_from_ranks(sr, part, metrics[m]).mean;
      full[q * nm + m] = report_from_ranks(fr, part, metrics[m]).mean;
    }
  }

  std::vector<PipelinePoint> out;
  std::vector<double> col(nq);
  for (std::size_t m = 0; m < nm; ++m) {
    PipelinePoint p;
    p.metric = metrics[m].tag();
    p.l_nominal = spec.l;
    p.rho = spec.rho;
    p.density = split.config.density;
    p.n_queries = nq;
    for (std::size_t q = 0; q < nq; ++q) col[q] = sparse[q * nm + m];
    p.sparse = aggregate(col);
    for (std::size_t q = 0; q < nq; ++q) col[q] = full[q * nm + m];
    p.full = aggregate(col);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PipelinePoint> sweep_strength(const WorldSplit& split,
                                          std::span<const QueryAnswerPartition> queries,
                                          std::span<const double> l_grid, double rho,
                                          std::span<const RankingFunction> metrics,
                                          std::uint64_t seed, const ScoreBands& bands) {
  if (l_grid.empty()) throw DomainError("strength grid must be nonempty");
  std::vector<PipelinePoint> out;
  for (std::size_t i = 0; i < l_grid.size(); ++i) {
    OracleSpec spec{l_grid[i], rho, bands, derive_seed(seed, i)};
    auto points = run_pipeline(split, queries, spec, metrics);
    out.insert(out.end(), points.begin(), points.end());
  }
  return out;
}

SparseReference sparse_reference(const WorldSplit& split,
                                 std::span<const QueryAnswerPartition> queries, double l,
                                 const RankingFunction& rf) {
  if (queries.empty()) throw DomainError("reference needs at least one query");
  // Queries with the same (N, N_entity) share a value.
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<double, double>> cache;
  double mean = 0.0, delta = 0.0;
  for (const auto& q : queries) {
    AnalyticParams p;
    p.l = l;
    p.beta = split.sparsity();
    p.n = static_cast<std::int64_t>(q.full_test_answers());
    p.n_entity = static_cast<std::int64_t>(split.num_entities() - q.train.size());
    auto [it, fresh] = cache.try_emplace({p.n, p.n_entity});
    if (fresh) {
      it->second = {selection_adjusted_expectation(p, rf), exact_expectation(p, rf).delta_upper};
    }
    mean += it->second.first;
    delta += it->second.second;
  }
  const auto n = static_cast<double>(queries.size());
  return {mean / n, delta / n};
}

namespace {

std::vector<PipelinePoint> sorted_by_full(std::span<const PipelinePoint> points) {
  std::vector<PipelinePoint> v(points.begin(), points.end());
  std::stable_sort(v.begin(), v.end(), [](const PipelinePoint& a, const PipelinePoint& b) {
    return a.full.mean < b.full.mean;
  });
  return v;
}

}  // namespace

double concavity_statistic(std::span<const PipelinePoint> points) {
  if (points.size() < 3) throw DomainError("concavity needs at least three points");
  const auto v = sorted_by_full(points);
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double dx0 = v[i].full.mean - v[i - 1].full.mean;
    const double dx1 = v[i + 1].full.mean - v[i].full.mean;
    if (dx0 <= 0.0 || dx1 <= 0.0) throw DomainError("full means must be distinct");
    const double s0 = (v[i].sparse.mean - v[i - 1].sparse.mean) / dx0;
    const double s1 = (v[i + 1].sparse.mean - v[i].sparse.mean) / dx1;
    sum += (s1 - s0) / (0.5 * (dx0 + dx1));
  }
  return sum / static_cast<double>(v.size() - 2);
}

double max_identity_deviation(std::span<const PipelinePoint> points) {
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, std::abs(p.sparse.mean - p.full.mean));
  return worst;
}

}  // namespace owkg
