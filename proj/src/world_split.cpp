#include "owkg/world_split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace owkg {

void SplitConfig::validate() const {
  if (!(density > 0.0 && density <= 1.0)) {
    throw DomainError("density must lie in (0, 1]");
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw DomainError("train ratio must lie in (0, 1)");
  }
}

double alpha_from_density(double density, double train_ratio) {
  SplitConfig{density, train_ratio, 0}.validate();
  return density * (1.0 - train_ratio) / (1.0 - density * train_ratio);
}

std::vector<Fact> WorldSplit::g_train() const {
  std::vector<Fact> out;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (roles[i] == FactRole::kTrain) out.push_back(full[i]);
  }
  return out;
}

std::vector<Fact> WorldSplit::g_test() const {
  std::vector<Fact> out;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (roles[i] != FactRole::kMissing) out.push_back(full[i]);
  }
  return out;
}

std::size_t WorldSplit::count(FactRole role) const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), role));
}

FeasibleInterval feasible_split_rho(double sparsity, double positive_rate) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0) ||
      !(positive_rate >= 0.0 && positive_rate <= 1.0)) {
    throw DomainError("sparsity and positive rate must lie in [0, 1]");
  }
  const double alpha = 1.0 - sparsity;
  if (sparsity == 0.0 || alpha == 0.0 || positive_rate == 0.0 || positive_rate == 1.0) {
    return {0.0, 0.0};  // one of the events is degenerate
  }
  const double up = std::sqrt(alpha * sparsity * (1.0 - positive_rate) / positive_rate);
  const double down = std::sqrt(alpha * sparsity * positive_rate / (1.0 - positive_rate));
  // sparsity + rho*up in [0,1] and sparsity - rho*down in [0,1].
  const double lo = std::max({-sparsity / up, -alpha / down, -1.0});
  const double hi = std::min({alpha / up, sparsity / down, 1.0});
  return {lo, hi};
}

MissingLaw missing_law(double sparsity, double positive_rate, double rho) {
  if (rho == 0.0) return {sparsity, sparsity};
  const FeasibleInterval feasible = feasible_split_rho(sparsity, positive_rate);
  if (!feasible.contains(rho)) {
    std::ostringstream msg;
    msg << "correlation " << rho << " is infeasible for sparsity " << sparsity
        << " and positive rate " << positive_rate << "; feasible interval ["
        << feasible.lo << ", " << feasible.hi << "]";
    throw InfeasibleCorrelation(msg.str(), feasible);
  }
  const double alpha = 1.0 - sparsity;
  const double up = std::sqrt(alpha * sparsity * (1.0 - positive_rate) / positive_rate);
  const double down = std::sqrt(alpha * sparsity * positive_rate / (1.0 - positive_rate));
  return {std::clamp(sparsity + rho * up, 0.0, 1.0),
          std::clamp(sparsity - rho * down, 0.0, 1.0)};
}

namespace {

// Shared sampler. One uniform per fact: the bottom d*eta mass is training;
// the rest is rescaled to [0,1) and compared to the fact's missing probability.
template <typename MissingProb>
WorldSplit assign_roles(const KnowledgeGraph& kg_full, const SplitConfig& config,
                        std::vector<double>& uniforms, MissingProb&& missing_prob) {
  WorldSplit split;
  split.genders = kg_full.genders();
  split.full = kg_full.facts();
  split.config = config;
  split.roles.resize(split.full.size());
  const double train_prob = config.density * config.train_ratio;
  for (std::size_t i = 0; i < split.full.size(); ++i) {
    const double u = uniforms[i];
    if (u < train_prob) {
      split.roles[i] = FactRole::kTrain;
    } else {
      const double v = (u - train_prob) / (1.0 - train_prob);
      split.roles[i] = v < missing_prob(i) ? FactRole::kMissing : FactRole::kTest;
    }
  }
  return split;
}

std::vector<double> draw_uniforms(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& u : out) u = uniform01(rng);
  return out;
}

void require_closed(const KnowledgeGraph& kg) {
  if (!kg.closed()) throw DomainError("splitting requires a closed-world graph");
}

}  // namespace

WorldSplit split_independent(const KnowledgeGraph& kg_full, const SplitConfig& config) {
  config.validate();
  require_closed(kg_full);
  auto uniforms = draw_uniforms(kg_full.num_facts(), config.seed);
  const double beta = 1.0 - alpha_from_density(config.density, config.train_ratio);
  return assign_roles(kg_full, config, uniforms, [beta](std::size_t) { return beta; });
}

WorldSplit split_correlated(const KnowledgeGraph& kg_full, const SplitConfig& config,
                            const CorrelationTarget& target) {
  config.validate();
  require_closed(kg_full);
  if (target.predictions.size() != kg_full.num_facts()) {
    throw DomainError("reference predictions must cover every fact of G_full");
  }
  auto uniforms = draw_uniforms(kg_full.num_facts(), config.seed);
  const double train_prob = config.density * config.train_ratio;
  std::size_t non_train = 0;
  std::size_t predicted = 0;
  for (std::size_t i = 0; i < uniforms.size(); ++i) {
    if (uniforms[i] >= train_prob) {
      ++non_train;
      if (target.predictions[i]) ++predicted;
    }
  }
  const double beta = 1.0 - alpha_from_density(config.density, config.train_ratio);
  if (non_train == 0) {
    return assign_roles(kg_full, config, uniforms, [beta](std::size_t) { return beta; });
  }
  const double positive_rate = static_cast<double>(predicted) / non_train;
  const MissingLaw law = missing_law(beta, positive_rate, target.rho);
  return assign_roles(kg_full, config, uniforms, [&](std::size_t i) {
    return target.predictions[i] ? law.given_predicted : law.given_unpredicted;
  });
}

double empirical_correlation(const std::vector<bool>& missing,
                             const std::vector<bool>& predicted) {
  if (missing.size() != predicted.size()) {
    throw DomainError("correlation masks must have equal length");
  }
  if (missing.size() < 2) throw DomainError("correlation needs at least two entries");
  std::size_t nx = 0, ny = 0, nxy = 0;
  for (std::size_t i = 0; i < missing.size(); ++i) {
    nx += missing[i];
    ny += predicted[i];
    nxy += missing[i] && predicted[i];
  }
  const double n = static_cast<double>(missing.size());
  const double px = nx / n, py = ny / n, pxy = nxy / n;
  const double denom = px * (1.0 - px) * py * (1.0 - py);
  if (denom <= 0.0) throw DomainError("correlation is undefined for a constant mask");
  return (pxy - px * py) / std::sqrt(denom);
}

std::vector<bool> missing_mask(const WorldSplit& split) {
  std::vector<bool> out;
  for (FactRole role : split.roles) {
    if (role != FactRole::kTrain) out.push_back(role == FactRole::kMissing);
  }
  return out;
}

std::vector<bool> non_train_slice(const WorldSplit& split, const std::vector<bool>& per_fact) {
  if (per_fact.size() != split.full.size()) {
    throw DomainError("per-fact vector does not match the split");
  }
  std::vector<bool> out;
  for (std::size_t i = 0; i < split.roles.size(); ++i) {
    if (split.roles[i] != FactRole::kTrain) out.push_back(per_fact[i]);
  }
  return out;
}

std::vector<QueryAnswerPartition> eligible_queries(const WorldSplit& split,
                                                   std::size_t min_full_answers) {
  // Facts are in (relation, head, tail) order, so each query is a contiguous run.
  std::vector<QueryAnswerPartition> out;
  std::size_t i = 0;
  while (i < split.full.size()) {
    QueryAnswerPartition q{split.full[i].relation, split.full[i].head, {}, {}, {}};
    std::size_t j = i;
    for (; j < split.full.size() && split.full[j].relation == q.relation &&
           split.full[j].head == q.head;
         ++j) {
      const EntityId tail = split.full[j].tail;
      switch (split.roles[j]) {
        case FactRole::kTrain: q.train.push_back(tail); break;
        case FactRole::kTest: q.test.push_back(tail); break;
        case FactRole::kMissing: q.missing.push_back(tail); break;
      }
    }
    if (q.full_answers() >= min_full_answers && !q.test.empty()) {
      out.push_back(std::move(q));
    }
    i = j;
  }
  return out;
}

std::vector<QueryAnswerPartition> build_query_set(const WorldSplit& split,
                                                  std::size_t min_full_answers,
                                                  std::size_t n_queries,
                                                  std::uint64_t seed) {
  auto pool = eligible_queries(split, min_full_answers);
  if (pool.size() < n_queries) {
    std::ostringstream msg;
    msg << "requested " << n_queries << " queries but only " << pool.size()
        << " (relation, head) pairs have >= " << min_full_answers
        << " answers and a test answer (short by " << n_queries - pool.size() << ")";
    throw DomainError(msg.str());
  }
  Rng rng(seed);
  for (std::size_t k = 0; k < n_queries; ++k) {
    const std::size_t pick = k + uniform_below(rng, pool.size() - k);
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(n_queries);
  return pool;
}

}  // namespace owkg
