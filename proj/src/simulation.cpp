#include "owkg/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace owkg {

QuerySimulator::QuerySimulator(const AnalyticParams& params, const RankingFunction& rf)
    : params_(params), rf_(rf) {
  params_.validate();
  strengths_ = conditional_strengths(params_.l, params_.beta, params_.rho);
  const double beta = params_.beta;
  cut_missing_positive_ = beta * strengths_.l1;
  cut_missing_ = beta;
  cut_test_positive_ = beta + (1.0 - beta) * strengths_.l2;
}

void QuerySimulator::draw_detailed(Rng& rng, QueryDraw& out) {
  out.missing_positive = out.missing_negative = out.test_positive = out.test_negative = 0;
  out.positive_ranks.clear();
  out.negative_ranks.clear();
  for (std::int64_t i = 0; i < params_.n; ++i) {
    const double u = uniform01(rng);
    if (u < cut_missing_positive_) {
      ++out.missing_positive;
    } else if (u < cut_missing_) {
      ++out.missing_negative;
    } else if (u < cut_test_positive_) {
      ++out.test_positive;
    } else {
      ++out.test_negative;
    }
  }
  if (out.skipped()) return;

  // Positive class: a uniform order of test and missing positives. The j-th
  // test positive (0-based, in order) at slot p has p - j missing ones ahead.
  {
    int need = out.test_positive;
    int remaining = out.test_positive + out.missing_positive;
    int ahead = 0;
    for (int slot = 0; need > 0; ++slot, --remaining) {
      if (uniform_below(rng, static_cast<std::uint64_t>(remaining)) <
          static_cast<std::uint64_t>(need)) {
        out.positive_ranks.push_back(static_cast<std::uint64_t>(1 + ahead));
        --need;
      } else {
        ++ahead;
      }
    }
  }

  // Negative class: test negatives among missing negatives and non-answers.
  // Only the test negatives' slots are drawn (Floyd), so the cost is O(N).
  if (out.test_negative > 0) {
    const std::uint64_t k = static_cast<std::uint64_t>(out.test_negative);
    const std::uint64_t total = k + static_cast<std::uint64_t>(out.missing_negative) +
                                static_cast<std::uint64_t>(params_.n_entity - params_.n);
    slots_.clear();
    for (std::uint64_t j = total - k; j < total; ++j) {
      const std::uint64_t t = uniform_below(rng, j + 1);
      if (std::find(slots_.begin(), slots_.end(), t) == slots_.end()) {
        slots_.push_back(t);
      } else {
        slots_.push_back(j);
      }
    }
    std::sort(slots_.begin(), slots_.end());
    const auto above = static_cast<std::uint64_t>(out.missing_positive);
    for (std::uint64_t j = 0; j < k; ++j) {
      out.negative_ranks.push_back(1 + above + slots_[j] - j);
    }
  }
}

std::optional<double> QuerySimulator::draw(Rng& rng) {
  draw_detailed(rng, scratch_);
  if (scratch_.skipped()) return std::nullopt;
  double sum = 0.0;
  for (auto r : scratch_.positive_ranks) sum += rf_.value(r);
  for (auto r : scratch_.negative_ranks) sum += rf_.value(r);
  return sum / static_cast<double>(scratch_.test_positive + scratch_.test_negative);
}

std::optional<double> simulate_query(const AnalyticParams& params, const RankingFunction& rf,
                                     std::uint64_t seed) {
  QuerySimulator sim(params, rf);
  Rng rng(seed);
  return sim.draw(rng);
}

SimResult simulate_cell(const AnalyticParams& params, const RankingFunction& rf, int repeats,
                        std::uint64_t cell_seed) {
  if (repeats < 1) throw DomainError("repeats must be >= 1");
  QuerySimulator sim(params, rf);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(repeats));
  SimResult out;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(cell_seed, static_cast<std::uint64_t>(r)));
    if (auto v = sim.draw(rng)) {
      values.push_back(*v);
    } else {
      ++out.skipped;
    }
  }
  out.repeats_used = static_cast<std::int64_t>(values.size());
  if (values.empty()) {
    out.low_repeats = true;
    out.mean = std::nan("");
    return out;
  }
  const Aggregate a = aggregate(values);
  out.mean = a.mean;
  out.std = a.std;
  out.low_repeats = values.size() < 2;
  return out;
}

std::vector<GridCell> simulate_grid(const std::vector<double>& l_grid,
                                    const std::vector<double>& alpha_grid,
                                    const RankingFunction& rf, const SimConfig& sim) {
  if (l_grid.empty() || alpha_grid.empty()) throw DomainError("grids must be nonempty");
  if (sim.repeats < 1) throw DomainError("repeats must be >= 1");
  std::vector<GridCell> cells(l_grid.size() * alpha_grid.size());
  for (std::size_t i = 0; i < l_grid.size(); ++i) {
    for (std::size_t j = 0; j < alpha_grid.size(); ++j) {
      GridCell& cell = cells[i * alpha_grid.size() + j];
      cell.l = l_grid[i];
      cell.alpha = alpha_grid[j];
      cell.rho = sim.params.rho;
      AnalyticParams p = sim.params;
      p.l = cell.l;
      p.beta = 1.0 - cell.alpha;
      p.validate();
      cell.feasible = sim.params.rho == 0.0 || feasible_model_rho(p.l, p.beta).contains(p.rho);
    }
  }
  const auto n_cells = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < n_cells; ++c) {
    GridCell& cell = cells[static_cast<std::size_t>(c)];
    if (!cell.feasible) continue;
    AnalyticParams p = sim.params;
    p.l = cell.l;
    p.beta = 1.0 - cell.alpha;
    cell.result = simulate_cell(p, rf, sim.repeats,
                                derive_seed(sim.root_seed, static_cast<std::uint64_t>(c)));
  }
  return cells;
}

VarianceEstimate estimate_variance(const AnalyticParams& params, const RankingFunction& rf,
                                   int repeats, std::uint64_t seed) {
  const SimResult r = simulate_cell(params, rf, repeats, seed);
  return {r.std * r.std, r.mean, r.repeats_used};
}

namespace {

double average_of_queries(QuerySimulator& sim, Rng& rng, std::int64_t n_queries) {
  double sum = 0.0;
  for (std::int64_t q = 0; q < n_queries;) {
    if (auto v = sim.draw(rng)) {
      sum += *v;
      ++q;
    }
  }
  return sum / static_cast<double>(n_queries);
}

}  // namespace

InconsistencyTrials simulate_pairwise_inconsistency(double l, double dl,
                                                    const AnalyticParams& params,
                                                    std::int64_t n_queries, std::int64_t trials,
                                                    std::uint64_t seed) {
  if (n_queries < 1 || trials < 1) throw DomainError("n_queries and trials must be >= 1");
  if (!(dl >= 0.0) || !(l + dl <= 1.0)) throw DomainError("need dl >= 0 and l + dl <= 1");
  if (params.beta >= 1.0) throw DomainError("beta must be < 1 (every query would be skipped)");
  AnalyticParams weak = params;
  weak.l = l;
  weak.rho = 0.0;
  AnalyticParams strong = weak;
  strong.l = l + dl;
  const RankingFunction rf = RankingFunction::mrr();
  std::int64_t weaker_wins = 0;
#pragma omp parallel reduction(+ : weaker_wins)
  {
    QuerySimulator sim_weak(weak, rf);
    QuerySimulator sim_strong(strong, rf);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < trials; ++t) {
      Rng rng_weak(derive_seed(seed, static_cast<std::uint64_t>(t), 0));
      Rng rng_strong(derive_seed(seed, static_cast<std::uint64_t>(t), 1));
      const double a = average_of_queries(sim_weak, rng_weak, n_queries);
      const double b = average_of_queries(sim_strong, rng_strong, n_queries);
      if (a >= b) ++weaker_wins;
    }
  }
  return {static_cast<double>(weaker_wins) / static_cast<double>(trials), trials};
}

}  // namespace owkg
