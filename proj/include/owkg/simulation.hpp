#pragma once

// Monte Carlo simulation of the missing-answer and classifier model: N answers
// per query, each missing with probability β and classified positive with
// probability l1 (missing) or l2 (test). Positives are ranked above all
// negatives; within each class the order is uniform. Ranks are filtered as in
// a sparse evaluation (other test answers are removed, missing answers stay).

#include <cstdint>
#include <optional>
#include <vector>

#include "owkg/analytic.hpp"
#include "owkg/common.hpp"
#include "owkg/metrics.hpp"

namespace owkg {

struct SimConfig {
  AnalyticParams params;  // l, beta, n, n_entity, rho
  int repeats = 500;
  std::uint64_t root_seed = 0;
};

struct SimResult {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation of per-query values
  std::int64_t repeats_used = 0;
  std::int64_t skipped = 0;  // draws with every answer missing
  bool low_repeats = false;  // fewer than two usable draws; std reported as 0
};

// One simulated query, with per-answer detail.
struct QueryDraw {
  int missing_positive = 0;
  int missing_negative = 0;
  int test_positive = 0;
  int test_negative = 0;
  std::vector<std::uint64_t> positive_ranks;  // filtered ranks, test answers only
  std::vector<std::uint64_t> negative_ranks;
  bool skipped() const { return test_positive + test_negative == 0; }
};

class QuerySimulator {
 public:
  // Validates params; throws InfeasibleCorrelation for an infeasible rho.
  QuerySimulator(const AnalyticParams& params, const RankingFunction& rf);

  // Per-query metric, or nullopt when every answer is missing.
  std::optional<double> draw(Rng& rng);
  void draw_detailed(Rng& rng, QueryDraw& out);

  const StrengthPair& strengths() const { return strengths_; }

 private:
  AnalyticParams params_;
  RankingFunction rf_;
  StrengthPair strengths_;
  double cut_missing_positive_;
  double cut_missing_;
  double cut_test_positive_;
  QueryDraw scratch_;
  std::vector<std::uint64_t> slots_;
};

// simulate_query(params, rf, seed): one draw from an engine seeded with `seed`.
std::optional<double> simulate_query(const AnalyticParams& params, const RankingFunction& rf,
                                     std::uint64_t seed);

// Repeat r of a run uses an engine seeded derive_seed(cell_seed, r).
SimResult simulate_cell(const AnalyticParams& params, const RankingFunction& rf, int repeats,
                        std::uint64_t cell_seed);

struct GridCell {
  double l = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  bool feasible = true;  // false when rho is infeasible for (l, beta); no result then
  SimResult result;
};

// Cells in row-major (l, alpha) order; cell c uses derive_seed(root_seed, c).
// sim.params supplies n, n_entity and rho; l and beta come from the grids.
// Cells run in parallel; output does not depend on the schedule.
std::vector<GridCell> simulate_grid(const std::vector<double>& l_grid,
                                    const std::vector<double>& alpha_grid,
                                    const RankingFunction& rf, const SimConfig& sim);

struct VarianceEstimate {
  double variance = 0.0;
  double mean = 0.0;
  std::int64_t n = 0;
};
VarianceEstimate estimate_variance(const AnalyticParams& params, const RankingFunction& rf,
                                   int repeats, std::uint64_t seed);

struct InconsistencyTrials {
  double probability = 0.0;  // fraction of trials where the weaker model ties or wins
  std::int64_t trials = 0;
};
// Each trial averages n_queries non-skipped queries per model. Trial t uses
// engines derive_seed(seed, t, 0) for strength l and derive_seed(seed, t, 1)
// for l + dl. params supplies beta, n, n_entity; its l and rho are ignored.
InconsistencyTrials simulate_pairwise_inconsistency(double l, double dl,
                                                    const AnalyticParams& params,
                                                    std::int64_t n_queries, std::int64_t trials,
                                                    std::uint64_t seed);

}  // namespace owkg
