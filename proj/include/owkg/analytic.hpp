#pragma once

// Closed forms for the expected metric of a strength-ℓ classifier on a query
// whose N full test answers are each missing with probability β.

#include <cstdint>
#include <optional>

#include "owkg/metrics.hpp"
#include "owkg/world_split.hpp"

namespace owkg {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr std::int64_t kMaxAnalyticN = 1000000;

struct AnalyticParams {
  double l = 0.7;     // strength, in [0, 1]
  double beta = 0.35;  // sparsity, in [0, 1]
  std::int64_t n = 43;  // full test answers of the query
  std::int64_t n_entity = 14505;
  double rho = 0.0;

  double alpha() const { return 1.0 - beta; }
  void validate() const;
};

struct ExpectationResult {
  double value = 0.0;
  double delta_upper = 0.0;         // bound on the neglected negative-class term
  double approx_error_bound = 0.0;  // 0 for exact forms
  bool flagged = false;             // approximation outside its sensible range
};

// Binomial B(n, p) pmf, cdf and d cdf / dp. Domain errors for p outside
// [0, 1], n < 0 or n > kMaxAnalyticN; k outside [0, n] gives 0 (pmf) or
// 0/1 (cdf) as usual, and cdf_dp requires 0 <= k <= n.
double binom_pmf(std::int64_t n, double p, std::int64_t k);
double binom_cdf(std::int64_t n, double p, std::int64_t k);
double binom_cdf_dp(std::int64_t n, double p, std::int64_t k);

// Uncorrelated main term Ê plus δ bound. Requires rho == 0.
ExpectationResult exact_expectation(const AnalyticParams& params, const RankingFunction& rf);

// dÊ/dℓ. Requires 0 < ℓ and rho == 0.
double expectation_derivative(const AnalyticParams& params, const RankingFunction& rf);

// Log approximation Ẽ for MRR with its error bound. Requires ℓβ in (0, 1].
ExpectationResult mrr_log_approx(const AnalyticParams& params);

struct StrengthPair {
  double l1;  // accuracy on missing answers
  double l2;  // accuracy on test answers
};
FeasibleInterval feasible_model_rho(double l, double beta);
// Throws InfeasibleCorrelation outside feasible_model_rho.
StrengthPair conditional_strengths(double l, double beta, double rho);

struct CorrelatedExpectation {
  ExpectationResult exact;
  std::optional<ExpectationResult> approx;  // MRR only
  StrengthPair strengths;
};
// With rho == 0 the fields equal exact_expectation / mrr_log_approx bit for bit.
CorrelatedExpectation correlated_expectation(const AnalyticParams& params,
                                             const RankingFunction& rf);

// ℓ₁β(N+2) >= exp(α + sqrt(αβ(1-ℓ)/ℓ) - γ). False when the feasible ρ set is
// {0} (ℓ in {0, 1} or β in {0, 1}), where ∂Ẽ/∂ρ cannot be negative.
bool rho_condition_holds(const AnalyticParams& params);

double normal_cdf(double x);
double normal_quantile(double p);

struct InconsistencyResult {
  double p = 0.5;
  bool unreliable = false;  // N_q <= 50
};
InconsistencyResult inconsistency_probability(double l, double dl, double beta,
                                              std::int64_t n, std::int64_t n_queries,
                                              double v1, double v2);

// c = 2(βℓ(N+1)Ψ⁻¹(p))²V and ceil(c/Δℓ²).
double min_queries_constant(double l, double beta, std::int64_t n, double p, double v);
std::uint64_t min_queries_from_constant(double c, double dl);
std::uint64_t min_queries(double l, double dl, double beta, std::int64_t n, double p, double v);

// E[metric | at least one test answer]: Ê with the all-missing draw (m = N)
// removed and renormalized. Requires rho == 0 and β < 1.
double selection_adjusted_expectation(const AnalyticParams& params, const RankingFunction& rf);

}  // namespace owkg
