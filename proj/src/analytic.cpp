#include "owkg/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "owkg/common.hpp"

namespace owkg {

namespace {

constexpr std::int64_t kMaxEntityCount = 100000000;

// Neumaier compensated summation.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

void check_binomial(std::int64_t n, double p) {
  if (n < 0 || n > kMaxAnalyticN) {
    throw DomainError("binomial size must lie in [0, " + std::to_string(kMaxAnalyticN) + "]");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double pmf_unchecked(std::int64_t n, double p, std::int64_t k) {
  if (k < 0 || k > n) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  const double rest = static_cast<double>(n - k);
  return std::exp(log_choose(n, k) + kd * std::log(p) + rest * std::log1p(-p));
}

// Whole pmf by the multiplicative recurrence outward from the mode, then
// normalized, so that sums over it are exact to rounding.
std::vector<double> pmf_vector(std::int64_t n, double p) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0 || p == 1.0) {
    out[p == 0.0 ? 0 : static_cast<std::size_t>(n)] = 1.0;
    return out;
  }
  const auto mode = std::min<std::int64_t>(
      n, static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p)));
  const double odds = p / (1.0 - p);
  out[static_cast<std::size_t>(mode)] = 1.0;
  for (std::int64_t k = mode; k < n; ++k) {
    out[static_cast<std::size_t>(k) + 1] = out[static_cast<std::size_t>(k)] *
                                           static_cast<double>(n - k) /
                                           static_cast<double>(k + 1) * odds;
  }
  for (std::int64_t k = mode; k > 0; --k) {
    out[static_cast<std::size_t>(k) - 1] = out[static_cast<std::size_t>(k)] *
                                           static_cast<double>(k) /
                                           static_cast<double>(n - k + 1) / odds;
  }
  Accumulator total;
  for (double v : out) total.add(v);
  const double norm = total.value();
  for (double& v : out) v /= norm;
  return out;
}

// Σ_{k=0}^{n} P(J > k) / f(k+1) for J ~ B(n+1, q), tails summed from the top.
double tail_sum(std::int64_t n, double q, const RankingFunction& rf) {
  const auto pmf = pmf_vector(n + 1, q);
  std::vector<double> tail(static_cast<std::size_t>(n) + 1);
  Accumulator acc;
  for (std::int64_t k = n; k >= 0; --k) {
    acc.add(pmf[static_cast<std::size_t>(k) + 1]);
    tail[static_cast<std::size_t>(k)] = acc.value();
  }
  Accumulator sum;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double v = rf.value(static_cast<std::uint64_t>(k) + 1);
    if (v == 0.0) break;  // Hits@K beyond K; 1/f is nonincreasing
    sum.add(tail[static_cast<std::size_t>(k)] * v);
  }
  return sum.value();
}

// (l2/l1) · (1/(β(N+1))) Σ (1-Φ̃(k))/f(k+1), Φ̃ the cdf of B(N+1, l1 β).
// The uncorrelated form is the case l1 == l2.
double expectation_kernel(double l1, double l2, double beta, std::int64_t n,
                          const RankingFunction& rf) {
  if (beta == 0.0 || l1 == 0.0) return l2 * rf.value(1);  // limit as l1 β -> 0
  const double main = tail_sum(n, l1 * beta, rf) / (beta * static_cast<double>(n + 1));
  return std::min(1.0, (l2 / l1) * main);
}

double delta_bound(double l_test, std::int64_t n, std::int64_t n_entity,
                   const RankingFunction& rf) {
  const std::int64_t m = n_entity - n;
  const double md = static_cast<double>(m);
  if (rf.kind() == RankingFunction::Kind::kMrr) return (1.0 - l_test) * std::log(md) / md;
  Accumulator sum;
  for (std::int64_t k = 1; k <= m; ++k) {
    const double v = rf.value(static_cast<std::uint64_t>(k));
    if (v == 0.0) break;
    sum.add(v);
  }
  return (1.0 - l_test) * sum.value() / md;
}

struct LogApprox {
  double value;
  double bound;
};

LogApprox log_approx(double l, double beta, std::int64_t n) {
  const double n1 = static_cast<double>(n + 1);
  const double x = l * beta;
  const double value = (std::log(l) + std::log(beta) + std::log(n1 + 1.0) + kEulerGamma) /
                       (beta * n1);
  const double harmonic_term = 1.0 / (2.0 * beta * n1 * n1);
  double tail_term = 0.0;
  if (x < 1.0) {
    const double log_q = n1 * std::log1p(-x);
    const double q = std::exp(log_q);
    tail_term = q / -std::expm1(log_q) * std::log(1.0 / x) / (beta * n1);
  }
  return {value, std::max(harmonic_term, tail_term)};
}

void require_uncorrelated(const AnalyticParams& params) {
  if (params.rho != 0.0) {
    throw DomainError("rho must be 0 here; use correlated_expectation for rho != 0");
  }
}

}  // namespace

void AnalyticParams::validate() const {
  if (!(l >= 0.0 && l <= 1.0)) throw DomainError("strength l must lie in [0, 1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("sparsity beta must lie in [0, 1]");
  if (n < 0 || n > kMaxAnalyticN) {
    throw DomainError("N must lie in [0, " + std::to_string(kMaxAnalyticN) + "]");
  }
  if (n_entity <= n || n_entity > kMaxEntityCount) {
    throw DomainError("N_entity must exceed N (and be at most 1e8)");
  }
  if (!(rho >= -1.0 && rho <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
}

double binom_pmf(std::int64_t n, double p, std::int64_t k) {
  check_binomial(n, p);
  return pmf_unchecked(n, p, k);
}

double binom_cdf(std::int64_t n, double p, std::int64_t k) {
  check_binomial(n, p);
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  const auto pmf = pmf_vector(n, p);
  // Sum the shorter side.
  Accumulator acc;
  if (static_cast<double>(k) <= static_cast<double>(n) * p) {
    for (std::int64_t j = 0; j <= k; ++j) acc.add(pmf[static_cast<std::size_t>(j)]);
    return std::min(1.0, acc.value());
  }
  for (std::int64_t j = k + 1; j <= n; ++j) acc.add(pmf[static_cast<std::size_t>(j)]);
  return std::max(0.0, 1.0 - acc.value());
}

double binom_cdf_dp(std::int64_t n, double p, std::int64_t k) {
  check_binomial(n, p);
  if (k < 0 || k > n) throw DomainError("binom_cdf_dp needs 0 <= k <= n");
  if (k == n) return 0.0;
  const double kd = static_cast<double>(k);
  const double rest = static_cast<double>(n - k - 1);
  const double coeff = std::exp(log_choose(n, k + 1)) * (kd + 1.0);
  if (p == 0.0 || p == 1.0) return -coeff * std::pow(p, kd) * std::pow(1.0 - p, rest);
  return -std::exp(log_choose(n, k + 1) + std::log(kd + 1.0) + kd * std::log(p) +
                   rest * std::log1p(-p));
}

ExpectationResult exact_expectation(const AnalyticParams& params, const RankingFunction& rf) {
  params.validate();
  require_uncorrelated(params);
  ExpectationResult r;
  r.value = expectation_kernel(params.l, params.l, params.beta, params.n, rf);
  r.delta_upper = delta_bound(params.l, params.n, params.n_entity, rf);
  return r;
}

double expectation_derivative(const AnalyticParams& params, const RankingFunction& rf) {
  params.validate();
  require_uncorrelated(params);
  if (params.l == 0.0) throw DomainError("the derivative needs l > 0");
  if (params.beta == 0.0) return rf.value(1);  // Ê = l/f(1)
  const double x = params.l * params.beta;
  const double n1 = static_cast<double>(params.n + 1);
  switch (rf.kind()) {
    case RankingFunction::Kind::kMrr:
      return -std::expm1(n1 * std::log1p(-x)) / (x * n1);
    case RankingFunction::Kind::kHitsAtK:
      return binom_cdf(params.n, x, rf.k() - 1);
    default: {
      const auto pmf = pmf_vector(params.n + 1, x);
      Accumulator acc;
      for (std::int64_t k = 1; k <= params.n + 1; ++k) {
        const double g = static_cast<double>(k) * rf.value(static_cast<std::uint64_t>(k));
        acc.add(pmf[static_cast<std::size_t>(k)] * g);
      }
      return acc.value() / (x * n1);
    }
  }
}

ExpectationResult mrr_log_approx(const AnalyticParams& params) {
  params.validate();
  require_uncorrelated(params);
  if (!(params.l * params.beta > 0.0)) throw DomainError("the log approximation needs l*beta > 0");
  const LogApprox a = log_approx(params.l, params.beta, params.n);
  ExpectationResult r;
  r.value = a.value;
  r.approx_error_bound = a.bound;
  r.delta_upper = delta_bound(params.l, params.n, params.n_entity, RankingFunction::mrr());
  r.flagged = a.value <= 0.0;
  return r;
}

FeasibleInterval feasible_model_rho(double l, double beta) {
  if (!(l >= 0.0 && l <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw DomainError("l and beta must lie in [0, 1]");
  }
  // The correlation is symmetric in (X, Y): P(Y|X) = l + rho*sqrt(l(1-l)α/β)
  // has the same structure as the splitter's P(X|Y) with the roles swapped.
  return feasible_split_rho(l, beta);
}

StrengthPair conditional_strengths(double l, double beta, double rho) {
  const FeasibleInterval feasible = feasible_model_rho(l, beta);
  if (rho == 0.0) return {l, l};
  if (!feasible.contains(rho)) {
    std::ostringstream msg;
    msg << "correlation " << rho << " is infeasible for l=" << l << ", beta=" << beta
        << "; feasible interval [" << feasible.lo << ", " << feasible.hi << "]";
    throw InfeasibleCorrelation(msg.str(), feasible);
  }
  const double alpha = 1.0 - beta;
  const double spread = l * (1.0 - l);
  return {std::clamp(l + rho * std::sqrt(spread * alpha / beta), 0.0, 1.0),
          std::clamp(l - rho * std::sqrt(spread * beta / alpha), 0.0, 1.0)};
}

CorrelatedExpectation correlated_expectation(const AnalyticParams& params,
                                             const RankingFunction& rf) {
  params.validate();
  CorrelatedExpectation out;
  out.strengths = conditional_strengths(params.l, params.beta, params.rho);
  const double l1 = out.strengths.l1;
  const double l2 = out.strengths.l2;
  out.exact.value = expectation_kernel(l1, l2, params.beta, params.n, rf);
  out.exact.delta_upper = delta_bound(l2, params.n, params.n_entity, rf);
  if (rf.kind() == RankingFunction::Kind::kMrr && l1 * params.beta > 0.0) {
    const LogApprox a = log_approx(l1, params.beta, params.n);
    ExpectationResult approx;
    approx.value = (l2 / l1) * a.value;
    approx.approx_error_bound = (l2 / l1) * a.bound;
    approx.delta_upper = out.exact.delta_upper;
    approx.flagged = approx.value <= 0.0;
    out.approx = approx;
  }
  return out;
}

bool rho_condition_holds(const AnalyticParams& params) {
  params.validate();
  const double l = params.l;
  const double beta = params.beta;
  if (l <= 0.0 || l >= 1.0 || beta <= 0.0 || beta >= 1.0) return false;
  const double alpha = 1.0 - beta;
  const double l1 = conditional_strengths(l, beta, params.rho).l1;
  const double lhs = l1 * beta * static_cast<double>(params.n + 2);
  const double rhs = std::exp(alpha + std::sqrt(alpha * beta * (1.0 - l) / l) - kEulerGamma);
  return lhs >= rhs;
}

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

InconsistencyResult inconsistency_probability(double l, double dl, double beta,
                                              std::int64_t n, std::int64_t n_queries,
                                              double v1, double v2) {
  if (!(l > 0.0 && l <= 1.0)) throw DomainError("l must lie in (0, 1]");
  if (!(dl > -l)) throw DomainError("dl must exceed -l");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (n < 0) throw DomainError("N must be >= 0");
  if (n_queries < 1) throw DomainError("N_q must be >= 1");
  if (!(v1 >= 0.0 && v2 >= 0.0 && v1 + v2 > 0.0)) {
    throw DomainError("variances must be >= 0 with a positive sum");
  }
  const double z = -std::sqrt(static_cast<double>(n_queries)) * std::log1p(dl / l) /
                   (beta * static_cast<double>(n + 1) * std::sqrt(v1 + v2));
  return {normal_cdf(z), n_queries <= 50};
}

double min_queries_constant(double l, double beta, std::int64_t n, double p, double v) {
  if (!(l > 0.0 && l <= 1.0)) throw DomainError("l must lie in (0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (n < 0) throw DomainError("N must be >= 0");
  if (!(p > 0.0 && p < 0.5)) throw DomainError("p must lie in (0, 0.5)");
  if (!(v > 0.0)) throw DomainError("V must be > 0");
  const double s = beta * l * static_cast<double>(n + 1) * normal_quantile(p);
  return 2.0 * s * s * v;
}

std::uint64_t min_queries_from_constant(double c, double dl) {
  if (!(c > 0.0) || !(dl > 0.0)) throw DomainError("c and dl must be > 0");
  const double x = c / (dl * dl);
  // Relative slack so that products like 2.85/0.05² land on 1140, not 1141.
  return static_cast<std::uint64_t>(std::ceil(x * (1.0 - 1e-12)));
}

std::uint64_t min_queries(double l, double dl, double beta, std::int64_t n, double p,
                          double v) {
  return min_queries_from_constant(min_queries_constant(l, beta, n, p, v), dl);
}

double selection_adjusted_expectation(const AnalyticParams& params,
                                      const RankingFunction& rf) {
  params.validate();
  require_uncorrelated(params);
  if (params.n < 1) throw DomainError("selection needs N >= 1");
  if (params.beta >= 1.0) throw DomainError("selection needs beta < 1");
  const double e_hat = expectation_kernel(params.l, params.l, params.beta, params.n, rf);
  const double all_missing = std::pow(params.beta, static_cast<double>(params.n));
  if (all_missing == 0.0) return e_hat;
  // Positive-class value when every answer is missing: the test answer's rank
  // is uniform among (positive missing + 1) slots.
  const auto pmf = pmf_vector(params.n, params.l);
  Accumulator prefix;
  Accumulator phi;
  for (std::int64_t j = 0; j <= params.n; ++j) {
    prefix.add(rf.value(static_cast<std::uint64_t>(j) + 1));
    phi.add(pmf[static_cast<std::size_t>(j)] * prefix.value() / static_cast<double>(j + 1));
  }
  const double phi_all = params.l * phi.value();
  return (e_hat - all_missing * phi_all) / (1.0 - all_missing);
}

}  // namespace owkg
