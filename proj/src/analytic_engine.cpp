#include "matchsim/analytic_engine.hpp"

#include <cmath>

#include <fmt/format.h>

namespace matchsim {

TypeDistribution mutation_push(const TypeDistribution& p, const MutationMatrix& b) {
  const std::size_t k_count = p.size();
  if (b.rows.size() != k_count) {
    throw Error(ErrorCode::kDimensionMismatch, "mutation matrix does not match distribution");
  }
  TypeDistribution out{std::vector<double>(k_count, 0.0)};
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = 0; l < k_count; ++l) out.weights[l] += p[k] * b.rows[k][l];
  }
  return out;
}

MatchLaw match_law(const TypeDistribution& p_bar, const NoMatchVector& q) {
  const std::size_t k_count = p_bar.size();
  if (q.q.size() != k_count) {
    throw Error(ErrorCode::kDimensionMismatch, "q does not match distribution");
  }
  MatchLaw law;
  law.to_type.assign(k_count, std::vector<double>(k_count, 0.0));
  law.to_none = q.q;

  double denom = 0.0;
  for (std::size_t r = 0; r < k_count; ++r) denom += (1.0 - q.q[r]) * p_bar[r];
  if (denom <= 0.0) {
    law.to_none.assign(k_count, 1.0);
    return law;
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = 0; l < k_count; ++l) {
      law.to_type[k][l] = (1.0 - q.q[k]) * (1.0 - q.q[l]) * p_bar[l] / denom;
    }
  }
  return law;
}

PeriodTransition period_transition(const TypeDistribution& p, const ModelParams& params) {
  const std::size_t k_count = params.type_count();
  const TypeDistribution p_bar = mutation_push(p, params.b);
  const MatchLaw law = match_law(p_bar, params.q);

  // After mutation to type m: stay (unmatched) or meet l and redraw from nu[m][l].
  std::vector<std::vector<double>> after_mutation(k_count, std::vector<double>(k_count, 0.0));
  for (std::size_t m = 0; m < k_count; ++m) {
    after_mutation[m][m] += law.to_none[m];
    for (std::size_t l = 0; l < k_count; ++l) {
      const double meet = law.to_type[m][l];
      if (meet == 0.0) continue;
      for (std::size_t r = 0; r < k_count; ++r) {
        after_mutation[m][r] += meet * params.nu.nu[m][l][r];
      }
    }
  }

  PeriodTransition t;
  t.gamma.assign(k_count, std::vector<double>(k_count, 0.0));
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t m = 0; m < k_count; ++m) {
      const double mutate = params.b.rows[k][m];
      if (mutate == 0.0) continue;
      for (std::size_t r = 0; r < k_count; ++r) t.gamma[k][r] += mutate * after_mutation[m][r];
    }
  }
  return t;
}

TypeDistribution apply_transition(const TypeDistribution& p, const PeriodTransition& t) {
  const std::size_t k_count = p.size();
  TypeDistribution out{std::vector<double>(k_count, 0.0)};
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t r = 0; r < k_count; ++r) out.weights[r] += p[k] * t.gamma[k][r];
  }
  return out;
}

namespace {

TypeDistribution step(const TypeDistribution& p, const ModelParams& params) {
  TypeDistribution next = apply_transition(p, period_transition(p, params));
  double sum = 0.0;
  for (double w : next.weights) sum += w;
  if (std::abs(sum - 1.0) > kMaxSimplexDrift) {
    throw Error(ErrorCode::kSimplexDrift, fmt::format("iterate sums to {:.17g}", sum));
  }
  for (double& w : next.weights) w /= sum;
  return next;
}

double l1_distance(const TypeDistribution& a, const TypeDistribution& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

}  // namespace

std::vector<TypeDistribution> evolve(const ModelParams& params, std::size_t periods) {
  validate_params(params);
  std::vector<TypeDistribution> path;
  path.reserve(periods + 1);
  path.push_back(params.p0);
  for (std::size_t n = 1; n <= periods; ++n) path.push_back(step(path.back(), params));
  return path;
}

NonConvergence::NonConvergence(TypeDistribution last, double residual, std::size_t iterations)
    : Error(ErrorCode::kNonConvergence,
            fmt::format("no fixed point after {} iterations (residual {:.3e})", iterations,
                        residual)),
      last_(std::move(last)),
      residual_(residual) {}

SteadyState steady_state(const ModelParams& params, const TypeDistribution& p_start, double tol,
                         std::size_t max_iter) {
  validate_params(params);
  std::vector<Violation> bad;
  check_distribution(p_start.weights, params.type_count(), "p_start", bad);
  if (!bad.empty()) throw ValidationError(std::move(bad));

  TypeDistribution p = p_start;
  double residual = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    TypeDistribution next = step(p, params);
    residual = l1_distance(next, p);
    p = std::move(next);
    if (residual < tol) return SteadyState{std::move(p), it, residual};
  }
  throw NonConvergence(std::move(p), residual, max_iter);
}

}  // namespace matchsim
