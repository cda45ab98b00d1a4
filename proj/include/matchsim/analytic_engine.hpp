#pragma once

// Deterministic evolution of the cross-sectional type distribution in the
// large-population limit: each period is mutation, partial matching with
// type-proportional partner choice, then match-induced type change.

#include <cstddef>
#include <vector>

#include "matchsim/core_model.hpp"

namespace matchsim {

// Conditional law of the partner type given the post-mutation type.
struct MatchLaw {
  std::vector<std::vector<double>> to_type;  // [k][l]
  std::vector<double> to_none;               // [k]
};

// gamma[k][r]: probability a type-k agent at period start ends the period as r.
struct PeriodTransition {
  std::vector<std::vector<double>> gamma;
};

// p_bar_l = sum_k p_k b_kl.
TypeDistribution mutation_push(const TypeDistribution& p, const MutationMatrix& b);

// to_type[k][l] = (1 - q_k)(1 - q_l) p_bar_l / D with D = sum_r (1 - q_r) p_bar_r.
// When D == 0 nobody can be matched: to_type is zero and to_none is one.
MatchLaw match_law(const TypeDistribution& p_bar, const NoMatchVector& q);

PeriodTransition period_transition(const TypeDistribution& p, const ModelParams& params);

// Row vector times matrix.
TypeDistribution apply_transition(const TypeDistribution& p, const PeriodTransition& t);

// Drift above this is reported as SimplexDrift; below it iterates are renormalized.
inline constexpr double kMaxSimplexDrift = 1e-9;

// p^0 .. p^T with p^n = p^{n-1} gamma(p^{n-1}).
std::vector<TypeDistribution> evolve(const ModelParams& params, std::size_t periods);

struct SteadyState {
  TypeDistribution distribution;
  std::size_t iterations = 0;
  double residual = 0.0;  // L1 change of the final iteration
};

class NonConvergence : public Error {
 public:
  NonConvergence(TypeDistribution last, double residual, std::size_t iterations);

  const TypeDistribution& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }

 private:
  TypeDistribution last_;
  double residual_;
};

// Plain fixed-point iteration from p_start until the L1 change drops below
// tol. The map can have many fixed points (the Hardy-Weinberg kernel fixes
// every distribution), so the answer depends on p_start.
SteadyState steady_state(const ModelParams& params, const TypeDistribution& p_start,
                         double tol = 1e-12, std::size_t max_iter = 1'000'000);

}  // namespace matchsim
