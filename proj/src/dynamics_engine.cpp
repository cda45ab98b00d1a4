#include "matchsim/dynamics_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "matchsim/matching_sampler.hpp"
#include "matchsim/parallel.hpp"

namespace matchsim {

std::vector<std::size_t> apportion(const TypeDistribution& p, std::size_t agents) {
  const std::size_t k_count = p.size();
  std::vector<std::size_t> counts(k_count);
  std::vector<double> remainder(k_count);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double exact = p[k] * static_cast<double>(agents);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  if (assigned > agents) {
    throw Error(ErrorCode::kNonStochasticRow, "distribution apportions more agents than exist");
  }
  std::vector<std::size_t> order(k_count);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < agents; ++r, ++assigned) ++counts[order[r % k_count]];
  return counts;
}

Population init_population(const TypeDistribution& p0, std::size_t agents, InitMode mode,
                           Rng* rng) {
  if (agents == 0) throw Error(ErrorCode::kEmptyPopulation, "population needs at least one agent");
  Population pop;
  pop.types.reserve(agents);
  if (mode == InitMode::kApportion) {
    const auto counts = apportion(p0, agents);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      pop.types.insert(pop.types.end(), counts[k], static_cast<TypeId>(k));
    }
    return pop;
  }
  if (rng == nullptr) throw Error(ErrorCode::kInvalidArgument, "sampled init needs an Rng");
  const CategoricalSampler draw(p0.weights);
  for (std::size_t i = 0; i < agents; ++i) pop.types.push_back(draw(*rng));
  return pop;
}

Population step_mutation(const Population& pop, const MutationMatrix& b, Rng& rng) {
  std::vector<CategoricalSampler> rows;
  rows.reserve(b.rows.size());
  bool identity = true;
  for (std::size_t k = 0; k < b.rows.size(); ++k) {
    rows.emplace_back(b.rows[k]);
    identity = identity && rows.back().is_point_mass() && b.rows[k][k] > 0.0;
  }
  if (identity) return pop;
  Population out;
  out.types.resize(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) out.types[i] = rows[pop.types[i]](rng);
  return out;
}

MatchingStep step_matching(const Population& h, const NoMatchVector& q, Rng& rng) {
  const PartialMatchingPlan plan = plan_partial_matching(h, q);
  MatchingStep out;
  out.matching = sample_partial_matching(h, plan, rng);
  out.g = matched_types(h, out.matching);
  return out;
}

Population step_type_change(const Population& h, const Matching& matching,
                            const MatchedTypeOutcome& g, const MatchChangeKernel& nu, Rng& rng) {
  if (matching.size() != h.size() || g.size() != h.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "trace arrays differ in length");
  }
  const std::size_t k_count = nu.nu.size();
  std::vector<CategoricalSampler> kernel;
  kernel.reserve(k_count * k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = 0; l < k_count; ++l) kernel.emplace_back(nu.nu[k][l].weights);
  }
  Population out = h;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!matching.matched(i)) continue;
    out.types[i] = kernel[h.types[i] * k_count + g.partner_type[i]](rng);
  }
  return out;
}

SimulationRun run_dynamics(const ModelParams& params, std::size_t agents, std::size_t periods,
                           std::uint64_t seed, const RunOptions& options) {
  validate_params(params);
  if (agents < 2) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("need at least 2 agents, got {}", agents));
  }
  const TypeSpace types = params.types;
  Rng rng(seed);

  SimulationRun run;
  run.params = params;
  run.agents = agents;
  run.periods = periods;
  run.seed = seed;
  run.initial = init_population(params.p0, agents, options.init, &rng);
  run.empirical.reserve(periods + 1);
  run.empirical.push_back(empirical_distribution(run.initial, types));
  if (options.record_traces) run.traces.reserve(periods);

  Population alpha = run.initial;
  for (std::size_t n = 1; n <= periods; ++n) {
    Population h = step_mutation(alpha, params.b, rng);
    MatchingStep matched = step_matching(h, params.q, rng);
    Population next = step_type_change(h, matched.matching, matched.g, params.nu, rng);
    TypeDistribution dist = empirical_distribution(next, types);
    run.empirical.push_back(dist);
    if (options.record_traces) {
      run.traces.push_back(PeriodTrace{std::move(h), std::move(matched.matching),
                                       std::move(matched.g), next, std::move(dist)});
    }
    alpha = std::move(next);
  }
  return run;
}

std::vector<SimulationRun> run_replications(const ModelParams& params, std::size_t agents,
                                            std::size_t periods, std::uint64_t seed,
                                            std::size_t replications, const RunOptions& options) {
  validate_params(params);
  std::vector<SimulationRun> runs(replications);
  parallel_for(replications, [&](std::size_t r) {
    runs[r] = run_dynamics(params, agents, periods, derive_seed(seed, r), options);
  });
  return runs;
}

}  // namespace matchsim
