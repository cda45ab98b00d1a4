#pragma once

// Finite-population simulation of the mutation / partial matching / type
// change dynamics.
//
// Draw protocol per period, all from the run's single Rng:
//   1. mutation: one categorical draw per agent in index order (rows that are
//      point masses consume nothing);
//   2. matching: plan from realized post-mutation counts, then the sampler's
//      protocol (unmatched subsets by type, then sequential pairing);
//   3. type change: one categorical draw per matched agent in index order
//      from nu[own type][partner type].

#include <cstddef>
#include <cstdint>
#include <vector>

#include "matchsim/core_model.hpp"
#include "matchsim/rng.hpp"

namespace matchsim {

enum class InitMode {
  kApportion,  // largest-remainder apportionment of N * p0, types in blocks
  kSample,     // each agent drawn independently from p0
};

// Largest-remainder counts for N * p, remainder ties going to the smaller type.
std::vector<std::size_t> apportion(const TypeDistribution& p, std::size_t agents);

Population init_population(const TypeDistribution& p0, std::size_t agents,
                           InitMode mode = InitMode::kApportion, Rng* rng = nullptr);

Population step_mutation(const Population& pop, const MutationMatrix& b, Rng& rng);

struct MatchingStep {
  Matching matching;
  MatchedTypeOutcome g;
};

MatchingStep step_matching(const Population& h, const NoMatchVector& q, Rng& rng);

Population step_type_change(const Population& h, const Matching& matching,
                            const MatchedTypeOutcome& g, const MatchChangeKernel& nu, Rng& rng);

struct RunOptions {
  bool record_traces = true;  // keep per-agent h, matching, g, alpha for each period
  InitMode init = InitMode::kApportion;
};

struct SimulationRun {
  ModelParams params;
  std::size_t agents = 0;
  std::size_t periods = 0;
  std::uint64_t seed = 0;
  Population initial;
  std::vector<PeriodTrace> traces;           // one per period when recorded
  std::vector<TypeDistribution> empirical;   // periods + 1 entries, starting with the initial one
};

SimulationRun run_dynamics(const ModelParams& params, std::size_t agents, std::size_t periods,
                           std::uint64_t seed, const RunOptions& options = {});

// Replication r runs with derive_seed(seed, r). Results are in replication
// order regardless of how many worker threads are used.
std::vector<SimulationRun> run_replications(const ModelParams& params, std::size_t agents,
                                            std::size_t periods, std::uint64_t seed,
                                            std::size_t replications,
                                            const RunOptions& options = {});

}  // namespace matchsim
