#pragma once

// Uniform full matchings and type-stratified partial matchings.
//
// Draw protocol (fixed, so a seed reproduces a matching bit for bit):
//   1. for each type k in increasing order, choose the m_k unmatched agents
//      among the type-k agents (listed in increasing index) by a partial
//      Fisher-Yates pass: for t = 0..m_k-1 swap slot t with slot
//      t + uniform_index(M_k - t);
//   2. pair the remaining agents sequentially: take the lowest-indexed
//      unpaired agent, remove it from the candidate pool, and pair it with
//      pool[uniform_index(pool size)]. The pool starts in increasing index
//      order and removals swap the last element into the vacated slot.

#include <cstddef>
#include <span>
#include <vector>

#include "matchsim/core_model.hpp"
#include "matchsim/rng.hpp"

namespace matchsim {

struct PartialMatchingPlan {
  std::vector<std::size_t> unmatched;  // m_k
  std::vector<std::size_t> counts;     // M_k

  std::size_t matched_total() const;
  bool operator==(const PartialMatchingPlan&) const = default;
};

// Uniform over the (N-1)!! perfect matchings of agents 0..N-1.
Matching sample_full_matching(std::size_t agents, Rng& rng);

// Sequential pairing of `agents` (increasing order, even count) into `out`.
void pair_sequentially(std::span<const AgentId> agents, Matching& out, Rng& rng);

// m_k = round-half-up(q_k * M_k); if the matched total is odd, m_k is
// incremented for the type with the largest matched count (smallest k on ties).
PartialMatchingPlan plan_partial_matching(const Population& pop, const NoMatchVector& q);

// Exactly m_k unmatched type-k agents (uniform subset per type), uniform
// perfect matching on the rest.
Matching sample_partial_matching(const Population& pop, const PartialMatchingPlan& plan,
                                 Rng& rng);

// g[i] = type of partner[i], or kNoPartner.
MatchedTypeOutcome matched_types(const Population& pop, const Matching& matching);

}  // namespace matchsim
