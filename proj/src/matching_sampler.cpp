#include "matchsim/matching_sampler.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace matchsim {

std::size_t PartialMatchingPlan::matched_total() const {
  std::size_t total = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) total += counts[k] - unmatched[k];
  return total;
}

void pair_sequentially(std::span<const AgentId> agents, Matching& out, Rng& rng) {
  const std::size_t n = agents.size();
  if (n % 2 != 0) {
    throw Error(ErrorCode::kOddPopulation, fmt::format("cannot fully match {} agents", n));
  }
  // pool holds positions into `agents`; slot_of[p] is where position p sits.
  std::vector<std::uint32_t> pool(n);
  std::vector<std::uint32_t> slot_of(n);
  std::iota(pool.begin(), pool.end(), 0U);
  std::iota(slot_of.begin(), slot_of.end(), 0U);
  std::vector<char> paired(n, 0);

  auto remove = [&](std::uint32_t position) {
    const std::uint32_t slot = slot_of[position];
    const std::uint32_t moved = pool.back();
    pool[slot] = moved;
    slot_of[moved] = slot;
    pool.pop_back();
  };

  std::size_t lowest = 0;
  while (!pool.empty()) {
    while (paired[lowest]) ++lowest;
    const auto first = static_cast<std::uint32_t>(lowest);
    remove(first);
    const auto second = pool[rng.uniform_index(pool.size())];
    remove(second);
    paired[first] = paired[second] = 1;
    out.partner[agents[first]] = agents[second];
    out.partner[agents[second]] = agents[first];
  }
}

Matching sample_full_matching(std::size_t agents, Rng& rng) {
  if (agents == 0 || agents % 2 != 0) {
    throw Error(ErrorCode::kOddPopulation,
                fmt::format("a full matching needs an even positive agent count, got {}", agents));
  }
  std::vector<AgentId> ids(agents);
  std::iota(ids.begin(), ids.end(), AgentId{0});
  Matching m;
  m.partner.assign(agents, kUnmatched);
  pair_sequentially(ids, m, rng);
  return m;
}

PartialMatchingPlan plan_partial_matching(const Population& pop, const NoMatchVector& q) {
  const std::size_t k_count = q.q.size();
  PartialMatchingPlan plan;
  plan.counts = type_counts(pop, TypeSpace{k_count});
  plan.unmatched.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!(q.q[k] >= 0.0 && q.q[k] <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, fmt::format("q[{}] = {}", k + 1, q.q[k]));
    }
    const double raw = std::floor(q.q[k] * static_cast<double>(plan.counts[k]) + 0.5);
    plan.unmatched[k] = std::min(plan.counts[k], static_cast<std::size_t>(raw));
  }
  if (plan.matched_total() % 2 != 0) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < k_count; ++k) {
      if (plan.counts[k] - plan.unmatched[k] > plan.counts[best] - plan.unmatched[best]) best = k;
    }
    ++plan.unmatched[best];
  }
  return plan;
}

Matching sample_partial_matching(const Population& pop, const PartialMatchingPlan& plan,
                                 Rng& rng) {
  const std::size_t k_count = plan.counts.size();
  if (plan.unmatched.size() != k_count) {
    throw Error(ErrorCode::kPlanMismatch, "plan vectors differ in length");
  }
  std::vector<std::vector<AgentId>> by_type(k_count);
  for (std::size_t k = 0; k < k_count; ++k) by_type[k].reserve(plan.counts[k]);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const TypeId t = pop.types[i];
    if (t >= k_count) {
      throw Error(ErrorCode::kPlanMismatch,
                  fmt::format("agent {} has type {} outside the plan's {} types", i, t + 1, k_count));
    }
    by_type[t].push_back(static_cast<AgentId>(i));
  }
  for (std::size_t k = 0; k < k_count; ++k) {
    if (by_type[k].size() != plan.counts[k] || plan.unmatched[k] > plan.counts[k]) {
      throw Error(ErrorCode::kPlanMismatch,
                  fmt::format("type {}: population has {} agents, plan expects M = {}, m = {}",
                              k + 1, by_type[k].size(), plan.counts[k], plan.unmatched[k]));
    }
  }
  if (plan.matched_total() % 2 != 0) {
    throw Error(ErrorCode::kPlanMismatch, "plan leaves an odd number of agents to match");
  }

  Matching m;
  m.partner.assign(pop.size(), kUnmatched);
  std::vector<char> left_out(pop.size(), 0);
  for (std::size_t k = 0; k < k_count; ++k) {
    auto& members = by_type[k];
    const std::size_t size = members.size();
    for (std::size_t t = 0; t < plan.unmatched[k]; ++t) {
      std::swap(members[t], members[t + rng.uniform_index(size - t)]);
      left_out[members[t]] = 1;
    }
  }
  if (plan.matched_total() == 0) return m;

  std::vector<AgentId> to_pair;
  to_pair.reserve(plan.matched_total());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!left_out[i]) to_pair.push_back(static_cast<AgentId>(i));
  }
  pair_sequentially(to_pair, m, rng);
  return m;
}

MatchedTypeOutcome matched_types(const Population& pop, const Matching& matching) {
  if (pop.size() != matching.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("population has {} agents, matching has {}", pop.size(),
                            matching.size()));
  }
  MatchedTypeOutcome g;
  g.partner_type.resize(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const AgentId j = matching.partner[i];
    g.partner_type[i] = (j == kUnmatched) ? kNoPartner : pop.types[j];
  }
  return g;
}

}  // namespace matchsim
