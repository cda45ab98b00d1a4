#pragma once

// Exhaustive enumeration of perfect matchings and partial-matching sample
// spaces in exact rational arithmetic. Desk-scale only: full enumeration is
// limited to N <= 12 and partial sample spaces to 10^7 points.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "matchsim/core_model.hpp"

namespace matchsim {

using BigInt = boost::multiprecision::cpp_int;
// Always kept in lowest terms with a positive denominator.
using ExactProbability = boost::multiprecision::cpp_rational;

inline constexpr std::size_t kMaxFullEnumeration = 12;
inline constexpr std::uint64_t kMaxPartialSpace = 10'000'000;
inline constexpr std::size_t kMaxPartialAgents = 16;

// (n-1)!! for even n >= 2: the number of perfect matchings on n agents.
BigInt perfect_matching_count(std::size_t n);

// Calls visit(partner) for every perfect matching of agents 0..n-1 in
// canonical order: the lowest unpaired agent is paired with each remaining
// agent in increasing order.
void for_each_full_matching(std::size_t n,
                            const std::function<void(std::span<const AgentId>)>& visit);

std::vector<Matching> enumerate_full_matchings(std::size_t n);

// P(partner[i] == j) under the uniform full matching.
ExactProbability exact_pair_probability(std::size_t n, AgentId i, AgentId j);

// P(partner[i] == i2 and partner[j] == j2).
ExactProbability exact_joint_probability(std::size_t n, AgentId i, AgentId j, AgentId i2,
                                         AgentId j2);

// P(partner[i] in subset).
ExactProbability exact_set_probability(std::size_t n, AgentId i, std::span<const AgentId> subset);

// Exact law of (g_i) and (g_i, g_j) over the product space of unmatched
// subsets and full matchings on the rest. Agents are laid out by type: the
// first M_1 agents have type 0, the next M_2 type 1, and so on. Outcome
// index K stands for "unmatched".
class PartialSpaceLaw {
 public:
  PartialSpaceLaw(std::vector<std::size_t> counts, std::vector<std::size_t> unmatched);

  std::size_t agents() const noexcept { return types_.size(); }
  std::size_t type_count() const noexcept { return counts_.size(); }
  std::size_t outcome_count() const noexcept { return counts_.size() + 1; }
  std::size_t no_partner_outcome() const noexcept { return counts_.size(); }
  TypeId type_of(std::size_t agent) const { return types_[agent]; }
  std::uint64_t sample_points() const noexcept { return sample_points_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  const std::vector<std::size_t>& unmatched() const noexcept { return unmatched_; }

  ExactProbability marginal(std::size_t i, std::size_t outcome) const;
  ExactProbability joint(std::size_t i, std::size_t j, std::size_t c, std::size_t d) const;

 private:
  friend PartialSpaceLaw enumerate_partial_space(std::span<const std::size_t>,
                                                 std::span<const std::size_t>);
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> unmatched_;
  std::vector<TypeId> types_;
  std::uint64_t sample_points_ = 0;
  std::vector<std::uint64_t> marginal_counts_;  // [i][c]
  std::vector<std::uint64_t> joint_counts_;     // [i][j][c][d]
};

PartialSpaceLaw enumerate_partial_space(std::span<const std::size_t> counts,
                                        std::span<const std::size_t> unmatched);

// max over i != j and outcomes (c, d) of |P(g_i=c, g_j=d) - P(g_i=c) P(g_j=d)|.
ExactProbability finite_independence_defect(const PartialSpaceLaw& law);
ExactProbability finite_independence_defect(std::span<const std::size_t> counts,
                                            std::span<const std::size_t> unmatched);

// Golden-file record: input, outcome, numerator, denominator, tab separated.
struct GoldenRecord {
  std::string input;
  std::string outcome;
  ExactProbability value;
};

std::string format_golden(std::span<const GoldenRecord> records);

}  // namespace matchsim
