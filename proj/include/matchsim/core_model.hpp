#pragma once

// Shared vocabulary: type space, distributions, model parameters, populations
// and matchings.
//
// Conventions used throughout the library:
//   * types are 0-based ids 0..K-1 (text formats print them as 1..K);
//   * agents are 0-based indices 0..N-1;
//   * "unmatched" is the explicit sentinel kUnmatched in a Matching and
//     kNoPartner in a MatchedTypeOutcome, never a self-map.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "matchsim/error.hpp"

namespace matchsim {

using TypeId = std::uint32_t;
using AgentId = std::uint32_t;

inline constexpr AgentId kUnmatched = std::numeric_limits<AgentId>::max();
inline constexpr TypeId kNoPartner = std::numeric_limits<TypeId>::max();

// Absolute tolerance for "sums to one" checks on every probability vector.
inline constexpr double kSimplexTolerance = 1e-12;

struct TypeSpace {
  std::size_t count = 1;
};

struct TypeDistribution {
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  double operator[](std::size_t k) const { return weights[k]; }
  bool operator==(const TypeDistribution&) const = default;
};

// Row k is the law of the post-mutation type of a type-k agent.
struct MutationMatrix {
  std::vector<std::vector<double>> rows;

  bool operator==(const MutationMatrix&) const = default;
};

struct NoMatchVector {
  std::vector<double> q;

  bool operator==(const NoMatchVector&) const = default;
};

// nu[k][l]: new-type law of a type-k agent that met a type-l agent.
// Unmatched agents keep their type; that case is not stored.
struct MatchChangeKernel {
  std::vector<std::vector<TypeDistribution>> nu;

  bool operator==(const MatchChangeKernel&) const = default;
};

struct ModelParams {
  TypeSpace types;
  TypeDistribution p0;
  MutationMatrix b;
  NoMatchVector q;
  MatchChangeKernel nu;

  std::size_t type_count() const noexcept { return types.count; }
  bool operator==(const ModelParams& o) const {
    return types.count == o.types.count && p0 == o.p0 && b == o.b && q == o.q && nu == o.nu;
  }
};

// Every violated invariant, empty when the parameters are valid.
std::vector<Violation> check_params(const ModelParams& params);

// Returns `params` unchanged or throws ValidationError listing all violations.
const ModelParams& validate_params(const ModelParams& params);

// Checks a single probability vector of the given size; appends violations.
void check_distribution(std::span<const double> weights, std::size_t expected_size,
                        const std::string& where, std::vector<Violation>& out);

struct Population {
  std::vector<TypeId> types;

  std::size_t size() const noexcept { return types.size(); }
  TypeId operator[](std::size_t i) const { return types[i]; }
  bool operator==(const Population&) const = default;
};

struct Matching {
  std::vector<AgentId> partner;

  std::size_t size() const noexcept { return partner.size(); }
  bool matched(std::size_t i) const { return partner[i] != kUnmatched; }
  bool operator==(const Matching&) const = default;
};

struct MatchedTypeOutcome {
  std::vector<TypeId> partner_type;

  std::size_t size() const noexcept { return partner_type.size(); }
  bool operator==(const MatchedTypeOutcome&) const = default;
};

struct PeriodTrace {
  Population h;          // post-mutation types
  Matching matching;     // partial matching on h
  MatchedTypeOutcome g;  // partner types (or kNoPartner)
  Population alpha;      // end-of-period types
  TypeDistribution empirical;
};

std::vector<std::size_t> type_counts(const Population& pop, TypeSpace types);

// Cross-sectional distribution: weight_k = #{i : type i == k} / N.
TypeDistribution empirical_distribution(const Population& pop, TypeSpace types);

// O(N) check of the involution and no-self-match invariants. With
// `require_full`, an unmatched agent is also a violation.
bool is_valid_matching(const Matching& matching, bool require_full = false);

// Self-map encoding: unmatched agents map to themselves.
std::vector<AgentId> to_involution(const Matching& matching);
Matching from_involution(std::span<const AgentId> sigma);

// Two alleles; like pairs reproduce themselves, mixed pairs produce either
// allele with probability 1/2. No mutation, everyone matched.
ModelParams hardy_weinberg_params(double allele_a_share);

}  // namespace matchsim
