#include "matchsim/exact_oracle.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace matchsim {

namespace {

void check_full_size(std::size_t n) {
  if (n < 2 || n % 2 != 0) {
    throw Error(ErrorCode::kOddPopulation,
                fmt::format("perfect matchings need an even N >= 2, got {}", n));
  }
  if (n > kMaxFullEnumeration) {
    throw Error(ErrorCode::kTooLarge,
                fmt::format("N = {} exceeds the enumeration bound {}", n, kMaxFullEnumeration));
  }
}

void check_agent(std::size_t n, AgentId a, const char* name) {
  if (a >= n) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{} = {} is not an agent of 0..{}", name,
                                                         a, n - 1));
  }
}

// Pairs up `agents` (increasing order) canonically: the lowest unpaired
// agent takes each remaining agent in increasing order.
template <typename Visit>
void enumerate_pairings(const std::vector<AgentId>& agents, std::vector<char>& used,
                        std::size_t remaining, std::vector<AgentId>& partner, Visit& visit) {
  if (remaining == 0) {
    visit(partner);
    return;
  }
  std::size_t first = 0;
  while (used[first]) ++first;
  used[first] = 1;
  for (std::size_t c = first + 1; c < agents.size(); ++c) {
    if (used[c]) continue;
    used[c] = 1;
    partner[agents[first]] = agents[c];
    partner[agents[c]] = agents[first];
    enumerate_pairings(agents, used, remaining - 2, partner, visit);
    partner[agents[c]] = kUnmatched;
    used[c] = 0;
  }
  partner[agents[first]] = kUnmatched;
  used[first] = 0;
}

template <typename Visit>
void enumerate_pairings(const std::vector<AgentId>& agents, std::vector<AgentId>& partner,
                        Visit& visit) {
  std::vector<char> used(agents.size(), 0);
  enumerate_pairings(agents, used, agents.size(), partner, visit);
}

template <typename Predicate>
ExactProbability full_matching_frequency(std::size_t n, Predicate pred) {
  check_full_size(n);
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  for_each_full_matching(n, [&](std::span<const AgentId> partner) {
    ++total;
    if (pred(partner)) ++hits;
  });
  return ExactProbability(BigInt(hits), BigInt(total));
}

BigInt binomial(std::size_t n, std::size_t k) {
  BigInt r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

// Visits every choice of m-element subsets, one per type, as a flag vector.
template <typename Visit>
void enumerate_unmatched_sets(const std::vector<std::vector<AgentId>>& members,
                              std::span<const std::size_t> unmatched, std::size_t type,
                              std::size_t start, std::size_t chosen, std::vector<char>& flags,
                              Visit& visit) {
  if (type == members.size()) {
    visit(flags);
    return;
  }
  if (chosen == unmatched[type]) {
    enumerate_unmatched_sets(members, unmatched, type + 1, 0, 0, flags, visit);
    return;
  }
  const auto& pool = members[type];
  const std::size_t need = unmatched[type] - chosen;
  for (std::size_t s = start; s + need <= pool.size(); ++s) {
    flags[pool[s]] = 1;
    enumerate_unmatched_sets(members, unmatched, type, s + 1, chosen + 1, flags, visit);
    flags[pool[s]] = 0;
  }
}

}  // namespace

BigInt perfect_matching_count(std::size_t n) {
  if (n == 0 || n % 2 != 0) {
    throw Error(ErrorCode::kOddPopulation, fmt::format("no perfect matching on {} agents", n));
  }
  BigInt r = 1;
  for (std::size_t f = 1; f < n; f += 2) r *= f;
  return r;
}

void for_each_full_matching(std::size_t n,
                            const std::function<void(std::span<const AgentId>)>& visit) {
  check_full_size(n);
  std::vector<AgentId> agents(n);
  std::iota(agents.begin(), agents.end(), AgentId{0});
  std::vector<AgentId> partner(n, kUnmatched);
  auto leaf = [&](const std::vector<AgentId>& p) { visit(p); };
  enumerate_pairings(agents, partner, leaf);
}

std::vector<Matching> enumerate_full_matchings(std::size_t n) {
  std::vector<Matching> out;
  for_each_full_matching(n, [&](std::span<const AgentId> partner) {
    out.push_back(Matching{{partner.begin(), partner.end()}});
  });
  return out;
}

ExactProbability exact_pair_probability(std::size_t n, AgentId i, AgentId j) {
  check_full_size(n);
  check_agent(n, i, "i");
  check_agent(n, j, "j");
  if (i == j) throw Error(ErrorCode::kSelfPair, "an agent cannot be matched to itself");
  return full_matching_frequency(n, [&](std::span<const AgentId> p) { return p[i] == j; });
}

ExactProbability exact_joint_probability(std::size_t n, AgentId i, AgentId j, AgentId i2,
                                         AgentId j2) {
  check_full_size(n);
  for (auto [a, name] : {std::pair{i, "i"}, {j, "j"}, {i2, "i'"}, {j2, "j'"}}) {
    check_agent(n, a, name);
  }
  if (i == j) throw Error(ErrorCode::kSelfPair, "joint law needs two distinct agents");
  return full_matching_frequency(
      n, [&](std::span<const AgentId> p) { return p[i] == i2 && p[j] == j2; });
}

ExactProbability exact_set_probability(std::size_t n, AgentId i,
                                       std::span<const AgentId> subset) {
  check_full_size(n);
  check_agent(n, i, "i");
  std::vector<char> in_set(n, 0);
  for (AgentId a : subset) {
    check_agent(n, a, "subset member");
    in_set[a] = 1;
  }
  return full_matching_frequency(n, [&](std::span<const AgentId> p) { return in_set[p[i]] != 0; });
}

PartialSpaceLaw::PartialSpaceLaw(std::vector<std::size_t> counts,
                                 std::vector<std::size_t> unmatched)
    : counts_(std::move(counts)), unmatched_(std::move(unmatched)) {
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    types_.insert(types_.end(), counts_[k], static_cast<TypeId>(k));
  }
  const std::size_t n = types_.size();
  const std::size_t o = outcome_count();
  marginal_counts_.assign(n * o, 0);
  joint_counts_.assign(n * n * o * o, 0);
}

ExactProbability PartialSpaceLaw::marginal(std::size_t i, std::size_t outcome) const {
  return ExactProbability(BigInt(marginal_counts_[i * outcome_count() + outcome]),
                          BigInt(sample_points_));
}

ExactProbability PartialSpaceLaw::joint(std::size_t i, std::size_t j, std::size_t c,
                                        std::size_t d) const {
  const std::size_t o = outcome_count();
  return ExactProbability(BigInt(joint_counts_[((i * agents() + j) * o + c) * o + d]),
                          BigInt(sample_points_));
}

PartialSpaceLaw enumerate_partial_space(std::span<const std::size_t> counts,
                                        std::span<const std::size_t> unmatched) {
  if (counts.size() != unmatched.size() || counts.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "M and m must be nonempty and of equal length");
  }
  std::size_t agents = 0;
  std::size_t matched = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (unmatched[k] > counts[k]) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("m[{}] = {} exceeds M[{}] = {}", k + 1, unmatched[k], k + 1,
                              counts[k]));
    }
    agents += counts[k];
    matched += counts[k] - unmatched[k];
  }
  if (agents == 0) throw Error(ErrorCode::kEmptyPopulation, "no agents");
  if (matched % 2 != 0) {
    throw Error(ErrorCode::kOddMatchedTotal, fmt::format("{} agents left to match", matched));
  }
  if (agents > kMaxPartialAgents) {
    throw Error(ErrorCode::kTooLarge,
                fmt::format("{} agents exceeds the bound {}", agents, kMaxPartialAgents));
  }
  BigInt space = matched == 0 ? BigInt(1) : perfect_matching_count(matched);
  for (std::size_t k = 0; k < counts.size(); ++k) space *= binomial(counts[k], unmatched[k]);
  if (space > kMaxPartialSpace) {
    throw Error(ErrorCode::kTooLarge,
                fmt::format("sample space of {} points exceeds {}", space.str(), kMaxPartialSpace));
  }

  PartialSpaceLaw law({counts.begin(), counts.end()}, {unmatched.begin(), unmatched.end()});
  const std::size_t o = law.outcome_count();
  const auto none = static_cast<TypeId>(law.no_partner_outcome());

  std::vector<std::vector<AgentId>> members(counts.size());
  for (std::size_t a = 0; a < agents; ++a) members[law.types_[a]].push_back(static_cast<AgentId>(a));

  std::vector<char> flags(agents, 0);
  std::vector<AgentId> partner(agents, kUnmatched);
  std::vector<TypeId> g(agents);
  std::vector<AgentId> to_pair;
  auto on_matching = [&](const std::vector<AgentId>& p) {
    ++law.sample_points_;
    for (std::size_t a = 0; a < agents; ++a) {
      g[a] = p[a] == kUnmatched ? none : law.types_[p[a]];
      ++law.marginal_counts_[a * o + g[a]];
    }
    for (std::size_t a = 0; a < agents; ++a) {
      std::uint64_t* row = &law.joint_counts_[a * agents * o * o];
      for (std::size_t b = a + 1; b < agents; ++b) ++row[(b * o + g[a]) * o + g[b]];
    }
  };
  auto on_sets = [&](const std::vector<char>& left_out) {
    to_pair.clear();
    for (std::size_t a = 0; a < agents; ++a) {
      if (!left_out[a]) to_pair.push_back(static_cast<AgentId>(a));
    }
    std::fill(partner.begin(), partner.end(), kUnmatched);
    enumerate_pairings(to_pair, partner, on_matching);
  };
  enumerate_unmatched_sets(members, unmatched, 0, 0, 0, flags, on_sets);

  // Mirror the upper triangle: P(g_b=d, g_a=c) = P(g_a=c, g_b=d).
  for (std::size_t a = 0; a < agents; ++a) {
    for (std::size_t b = a + 1; b < agents; ++b) {
      for (std::size_t c = 0; c < o; ++c) {
        for (std::size_t d = 0; d < o; ++d) {
          law.joint_counts_[((b * agents + a) * o + d) * o + c] =
              law.joint_counts_[((a * agents + b) * o + c) * o + d];
        }
      }
    }
  }
  return law;
}

ExactProbability finite_independence_defect(const PartialSpaceLaw& law) {
  ExactProbability best = 0;
  const std::size_t n = law.agents();
  const std::size_t o = law.outcome_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t c = 0; c < o; ++c) {
        for (std::size_t d = 0; d < o; ++d) {
          ExactProbability gap = law.joint(i, j, c, d) - law.marginal(i, c) * law.marginal(j, d);
          if (gap < 0) gap = -gap;
          if (gap > best) best = gap;
        }
      }
    }
  }
  return best;
}

ExactProbability finite_independence_defect(std::span<const std::size_t> counts,
                                             std::span<const std::size_t> unmatched) {
  return finite_independence_defect(enumerate_partial_space(counts, unmatched));
}

std::string format_golden(std::span<const GoldenRecord> records) {
  std::string out = "# input\toutcome\tnumerator\tdenominator\n";
  for (const auto& r : records) {
    out += fmt::format("{}\t{}\t{}\t{}\n", r.input, r.outcome, numerator(r.value).str(),
                       denominator(r.value).str());
  }
  return out;
}

}  // namespace matchsim
