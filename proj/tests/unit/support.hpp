#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "matchsim/core_model.hpp"
#include "matchsim/rng.hpp"

namespace matchsim::testing {

inline ModelParams identity_params(std::vector<double> p0) {
  const std::size_t k_count = p0.size();
  ModelParams p;
  p.types.count = k_count;
  p.p0.weights = std::move(p0);
  p.b.rows.assign(k_count, std::vector<double>(k_count, 0.0));
  for (std::size_t k = 0; k < k_count; ++k) p.b.rows[k][k] = 1.0;
  p.q.q.assign(k_count, 0.0);
  p.nu.nu.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = 0; l < k_count; ++l) {
      std::vector<double> keep(k_count, 0.0);
      keep[k] = 1.0;
      p.nu.nu[k].push_back(TypeDistribution{keep});
    }
  }
  return p;
}

inline ModelParams generic_k2_params() {
  ModelParams p;
  p.types.count = 2;
  p.p0.weights = {0.5, 0.5};
  p.b.rows = {{0.9, 0.1}, {0.2, 0.8}};
  p.q.q = {0.2, 0.4};
  p.nu.nu = {{{{1.0, 0.0}}, {{0.3, 0.7}}}, {{{0.6, 0.4}}, {{0.0, 1.0}}}};
  return p;
}

inline ModelParams generic_k3_params() {
  ModelParams p;
  p.types.count = 3;
  p.p0.weights = {0.5, 0.3, 0.2};
  p.b.rows = {{0.95, 0.05, 0.0}, {0.0, 0.9, 0.1}, {0.1, 0.0, 0.9}};
  p.q.q = {0.1, 0.3, 0.5};
  p.nu.nu = {{{{1.0, 0.0, 0.0}}, {{0.5, 0.5, 0.0}}, {{0.2, 0.0, 0.8}}},
             {{{0.4, 0.6, 0.0}}, {{0.0, 1.0, 0.0}}, {{0.0, 0.3, 0.7}}},
             {{{0.5, 0.0, 0.5}}, {{0.0, 0.5, 0.5}}, {{0.0, 0.0, 1.0}}}};
  return p;
}

inline std::vector<double> random_simplex(std::size_t k, Rng& rng, bool allow_zero = true) {
  std::vector<double> w(k);
  for (auto& x : w) {
    x = rng.uniform01();
    if (allow_zero && rng.uniform_index(4) == 0) x = 0.0;
  }
  if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[rng.uniform_index(k)] = 1.0;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  // Make the sum hit one within the validation tolerance.
  w.back() = std::max(0.0, 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0));
  return w;
}

inline ModelParams random_params(std::size_t k, Rng& rng) {
  ModelParams p;
  p.types.count = k;
  p.p0.weights = random_simplex(k, rng, false);
  for (std::size_t r = 0; r < k; ++r) p.b.rows.push_back(random_simplex(k, rng));
  for (std::size_t r = 0; r < k; ++r) p.q.q.push_back(rng.uniform_index(5) == 0 ? 0.0 : 0.8 * rng.uniform01());
  p.nu.nu.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t l = 0; l < k; ++l) p.nu.nu[r].push_back(TypeDistribution{random_simplex(k, rng)});
  }
  return p;
}

// Independent full-matching sampler: shuffle, then pair neighbours.
inline Matching shuffle_and_pair(std::size_t n, Rng& rng) {
  std::vector<AgentId> order(n);
  std::iota(order.begin(), order.end(), 0U);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  Matching m;
  m.partner.assign(n, kUnmatched);
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    m.partner[order[t]] = order[t + 1];
    m.partner[order[t + 1]] = order[t];
  }
  return m;
}

// Every fixed-point-free involution of 0..n-1, found by filtering all n!
// permutations.
inline std::vector<std::vector<AgentId>> brute_force_involutions(std::size_t n,
                                                                 bool allow_fixed = false) {
  std::vector<AgentId> perm(n);
  std::iota(perm.begin(), perm.end(), 0U);
  std::vector<std::vector<AgentId>> out;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      ok = perm[perm[i]] == i && (allow_fixed || perm[i] != i);
    }
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

inline double total_variation(const std::map<std::vector<AgentId>, std::uint64_t>& counts,
                              std::size_t support, std::uint64_t draws) {
  const double uniform = 1.0 / static_cast<double>(support);
  double tv = 0.0;
  for (const auto& [key, c] : counts) {
    tv += std::abs(static_cast<double>(c) / static_cast<double>(draws) - uniform);
  }
  tv += uniform * static_cast<double>(support - counts.size());
  return tv / 2.0;
}

}  // namespace matchsim::testing
