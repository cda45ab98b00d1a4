#include "matchsim/core_model.hpp"

#include <cmath>

#include <fmt/format.h>

namespace matchsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonStochasticRow: return "NonStochasticRow";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyPopulation: return "EmptyPopulation";
    case ErrorCode::kOddPopulation: return "OddPopulation";
    case ErrorCode::kPlanMismatch: return "PlanMismatch";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kOddMatchedTotal: return "OddMatchedTotal";
    case ErrorCode::kSelfPair: return "SelfPair";
    case ErrorCode::kSimplexDrift: return "SimplexDrift";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kEmptyTable: return "EmptyTable";
    case ErrorCode::kInsufficientCells: return "InsufficientCells";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
  }
  return "Unknown";
}

namespace {

std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += fmt::format("{} at {}: {}", to_string(v.code), v.where, v.detail);
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorCode::kValidationError, describe(violations)),
      violations_(std::move(violations)) {}

void check_distribution(std::span<const double> weights, std::size_t expected_size,
                        const std::string& where, std::vector<Violation>& out) {
  if (weights.size() != expected_size) {
    out.push_back({ErrorCode::kDimensionMismatch, where,
                   fmt::format("expected {} entries, got {}", expected_size, weights.size())});
    return;
  }
  double sum = 0.0;
  bool in_range = true;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (!(w >= 0.0 && w <= 1.0)) {
      out.push_back({ErrorCode::kOutOfRange, fmt::format("{}[{}]", where, k + 1),
                     fmt::format("{} is outside [0, 1]", w)});
      in_range = false;
    }
    sum += w;
  }
  if (in_range && std::abs(sum - 1.0) > kSimplexTolerance) {
    out.push_back({ErrorCode::kNonStochasticRow, where, fmt::format("sums to {:.17g}", sum)});
  }
}

std::vector<Violation> check_params(const ModelParams& params) {
  std::vector<Violation> out;
  const std::size_t k_count = params.types.count;
  if (k_count < 1) {
    out.push_back({ErrorCode::kOutOfRange, "types.K", "K must be at least 1"});
    return out;
  }

  check_distribution(params.p0.weights, k_count, "p0", out);

  if (params.b.rows.size() != k_count) {
    out.push_back({ErrorCode::kDimensionMismatch, "b",
                   fmt::format("expected {} rows, got {}", k_count, params.b.rows.size())});
  }
  for (std::size_t k = 0; k < params.b.rows.size(); ++k) {
    check_distribution(params.b.rows[k], k_count, fmt::format("b[{}]", k + 1), out);
  }

  if (params.q.q.size() != k_count) {
    out.push_back({ErrorCode::kDimensionMismatch, "q",
                   fmt::format("expected {} entries, got {}", k_count, params.q.q.size())});
  }
  for (std::size_t k = 0; k < params.q.q.size(); ++k) {
    const double v = params.q.q[k];
    if (!(v >= 0.0 && v <= 1.0)) {
      out.push_back({ErrorCode::kOutOfRange, fmt::format("q[{}]", k + 1),
                     fmt::format("{} is outside [0, 1]", v)});
    }
  }

  const auto& nu = params.nu.nu;
  for (std::size_t k = nu.size(); k < k_count; ++k) {
    out.push_back({ErrorCode::kDimensionMismatch, fmt::format("nu[{}]", k + 1), "row is missing"});
  }
  if (nu.size() > k_count) {
    out.push_back({ErrorCode::kDimensionMismatch, "nu",
                   fmt::format("expected {} rows, got {}", k_count, nu.size())});
  }
  for (std::size_t k = 0; k < nu.size(); ++k) {
    for (std::size_t l = nu[k].size(); l < k_count; ++l) {
      out.push_back({ErrorCode::kDimensionMismatch, fmt::format("nu[{}][{}]", k + 1, l + 1),
                     "distribution is missing"});
    }
    if (nu[k].size() > k_count) {
      out.push_back({ErrorCode::kDimensionMismatch, fmt::format("nu[{}]", k + 1),
                     fmt::format("expected {} entries, got {}", k_count, nu[k].size())});
    }
    for (std::size_t l = 0; l < nu[k].size(); ++l) {
      check_distribution(nu[k][l].weights, k_count, fmt::format("nu[{}][{}]", k + 1, l + 1), out);
    }
  }
  return out;
}

const ModelParams& validate_params(const ModelParams& params) {
  auto violations = check_params(params);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return params;
}

std::vector<std::size_t> type_counts(const Population& pop, TypeSpace types) {
  std::vector<std::size_t> counts(types.count, 0);
  for (TypeId t : pop.types) {
    if (t >= types.count) {
      throw Error(ErrorCode::kOutOfRange,
                  fmt::format("type label {} exceeds K = {}", t + 1, types.count));
    }
    ++counts[t];
  }
  return counts;
}

TypeDistribution empirical_distribution(const Population& pop, TypeSpace types) {
  if (pop.size() == 0) throw Error(ErrorCode::kEmptyPopulation, "population has no agents");
  const auto counts = type_counts(pop, types);
  TypeDistribution dist;
  dist.weights.reserve(counts.size());
  const double n = static_cast<double>(pop.size());
  for (std::size_t c : counts) dist.weights.push_back(static_cast<double>(c) / n);
  return dist;
}

bool is_valid_matching(const Matching& matching, bool require_full) {
  const std::size_t n = matching.size();
  for (std::size_t i = 0; i < n; ++i) {
    const AgentId j = matching.partner[i];
    if (j == kUnmatched) {
      if (require_full) return false;
      continue;
    }
    if (j >= n || j == i || matching.partner[j] != i) return false;
  }
  return true;
}

std::vector<AgentId> to_involution(const Matching& matching) {
  std::vector<AgentId> sigma(matching.size());
  for (std::size_t i = 0; i < matching.size(); ++i) {
    sigma[i] = matching.matched(i) ? matching.partner[i] : static_cast<AgentId>(i);
  }
  return sigma;
}

Matching from_involution(std::span<const AgentId> sigma) {
  Matching m;
  m.partner.resize(sigma.size());
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const AgentId j = sigma[i];
    if (j >= sigma.size() || sigma[j] != i) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("map is not an involution at {}", i));
    }
    m.partner[i] = (j == i) ? kUnmatched : j;
  }
  return m;
}

ModelParams hardy_weinberg_params(double allele_a_share) {
  ModelParams p;
  p.types.count = 2;
  p.p0.weights = {allele_a_share, 1.0 - allele_a_share};
  p.b.rows = {{1.0, 0.0}, {0.0, 1.0}};
  p.q.q = {0.0, 0.0};
  p.nu.nu = {{TypeDistribution{{1.0, 0.0}}, TypeDistribution{{0.5, 0.5}}},
             {TypeDistribution{{0.5, 0.5}}, TypeDistribution{{0.0, 1.0}}}};
  return p;
}

}  // namespace matchsim
