#include "matchsim/stats_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "matchsim/analytic_engine.hpp"
#include "matchsim/dynamics_engine.hpp"
#include "matchsim/matching_sampler.hpp"
#include "matchsim/parallel.hpp"
#include "matchsim/rng.hpp"

namespace matchsim {

ContingencyTable::ContingencyTable(std::size_t rows, std::size_t cols,
                                   std::vector<std::uint64_t> counts)
    : rows_(rows), cols_(cols), counts_(std::move(counts)) {
  if (counts_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "table counts do not match its shape");
  }
}

std::uint64_t ContingencyTable::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ContingencyTable::row_total(std::size_t r) const {
  std::uint64_t s = 0;
  for (std::size_t c = 0; c < cols_; ++c) s += at(r, c);
  return s;
}

std::uint64_t ContingencyTable::col_total(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t r = 0; r < rows_; ++r) s += at(r, c);
  return s;
}

ContingencyTable& ContingencyTable::operator+=(const ContingencyTable& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw Error(ErrorCode::kDimensionMismatch, "cannot add tables of different shapes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ChiSquare chi_square_statistic(const ContingencyTable& table) {
  const double total = static_cast<double>(table.total());
  if (total <= 0.0) throw Error(ErrorCode::kEmptyTable, "contingency table has no observations");
  std::vector<double> row(table.rows()), col(table.cols());
  std::size_t live_rows = 0, live_cols = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    row[r] = static_cast<double>(table.row_total(r));
    live_rows += row[r] > 0.0;
  }
  for (std::size_t c = 0; c < table.cols(); ++c) {
    col[c] = static_cast<double>(table.col_total(c));
    live_cols += col[c] > 0.0;
  }
  ChiSquare out;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (row[r] == 0.0) continue;
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (col[c] == 0.0) continue;
      const double expected = row[r] * col[c] / total;
      const double diff = static_cast<double>(table.at(r, c)) - expected;
      out.statistic += diff * diff / expected;
    }
  }
  out.dof = (live_rows - 1) * (live_cols - 1);
  return out;
}

double chi_square_p_value(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

ContingencyTable pool_sparse_cells(const ContingencyTable& table, double min_expected) {
  // Work on lists of line groups; each group is a set of original rows/cols.
  std::vector<std::vector<std::size_t>> rows, cols;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.row_total(r) > 0) rows.push_back({r});
  }
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (table.col_total(c) > 0) cols.push_back({c});
  }
  auto sum_rows = [&](const std::vector<std::size_t>& g) {
    std::uint64_t s = 0;
    for (auto r : g) s += table.row_total(r);
    return s;
  };
  auto sum_cols = [&](const std::vector<std::size_t>& g) {
    std::uint64_t s = 0;
    for (auto c : g) s += table.col_total(c);
    return s;
  };
  // Index of the smallest group, then of the next smallest.
  auto two_smallest = [](const std::vector<std::uint64_t>& totals) {
    std::size_t a = 0;
    for (std::size_t i = 1; i < totals.size(); ++i) {
      if (totals[i] < totals[a]) a = i;
    }
    std::size_t b = a == 0 ? 1 : 0;
    for (std::size_t i = 0; i < totals.size(); ++i) {
      if (i != a && totals[i] < totals[b]) b = i;
    }
    return std::pair{a, b};
  };
  const double total = static_cast<double>(table.total());
  while (rows.size() > 1 && cols.size() > 1) {
    std::vector<std::uint64_t> rt, ct;
    for (const auto& g : rows) rt.push_back(sum_rows(g));
    for (const auto& g : cols) ct.push_back(sum_cols(g));
    const auto min_r = *std::min_element(rt.begin(), rt.end());
    const auto min_c = *std::min_element(ct.begin(), ct.end());
    if (static_cast<double>(min_r) * static_cast<double>(min_c) / total >= min_expected) break;
    // Merge along whichever margin is relatively thinner.
    const bool merge_rows = static_cast<double>(min_r) / static_cast<double>(rows.size()) <=
                            static_cast<double>(min_c) / static_cast<double>(cols.size());
    auto& groups = merge_rows ? rows : cols;
    const auto [a, b] = two_smallest(merge_rows ? rt : ct);
    groups[b].insert(groups[b].end(), groups[a].begin(), groups[a].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(a));
  }
  ContingencyTable pooled(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (auto r : rows[i]) {
        for (auto c : cols[j]) pooled.add(i, j, table.at(r, c));
      }
    }
  }
  return pooled;
}

std::string_view to_string(TestStatus status) {
  switch (status) {
    case TestStatus::kPass: return "pass";
    case TestStatus::kFail: return "fail";
    case TestStatus::kDegenerate: return "degenerate";
  }
  return "unknown";
}

double TestReport::summary_value(std::string_view key) const {
  for (const auto& [k, v] : summary) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("report has no summary key {}", key));
}

std::string report_tsv(const TestReport& report) {
  std::string out = "test\tdigest\tstatistic\tdof\tp_value\tpass\n";
  for (const auto& r : report.records) {
    out += fmt::format("{}:{}\t{}\t{:.10g}\t{}\t{:.10g}\t{}\n", report.test, r.name, report.digest,
                       r.statistic, r.dof, r.p_value, to_string(r.status));
  }
  return out;
}

std::string params_digest(const ModelParams& params, std::string_view extra) {
  std::string canon = fmt::format("K={};p0={:.17g};", params.types.count,
                                  fmt::join(params.p0.weights, ","));
  for (const auto& row : params.b.rows) canon += fmt::format("b={:.17g};", fmt::join(row, ","));
  canon += fmt::format("q={:.17g};", fmt::join(params.q.q, ","));
  for (const auto& row : params.nu.nu) {
    for (const auto& d : row) canon += fmt::format("nu={:.17g};", fmt::join(d.weights, ","));
  }
  canon += extra;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

constexpr std::uint64_t kMinObservations = 20;  // smallest 2x2 table with expected >= 5

std::vector<std::pair<AgentId, AgentId>> sample_pairs(std::size_t agents, std::size_t count,
                                                      std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  std::vector<std::pair<AgentId, AgentId>> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    const auto i = static_cast<AgentId>(rng.uniform_index(agents));
    auto j = static_cast<AgentId>(rng.uniform_index(agents - 1));
    if (j >= i) ++j;
    out.emplace_back(i, j);
  }
  return out;
}

// Pools, then tests; a table that pools down to one line is degenerate.
TestRecord test_table(std::string name, const ContingencyTable& table, double alpha) {
  TestRecord rec;
  rec.name = std::move(name);
  const ContingencyTable pooled = pool_sparse_cells(table);
  if (pooled.rows() < 2 || pooled.cols() < 2) {
    rec.status = TestStatus::kDegenerate;
    rec.p_value = std::numeric_limits<double>::quiet_NaN();
    return rec;
  }
  const ChiSquare chi = chi_square_statistic(pooled);
  rec.statistic = chi.statistic;
  rec.dof = chi.dof;
  rec.p_value = chi_square_p_value(chi.statistic, chi.dof);
  rec.status = rec.p_value < alpha ? TestStatus::kFail : TestStatus::kPass;
  return rec;
}

void summarize_rejections(TestReport& report, double alpha) {
  std::size_t tested = 0, rejected = 0, degenerate = 0;
  for (const auto& r : report.records) {
    if (r.status == TestStatus::kDegenerate) {
      ++degenerate;
      continue;
    }
    ++tested;
    rejected += r.status == TestStatus::kFail;
  }
  const double fraction = tested == 0 ? 0.0 : static_cast<double>(rejected) / tested;
  const double bound =
      tested == 0 ? 1.0 : alpha + 4.0 * std::sqrt(alpha * (1.0 - alpha) / tested);
  report.summary = {{"tested", static_cast<double>(tested)},
                    {"rejected", static_cast<double>(rejected)},
                    {"degenerate", static_cast<double>(degenerate)},
                    {"alpha", alpha},
                    {"rejection_fraction", fraction},
                    {"bound", bound}};
  if (tested == 0) {
    report.status = TestStatus::kDegenerate;
  } else {
    report.status = fraction <= bound ? TestStatus::kPass : TestStatus::kFail;
  }
}

// Chunks give each worker its own accumulator; integer sums merge exactly.
std::size_t chunk_count(std::size_t work) { return std::min<std::size_t>(work, 64); }

}  // namespace

TestReport pairwise_independence_test(const ModelParams& params, std::size_t agents,
                                      std::size_t draws, std::size_t pairs, double alpha,
                                      std::uint64_t seed, PairingMode mode) {
  validate_params(params);
  if (draws < kMinObservations) {
    throw Error(ErrorCode::kInsufficientCells,
                fmt::format("{} draws cannot give expected cell counts of 5", draws));
  }
  if (agents < 2 || pairs == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 agents and 1 pair");
  }
  const std::size_t k_count = params.type_count();
  const std::size_t outcomes = k_count + 1;
  const Population pop = init_population(params.p0, agents);
  const PartialMatchingPlan plan = plan_partial_matching(pop, params.q);
  const auto sampled = sample_pairs(agents, pairs, seed);

  auto outcome = [&](TypeId g) { return g == kNoPartner ? k_count : static_cast<std::size_t>(g); };

  const std::size_t chunks = chunk_count(draws);
  std::vector<std::vector<ContingencyTable>> partial(
      chunks, std::vector<ContingencyTable>(pairs, ContingencyTable(outcomes, outcomes)));
  parallel_for(chunks, [&](std::size_t chunk) {
    auto& tables = partial[chunk];
    for (std::size_t r = chunk; r < draws; r += chunks) {
      Rng rng(derive_seed(seed, r + 1));
      const Matching m = sample_partial_matching(pop, plan, rng);
      for (std::size_t p = 0; p < pairs; ++p) {
        const auto [i, j] = sampled[p];
        // A forced pair fixes (g_i, g_j) regardless of how the rest is matched.
        if (mode == PairingMode::kPlantedPair && rng.uniform01() < 0.5) {
          tables[p].add(pop.types[j], pop.types[i]);
          continue;
        }
        const TypeId gi = m.matched(i) ? pop.types[m.partner[i]] : kNoPartner;
        const TypeId gj = m.matched(j) ? pop.types[m.partner[j]] : kNoPartner;
        tables[p].add(outcome(gi), outcome(gj));
      }
    }
  });

  TestReport report;
  report.test = mode == PairingMode::kUniform ? "pairwise_independence"
                                              : "pairwise_independence_planted";
  report.digest = params_digest(
      params, fmt::format("N={};R={};P={};alpha={};seed={};mode={}", agents, draws, pairs, alpha,
                          seed, static_cast<int>(mode)));
  for (std::size_t p = 0; p < pairs; ++p) {
    ContingencyTable table(outcomes, outcomes);
    for (std::size_t c = 0; c < chunks; ++c) table += partial[c][p];
    report.records.push_back(test_table(
        fmt::format("i={},j={}", sampled[p].first + 1, sampled[p].second + 1), table, alpha));
  }
  summarize_rejections(report, alpha);
  return report;
}

TestReport marginal_law_test(const ModelParams& params, std::size_t agents, std::size_t draws,
                             std::uint64_t seed) {
  validate_params(params);
  if (agents < 2 || draws == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 agents and 1 draw");
  }
  const std::size_t k_count = params.type_count();
  const std::size_t outcomes = k_count + 1;
  const Population pop = init_population(params.p0, agents);
  const PartialMatchingPlan plan = plan_partial_matching(pop, params.q);
  const TypeDistribution realized = empirical_distribution(pop, params.types);
  const MatchLaw law = match_law(realized, params.q);

  const std::size_t chunks = chunk_count(draws);
  std::vector<std::vector<std::uint64_t>> partial(chunks,
                                                  std::vector<std::uint64_t>(k_count * outcomes));
  parallel_for(chunks, [&](std::size_t chunk) {
    auto& counts = partial[chunk];
    for (std::size_t r = chunk; r < draws; r += chunks) {
      Rng rng(derive_seed(seed, r + 1));
      const Matching m = sample_partial_matching(pop, plan, rng);
      for (std::size_t i = 0; i < agents; ++i) {
        const std::size_t g = m.matched(i) ? pop.types[m.partner[i]] : k_count;
        ++counts[pop.types[i] * outcomes + g];
      }
    }
  });
  std::vector<std::uint64_t> counts(k_count * outcomes, 0);
  for (const auto& c : partial) {
    for (std::size_t x = 0; x < counts.size(); ++x) counts[x] += c[x];
  }

  const double matched_total = static_cast<double>(plan.matched_total());
  TestReport report;
  report.test = "marginal_law";
  report.digest =
      params_digest(params, fmt::format("N={};R={};seed={}", agents, draws, seed));
  double max_dev = 0.0;
  bool all_pass = true;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (plan.counts[k] == 0) continue;
    const double mk = static_cast<double>(plan.counts[k]);
    const double matched_share = (mk - static_cast<double>(plan.unmatched[k])) / mk;
    const double n_obs = mk * static_cast<double>(draws);
    for (std::size_t o = 0; o < outcomes; ++o) {
      const double expected = o == k_count ? law.to_none[k] : law.to_type[k][o];
      double finite = static_cast<double>(plan.unmatched[k]) / mk;
      if (o < k_count) {
        const double partners = static_cast<double>(plan.counts[o] - plan.unmatched[o]) -
                                (o == k ? 1.0 : 0.0);
        finite = matched_total > 1.0 ? matched_share * partners / (matched_total - 1.0) : 0.0;
      }
      const double observed = static_cast<double>(counts[k * outcomes + o]) / n_obs;
      const double se = std::sqrt(expected * (1.0 - expected) / n_obs);
      const double dev = std::abs(observed - expected);
      const double band = 4.0 * se + std::abs(finite - expected);
      max_dev = std::max(max_dev, dev);
      TestRecord rec;
      rec.name = fmt::format("type={},g={}", k + 1, o == k_count ? std::string("J")
                                                                 : std::to_string(o + 1));
      rec.statistic = se > 0.0 ? dev / se : 0.0;
      rec.dof = 0;
      rec.p_value = se > 0.0 ? std::erfc(rec.statistic / std::sqrt(2.0)) : (dev == 0.0 ? 1.0 : 0.0);
      rec.status = dev <= band + 1e-15 ? TestStatus::kPass : TestStatus::kFail;
      all_pass = all_pass && rec.status == TestStatus::kPass;
      report.records.push_back(std::move(rec));
    }
  }
  report.summary = {{"max_abs_deviation", max_dev}};
  report.status = all_pass ? TestStatus::kPass : TestStatus::kFail;
  return report;
}

double cross_section_deviation(const Matching& matching, std::span<const char> in_a1,
                               std::span<const char> in_a2) {
  const std::size_t n = matching.size();
  if (in_a1.size() != n || in_a2.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "subset masks must cover every agent");
  }
  std::size_t a1 = 0, a2 = 0, both = 0;
  for (std::size_t i = 0; i < n; ++i) {
    a1 += in_a1[i] != 0;
    a2 += in_a2[i] != 0;
    if (in_a1[i] && matching.matched(i) && in_a2[matching.partner[i]]) ++both;
  }
  const double dn = static_cast<double>(n);
  return static_cast<double>(both) / dn - (static_cast<double>(a1) / dn) * (static_cast<double>(a2) / dn);
}

TestReport cross_section_product_test(std::size_t agents, std::size_t draws,
                                      std::size_t subset_pairs, std::uint64_t seed) {
  if (agents < 2 || agents % 2 != 0) {
    throw Error(ErrorCode::kOddPopulation,
                fmt::format("full matchings need an even agent count, got {}", agents));
  }
  Rng pick(derive_seed(seed, 0));
  std::vector<std::pair<std::vector<char>, std::vector<char>>> subsets;
  for (std::size_t s = 0; s < subset_pairs; ++s) {
    auto draw_mask = [&] {
      const double share = 0.3 + 0.4 * pick.uniform01();
      std::vector<char> mask(agents);
      for (auto& m : mask) m = pick.uniform01() < share;
      return mask;
    };
    auto a1 = draw_mask();
    auto a2 = draw_mask();
    subsets.emplace_back(std::move(a1), std::move(a2));
  }

  std::vector<std::vector<double>> deviation(draws, std::vector<double>(subset_pairs));
  parallel_for(draws, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r + 1));
    const Matching m = sample_full_matching(agents, rng);
    for (std::size_t s = 0; s < subset_pairs; ++s) {
      deviation[r][s] = cross_section_deviation(m, subsets[s].first, subsets[s].second);
    }
  });

  const double bound = 5.0 / std::sqrt(static_cast<double>(agents));
  TestReport report;
  report.test = "cross_section_product";
  report.digest = params_digest(ModelParams{}, fmt::format("N={};R={};S={};seed={}", agents, draws,
                                                           subset_pairs, seed));
  double overall = 0.0;
  for (std::size_t s = 0; s < subset_pairs; ++s) {
    double worst = 0.0;
    for (std::size_t r = 0; r < draws; ++r) worst = std::max(worst, std::abs(deviation[r][s]));
    overall = std::max(overall, worst);
    TestRecord rec;
    rec.name = fmt::format("subsets={}", s + 1);
    rec.statistic = worst;
    rec.p_value = std::numeric_limits<double>::quiet_NaN();
    rec.status = worst <= bound ? TestStatus::kPass : TestStatus::kFail;
    report.records.push_back(std::move(rec));
  }
  report.summary = {{"max_abs_deviation", overall}, {"bound", bound}};
  report.status = overall <= bound ? TestStatus::kPass : TestStatus::kFail;
  return report;
}

TestReport markov_ci_test(const ModelParams& params, std::size_t agents, std::size_t periods,
                          std::size_t replications, std::size_t pairs, double alpha,
                          std::uint64_t seed) {
  validate_params(params);
  if (replications < kMinObservations) {
    throw Error(ErrorCode::kInsufficientCells,
                fmt::format("{} replications cannot give expected cell counts of 5",
                            replications));
  }
  if (agents < 2 || pairs == 0 || periods == 0) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 agents, 1 pair and 1 period");
  }
  const std::size_t k = params.type_count();
  const std::size_t ko = k + 1;
  const auto sampled = sample_pairs(agents, pairs, seed);

  // Tables for one (pair, period): per conditioning cell, the outcome table.
  struct Stage {
    std::vector<ContingencyTable> mutation;  // cond (a_i, a_j) -> (h_i, h_j)
    std::vector<ContingencyTable> matching;  // cond (h_i, h_j) -> (g_i, g_j)
    std::vector<ContingencyTable> change;    // cond (h_i, g_i, h_j, g_j) -> (a_i, a_j)
  };
  const Stage empty_stage{std::vector<ContingencyTable>(k * k, ContingencyTable(k, k)),
                          std::vector<ContingencyTable>(k * k, ContingencyTable(ko, ko)),
                          std::vector<ContingencyTable>(k * ko * k * ko, ContingencyTable(k, k))};
  const std::size_t stages = pairs * periods;
  auto merge = [](Stage& into, const Stage& from) {
    for (std::size_t c = 0; c < into.mutation.size(); ++c) into.mutation[c] += from.mutation[c];
    for (std::size_t c = 0; c < into.matching.size(); ++c) into.matching[c] += from.matching[c];
    for (std::size_t c = 0; c < into.change.size(); ++c) into.change[c] += from.change[c];
  };
  auto outcome = [&](TypeId g) { return g == kNoPartner ? k : static_cast<std::size_t>(g); };

  const std::size_t chunks = chunk_count(replications);
  std::vector<std::vector<Stage>> partial(chunks, std::vector<Stage>(stages, empty_stage));
  parallel_for(chunks, [&](std::size_t chunk) {
    auto& acc = partial[chunk];
    for (std::size_t r = chunk; r < replications; r += chunks) {
      const SimulationRun run = run_dynamics(params, agents, periods, derive_seed(seed, r + 1));
      for (std::size_t n = 0; n < periods; ++n) {
        const Population& before = n == 0 ? run.initial : run.traces[n - 1].alpha;
        const PeriodTrace& tr = run.traces[n];
        for (std::size_t p = 0; p < pairs; ++p) {
          const auto [i, j] = sampled[p];
          Stage& st = acc[p * periods + n];
          const std::size_t hi = tr.h[i], hj = tr.h[j];
          const std::size_t gi = outcome(tr.g.partner_type[i]);
          const std::size_t gj = outcome(tr.g.partner_type[j]);
          st.mutation[before[i] * k + before[j]].add(hi, hj);
          st.matching[hi * k + hj].add(gi, gj);
          st.change[((hi * ko + gi) * k + hj) * ko + gj].add(tr.alpha[i], tr.alpha[j]);
        }
      }
    }
  });

  TestReport report;
  report.test = "markov_ci";
  report.digest = params_digest(
      params, fmt::format("N={};T={};R={};P={};alpha={};seed={}", agents, periods, replications,
                          pairs, alpha, seed));
  auto test_cells = [&](const std::vector<ContingencyTable>& cells, const std::string& label) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].total() < kMinObservations) continue;  // too sparse to test
      report.records.push_back(test_table(fmt::format("{},cell={}", label, c), cells[c], alpha));
    }
  };
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t n = 0; n < periods; ++n) {
      Stage st = empty_stage;
      for (std::size_t c = 0; c < chunks; ++c) merge(st, partial[c][p * periods + n]);
      const std::string base = fmt::format("i={},j={},period={}", sampled[p].first + 1,
                                           sampled[p].second + 1, n + 1);
      test_cells(st.mutation, base + ",mutation");
      test_cells(st.matching, base + ",matching");
      test_cells(st.change, base + ",type_change");
    }
  }
  summarize_rejections(report, alpha);
  return report;
}

}  // namespace matchsim
