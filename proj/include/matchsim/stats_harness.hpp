#pragma once

// Statistical checks of the independence and distributional properties of
// the samplers and the dynamics at finite N.
//
// Every test draws its randomness from streams derived from a single seed:
// stream 0 picks the sampled agents/subsets, stream r + 1 drives draw or
// replication r. Reports are therefore reproducible and independent of the
// worker count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "matchsim/core_model.hpp"

namespace matchsim {

class ContingencyTable {
 public:
  ContingencyTable() = default;
  ContingencyTable(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}
  ContingencyTable(std::size_t rows, std::size_t cols, std::vector<std::uint64_t> counts);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::uint64_t at(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }
  void add(std::size_t r, std::size_t c, std::uint64_t n = 1) { counts_[r * cols_ + c] += n; }
  std::uint64_t total() const;
  std::uint64_t row_total(std::size_t r) const;
  std::uint64_t col_total(std::size_t c) const;
  ContingencyTable& operator+=(const ContingencyTable& other);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct ChiSquare {
  double statistic = 0.0;
  std::size_t dof = 0;
};

// Pearson statistic against the product of the marginals. Rows and columns
// with zero marginal are excluded from both the sum and the dof.
ChiSquare chi_square_statistic(const ContingencyTable& table);

// Upper tail of the chi-square law: Q(dof / 2, statistic / 2). dof == 0 gives 1.
double chi_square_p_value(double statistic, std::size_t dof);

// Drops empty lines, then repeatedly merges the smallest row or column into
// the next smallest until every expected count reaches `min_expected` or a
// single row or column is left.
ContingencyTable pool_sparse_cells(const ContingencyTable& table, double min_expected = 5.0);

enum class TestStatus { kPass, kFail, kDegenerate };

std::string_view to_string(TestStatus status);

struct TestRecord {
  std::string name;
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  TestStatus status = TestStatus::kPass;
};

struct TestReport {
  std::string test;
  std::string digest;
  std::vector<TestRecord> records;
  std::vector<std::pair<std::string, double>> summary;  // in emission order
  TestStatus status = TestStatus::kPass;

  double summary_value(std::string_view key) const;
};

// One tab-separated line per record: test, digest, statistic, dof, p-value, status.
std::string report_tsv(const TestReport& report);

// 16 hex digits of FNV-1a over a canonical rendering of the inputs.
std::string params_digest(const ModelParams& params, std::string_view extra);

enum class PairingMode {
  kUniform,
  // For each tested pair (i, j), the pair is forced together with probability
  // 1/2. Used to check that the test has power.
  kPlantedPair,
};

// Chi-square test of (g_i, g_j) independence over `draws` fresh matchings of
// a fixed population for `pairs` sampled agent pairs. Passes when the
// rejection fraction is at most alpha + 4 sqrt(alpha (1 - alpha) / tested).
TestReport pairwise_independence_test(const ModelParams& params, std::size_t agents,
                                      std::size_t draws, std::size_t pairs, double alpha,
                                      std::uint64_t seed,
                                      PairingMode mode = PairingMode::kUniform);

// Per-type frequencies of g against the large-population law, with a 4
// standard error band widened by the exact finite-N bias.
TestReport marginal_law_test(const ModelParams& params, std::size_t agents, std::size_t draws,
                             std::uint64_t seed);

// frac(A1 and partner in A2) - frac(A1) frac(A2) for one matching.
double cross_section_deviation(const Matching& matching, std::span<const char> in_a1,
                               std::span<const char> in_a2);

// Max |deviation| over `draws` uniform full matchings and `subset_pairs`
// random subset pairs of measure in [0.3, 0.7]; passes when <= 5 / sqrt(N).
TestReport cross_section_product_test(std::size_t agents, std::size_t draws,
                                      std::size_t subset_pairs, std::uint64_t seed);

// Conditional independence within one period, for sampled pairs (i, j):
//   (a) (h_i, h_j) given (alpha_i, alpha_j) of the previous period,
//   (b) (g_i, g_j) given (h_i, h_j),
//   (c) (alpha_i, alpha_j) given (h_i, g_i, h_j, g_j).
// Cells with no variation are reported as degenerate and not counted.
TestReport markov_ci_test(const ModelParams& params, std::size_t agents, std::size_t periods,
                          std::size_t replications, std::size_t pairs, double alpha,
                          std::uint64_t seed);

}  // namespace matchsim
