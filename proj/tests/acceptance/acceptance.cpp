// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1 for ctest).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "../unit/support.hpp"
#include "matchsim/analytic_engine.hpp"
#include "matchsim/cli_runner.hpp"
#include "matchsim/dynamics_engine.hpp"
#include "matchsim/exact_oracle.hpp"
#include "matchsim/matching_sampler.hpp"
#include "matchsim/parallel.hpp"
#include "matchsim/stats_harness.hpp"

namespace {

using namespace matchsim;
namespace fs = std::filesystem;
using Q = ExactProbability;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0 means no runtime requirement
  std::function<Outcome()> run;
};

Q frac(std::int64_t a, std::int64_t b) { return Q(BigInt(a), BigInt(b)); }

Outcome oracle_count() {
  const std::uint64_t expected[] = {1, 3, 15, 105, 945, 10395};
  std::string got;
  bool ok = true;
  for (std::size_t n = 2, t = 0; n <= 12; n += 2, ++t) {
    const auto count = enumerate_full_matchings(n).size();
    ok = ok && count == expected[t];
    got += fmt::format("{}{}", t == 0 ? "" : ",", count);
  }
  return {ok, "counts " + got};
}

Outcome pair_law() {
  std::size_t checked = 0, wrong = 0;
  for (std::size_t n : {4U, 6U, 8U}) {
    for (AgentId i = 0; i < n; ++i)
      for (AgentId j = 0; j < n; ++j) {
        if (i == j) continue;
        ++checked;
        wrong += exact_pair_probability(n, i, j) != frac(1, n - 1);
      }
  }
  return {wrong == 0, fmt::format("{} ordered pairs, {} mismatches", checked, wrong)};
}

Q three_case(std::size_t n, AgentId i, AgentId j, AgentId a, AgentId b) {
  if (a == i || b == j || a == b) return 0;
  if (a == j || b == i) return a == j && b == i ? frac(1, n - 1) : Q(0);
  return frac(1, (n - 1) * (n - 3));
}

Outcome joint_law() {
  std::size_t checked = 0, wrong = 0;
  for (std::size_t n : {6U, 8U}) {
    for (AgentId i = 0; i < n; ++i)
      for (AgentId j = 0; j < n; ++j) {
        if (i == j) continue;
        for (AgentId a = 0; a < n; ++a)
          for (AgentId b = 0; b < n; ++b) {
            ++checked;
            wrong += exact_joint_probability(n, i, j, a, b) != three_case(n, i, j, a, b);
          }
      }
  }
  return {wrong == 0, fmt::format("{} tuples, {} mismatches", checked, wrong)};
}

Outcome set_law() {
  Rng rng(20240601);
  std::size_t wrong = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 * (1 + rng.uniform_index(5));
    const auto i = static_cast<AgentId>(rng.uniform_index(n));
    std::vector<AgentId> c;
    for (AgentId a = 0; a < n; ++a)
      if (rng.uniform_index(2) == 1) c.push_back(a);
    const bool contains = std::find(c.begin(), c.end(), i) != c.end();
    const Q expected = frac(static_cast<std::int64_t>(c.size()) - (contains ? 1 : 0), n - 1);
    wrong += exact_set_probability(n, i, c) != expected;
  }
  return {wrong == 0, fmt::format("100 cases, {} mismatches", wrong)};
}

Outcome partial_space() {
  const std::vector<std::size_t> m4{4, 4}, u1{1, 1}, m8{8, 8}, u2{2, 2};
  const auto law = enumerate_partial_space(m4, u1);
  bool ok = law.sample_points() == 240;
  for (std::size_t i = 0; i < 4; ++i) {
    ok = ok && law.marginal(i, law.no_partner_outcome()) == frac(1, 4) &&
         law.marginal(i, 1) == frac(9, 20);
  }
  const Q small = finite_independence_defect(law);
  const Q large = finite_independence_defect(m8, u2);
  ok = ok && small > 0 && large < small;
  return {ok, fmt::format("240-point space {}, defect {} -> {}", law.sample_points() == 240 ? "ok" : "WRONG",
                          small.str(), large.str())};
}

double tv_between(const std::map<std::vector<AgentId>, std::uint64_t>& a,
                  const std::map<std::vector<AgentId>, std::uint64_t>& b, double draws) {
  std::map<std::vector<AgentId>, std::pair<double, double>> joint;
  for (const auto& [k, c] : a) joint[k].first = c / draws;
  for (const auto& [k, c] : b) joint[k].second = c / draws;
  double tv = 0.0;
  for (const auto& [k, p] : joint) tv += std::abs(p.first - p.second);
  return tv / 2.0;
}

Outcome sampler_uniformity() {
  constexpr std::uint64_t kDraws = 1'000'000;
  Rng a(6), b(66);
  std::map<std::vector<AgentId>, std::uint64_t> sampled, shuffled;
  for (std::uint64_t t = 0; t < kDraws; ++t) {
    ++sampled[sample_full_matching(6, a).partner];
    ++shuffled[testing::shuffle_and_pair(6, b).partner];
  }
  const double tv = testing::total_variation(sampled, 15, kDraws);
  const double tv_shuffle = testing::total_variation(shuffled, 15, kDraws);
  const double tv_cross = tv_between(sampled, shuffled, kDraws);
  const bool ok = sampled.size() == 15 && tv < 0.005 && tv_shuffle < 0.005 && tv_cross < 0.005;
  return {ok, fmt::format("TV to uniform {:.5f}, shuffle-and-pair {:.5f}, between samplers {:.5f}",
                          tv, tv_shuffle, tv_cross)};
}

Outcome hardy_weinberg() {
  const fs::path out = fs::temp_directory_path() / "matchsim_acceptance_hw.csv";
  RunConfig config;
  config.agents = 100'000;
  config.periods = 10;
  config.replications = 30;
  config.seed = 7;
  config.output_path = out.string();
  std::ostringstream sink, err;
  const int code = run_subcommand("demo-hw", config, sink, err);

  // Re-read the emitted CSV so the check covers the file, not just the exit code.
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  double worst_emp = 0.0, worst_an = 0.0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::size_t n, k, r;
    double emp, an;
    if (std::sscanf(line.c_str(), "%zu,%zu,%lf,%lf,%zu", &n, &k, &emp, &an, &r) != 5 || k != 1) continue;
    ++rows;
    worst_emp = std::max(worst_emp, std::abs(emp - 0.6));
    worst_an = std::max(worst_an, std::abs(an - 0.6));
  }
  fs::remove(out);
  const auto path = evolve(hardy_weinberg_params(0.6), 10);
  double exact_an = 0.0;
  for (const auto& p : path) exact_an = std::max({exact_an, std::abs(p[0] - 0.6), std::abs(p[1] - 0.4)});
  const bool ok = code == kExitOk && rows == 30 * 11 && worst_emp <= 0.01 && exact_an <= 1e-12;
  return {ok, fmt::format("{} rows, max |empirical - 0.6| = {:.5f}, max analytic error {:.1e}", rows,
                          worst_emp, std::max(worst_an, exact_an))};
}

Outcome lln_convergence() {
  const ModelParams params = testing::generic_k3_params();
  constexpr std::size_t kPeriods = 10;
  const auto path = evolve(params, kPeriods);
  std::vector<double> errors;
  std::string detail;
  for (std::size_t n : {1'000U, 10'000U, 100'000U}) {
    const auto runs = run_replications(params, n, kPeriods, 8, 30, {.record_traces = false});
    double total = 0.0;
    for (const auto& run : runs) {
      double sup = 0.0;
      for (std::size_t t = 0; t <= kPeriods; ++t)
        for (std::size_t k = 0; k < 3; ++k) sup = std::max(sup, std::abs(run.empirical[t][k] - path[t][k]));
      total += sup;
    }
    errors.push_back(total / 30.0);
    detail += fmt::format("{}N={}: {:.5f}", detail.empty() ? "" : ", ", n, errors.back());
  }
  const bool ok = errors[0] > errors[1] && errors[1] > errors[2] && errors[2] < 0.01;
  return {ok, "mean sup-norm error " + detail};
}

Outcome transition_oracle() {
  constexpr std::size_t kAgents = 100'000;
  constexpr std::size_t kReplications = 10'000;
  Rng pick(909);
  std::size_t entries = 0, outside = 0;
  double worst_z = 0.0;
  for (int set = 0; set < 3; ++set) {
    const std::size_t k_count = 2 + pick.uniform_index(2);
    const ModelParams params = testing::random_params(k_count, pick);
    const auto counts = apportion(params.p0, kAgents);
    const auto gamma = period_transition(params.p0, params).gamma;
    const std::uint64_t seed = pick();

    std::vector<std::vector<std::uint64_t>> partial(kReplications, std::vector<std::uint64_t>(k_count * k_count));
    parallel_for(kReplications, [&](std::size_t r) {
      const auto run = run_dynamics(params, kAgents, 1, derive_seed(seed, r));
      Rng tag(derive_seed(~seed, r));
      std::size_t offset = 0;
      for (std::size_t k = 0; k < k_count; ++k) {
        if (counts[k] > 0) {
          const std::size_t agent = offset + tag.uniform_index(counts[k]);
          ++partial[r][k * k_count + run.traces[0].alpha[agent]];
        }
        offset += counts[k];
      }
    });
    for (std::size_t k = 0; k < k_count; ++k) {
      if (counts[k] == 0) continue;
      for (std::size_t r = 0; r < k_count; ++r) {
        std::uint64_t hits = 0;
        for (const auto& p : partial) hits += p[k * k_count + r];
        const double freq = static_cast<double>(hits) / kReplications;
        const double g = gamma[k][r];
        const double se = std::sqrt(g * (1 - g) / kReplications);
        ++entries;
        const double dev = std::abs(freq - g);
        if (se == 0.0) {
          outside += dev > 1e-12;
          continue;
        }
        worst_z = std::max(worst_z, dev / se);
        outside += dev > 4 * se;
      }
    }
  }
  return {outside == 0, fmt::format("{} gamma entries, {} outside 4 SE, max |z| = {:.2f}", entries,
                                    outside, worst_z)};
}

Outcome independence_suite() {
  const ModelParams half = testing::identity_params({0.5, 0.5});
  const auto null = pairwise_independence_test(half, 1000, 10'000, 50, 0.01, 10);
  const auto planted =
      pairwise_independence_test(half, 1000, 10'000, 50, 0.01, 10, PairingMode::kPlantedPair);
  const auto markov = markov_ci_test(testing::generic_k2_params(), 2000, 3, 10'000, 20, 0.01, 10);
  const double f_null = null.summary_value("rejection_fraction");
  const double f_planted = planted.summary_value("rejection_fraction");
  const double f_markov = markov.summary_value("rejection_fraction");
  const bool ok = null.status == TestStatus::kPass && f_null <= 0.05 && f_planted >= 0.9 &&
                  markov.status == TestStatus::kPass && f_markov <= 0.05;
  return {ok, fmt::format("pairwise null {:.3f}, planted {:.3f}, markov null {:.3f} ({} tables, {} degenerate)",
                          f_null, f_planted, f_markov, markov.summary_value("tested"),
                          markov.summary_value("degenerate"))};
}

Outcome cross_section() {
  const auto report = cross_section_product_test(100'000, 100, 5, 11);
  const double dev = report.summary_value("max_abs_deviation");
  return {report.status == TestStatus::kPass && dev <= 0.016, fmt::format("max deviation {:.5f}", dev)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every file below `dir`, concatenated in path order.
std::string snapshot(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + read_file(f);
  return all;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "matchsim_acceptance_determinism";
  fs::remove_all(root);
  struct Case {
    std::string command;
    RunConfig config;
  };
  RunConfig base;
  base.params = testing::generic_k3_params();
  base.agents = 400;
  base.periods = 4;
  base.seed = 123;
  base.replications = 6;
  auto with = [&](std::string cmd, auto edit) {
    RunConfig c = base;
    edit(c);
    return Case{std::move(cmd), c};
  };
  const std::vector<Case> cases = {
      with("simulate", [](RunConfig&) {}),
      with("evolve", [](RunConfig&) {}),
      with("steady-state", [](RunConfig&) {}),
      with("verify-oracle", [](RunConfig&) {}),
      with("test-independence", [](RunConfig& c) { c.replications = 400; c.pairs = 10; }),
      with("test-markov-ci", [](RunConfig& c) { c.replications = 100; c.pairs = 4; c.periods = 2; }),
      with("test-cross-section", [](RunConfig& c) { c.replications = 20; }),
      with("demo-hw", [](RunConfig& c) { c.params.reset(); c.agents = 20'000; c.replications = 3; }),
  };
  std::size_t differing = 0;
  std::string which;
  for (const auto& tc : cases) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "4"}) {
      ::setenv("MATCHSIM_THREADS", threads, 1);
      const fs::path dir = root / fmt::format("{}-{}", tc.command, outputs.size());
      fs::create_directories(dir);
      RunConfig c = tc.config;
      if (tc.command == "simulate") c.trace_path = (dir / "traces.csv").string();
      c.output_path = tc.command == "verify-oracle" ? dir.string() : (dir / "out").string();
      std::ostringstream out, err;
      const int code = run_subcommand(tc.command, c, out, err);
      outputs.push_back(fmt::format("exit={}\n{}{}", code, out.str(), snapshot(dir)));
    }
    if (outputs[0] != outputs[1] || outputs[0] != outputs[2]) {
      ++differing;
      which += " " + tc.command;
    }
  }
  ::unsetenv("MATCHSIM_THREADS");
  fs::remove_all(root);
  return {differing == 0,
          fmt::format("{} subcommands x (1, 1, 4 threads), {} differ{}", cases.size(), differing, which)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "oracle count of full matchings", 10, oracle_count},
      {2, "pair probability 1/(N-1)", 0, pair_law},
      {3, "joint law three cases", 30, joint_law},
      {4, "set probability formulas", 0, set_law},
      {5, "partial-matching enumeration", 0, partial_space},
      {6, "sampler uniformity at N=6", 0, sampler_uniformity},
      {7, "Hardy-Weinberg demo", 60, hardy_weinberg},
      {8, "LLN convergence", 300, lln_convergence},
      {9, "transition-matrix oracle", 0, transition_oracle},
      {10, "independence suite", 0, independence_suite},
      {11, "cross-sectional product property", 0, cross_section},
      {12, "determinism across runs and thread counts", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result = {false, fmt::format("exception: {}", e.what())};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      result.pass = false;
      result.detail += fmt::format("; over the {:.0f} s limit", c.limit_seconds);
    }
    failed += !result.pass;
    std::cout << fmt::format("criterion {:2d} {} {} ({}; {:.2f} s)\n", c.id, result.pass ? "PASS" : "FAIL",
                             c.title, result.detail, seconds)
              << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
