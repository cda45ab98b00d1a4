#include "matchsim/cli_runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "matchsim/analytic_engine.hpp"
#include "matchsim/dynamics_engine.hpp"
#include "matchsim/exact_oracle.hpp"
#include "matchsim/stats_harness.hpp"

#ifndef MATCHSIM_GOLDEN_DIR
#define MATCHSIM_GOLDEN_DIR ""
#endif

namespace matchsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParseError, fmt::format("field '{}': {}", field, what));
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                 !v.is_number_unsigned())) {
    field_error(field, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> as_vector(const json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], fmt::format("{}[{}]", field, i + 1)));
  }
  return out;
}

std::vector<std::vector<double>> as_matrix(const json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_vector(v[i], fmt::format("{}[{}]", field, i + 1)));
  }
  return out;
}

constexpr const char* kModelKeys[] = {"types", "p0", "b", "q", "nu"};

ModelParams params_from_json(const json& doc) {
  ModelParams p;
  const json* types = find(doc, "types");
  if (types == nullptr || !types->is_object() || find(*types, "K") == nullptr) {
    field_error("types.K", "missing");
  }
  p.types.count = as_count((*types)["K"], "types.K");
  for (const char* key : kModelKeys) {
    if (find(doc, key) == nullptr) field_error(key, "missing");
  }
  p.p0.weights = as_vector(doc["p0"], "p0");
  p.b.rows = as_matrix(doc["b"], "b");
  p.q.q = as_vector(doc["q"], "q");
  const json& nu = doc["nu"];
  if (!nu.is_array()) field_error("nu", "expected K rows of K distributions");
  for (std::size_t k = 0; k < nu.size(); ++k) {
    const auto row = as_matrix(nu[k], fmt::format("nu[{}]", k + 1));
    std::vector<TypeDistribution> dists;
    for (const auto& d : row) dists.push_back(TypeDistribution{d});
    p.nu.nu.push_back(std::move(dists));
  }
  return p;
}

void check_config(const RunConfig& c) {
  std::vector<Violation> bad;
  if (c.params) bad = check_params(*c.params);
  if (c.agents < 1) bad.push_back({ErrorCode::kOutOfRange, "run.agents", "must be at least 1"});
  if (c.replications < 1) {
    bad.push_back({ErrorCode::kOutOfRange, "run.replications", "must be at least 1"});
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    bad.push_back({ErrorCode::kOutOfRange, "options.alpha", "must lie in (0, 1)"});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

void write_output(const RunConfig& config, std::ostream& out, const std::string& text,
                  const std::optional<std::string>& path_override = std::nullopt) {
  const auto& path = path_override ? path_override : config.output_path;
  if (!path) {
    out << text;
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kInvalidArgument, fmt::format("cannot write {}", *path));
  file << text;
}

std::string format_freq(double v) { return fmt::format("{:.12f}", v); }

const ModelParams& require_params(const RunConfig& config, std::string_view command) {
  if (!config.params) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} needs model parameters (--config PATH)", command));
  }
  return *config.params;
}

constexpr std::string_view kCsvHeader = "period,type,empirical_freq,analytic_freq,replication\n";

// ---- simulate ------------------------------------------------------------

std::string trace_csv(const std::vector<SimulationRun>& runs) {
  std::string csv = "replication,period,agent,h,partner,g,alpha\n";
  auto label = [](std::uint32_t v, std::uint32_t none) {
    return v == none ? std::string("J") : std::to_string(v + 1);
  };
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t n = 0; n < runs[r].traces.size(); ++n) {
      const PeriodTrace& tr = runs[r].traces[n];
      for (std::size_t i = 0; i < tr.h.size(); ++i) {
        csv += fmt::format("{},{},{},{},{},{},{}\n", r + 1, n + 1, i + 1, tr.h[i] + 1,
                           label(tr.matching.partner[i], kUnmatched),
                           label(tr.g.partner_type[i], kNoPartner), tr.alpha[i] + 1);
      }
    }
  }
  return csv;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  const ModelParams& params = require_params(config, "simulate");
  RunOptions options;
  options.record_traces = config.trace_path.has_value();
  const auto runs = run_replications(params, config.agents, config.periods, config.seed,
                                     config.replications, options);
  const auto analytic = evolve(params, config.periods);
  const std::size_t k_count = params.type_count();

  std::string csv(kCsvHeader);
  std::vector<std::vector<double>> mean(config.periods + 1, std::vector<double>(k_count, 0.0));
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t n = 0; n <= config.periods; ++n) {
      for (std::size_t k = 0; k < k_count; ++k) {
        const double emp = runs[r].empirical[n][k];
        mean[n][k] += emp;
        csv += fmt::format("{},{},{},{},{}\n", n, k + 1, format_freq(emp),
                           format_freq(analytic[n][k]), r + 1);
      }
    }
  }
  for (std::size_t n = 0; n <= config.periods; ++n) {
    for (std::size_t k = 0; k < k_count; ++k) {
      csv += fmt::format("{},{},{},{},mean\n", n, k + 1,
                         format_freq(mean[n][k] / static_cast<double>(runs.size())),
                         format_freq(analytic[n][k]));
    }
  }
  write_output(config, out, csv);
  if (config.trace_path) write_output(config, out, trace_csv(runs), config.trace_path);
  return kExitOk;
}

// ---- evolve / steady-state -------------------------------------------------

int cmd_evolve(const RunConfig& config, std::ostream& out) {
  const ModelParams& params = require_params(config, "evolve");
  const auto path = evolve(params, config.periods);
  std::string csv(kCsvHeader);
  for (std::size_t n = 0; n < path.size(); ++n) {
    for (std::size_t k = 0; k < path[n].size(); ++k) {
      csv += fmt::format("{},{},,{},\n", n, k + 1, format_freq(path[n][k]));
    }
  }
  write_output(config, out, csv);
  return kExitOk;
}

int cmd_steady_state(const RunConfig& config, std::ostream& out) {
  const ModelParams& params = require_params(config, "steady-state");
  const TypeDistribution start = config.start.value_or(params.p0);
  json doc;
  int code = kExitOk;
  try {
    const SteadyState s = steady_state(params, start, config.tol, config.max_iter);
    doc = {{"converged", true},
           {"distribution", s.distribution.weights},
           {"iterations", s.iterations},
           {"residual", s.residual}};
  } catch (const NonConvergence& e) {
    doc = {{"converged", false},
           {"distribution", e.last_iterate().weights},
           {"iterations", config.max_iter},
           {"residual", e.residual()}};
    code = kExitTestFailed;
  }
  write_output(config, out, doc.dump(2) + "\n");
  return code;
}

// ---- verify-oracle -------------------------------------------------------

struct OracleFile {
  std::string name;
  std::vector<GoldenRecord> records;
};

std::string join_agents(std::span<const std::size_t> v) { return fmt::format("{}", fmt::join(v, ",")); }

std::vector<OracleFile> build_oracle_files(std::size_t max_n, std::vector<std::string>& failures) {
  std::vector<OracleFile> files;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  OracleFile counts{"full_matchings.tsv", {}};
  OracleFile pairs{"pair_probabilities.tsv", {}};
  OracleFile joints{"joint_probabilities.tsv", {}};
  OracleFile sets{"set_probabilities.tsv", {}};
  for (std::size_t n = 2; n <= max_n; n += 2) {
    const auto all = enumerate_full_matchings(n);
    check(BigInt(all.size()) == perfect_matching_count(n), fmt::format("count N={}", n));
    counts.records.push_back({fmt::format("N={}", n), "matchings", ExactProbability(all.size())});

    const ExactProbability pair_expected(BigInt(1), BigInt(n - 1));
    for (AgentId i = 0; i < n; ++i) {
      for (AgentId j = i + 1; j < n; ++j) {
        const auto p = exact_pair_probability(n, i, j);
        check(p == pair_expected, fmt::format("pair N={} i={} j={}", n, i + 1, j + 1));
        pairs.records.push_back(
            {fmt::format("N={} i={} j={}", n, i + 1, j + 1), "partner(i)=j", p});
      }
    }

    // Joint table: agents 1 and 2 against every target pair.
    if (n >= 4) {
      for (AgentId a = 0; a < n; ++a) {
        for (AgentId b = 0; b < n; ++b) {
          joints.records.push_back({fmt::format("N={} i=1 j=2 i'={} j'={}", n, a + 1, b + 1),
                                    "partner(i)=i' and partner(j)=j'",
                                    exact_joint_probability(n, 0, 1, a, b)});
        }
      }
    }

    for (std::size_t size = 0; size <= std::min<std::size_t>(n, 4); ++size) {
      std::vector<AgentId> outside, inside;
      for (AgentId a = 0; a < size; ++a) {
        outside.push_back(a + 1);
        inside.push_back(a);
      }
      if (size < n) {
        sets.records.push_back({fmt::format("N={} i=1 C={{2..{}}}", n, size + 1), "partner(i) in C",
                                exact_set_probability(n, 0, outside)});
      }
      if (size > 0) {
        sets.records.push_back({fmt::format("N={} i=1 C={{1..{}}}", n, size), "partner(i) in C",
                                exact_set_probability(n, 0, inside)});
      }
    }
  }
  files.push_back(std::move(counts));
  files.push_back(std::move(pairs));
  files.push_back(std::move(joints));
  files.push_back(std::move(sets));

  OracleFile partial{"partial_space.tsv", {}};
  const std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> cases = {
      {{2, 2}, {2, 2}}, {{2, 2}, {0, 0}}, {{2, 2, 2}, {1, 1, 0}}, {{4, 4}, {1, 1}},
      {{4, 4}, {0, 0}}, {{3, 3, 2}, {1, 1, 0}}};
  for (const auto& [big_m, small_m] : cases) {
    std::size_t total = 0;
    for (auto c : big_m) total += c;
    if (total > max_n) continue;
    const auto law = enumerate_partial_space(big_m, small_m);
    const std::string input = fmt::format("M={} m={}", join_agents(big_m), join_agents(small_m));
    auto outcome_label = [&](std::size_t o) {
      return o == law.no_partner_outcome() ? std::string("J") : std::to_string(o + 1);
    };
    for (std::size_t i = 0; i < law.agents(); ++i) {
      for (std::size_t o = 0; o < law.outcome_count(); ++o) {
        partial.records.push_back({fmt::format("{} i={}", input, i + 1),
                                   fmt::format("g_i={}", outcome_label(o)), law.marginal(i, o)});
      }
    }
    for (std::size_t i = 0; i < law.agents(); ++i) {
      for (std::size_t j = i + 1; j < law.agents(); ++j) {
        for (std::size_t c = 0; c < law.outcome_count(); ++c) {
          for (std::size_t d = 0; d < law.outcome_count(); ++d) {
            partial.records.push_back(
                {fmt::format("{} i={} j={}", input, i + 1, j + 1),
                 fmt::format("g_i={},g_j={}", outcome_label(c), outcome_label(d)),
                 law.joint(i, j, c, d)});
          }
        }
      }
    }
    partial.records.push_back({input, "sample_points", ExactProbability(law.sample_points())});
    partial.records.push_back({input, "independence_defect", finite_independence_defect(law)});
  }
  files.push_back(std::move(partial));
  return files;
}

int cmd_verify_oracle(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.max_n < 2 || config.max_n > kMaxFullEnumeration) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("--max-n must lie in [2, {}]", kMaxFullEnumeration));
  }
  std::vector<std::string> failures;
  const auto files = build_oracle_files(config.max_n, failures);
  for (const auto& f : failures) err << "closed form mismatch: " << f << "\n";

  const fs::path out_dir = config.output_path.value_or("oracle-out");
  fs::create_directories(out_dir);
  std::optional<fs::path> golden;
  if (config.golden_dir) {
    golden = *config.golden_dir;
  } else if (const fs::path builtin =
                 fs::path(MATCHSIM_GOLDEN_DIR) / fmt::format("max-n-{}", config.max_n);
             !std::string(MATCHSIM_GOLDEN_DIR).empty() && fs::is_directory(builtin)) {
    golden = builtin;
  }

  std::size_t mismatched = 0;
  for (const auto& f : files) {
    const std::string text = format_golden(f.records);
    std::ofstream(out_dir / f.name, std::ios::binary) << text;
    std::string status = "written";
    if (golden) {
      std::ifstream in(*golden / f.name, std::ios::binary);
      std::stringstream committed;
      committed << in.rdbuf();
      const bool same = in.good() || in.eof() ? committed.str() == text : false;
      status = same ? "matches golden" : "DIFFERS from golden";
      mismatched += !same;
    }
    out << fmt::format("{}\t{} records\t{}\n", f.name, f.records.size(), status);
  }
  return failures.empty() && mismatched == 0 ? kExitOk : kExitTestFailed;
}

// ---- statistical tests ---------------------------------------------------

nlohmann::ordered_json report_json(const TestReport& r) {
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.summary) summary[k] = v;
  return {{"test", r.test},
          {"digest", r.digest},
          {"status", std::string(to_string(r.status))},
          {"records", r.records.size()},
          {"summary", summary}};
}

int emit_reports(const RunConfig& config, std::ostream& out, const std::vector<TestReport>& reports,
                 bool passed) {
  std::string tsv;
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    const std::string t = report_tsv(r);
    tsv += tsv.empty() ? t : t.substr(t.find('\n') + 1);
    doc.push_back(report_json(r));
  }
  const std::string summary = doc.dump(2) + "\n";
  if (config.output_path) {
    write_output(config, out, tsv);
    write_output(config, out, summary, *config.output_path + ".json");
  } else {
    out << tsv << "\n" << summary;
  }
  return passed ? kExitOk : kExitTestFailed;
}

bool not_failed(const TestReport& r) { return r.status != TestStatus::kFail; }

int cmd_test_independence(const RunConfig& config, std::ostream& out) {
  const ModelParams& params = require_params(config, "test-independence");
  if (config.planted) {
    const auto report = pairwise_independence_test(params, config.agents, config.replications,
                                                    config.pairs, config.alpha, config.seed,
                                                    PairingMode::kPlantedPair);
    const bool powerful = report.summary_value("rejection_fraction") >= 0.9;
    return emit_reports(config, out, {report}, powerful);
  }
  const auto pairwise = pairwise_independence_test(params, config.agents, config.replications,
                                                   config.pairs, config.alpha, config.seed);
  const auto marginal = marginal_law_test(params, config.agents, config.replications, config.seed);
  return emit_reports(config, out, {pairwise, marginal}, not_failed(pairwise) && not_failed(marginal));
}

int cmd_test_markov_ci(const RunConfig& config, std::ostream& out) {
  const ModelParams& params = require_params(config, "test-markov-ci");
  const auto report = markov_ci_test(params, config.agents, config.periods, config.replications,
                                     config.pairs, config.alpha, config.seed);
  return emit_reports(config, out, {report}, not_failed(report));
}

int cmd_test_cross_section(const RunConfig& config, std::ostream& out) {
  const auto report = cross_section_product_test(config.agents, config.replications,
                                                 config.subset_pairs, config.seed);
  return emit_reports(config, out, {report}, not_failed(report));
}

// ---- demo-hw -------------------------------------------------------------

int cmd_demo_hw(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const ModelParams params = hardy_weinberg_params(0.6);
  const auto analytic = evolve(params, config.periods);
  RunOptions options;
  options.record_traces = false;
  const auto runs = run_replications(params, config.agents, config.periods, config.seed,
                                     config.replications, options);
  std::string csv(kCsvHeader);
  double worst_empirical = 0.0;
  double worst_analytic = 0.0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t n = 0; n <= config.periods; ++n) {
      for (std::size_t k = 0; k < 2; ++k) {
        csv += fmt::format("{},{},{},{},{}\n", n, k + 1, format_freq(runs[r].empirical[n][k]),
                           format_freq(analytic[n][k]), r + 1);
      }
      worst_empirical = std::max(worst_empirical, std::abs(runs[r].empirical[n][0] - 0.6));
      worst_analytic = std::max(worst_analytic, std::abs(analytic[n][0] - 0.6));
    }
  }
  write_output(config, out, csv);
  const bool ok = worst_empirical <= 0.01 && worst_analytic <= 1e-12;
  err << fmt::format("demo-hw: max |empirical - 0.6| = {:.6f}, max |analytic - 0.6| = {:.3e}: {}\n",
                     worst_empirical, worst_analytic, ok ? "pass" : "FAIL");
  return ok ? kExitOk : kExitTestFailed;
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");

  RunConfig c;
  // verify-oracle and test-cross-section need no model.
  const bool has_model = std::any_of(std::begin(kModelKeys), std::end(kModelKeys),
                                     [&](const char* key) { return doc.contains(key); });
  if (has_model) {
    try {
      c.params = params_from_json(doc);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, e.what());
    }
    validate_params(*c.params);
  }
  if (const json* run = find(doc, "run")) {
    if (!run->is_object()) field_error("run", "expected an object");
    if (const json* v = find(*run, "agents")) c.agents = as_count(*v, "run.agents");
    if (const json* v = find(*run, "periods")) c.periods = as_count(*v, "run.periods");
    if (const json* v = find(*run, "seed")) c.seed = as_count(*v, "run.seed");
    if (const json* v = find(*run, "replications")) c.replications = as_count(*v, "run.replications");
  }
  if (const json* opt = find(doc, "options")) {
    if (!opt->is_object()) field_error("options", "expected an object");
    if (const json* v = find(*opt, "max_n")) c.max_n = as_count(*v, "options.max_n");
    if (const json* v = find(*opt, "pairs")) c.pairs = as_count(*v, "options.pairs");
    if (const json* v = find(*opt, "alpha")) c.alpha = as_number(*v, "options.alpha");
    if (const json* v = find(*opt, "subset_pairs")) {
      c.subset_pairs = as_count(*v, "options.subset_pairs");
    }
    if (const json* v = find(*opt, "tol")) c.tol = as_number(*v, "options.tol");
    if (const json* v = find(*opt, "max_iter")) c.max_iter = as_count(*v, "options.max_iter");
    if (const json* v = find(*opt, "start")) c.start = TypeDistribution{as_vector(*v, "options.start")};
    if (const json* v = find(*opt, "planted")) {
      if (!v->is_boolean()) field_error("options.planted", "expected true or false");
      c.planted = v->get<bool>();
    }
  }
  return c;
}

RunConfig parse_config(const std::optional<std::string>& path, const CliOverrides& flags) {
  RunConfig c;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kParseError, fmt::format("cannot read config {}", *path));
    std::stringstream text;
    text << in.rdbuf();
    try {
      c = parse_config_text(text.str());
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, fmt::format("{}: {}", *path, e.what()));
    }
  }
  if (flags.agents) c.agents = *flags.agents;
  if (flags.periods) c.periods = *flags.periods;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.replications) c.replications = *flags.replications;
  if (flags.output_path) c.output_path = flags.output_path;
  if (flags.max_n) c.max_n = *flags.max_n;
  if (flags.golden_dir) c.golden_dir = flags.golden_dir;
  if (flags.pairs) c.pairs = *flags.pairs;
  if (flags.alpha) c.alpha = *flags.alpha;
  if (flags.planted) c.planted = *flags.planted;
  if (flags.subset_pairs) c.subset_pairs = *flags.subset_pairs;
  if (flags.trace_path) c.trace_path = flags.trace_path;
  check_config(c);
  return c;
}

int run_subcommand(std::string_view name, const RunConfig& config, std::ostream& out,
                   std::ostream& err) {
  try {
    if (name == "simulate") return cmd_simulate(config, out);
    if (name == "evolve") return cmd_evolve(config, out);
    if (name == "steady-state") return cmd_steady_state(config, out);
    if (name == "verify-oracle") return cmd_verify_oracle(config, out, err);
    if (name == "test-independence") return cmd_test_independence(config, out);
    if (name == "test-markov-ci") return cmd_test_markov_ci(config, out);
    if (name == "test-cross-section") return cmd_test_cross_section(config, out);
    if (name == "demo-hw") return cmd_demo_hw(config, out, err);
    err << "unknown subcommand: " << name << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-population independent random matching: simulation, exact oracle, "
               "statistical checks"};
  app.require_subcommand(1, 1);

  std::optional<std::string> config_path;
  CliOverrides flags;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--agents", flags.agents, "population size N");
  app.add_option("--periods", flags.periods, "number of periods T");
  app.add_option("--seed", flags.seed, "64-bit seed (default 0)");
  app.add_option("--replications", flags.replications,
                 "replications, or matching draws for the test subcommands (default 1)");
  app.add_option("--out", flags.output_path, "output file (directory for verify-oracle)");
  app.add_option("--max-n", flags.max_n, "largest N enumerated by verify-oracle (default 8)");
  app.add_option("--golden", flags.golden_dir, "directory of committed golden files");
  app.add_option("--pairs", flags.pairs, "sampled agent pairs (default 50)");
  app.add_option("--alpha", flags.alpha, "test level (default 0.01)");
  app.add_option("--subset-pairs", flags.subset_pairs, "subset pairs for test-cross-section");
  app.add_option("--traces", flags.trace_path, "simulate: write per-agent traces here");
  app.add_flag("--planted", flags.planted, "test-independence: plant a correlated pair");
  app.fallthrough();
  for (auto name : kSubcommands) app.add_subcommand(std::string(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    // demo-hw has built-in parameters; only the run sizes are configurable.
    if (name == "demo-hw" && !config_path && !flags.agents) flags.agents = 100'000;
    config = parse_config(config_path, flags);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  return run_subcommand(name, config, out, err);
}

}  // namespace matchsim
