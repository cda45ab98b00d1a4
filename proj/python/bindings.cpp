#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "matchsim/analytic_engine.hpp"
#include "matchsim/cli_runner.hpp"
#include "matchsim/dynamics_engine.hpp"
#include "matchsim/exact_oracle.hpp"
#include "matchsim/matching_sampler.hpp"
#include "matchsim/stats_harness.hpp"

namespace py = pybind11;
using namespace matchsim;

namespace {

using Rational = std::pair<std::string, std::string>;

Rational as_pair(const ExactProbability& q) {
  return {boost::multiprecision::numerator(q).str(), boost::multiprecision::denominator(q).str()};
}

ModelParams make_params(std::vector<double> p0, std::vector<std::vector<double>> b,
                        std::vector<double> q, std::vector<std::vector<std::vector<double>>> nu) {
  ModelParams p;
  p.types.count = p0.size();
  p.p0.weights = std::move(p0);
  p.b.rows = std::move(b);
  p.q.q = std::move(q);
  for (auto& row : nu) {
    std::vector<TypeDistribution> dists;
    for (auto& d : row) dists.push_back(TypeDistribution{std::move(d)});
    p.nu.nu.push_back(std::move(dists));
  }
  validate_params(p);
  return p;
}

std::vector<std::vector<std::vector<double>>> kernel_lists(const ModelParams& p) {
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& row : p.nu.nu) {
    out.emplace_back();
    for (const auto& d : row) out.back().push_back(d.weights);
  }
  return out;
}

std::vector<std::vector<double>> weights(const std::vector<TypeDistribution>& path) {
  std::vector<std::vector<double>> out;
  for (const auto& p : path) out.push_back(p.weights);
  return out;
}

py::dict report_dict(const TestReport& r) {
  py::list records;
  for (const auto& rec : r.records) {
    py::dict d;
    d["name"] = rec.name;
    d["statistic"] = rec.statistic;
    d["dof"] = rec.dof;
    d["p_value"] = rec.p_value;
    d["status"] = std::string(to_string(rec.status));
    records.append(d);
  }
  py::dict summary;
  for (const auto& [k, v] : r.summary) summary[py::str(k)] = v;
  py::dict out;
  out["test"] = r.test;
  out["digest"] = r.digest;
  out["status"] = std::string(to_string(r.status));
  out["summary"] = summary;
  out["records"] = records;
  out["tsv"] = report_tsv(r);
  return out;
}

Population to_population(std::vector<TypeId> types) { return Population{std::move(types)}; }

}  // namespace

PYBIND11_MODULE(_matchsim, m) {
  m.doc() = "Finite-population random matching: samplers, exact oracle, dynamics and tests.";

  py::register_exception<Error>(m, "MatchsimError", PyExc_ValueError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init(&make_params), py::arg("p0"), py::arg("b"), py::arg("q"), py::arg("nu"))
      .def_property_readonly("K", &ModelParams::type_count)
      .def_property_readonly("p0", [](const ModelParams& p) { return p.p0.weights; })
      .def_property_readonly("b", [](const ModelParams& p) { return p.b.rows; })
      .def_property_readonly("q", [](const ModelParams& p) { return p.q.q; })
      .def_property_readonly("nu", &kernel_lists)
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; })
      .def("__repr__", [](const ModelParams& p) { return "<ModelParams K=" + std::to_string(p.type_count()) + ">"; });

  m.def("hardy_weinberg_params", &hardy_weinberg_params, py::arg("allele_a_share") = 0.6);
  m.def("empirical_distribution",
        [](std::vector<TypeId> types, std::size_t k) {
          return empirical_distribution(to_population(std::move(types)), {k}).weights;
        },
        py::arg("types"), py::arg("K"));

  // Samplers. Unmatched agents are reported as None.
  auto partners = [](const Matching& mt) {
    py::list out;
    for (AgentId a : mt.partner) out.append(a == kUnmatched ? py::object(py::none()) : py::int_(a));
    return out;
  };
  m.def("sample_full_matching",
        [partners](std::size_t n, std::uint64_t seed) {
          Rng rng(seed);
          return partners(sample_full_matching(n, rng));
        },
        py::arg("n"), py::arg("seed"));
  m.def("plan_partial_matching",
        [](std::vector<TypeId> types, std::vector<double> q) {
          const auto plan = plan_partial_matching(to_population(std::move(types)), {std::move(q)});
          return py::make_tuple(plan.counts, plan.unmatched);
        },
        py::arg("types"), py::arg("q"));
  m.def("sample_partial_matching",
        [partners](std::vector<TypeId> types, std::vector<double> q, std::uint64_t seed) {
          const Population pop = to_population(std::move(types));
          Rng rng(seed);
          return partners(sample_partial_matching(pop, plan_partial_matching(pop, {std::move(q)}), rng));
        },
        py::arg("types"), py::arg("q"), py::arg("seed"));

  // Exact oracle; rationals come back as (numerator, denominator) strings.
  m.def("perfect_matching_count", [](std::size_t n) { return perfect_matching_count(n).str(); });
  m.def("enumerate_full_matchings", [](std::size_t n) {
    std::vector<std::vector<AgentId>> out;
    for (const auto& mt : enumerate_full_matchings(n)) out.push_back(mt.partner);
    return out;
  });
  m.def("exact_pair_probability",
        [](std::size_t n, AgentId i, AgentId j) { return as_pair(exact_pair_probability(n, i, j)); });
  m.def("exact_joint_probability", [](std::size_t n, AgentId i, AgentId j, AgentId a, AgentId b) {
    return as_pair(exact_joint_probability(n, i, j, a, b));
  });
  m.def("exact_set_probability", [](std::size_t n, AgentId i, std::vector<AgentId> c) {
    return as_pair(exact_set_probability(n, i, c));
  });
  m.def("partial_space",
        [](std::vector<std::size_t> counts, std::vector<std::size_t> unmatched) {
          const auto law = enumerate_partial_space(counts, unmatched);
          std::vector<std::vector<Rational>> marginals(law.agents());
          for (std::size_t i = 0; i < law.agents(); ++i)
            for (std::size_t o = 0; o < law.outcome_count(); ++o) marginals[i].push_back(as_pair(law.marginal(i, o)));
          py::dict out;
          out["sample_points"] = law.sample_points();
          out["marginals"] = marginals;
          out["defect"] = as_pair(finite_independence_defect(law));
          return out;
        },
        py::arg("counts"), py::arg("unmatched"));

  // Analytic engine.
  m.def("evolve", [](const ModelParams& p, std::size_t periods) { return weights(evolve(p, periods)); },
        py::arg("params"), py::arg("periods"));
  m.def("period_transition",
        [](const ModelParams& p, std::vector<double> dist) { return period_transition({std::move(dist)}, p).gamma; },
        py::arg("params"), py::arg("p"));
  m.def("steady_state",
        [](const ModelParams& p, std::vector<double> start, double tol, std::size_t max_iter) {
          const auto s = steady_state(p, {std::move(start)}, tol, max_iter);
          return py::make_tuple(s.distribution.weights, s.iterations, s.residual);
        },
        py::arg("params"), py::arg("start"), py::arg("tol") = 1e-12, py::arg("max_iter") = 1'000'000);

  // Simulation: empirical distributions per period, per replication.
  m.def("simulate",
        [](const ModelParams& p, std::size_t agents, std::size_t periods, std::uint64_t seed,
           std::size_t replications) {
          std::vector<SimulationRun> runs;
          {
            py::gil_scoped_release release;
            runs = run_replications(p, agents, periods, seed, replications, {.record_traces = false});
          }
          std::vector<std::vector<std::vector<double>>> out;
          for (const auto& r : runs) out.push_back(weights(r.empirical));
          return out;
        },
        py::arg("params"), py::arg("agents"), py::arg("periods"), py::arg("seed") = 0,
        py::arg("replications") = 1);

  // Statistical tests.
  m.def("pairwise_independence_test",
        [](const ModelParams& p, std::size_t agents, std::size_t draws, std::size_t pairs, double alpha,
           std::uint64_t seed, bool planted) {
          TestReport r;
          {
            py::gil_scoped_release release;
            r = pairwise_independence_test(p, agents, draws, pairs, alpha, seed,
                                           planted ? PairingMode::kPlantedPair : PairingMode::kUniform);
          }
          return report_dict(r);
        },
        py::arg("params"), py::arg("agents"), py::arg("draws"), py::arg("pairs") = 50,
        py::arg("alpha") = 0.01, py::arg("seed") = 0, py::arg("planted") = false);
  m.def("marginal_law_test",
        [](const ModelParams& p, std::size_t agents, std::size_t draws, std::uint64_t seed) {
          return report_dict(marginal_law_test(p, agents, draws, seed));
        },
        py::arg("params"), py::arg("agents"), py::arg("draws"), py::arg("seed") = 0);
  m.def("cross_section_product_test",
        [](std::size_t agents, std::size_t draws, std::size_t subset_pairs, std::uint64_t seed) {
          return report_dict(cross_section_product_test(agents, draws, subset_pairs, seed));
        },
        py::arg("agents"), py::arg("draws"), py::arg("subset_pairs") = 5, py::arg("seed") = 0);
  m.def("markov_ci_test",
        [](const ModelParams& p, std::size_t agents, std::size_t periods, std::size_t replications,
           std::size_t pairs, double alpha, std::uint64_t seed) {
          TestReport r;
          {
            py::gil_scoped_release release;
            r = markov_ci_test(p, agents, periods, replications, pairs, alpha, seed);
          }
          return report_dict(r);
        },
        py::arg("params"), py::arg("agents"), py::arg("periods"), py::arg("replications"),
        py::arg("pairs") = 20, py::arg("alpha") = 0.01, py::arg("seed") = 0);

  m.def("run_cli",
        [](std::vector<std::string> args) {
          args.insert(args.begin(), "matchsim");
          std::vector<const char*> argv;
          for (const auto& a : args) argv.push_back(a.c_str());
          std::ostringstream out, err;
          const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
