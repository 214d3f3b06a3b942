#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chronos/io.hpp"
#include "chronos/problems.hpp"
#include "chronos/sampler.hpp"
#include "chronos/simulator.hpp"
#include "chronos/solver.hpp"

namespace py = pybind11;
using namespace chronos;

namespace {

Belief to_belief(const std::vector<double>& p) { return Belief(p); }

std::vector<double> to_list(const Belief& b) { return {b.values().begin(), b.values().end()}; }

}  // namespace

PYBIND11_MODULE(_chronos, m) {
  m.doc() = "Point-based planning for partially observable semi-Markov decision processes";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InitializationError>(m, "InitializationError", PyExc_RuntimeError);
  py::register_exception<ImpossibleEvidence>(m, "ImpossibleEvidence", PyExc_ValueError);

  py::class_<PosmdpModel>(m, "Model")
      .def_property_readonly("name", &PosmdpModel::name)
      .def_property_readonly("states", [](const PosmdpModel& x) { return x.data().states; })
      .def_property_readonly("actions", [](const PosmdpModel& x) { return x.data().actions; })
      .def_property_readonly("observations", [](const PosmdpModel& x) { return x.data().observations; })
      .def_property_readonly("beta", &PosmdpModel::beta)
      .def_property_readonly("initial_belief",
                             [](const PosmdpModel& x) {
                               return std::vector<double>(x.initial_belief().begin(), x.initial_belief().end());
                             })
      .def("transition", &PosmdpModel::transition)
      .def("discount", &PosmdpModel::discount)
      .def("to_json", [](const PosmdpModel& x) { return dump_model(x); })
      .def("hash", [](const PosmdpModel& x) { return model_hash(x); })
      .def("validate", [](const PosmdpModel& x) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : validate(x).violations) out.emplace_back(v.code, v.message);
        return out;
      });

  m.def("bus_problem", [] { return build_bus_problem(); });
  m.def("maintenance_problem", &build_maintenance_problem, py::arg("observation_bins") = 100);
  m.def("load_model", [](const std::string& text) { return load_model(text); }, py::arg("text"));
  m.def("stage_rewards", [](const PosmdpModel& x) {
    const StageRewardTable r = compute_stage_reward(x);
    std::vector<std::vector<double>> out(r.n_states, std::vector<double>(r.n_actions));
    for (std::size_t s = 0; s < r.n_states; ++s)
      for (std::size_t a = 0; a < r.n_actions; ++a) out[s][a] = r(s, a);
    return out;
  });

  m.def("update_with_time",
        [](const PosmdpModel& x, const std::vector<double>& xi, std::size_t a, double tau, std::size_t o) {
          return to_list(update_with_time(x, to_belief(xi), a, tau, o));
        });
  m.def("update_without_time", [](const PosmdpModel& x, const std::vector<double>& xi, std::size_t a,
                                  std::size_t o) { return to_list(update_without_time(x, to_belief(xi), a, o)); });

  py::class_<SampleBank>(m, "SampleBank")
      .def_property_readonly("beliefs",
                             [](const SampleBank& b) {
                               std::vector<std::vector<double>> out;
                               for (const auto& xi : b.beliefs) out.push_back(to_list(xi));
                               return out;
                             })
      .def_property_readonly("times",
                             [](const SampleBank& b) {
                               std::vector<double> out;
                               for (const auto& t : b.times) out.push_back(t.tau);
                               return out;
                             })
      .def_readonly("weights", &SampleBank::weights)
      .def_readonly("seed", &SampleBank::seed)
      .def("add_beliefs", [](SampleBank& b, const std::vector<std::vector<double>>& extra) {
        std::vector<Belief> beliefs;
        for (const auto& p : extra) beliefs.push_back(to_belief(p));
        add_beliefs(b, beliefs);
      });
  m.def("collect", &collect, py::arg("model"), py::arg("beliefs"), py::arg("seed") = kDefaultSeed);

  py::class_<ValueFunction>(m, "ValueFunction")
      .def_property_readonly("vectors",
                             [](const ValueFunction& v) {
                               std::vector<std::pair<std::size_t, std::vector<double>>> out;
                               for (const auto& a : v.vectors) out.emplace_back(a.action, a.values);
                               return out;
                             })
      .def("value_at", [](const ValueFunction& v, const std::vector<double>& xi) { return v.value_at(to_belief(xi)); })
      .def("action_at",
           [](const ValueFunction& v, const std::vector<double>& xi) { return v.action_at(to_belief(xi)); })
      .def("__len__", [](const ValueFunction& v) { return v.vectors.size(); });

  m.def("constant_value_function", &constant_value_function);
  m.def("initial_value_function", &initial_value_function);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("vectors", &IterationRecord::vectors)
      .def_readonly("backups", &IterationRecord::backups)
      .def_readonly("residual", &IterationRecord::residual)
      .def_readonly("min_improvement", &IterationRecord::min_improvement)
      .def_readonly("seconds", &IterationRecord::seconds);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("value", &SolveResult::value)
      .def_readonly("trace", &SolveResult::trace)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("epsilon", &SolveResult::epsilon);

  m.def(
      "solve",
      [](const PosmdpModel& x, const SampleBank& bank, const ValueFunction& v0, std::optional<double> epsilon,
         std::size_t max_iters, std::uint64_t seed) {
        SolveOptions opts;
        opts.epsilon = epsilon;
        opts.max_iters = max_iters;
        opts.seed = seed;
        py::gil_scoped_release release;
        return solve(x, bank, v0, opts);
      },
      py::arg("model"), py::arg("bank"), py::arg("v0"), py::arg("epsilon") = py::none(), py::arg("max_iters") = 500,
      py::arg("seed") = kDefaultSeed);

  m.def(
      "evaluate",
      [](const PosmdpModel& x, const ValueFunction& v, std::size_t episodes, std::size_t epochs, std::uint64_t seed) {
        const Estimate e = evaluate(x, v, episodes, epochs, seed);
        return py::make_tuple(e.mean, e.standard_error ? py::cast(*e.standard_error) : py::none());
      },
      py::arg("model"), py::arg("value"), py::arg("episodes"), py::arg("epochs") = 200,
      py::arg("seed") = kDefaultSeed);
}
