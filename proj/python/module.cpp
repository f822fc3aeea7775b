#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "dyncq/analysis.hpp"
#include "dyncq/engine.hpp"
#include "dyncq/oracle.hpp"

namespace py = pybind11;

PYBIND11_MODULE(dyncq, m) {
  m.doc() =
      "Incremental conjunctive-query evaluation: single-tuple updates in "
      "query-bounded time, counting from a register, constant-delay results.";

  py::register_exception<dyncq::ParseError>(m, "QueryParseError", PyExc_ValueError);
  py::register_exception<dyncq::CoreNotQHierarchical>(m, "CoreNotQHierarchicalError",
                                                      PyExc_ValueError);

  py::class_<dyncq::Query>(m, "Query")
      .def(py::init([](const std::string& text) { return dyncq::parse_query(text); }),
           py::arg("text"))
      .def_property_readonly("head", &dyncq::Query::head)
      .def_property_readonly("variables", &dyncq::Query::variables)
      .def("__str__", [](const dyncq::Query& q) { return dyncq::serialize_query(q); })
      .def("__repr__", [](const dyncq::Query& q) {
        return "Query(\"" + dyncq::serialize_query(q) + "\")";
      });

  m.def(
      "parse_query", [](const std::string& text) { return dyncq::parse_query(text); },
      py::arg("text"));

  py::class_<dyncq::Classification>(m, "Classification")
      .def_readonly("q_hierarchical", &dyncq::Classification::q_hierarchical)
      .def_readonly("core_q_hierarchical", &dyncq::Classification::core_q_hierarchical)
      .def_property_readonly("core",
                             [](const dyncq::Classification& c) { return c.core; })
      .def_property_readonly("witness",
                             [](const dyncq::Classification& c) -> py::object {
                               if (!c.witness) return py::none();
                               return py::make_tuple(c.witness->var_a, c.witness->var_b,
                                                     c.witness->condition);
                             })
      .def_property_readonly("boolean",
                             [](const dyncq::Classification& c) {
                               return std::string(dyncq::to_string(c.boolean_verdict));
                             })
      .def_property_readonly("counting",
                             [](const dyncq::Classification& c) {
                               return std::string(dyncq::to_string(c.counting_verdict));
                             })
      .def_property_readonly("enumeration",
                             [](const dyncq::Classification& c) {
                               return std::string(dyncq::to_string(c.enumeration_verdict));
                             })
      .def("__repr__", [](const dyncq::Classification& c) {
        return std::string("Classification(boolean=") + dyncq::to_string(c.boolean_verdict) +
               ", counting=" + dyncq::to_string(c.counting_verdict) +
               ", enumeration=" + dyncq::to_string(c.enumeration_verdict) + ")";
      });

  m.def("classify", &dyncq::classify, py::arg("query"));
  m.def("is_q_hierarchical", &dyncq::is_q_hierarchical, py::arg("query"));
  m.def("homomorphic_core", &dyncq::homomorphic_core, py::arg("query"));
  m.def("queries_isomorphic", &dyncq::queries_isomorphic, py::arg("a"), py::arg("b"));

  py::class_<dyncq::Engine>(m, "Engine")
      .def(py::init<const dyncq::Query&>(), py::arg("query"))
      .def(
          "insert",
          [](dyncq::Engine& e, const std::string& rel, const std::vector<std::string>& t) {
            return e.insert(rel, t).applied;
          },
          py::arg("relation"), py::arg("tuple"))
      .def(
          "remove",
          [](dyncq::Engine& e, const std::string& rel, const std::vector<std::string>& t) {
            return e.erase(rel, t).applied;
          },
          py::arg("relation"), py::arg("tuple"))
      .def("count", &dyncq::Engine::count)
      .def("answer", &dyncq::Engine::answer)
      .def("tuples", [](dyncq::Engine& e) { return dyncq::enumerate_all(e); })
      .def(
          "load_facts",
          [](dyncq::Engine& e, const std::string& text) {
            e.load(dyncq::parse_database(text, e.schema()));
          },
          py::arg("text"), "Loads a fact file: one fact per line, \"R c1 ... cr\".")
      .def(
          "inspect",
          [](const dyncq::Engine& e, const std::string& var,
             const std::vector<std::string>& path) -> py::object {
            dyncq::Inspection ins = e.inspect(var, path);
            if (!ins.exists) return py::none();
            py::dict d;
            d["weight"] = ins.weight;
            if (ins.free_weight) d["free_weight"] = *ins.free_weight;
            py::dict counters;
            for (const auto& [atom, count] : ins.counters) counters[py::int_(atom)] = count;
            d["counters"] = counters;
            return d;
          },
          py::arg("var"), py::arg("path_values"))
      .def_property_readonly("steps", &dyncq::Engine::steps);

  m.def(
      "eval_naive",
      [](const dyncq::Query& q, const std::string& facts) {
        dyncq::Database db = dyncq::parse_database(facts, q.schema());
        dyncq::TupleSet out = dyncq::eval_naive(q, db);
        return std::vector<std::vector<std::string>>(out.begin(), out.end());
      },
      py::arg("query"), py::arg("facts"),
      "Reference evaluation by full enumeration over a fact file.");
}
