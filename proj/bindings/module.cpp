#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "stabforge/harness.hpp"
#include "stabforge/rollback.hpp"

namespace py = pybind11;
using namespace stabforge;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float:
            return py::float_(j.get<double>());
        case nlohmann::json::value_t::string:
            return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& v : j) out.append(json_to_py(v));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

struct Graph {
    Topology topo;
};

TransParams make_params(const std::string& mode, py::object bound,
                        std::uint32_t row_cap) {
    TransParams params;
    if (mode == "lazy")
        params.mode = Mode::Lazy;
    else if (mode == "greedy")
        params.mode = Mode::Greedy;
    else
        throw std::invalid_argument("mode must be 'lazy' or 'greedy'");
    if (!bound.is_none()) params.bound = bound.cast<std::uint32_t>();
    params.row_cap = row_cap;
    return params;
}

py::dict summary_to_py(const RunSummary& s) {
    py::dict out;
    out["terminated"] = s.terminated;
    out["stop"] = stop_reason_text(s.stop);
    out["steps"] = s.steps;
    out["rounds"] = s.rounds;
    py::dict moves;
    moves["R"] = s.moves.reset;
    moves["P"] = s.moves.propagate;
    moves["C"] = s.moves.clear;
    moves["U"] = s.moves.update;
    out["moves"] = moves;
    out["stability_time"] = s.stability_time;
    out["final_height"] = s.final_height;
    out["bounds"] = json_to_py(bound_report_to_json(s.bounds));
    out["invariant_violations"] = s.invariant_violations;
    if (s.terminal_issue)
        out["terminal_issue"] = *s.terminal_issue;
    out["ok"] = s.ok();
    return out;
}

}  // namespace

PYBIND11_MODULE(_stabforge, m) {
    m.doc() = "workbench for silent self-stabilizing history-replay systems";

    py::class_<Graph>(m, "Graph")
        .def_property_readonly("n", [](const Graph& g) { return g.topo.n(); })
        .def_property_readonly("diameter",
                               [](const Graph& g) { return g.topo.diameter(); })
        .def_property_readonly("node_ids",
                               [](const Graph& g) { return g.topo.node_ids(); })
        .def("to_json", [](const Graph& g) {
            return json_to_py(graph_to_json(g.topo));
        });

    m.def("instances", [] { return instance_names(); });

    m.def(
        "generate_graph",
        [](const std::string& kind, std::size_t n, std::uint64_t seed,
           const std::string& instance, double edge_prob, int c) {
            InstanceOptions opts;
            opts.color_exponent = c;
            Instance inst = make_instance(instance, opts);
            GraphSpec spec;
            spec.kind = graph_kind_from_name(kind);
            spec.n = n;
            spec.seed = seed;
            spec.extra_edge_prob = edge_prob;
            return Graph{generate_graph(spec, inst.labeling)};
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = 1,
        py::arg("instance") = "leader", py::arg("edge_prob") = 0.1,
        py::arg("c") = 2);

    m.def("load_graph", [](const std::string& text) {
        return Graph{graph_from_json(nlohmann::json::parse(text))};
    });

    m.def(
        "oracle",
        [](const Graph& g, const std::string& instance, std::uint64_t seed, int c) {
            InstanceOptions opts;
            opts.color_exponent = c;
            Instance inst = make_instance(instance, opts);
            StateMap init = inst.make_initial(g.topo, Rng(seed).split(1).next());
            SyncHistory hist =
                run_to_stability(g.topo, inst.alg, init, default_max_rounds(g.topo));
            py::dict out;
            out["stability_time"] = hist.stability_time;
            nlohmann::json final_states = nlohmann::json::object();
            for (NodeIndex p = 0; p < g.topo.n(); ++p)
                final_states[g.topo.id_of(p)] =
                    inst.alg.codec.encode(g.topo, hist.rounds.back()[p]);
            out["final"] = json_to_py(final_states);
            std::string why;
            out["stable_valid"] =
                inst.validate_stable(g.topo, hist.rounds.back(), &why);
            return out;
        },
        py::arg("graph"), py::arg("instance"), py::arg("seed") = 1,
        py::arg("c") = 2);

    m.def(
        "run",
        [](const Graph& g, const std::string& instance, const std::string& mode,
           py::object bound, const std::string& daemon, std::uint64_t seed,
           bool corrupt, std::size_t max_steps, std::uint32_t row_cap, int c) {
            InstanceOptions opts;
            opts.color_exponent = c;
            Instance inst = make_instance(instance, opts);
            TransParams params = make_params(mode, bound, row_cap);
            Rng master(seed);
            StateMap init = inst.make_initial(g.topo, master.split(1).next());
            SyncHistory oracle =
                run_to_stability(g.topo, inst.alg, init, default_max_rounds(g.topo));
            TransConfig start =
                corrupt ? fuzz_config(g.topo, inst.alg, oracle, params,
                                      master.split(3).next())
                        : clean_config(init);
            DaemonPolicy policy = make_policy(g.topo, daemon, "",
                                              master.split(4).next());
            RunSummary summary = run_checked(g.topo, inst, params, policy,
                                             std::move(start), oracle, max_steps);
            return summary_to_py(summary);
        },
        py::arg("graph"), py::arg("instance"), py::arg("mode") = "lazy",
        py::arg("bound") = py::none(), py::arg("daemon") = "central-random",
        py::arg("seed") = 1, py::arg("corrupt") = true, py::arg("max_steps") = 0,
        py::arg("row_cap") = 0, py::arg("c") = 2);

    m.def(
        "fuzz",
        [](const Graph& g, const std::string& instance, std::size_t count,
           const std::string& mode, py::object bound, const std::string& daemon,
           std::uint64_t seed, std::size_t jobs, int c) {
            InstanceOptions opts;
            opts.color_exponent = c;
            Instance inst = make_instance(instance, opts);
            TransParams params = make_params(mode, bound, 0);
            FuzzReport report = fuzz_campaign(g.topo, inst, params, daemon, seed,
                                              count, 0, jobs);
            return json_to_py(fuzz_report_to_json(report));
        },
        py::arg("graph"), py::arg("instance"), py::arg("count"),
        py::arg("mode") = "lazy", py::arg("bound") = py::none(),
        py::arg("daemon") = "central-random", py::arg("seed") = 1,
        py::arg("jobs") = 0, py::arg("c") = 2);

    m.def(
        "rollback_lower_bound",
        [](std::uint32_t x, bool contrast) {
            std::ostringstream out, err;
            const int code = cmd_rollback(x, contrast, out, err);
            py::dict d = json_to_py(nlohmann::json::parse(out.str()));
            d["exit_code"] = code;
            return d;
        },
        py::arg("x"), py::arg("contrast") = true);
}
