#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "overlaymend/graph.hpp"
#include "overlaymend/manifest.hpp"
#include "overlaymend/metrics.hpp"
#include "overlaymend/protocol.hpp"
#include "overlaymend/rng.hpp"
#include "overlaymend/second_view.hpp"
#include "overlaymend/simulator.hpp"
#include "overlaymend/topology.hpp"

namespace py = pybind11;
using namespace overlaymend;

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

PYBIND11_MODULE(_core, m) {
    m.doc() = R"pbdoc(
        Self-healing overlay simulation toolkit
        ---------------------------------------

        Graph substrate, topology generators, the local repair protocol,
        a deterministic scenario simulator and batch execution.
    )pbdoc";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<LivelockError>(m, "LivelockError", PyExc_RuntimeError);

    py::enum_<NodeState>(m, "NodeState")
        .value("Active", NodeState::Active)
        .value("Inactive", NodeState::Inactive);

    py::class_<FailResult>(m, "FailResult")
        .def_readonly("failed", &FailResult::failed)
        .def_readonly("former_neighbors", &FailResult::former_neighbors)
        .def_readonly("neighbor_adjacency", &FailResult::neighbor_adjacency);

    py::class_<OverlayGraph>(m, "OverlayGraph")
        .def(py::init<std::size_t>(), py::arg("slots"))
        .def("slot_count", &OverlayGraph::slot_count)
        .def("state", &OverlayGraph::state, py::arg("n"))
        .def("is_active", &OverlayGraph::is_active, py::arg("n"))
        .def("active_count", &OverlayGraph::active_count)
        .def("active_nodes", &OverlayGraph::active_nodes)
        .def("inactive_nodes", &OverlayGraph::inactive_nodes)
        .def("neighbors", &OverlayGraph::neighbors, py::arg("n"))
        .def("degree", &OverlayGraph::degree, py::arg("n"))
        .def("has_link", &OverlayGraph::has_link, py::arg("a"), py::arg("b"))
        .def("edge_count", &OverlayGraph::edge_count)
        .def("cluster_of", &OverlayGraph::cluster_of, py::arg("n"))
        .def("set_cluster", &OverlayGraph::set_cluster, py::arg("n"), py::arg("label"))
        .def("add_link", &OverlayGraph::add_link, py::arg("a"), py::arg("b"))
        .def("fail_node", &OverlayGraph::fail_node, py::arg("f"))
        .def("activate_node", &OverlayGraph::activate_node, py::arg("n"),
             py::arg("cluster") = std::nullopt)
        .def("check_consistency", &OverlayGraph::check_consistency)
        .def(
            "edge_list",
            [](const OverlayGraph& g, std::size_t step) {
                std::ostringstream out;
                g.write_edge_list(out, step);
                return out.str();
            },
            py::arg("step") = 0);

    m.def("components", &components, py::arg("graph"));
    m.def("components_union_find", &components_union_find, py::arg("graph"));
    m.def("main_component_fraction", &main_component_fraction, py::arg("graph"));
    m.def("isolated_count", &isolated_count, py::arg("graph"));

    py::class_<SecondNeighborView>(m, "SecondNeighborView")
        .def(py::init([](std::map<NodeId, std::set<NodeId>> via) {
                 SecondNeighborView v;
                 v.via = std::move(via);
                 return v;
             }),
             py::arg("via") = std::map<NodeId, std::set<NodeId>>{})
        .def_readwrite("via", &SecondNeighborView::via)
        .def("__eq__", [](const SecondNeighborView& a, const SecondNeighborView& b) {
            return a == b;
        });

    m.def("second_neighbors", &second_neighbors, py::arg("view"));
    m.def("rebuild_second_view", &rebuild_second_view, py::arg("graph"), py::arg("n"));

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next", &Rng::next)
        .def("index", &Rng::index, py::arg("n"))
        .def("real01", &Rng::real01)
        .def("uniform", &Rng::uniform, py::arg("lo"), py::arg("hi"))
        .def("chance", &Rng::chance, py::arg("p"));

    py::class_<TopologyKind> topology(m, "TopologyKind");
    py::enum_<TopologyKind::Family>(topology, "Family")
        .value("Uniform", TopologyKind::Family::Uniform)
        .value("Clustered", TopologyKind::Family::Clustered)
        .value("Random", TopologyKind::Family::Random);
    topology.def(py::init<>())
        .def_static("uniform", &TopologyKind::uniform, py::arg("degree"))
        .def_static("clustered", &TopologyKind::clustered, py::arg("clusters"), py::arg("intra"),
                    py::arg("inter"))
        .def_static("random", &TopologyKind::random, py::arg("edge_prob"))
        .def_readwrite("family", &TopologyKind::family)
        .def_readwrite("degree", &TopologyKind::degree)
        .def_readwrite("clusters", &TopologyKind::clusters)
        .def_readwrite("intra_prob", &TopologyKind::intra_prob)
        .def_readwrite("inter_prob", &TopologyKind::inter_prob)
        .def_readwrite("edge_prob", &TopologyKind::edge_prob)
        .def("validate", &TopologyKind::validate, py::arg("num_nodes"));

    m.def("gen_uniform", &gen_uniform, py::arg("n"), py::arg("degree"), py::arg("rng"));
    m.def("gen_clustered", &gen_clustered, py::arg("n"), py::arg("clusters"), py::arg("intra"),
          py::arg("inter"), py::arg("rng"));
    m.def("gen_random", &gen_random, py::arg("n"), py::arg("edge_prob"), py::arg("rng"));
    m.def("generate", &generate, py::arg("kind"), py::arg("n"), py::arg("rng"));
    m.def("join_targets_uniform", &join_targets_uniform, py::arg("graph"), py::arg("n"),
          py::arg("degree"), py::arg("rng"));
    m.def("join_targets_clustered", &join_targets_clustered, py::arg("graph"), py::arg("n"),
          py::arg("cluster"), py::arg("intra"), py::arg("inter"), py::arg("rng"));
    m.def("join_targets_random", &join_targets_random, py::arg("graph"), py::arg("n"),
          py::arg("edge_prob"), py::arg("rng"));
    m.def("join_uniform", &join_uniform, py::arg("graph"), py::arg("n"), py::arg("degree"),
          py::arg("rng"));
    m.def("join_clustered", &join_clustered, py::arg("graph"), py::arg("n"), py::arg("cluster"),
          py::arg("intra"), py::arg("inter"), py::arg("rng"));

    py::enum_<FailureClass>(m, "FailureClass")
        .value("AlreadyFirst", FailureClass::AlreadyFirst)
        .value("StillSecond", FailureClass::StillSecond)
        .value("Lost", FailureClass::Lost);

    m.def("classify_after_failure", &classify_after_failure, py::arg("p"), py::arg("first"),
          py::arg("second"));

    py::class_<ProtocolConfig>(m, "ProtocolConfig")
        .def(py::init<>())
        .def_readwrite("threshold_degree", &ProtocolConfig::threshold_degree)
        .def_readwrite("wait_min", &ProtocolConfig::wait_min)
        .def_readwrite("wait_max", &ProtocolConfig::wait_max)
        .def_readwrite("enabled", &ProtocolConfig::enabled)
        .def("validate", &ProtocolConfig::validate);

    py::enum_<Scenario>(m, "Scenario")
        .value("StableChurn", Scenario::StableChurn)
        .value("ProgressiveFailure", Scenario::ProgressiveFailure);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("topology", &ScenarioConfig::topology)
        .def_readwrite("num_nodes", &ScenarioConfig::num_nodes)
        .def_readwrite("protocol", &ScenarioConfig::protocol)
        .def_readwrite("scenario", &ScenarioConfig::scenario)
        .def_readwrite("steps", &ScenarioConfig::steps)
        .def_readwrite("initial_forced_failures", &ScenarioConfig::initial_forced_failures)
        .def_readwrite("seed", &ScenarioConfig::seed)
        .def_readwrite("runs", &ScenarioConfig::runs)
        .def_readwrite("transient_steps", &ScenarioConfig::transient_steps)
        .def_readwrite("livelock_cap", &ScenarioConfig::livelock_cap)
        .def("validate", &ScenarioConfig::validate);

    py::class_<MetricsRecord>(m, "MetricsRecord")
        .def_readonly("step", &MetricsRecord::step)
        .def_readonly("active", &MetricsRecord::active)
        .def_readonly("main_fraction", &MetricsRecord::main_fraction)
        .def_readonly("num_components", &MetricsRecord::num_components)
        .def_readonly("isolated", &MetricsRecord::isolated)
        .def_readonly("avg_first", &MetricsRecord::avg_first)
        .def_readonly("avg_second", &MetricsRecord::avg_second)
        .def_readonly("messages_sent", &MetricsRecord::messages_sent)
        .def("__eq__",
             [](const MetricsRecord& a, const MetricsRecord& b) { return a == b; })
        .def("__repr__", [](const MetricsRecord& r) {
            std::ostringstream out;
            out << "MetricsRecord(step=" << r.step << ", active=" << r.active
                << ", main_fraction=" << r.main_fraction << ", num_components="
                << r.num_components << ", isolated=" << r.isolated << ", avg_first="
                << r.avg_first << ", avg_second=" << r.avg_second << ", messages_sent="
                << r.messages_sent << ")";
            return out.str();
        });

    py::class_<AggregateSeries>(m, "AggregateSeries")
        .def_readonly("step", &AggregateSeries::step)
        .def_readonly("mean", &AggregateSeries::mean)
        .def_readonly("stddev", &AggregateSeries::stddev)
        .def("__len__", &AggregateSeries::size);

    m.attr("METRIC_FIELDS") = py::cast(std::vector<std::string>(kMetricFieldNames.begin(),
                                                                kMetricFieldNames.end()));

    m.def("aggregate", &aggregate, py::arg("runs"), py::arg("transient_steps") = 0);

    m.def(
        "run_scenario",
        [](const ScenarioConfig& cfg, bool protocol_on, std::size_t run_index) {
            Simulator sim(cfg, protocol_on, cfg.seed + run_index);
            return sim.run();
        },
        py::arg("config"), py::arg("protocol_on"), py::arg("run_index") = 0,
        py::call_guard<py::gil_scoped_release>(),
        "Execute one run of the scenario and return its per-step records.");

    py::enum_<Mode>(m, "Mode")
        .value("On", Mode::On)
        .value("Off", Mode::Off)
        .value("Both", Mode::Both);

    py::class_<RunManifest>(m, "RunManifest")
        .def(py::init<>())
        .def_readwrite("config", &RunManifest::config)
        .def_readwrite("mode", &RunManifest::mode)
        .def_readwrite("output_dir", &RunManifest::output_dir)
        .def_readwrite("snapshot_every", &RunManifest::snapshot_every)
        .def_readwrite("trace", &RunManifest::trace);

    py::class_<ExecutionReport>(m, "ExecutionReport")
        .def_readonly("runs_completed", &ExecutionReport::runs_completed)
        .def_readonly("runs_failed", &ExecutionReport::runs_failed)
        .def_readonly("failures", &ExecutionReport::failures)
        .def_readonly("files_written", &ExecutionReport::files_written)
        .def("ok", &ExecutionReport::ok);

    m.def("parse_manifest", &parse_manifest, py::arg("text"));
    m.def("render_manifest", &render_manifest, py::arg("manifest"));
    m.def("execute", &execute, py::arg("manifest"), py::arg("jobs") = 1,
          py::call_guard<py::gil_scoped_release>());

#ifdef OVERLAYMEND_VERSION
    m.attr("__version__") = OVERLAYMEND_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
