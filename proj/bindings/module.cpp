#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "cnas/harness.hpp"

namespace py = pybind11;
using namespace cnas;

namespace {

// cpp_int exceeds every fixed-width integer; route through decimal text.
py::object to_py_int(const BigInt& value) {
  return py::reinterpret_steal<py::object>(
      PyLong_FromString(value.str().c_str(), nullptr, 10));
}

std::string repr_edge(const Edge& e) {
  return "Edge(input=" + std::to_string(e.input) +
         ", op=" + std::to_string(e.op) + ")";
}

}  // namespace

PYBIND11_MODULE(cnas_core, m) {
  m.doc() = "curriculum architecture search core";

  const auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<SpaceTooLarge>(m, "SpaceTooLarge", base.ptr());
  py::register_exception<StageMismatch>(m, "StageMismatch", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<UnknownArchitecture>(m, "UnknownArchitecture",
                                              base.ptr());
  py::register_exception<InconsistentTraces>(m, "InconsistentTraces",
                                             base.ptr());
  py::register_exception<TrialError>(m, "TrialError", base.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Rng::uniform)
      .def("uniform_int", &Rng::uniform_int, py::arg("n"))
      .def("normal", &Rng::normal)
      .def_static("mix", &Rng::mix, py::arg("a"), py::arg("b"));

  py::class_<OperationSpec>(m, "OperationSpec")
      .def(py::init([](std::string id, bool has_params) {
             return OperationSpec{std::move(id), has_params};
           }),
           py::arg("id"), py::arg("has_params"))
      .def_readonly("id", &OperationSpec::id)
      .def_readonly("has_params", &OperationSpec::has_params)
      .def(py::self == py::self)
      .def("__repr__", [](const OperationSpec& op) {
        return "OperationSpec(" + op.id + ")";
      });

  m.def("default_operation_catalog", &default_operation_catalog);

  py::class_<SpaceShape>(m, "SpaceShape")
      .def(py::init<int, int, std::vector<OperationSpec>>(),
           py::arg("total_nodes"), py::arg("cell_groups"),
           py::arg("operations"))
      .def_property_readonly("total_nodes", &SpaceShape::total_nodes)
      .def_property_readonly("cell_groups", &SpaceShape::cell_groups)
      .def_property_readonly("intermediate_nodes",
                             &SpaceShape::intermediate_nodes)
      .def_property_readonly("operations", &SpaceShape::operations)
      .def_property_readonly("num_operations", &SpaceShape::num_operations)
      .def("operation_index", &SpaceShape::operation_index, py::arg("id"))
      .def("with_total_nodes", &SpaceShape::with_total_nodes)
      .def("with_operations", &SpaceShape::with_operations)
      .def(py::self == py::self);

  py::class_<SearchSpaceStage>(m, "SearchSpaceStage")
      .def(py::init<SpaceShape, int>(), py::arg("shape"),
           py::arg("active_ops"))
      .def_property_readonly("shape", &SearchSpaceStage::shape)
      .def_property_readonly("active_ops", &SearchSpaceStage::active_ops)
      .def(py::self == py::self);

  py::class_<Edge>(m, "Edge")
      .def(py::init([](int input, int op) { return Edge{input, op}; }),
           py::arg("input"), py::arg("op"))
      .def_readonly("input", &Edge::input)
      .def_readonly("op", &Edge::op)
      .def(py::self == py::self)
      .def("__repr__", &repr_edge);

  py::class_<Architecture>(m, "Architecture")
      .def_property_readonly(
          "groups",
          [](const Architecture& arch) {
            py::list groups;
            for (const auto& group : arch.groups) {
              py::list nodes;
              for (const auto& node : group)
                nodes.append(py::make_tuple(node[0], node[1]));
              groups.append(nodes);
            }
            return groups;
          })
      .def_property_readonly("num_groups", &Architecture::num_groups)
      .def_property_readonly("num_nodes", &Architecture::num_nodes)
      .def(py::self == py::self)
      .def("__repr__",
           [](const Architecture& arch) { return "<" + encode(arch) + ">"; });

  py::class_<DecisionSlot>(m, "DecisionSlot")
      .def_readonly("group", &DecisionSlot::group)
      .def_readonly("node", &DecisionSlot::node)
      .def_readonly("position", &DecisionSlot::position)
      .def_readonly("is_op", &DecisionSlot::is_op)
      .def_readonly("choices", &DecisionSlot::choices);

  m.def("decision_slots", &decision_slots);
  m.def("slot_value", &slot_value);
  m.def("validate_architecture", &validate_architecture);
  m.def("space_size",
        [](const SearchSpaceStage& stage) { return to_py_int(space_size(stage)); });
  m.def("enumerate_space", &enumerate_space, py::arg("stage"),
        py::arg("limit"));
  m.def("encode", &encode);
  m.def("decode", &decode, py::arg("text"), py::arg("stage"));
  m.def("uniform_sample", &uniform_sample, py::arg("stage"), py::arg("rng"));

  py::class_<PolicyUpdateConfig>(m, "PolicyUpdateConfig")
      .def(py::init([](double lr, double ew, double bd) {
             return PolicyUpdateConfig{lr, ew, bd};
           }),
           py::arg("learning_rate") = 0.1, py::arg("entropy_weight") = 0.005,
           py::arg("baseline_decay") = 0.95)
      .def_readwrite("learning_rate", &PolicyUpdateConfig::learning_rate)
      .def_readwrite("entropy_weight", &PolicyUpdateConfig::entropy_weight)
      .def_readwrite("baseline_decay", &PolicyUpdateConfig::baseline_decay)
      .def("validate", &PolicyUpdateConfig::validate);

  py::class_<RewardBaseline>(m, "RewardBaseline")
      .def(py::init<>())
      .def_readwrite("value", &RewardBaseline::value);

  py::class_<FactorizedPolicy>(m, "FactorizedPolicy")
      .def(py::init<SearchSpaceStage>(), py::arg("stage"))
      .def_property_readonly("stage", &FactorizedPolicy::stage)
      .def_property_readonly("slots", &FactorizedPolicy::slots)
      .def("probabilities", &FactorizedPolicy::probabilities,
           py::arg("slot_index"))
      .def("logits", &FactorizedPolicy::logits)
      .def("set_logit", &FactorizedPolicy::set_logit, py::arg("slot_index"),
           py::arg("choice"), py::arg("value"))
      .def("sample", &FactorizedPolicy::sample, py::arg("rng"))
      .def("log_prob", &FactorizedPolicy::log_prob, py::arg("arch"))
      .def("entropy", &FactorizedPolicy::entropy)
      .def("param_count", &FactorizedPolicy::param_count)
      .def("log_prob_gradient", &FactorizedPolicy::log_prob_gradient)
      .def("entropy_gradient", &FactorizedPolicy::entropy_gradient)
      .def("reinforce_step", &FactorizedPolicy::reinforce_step,
           py::arg("samples"), py::arg("config"), py::arg("baseline"))
      .def("extend_operation", &FactorizedPolicy::extend_operation)
      .def("extend_nodes", &FactorizedPolicy::extend_nodes)
      .def("save_text",
           [](const FactorizedPolicy& policy) {
             std::ostringstream out;
             policy.save_text(out);
             return out.str();
           })
      .def_static("load_text",
                  [](const std::string& text) {
                    std::istringstream in(text);
                    return FactorizedPolicy::load_text(in);
                  })
      .def(py::self == py::self);

  py::class_<RewardOracle>(m, "RewardOracle")
      .def_property_readonly("shape", &RewardOracle::shape)
      .def("evaluate", &RewardOracle::evaluate, py::arg("arch"),
           py::arg("rng"))
      .def("train_step", &RewardOracle::train_step, py::arg("arch"))
      .def("trainable", &RewardOracle::trainable)
      .def("reset_training", &RewardOracle::reset_training);

  py::class_<PlantedLandscapeConfig>(m, "PlantedLandscapeConfig")
      .def(py::init([](double op, double input, double sigma) {
             return PlantedLandscapeConfig{op, input, sigma};
           }),
           py::arg("op_match_bonus") = 0.7, py::arg("input_match_bonus") = 0.3,
           py::arg("noise_sigma") = 0.02)
      .def_readwrite("op_match_bonus", &PlantedLandscapeConfig::op_match_bonus)
      .def_readwrite("input_match_bonus",
                     &PlantedLandscapeConfig::input_match_bonus)
      .def_readwrite("noise_sigma", &PlantedLandscapeConfig::noise_sigma);

  py::class_<PlantedLandscape, RewardOracle>(m, "PlantedLandscape")
      .def(py::init<SpaceShape, std::uint64_t, PlantedLandscapeConfig>(),
           py::arg("shape"), py::arg("seed"),
           py::arg("config") = PlantedLandscapeConfig{})
      .def(py::init<SpaceShape, Architecture, PlantedLandscapeConfig>(),
           py::arg("shape"), py::arg("planted"),
           py::arg("config") = PlantedLandscapeConfig{})
      .def_property_readonly("planted", &PlantedLandscape::planted)
      .def("noiseless", &PlantedLandscape::noiseless, py::arg("arch"));

  py::class_<SurrogateSupernetConfig>(m, "SurrogateSupernetConfig")
      .def(py::init([](double rate, double bonus, double sigma,
                       std::string planted_op) {
             return SurrogateSupernetConfig{rate, bonus, sigma,
                                            std::move(planted_op)};
           }),
           py::arg("train_rate") = 0.1, py::arg("input_match_bonus") = 0.3,
           py::arg("eval_noise_sigma") = 0.02, py::arg("planted_op") = "")
      .def_readwrite("train_rate", &SurrogateSupernetConfig::train_rate)
      .def_readwrite("input_match_bonus",
                     &SurrogateSupernetConfig::input_match_bonus)
      .def_readwrite("eval_noise_sigma",
                     &SurrogateSupernetConfig::eval_noise_sigma)
      .def_readwrite("planted_op", &SurrogateSupernetConfig::planted_op);

  py::class_<SurrogateSupernet, RewardOracle>(m, "SurrogateSupernet")
      .def(py::init<SpaceShape, std::uint64_t, SurrogateSupernetConfig>(),
           py::arg("shape"), py::arg("seed"),
           py::arg("config") = SurrogateSupernetConfig{})
      .def("ceiling", &SurrogateSupernet::ceiling)
      .def("proficiency", &SurrogateSupernet::proficiency)
      .def("planted_input", &SurrogateSupernet::planted_input)
      .def("best_architecture", &SurrogateSupernet::best_architecture);

  py::class_<TabularOracle, RewardOracle>(m, "TabularOracle")
      .def(py::init<SpaceShape, std::map<std::string, double>, std::string>(),
           py::arg("shape"), py::arg("table"), py::arg("source_note") = "")
      .def_static("load", &TabularOracle::load, py::arg("path"))
      .def("save", &TabularOracle::save, py::arg("path"))
      .def_property_readonly("table", &TabularOracle::table);

  py::class_<CurriculumConfig>(m, "CurriculumConfig")
      .def(py::init([](SpaceShape shape) {
             return CurriculumConfig{std::move(shape), {}, 20, 40, 40, 8,
                                     {},   10};
           }),
           py::arg("shape"))
      .def_readwrite("shape", &CurriculumConfig::shape)
      .def_readwrite("operation_order", &CurriculumConfig::operation_order)
      .def_readwrite("warmup_iters", &CurriculumConfig::warmup_iters)
      .def_readwrite("controller_iters_per_stage",
                     &CurriculumConfig::controller_iters_per_stage)
      .def_readwrite("weight_iters_per_stage",
                     &CurriculumConfig::weight_iters_per_stage)
      .def_readwrite("samples_per_controller_iter",
                     &CurriculumConfig::samples_per_controller_iter)
      .def_readwrite("policy_update", &CurriculumConfig::policy_update)
      .def_readwrite("infer_samples", &CurriculumConfig::infer_samples)
      .def("validate", &CurriculumConfig::validate);

  py::class_<TraceRow>(m, "TraceRow")
      .def_readonly("stage", &TraceRow::stage)
      .def_readonly("iter", &TraceRow::iter)
      .def_readonly("kind", &TraceRow::kind)
      .def_readonly("encoding", &TraceRow::encoding)
      .def_readonly("reward", &TraceRow::reward)
      .def_readonly("entropy", &TraceRow::entropy)
      .def_readonly("baseline", &TraceRow::baseline)
      .def_readonly("best_so_far", &TraceRow::best_so_far)
      .def(py::self == py::self);

  py::class_<StageInference>(m, "StageInference")
      .def_readonly("stage", &StageInference::stage)
      .def_readonly("encoding", &StageInference::encoding)
      .def_readonly("reward", &StageInference::reward)
      .def(py::self == py::self);

  py::class_<SearchTrace>(m, "SearchTrace")
      .def_readonly("method", &SearchTrace::method)
      .def_readonly("operation_order", &SearchTrace::operation_order)
      .def_readonly("rows", &SearchTrace::rows)
      .def_readonly("stages", &SearchTrace::stages)
      .def("final_answer", &SearchTrace::final_answer)
      .def(py::self == py::self);

  m.def("resolve_operation_order", &resolve_operation_order,
        py::arg("config"), py::arg("rng"));
  m.def("run_cnas", &run_cnas, py::arg("config"), py::arg("oracle"),
        py::arg("rng"));
  m.def("run_fixed", &run_fixed, py::arg("config"), py::arg("oracle"),
        py::arg("rng"));
  m.def("run_node_curriculum", &run_node_curriculum, py::arg("config"),
        py::arg("oracle"), py::arg("rng"));
  m.def("run_random", &run_random, py::arg("config"), py::arg("oracle"),
        py::arg("rng"));
  m.def("operation_warmup", &operation_warmup, py::arg("policy"),
        py::arg("oracle"), py::arg("stage"), py::arg("iterations"),
        py::arg("rng"));
  m.def("infer",
        [](const FactorizedPolicy& policy, RewardOracle& oracle, int n,
           Rng& rng) { return infer(policy, oracle, n, rng); },
        py::arg("policy"), py::arg("oracle"), py::arg("n"), py::arg("rng"));

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("trial", &TraceRecord::trial)
      .def_readonly("method", &TraceRecord::method)
      .def_readonly("row", &TraceRecord::row);

  py::class_<StageSummaryRecord>(m, "StageSummaryRecord")
      .def_readonly("trial", &StageSummaryRecord::trial)
      .def_readonly("method", &StageSummaryRecord::method)
      .def_readonly("inference", &StageSummaryRecord::inference);

  m.def("read_trace_csv", [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_trace_csv(in);
  });
  m.def("read_stage_summary_csv", [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_stage_summary_csv(in);
  });

  py::class_<OracleSpec>(m, "OracleSpec")
      .def_readonly("kind", &OracleSpec::kind)
      .def_readonly("seed", &OracleSpec::seed)
      .def_readonly("path", &OracleSpec::path);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def_readonly("name", &ExperimentSpec::name)
      .def_readonly("methods", &ExperimentSpec::methods)
      .def_readonly("seeds", &ExperimentSpec::seeds)
      .def_readonly("curriculum", &ExperimentSpec::curriculum)
      .def_readonly("oracle", &ExperimentSpec::oracle)
      .def_readonly("output_dir", &ExperimentSpec::output_dir)
      .def_readonly("parallelism", &ExperimentSpec::parallelism);

  py::class_<StatsRow>(m, "StatsRow")
      .def_readonly("method", &StatsRow::method)
      .def_readonly("stage", &StatsRow::stage)
      .def_readonly("mean", &StatsRow::mean)
      .def_readonly("stddev", &StatsRow::stddev)
      .def_readonly("min", &StatsRow::min)
      .def_readonly("max", &StatsRow::max);

  py::class_<WinRow>(m, "WinRow")
      .def_readonly("method_a", &WinRow::method_a)
      .def_readonly("method_b", &WinRow::method_b)
      .def_readonly("fraction", &WinRow::fraction);

  py::class_<ExperimentSummary>(m, "ExperimentSummary")
      .def_readonly("stats", &ExperimentSummary::stats)
      .def_readonly("wins", &ExperimentSummary::wins);

  m.def("load_spec", &load_spec, py::arg("path"));
  m.def("parse_spec_json", &parse_spec_json, py::arg("text"));
  m.def("run_trial", &run_trial, py::arg("spec"), py::arg("method"),
        py::arg("seed"));
  m.def("run_experiment", &run_experiment, py::arg("spec"),
        py::call_guard<py::gil_scoped_release>());
  m.def("summarize", &summarize, py::arg("records"),
        py::arg("method_order") = std::vector<std::string>{});
}
