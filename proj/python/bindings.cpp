// SPDX-License-Identifier: Apache-2.0
// Python surface: environments, the formalizer, simulated optimize/evaluate
// runs and the command line. Long-running calls release the GIL.
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "autoplan/cli.hpp"
#include "autoplan/formalizer.hpp"
#include "autoplan/household_env.hpp"
#include "autoplan/optimizer.hpp"
#include "autoplan/prompts.hpp"
#include "autoplan/qa.hpp"
#include "autoplan/sim_agents.hpp"

namespace py = pybind11;
using namespace autoplan;

namespace {

// Suites are immutable, so one instance per kind serves every caller.
const EnvironmentSuite& suite_for(const std::string& env) {
    static const household::HouseholdSuite household_suite;
    static const std::unique_ptr<qa::QASuite> qa_suite = qa::QASuite::bundled();
    return parse_env_kind(env) == EnvKind::household ? static_cast<const EnvironmentSuite&>(household_suite)
                                                     : *qa_suite;
}

sim::Policy policy_for(const std::string& name) {
    const auto policy = sim::parse_policy(name);
    if (!policy) throw std::invalid_argument("unknown simulated policy '" + name + "'");
    return *policy;
}

py::dict usage_dict(const UsageRecord& usage) {
    py::dict d;
    d["calls"] = usage.calls;
    d["input_chars"] = usage.input_chars;
    d["output_chars"] = usage.output_chars;
    d["cost"] = usage.estimated_cost;
    return d;
}

py::dict row_dict(const EvalRow& row) {
    py::dict d;
    d["task_type"] = row.task_family;
    d["successes"] = row.successes;
    d["total"] = row.total;
    d["success_rate"] = row.rate();
    d["cost"] = row.cost;
    return d;
}

// One live episode, driven step by step from Python.
class Session {
public:
    explicit Session(const std::string& env) : suite_(suite_for(env)), env_(suite_.make_environment()) {}

    std::string reset(const std::string& task_id) { return env_->reset(suite_.find(task_id)); }

    py::dict step(const std::string& action) {
        const auto t = env_->step(action);
        py::dict d;
        d["observation"] = t.observation;
        d["reward"] = t.reward;
        d["done"] = t.done;
        d["valid"] = t.valid;
        return d;
    }

    bool goal_reached() const { return env_->goal_reached(); }

    std::string description(const std::string& task_id) const { return suite_.find(task_id).description; }

private:
    const EnvironmentSuite& suite_;
    std::unique_ptr<Environment> env_;
};

std::vector<std::string> task_ids(const std::string& env, const std::string& split, const std::string& family) {
    std::vector<std::string> ids;
    for (const auto& instance : suite_for(env).instances(parse_split(split), family)) ids.push_back(instance.id);
    return ids;
}

std::optional<std::string> formalize(const std::string& raw, const std::string& env) {
    const auto kind = parse_env_kind(env);
    if (auto thought = as_thought(raw)) return thought;
    return rule_formalize(raw, kind);
}

py::dict evaluate_plan(const std::optional<std::string>& plan_text, const std::string& family,
                       const std::string& policy, const std::string& env, const std::string& split) {
    const auto& suite = suite_for(env);
    const auto plan = plan_text ? Plan::make(*plan_text, 1, family) : Plan::empty(family);
    EvalReport report;
    {
        py::gil_scoped_release release;
        sim::AgentBackend agent(policy_for(policy), suite);
        report = evaluate(plan, suite.instances(parse_split(split), family), suite, agent, {});
    }
    py::list rows;
    for (const auto& row : report.rows) rows.append(row_dict(row));
    py::dict d;
    d["rows"] = rows;
    d["overall"] = row_dict(report.overall);
    d["usage"] = usage_dict(report.usage);
    return d;
}

py::dict optimize_plan(const std::string& policy, const std::string& env, const std::string& family,
                       std::size_t batch_size, std::size_t iterations, std::uint64_t seed,
                       const std::string& reflection, std::size_t workers) {
    RunConfig config;
    config.env = parse_env_kind(env);
    config.task_family = config.env == EnvKind::qa ? "qa" : family;
    config.batch_size = batch_size;
    config.iterations = iterations;
    config.seed = seed;
    config.reflection = parse_reflection_mode(reflection);
    config.workers = workers;
    const auto& suite = suite_for(env);
    OptimizeResult result;
    {
        py::gil_scoped_release release;
        sim::AgentBackend agent(policy_for(policy), suite);
        result = optimize(config, suite, agent);
    }
    py::list records;
    for (const auto& record : result.iterations) {
        std::size_t successes = 0;
        for (const auto& item : record.batch) successes += item.reward == 1 ? 1 : 0;
        py::dict r;
        r["index"] = record.index;
        r["plan_version"] = record.plan_out.iteration();
        r["batch_successes"] = successes;
        r["batch_size"] = record.batch.size();
        r["failed"] = record.failed;
        r["usage"] = usage_dict(record.usage);
        records.append(r);
    }
    py::dict d;
    d["plan"] = result.final_plan.text();
    d["plan_version"] = result.final_plan.iteration();
    d["task_type"] = result.final_plan.task_family();
    d["iterations"] = records;
    return d;
}

py::tuple run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "autoplan");
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_autoplan, m) {
    m.doc() = "Plan optimization for LLM agents through batched reflection";

    py::class_<Session>(m, "Session")
        .def(py::init<const std::string&>(), py::arg("env") = "household")
        .def("reset", &Session::reset, py::arg("task_id"))
        .def("step", &Session::step, py::arg("action"))
        .def("goal_reached", &Session::goal_reached)
        .def("description", &Session::description, py::arg("task_id"));

    m.def("task_ids", &task_ids, py::arg("env") = "household", py::arg("split") = "test", py::arg("family") = "");
    m.def("formalize", &formalize, py::arg("raw"), py::arg("env") = "household",
          "Canonical action for a free-form action, or None when the rules cannot map it.");
    m.def("prompt_template", [](const std::string& name) { return prompt_template(name); }, py::arg("name"));
    m.def("evaluate", &evaluate_plan, py::arg("plan") = py::none(), py::arg("family") = "heat",
          py::arg("policy") = "staged", py::arg("env") = "household", py::arg("split") = "test");
    m.def("optimize", &optimize_plan, py::arg("policy") = "staged", py::arg("env") = "household",
          py::arg("family") = "heat", py::arg("batch_size") = 4, py::arg("iterations") = 3, py::arg("seed") = 0,
          py::arg("reflection") = "full", py::arg("workers") = 1);
    m.def("cli", &run_cli, py::arg("args"), "Run the command line in-process; returns (exit_code, stdout, stderr).");

    py::register_exception<UnknownInstanceError>(m, "UnknownInstanceError", PyExc_KeyError);
}
