// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fastric/agents.hpp"
#include "fastric/detail/text.hpp"
#include "fastric/experiment.hpp"
#include "fastric/report.hpp"
#include "fastric/runlog.hpp"

namespace py = pybind11;
using namespace fastric;

namespace {

FormalityLevel level_of(const std::string& text)
{
    auto level = parse_level(text);
    if (!level)
        throw Error(ErrorCode::InvalidArgument, "unknown level '" + text + "'");
    return *level;
}

py::object fraction(const Rational& r)
{
    static py::object Fraction = py::module_::import("fractions").attr("Fraction");
    return Fraction(r.numerator(), r.denominator());
}

Rational rational(const py::handle& value)
{
    py::object f = py::module_::import("fractions").attr("Fraction")(value);
    return Rational(f.attr("numerator").cast<long long>(), f.attr("denominator").cast<long long>());
}

py::dict score_dict(const ConformanceScore& s)
{
    py::dict d;
    d["correct_turns"] = s.correct_turns;
    d["total_turns"] = s.total_turns;
    d["first_violation"] = s.first_violation ? py::cast(*s.first_violation) : py::none();
    d["value"] = fraction(s.value());
    return d;
}

py::dict summary_dict(const ConditionSummary& s)
{
    py::dict d;
    d["agent"] = s.agent;
    d["level"] = std::string(to_string(s.level));
    d["n"] = s.scores.size();
    d["aborted"] = s.aborted;
    d["mean"] = fraction(s.mean);
    d["variance"] = fraction(s.variance);
    d["sd"] = s.sd();
    d["cell"] = s.cell();
    py::list five;
    for (const auto& q : s.five_number)
        five.append(fraction(q));
    d["five_number"] = five;
    return d;
}

ProtocolSpec protocol_or_default(const std::optional<std::string>& source)
{
    return source ? parse_protocol(*source) : canonical_tutor_protocol();
}

TestScript script_or_default(const std::optional<std::string>& source)
{
    return source ? parse_script(*source) : canonical_test_script();
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Finite-state tutor protocols: rendering, simulated sessions and conformance scoring";

    static py::exception<Error> fastric_error(m, "FastricError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(fastric_error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
        }
    });

    m.def("canonical_protocol_source", [] { return std::string(canonical_tutor_source()); },
          "Source text of the built-in arithmetic tutor protocol.");
    m.def("canonical_script_source", [] { return render_script(canonical_test_script()); },
          "The built-in 21-turn test script.");

    m.def(
        "validate",
        [](const std::string& source) {
            auto p = parse_protocol(source);
            auto report = validate_fsm(compile_protocol(p));
            py::list warnings;
            for (const auto& w : report.warnings)
                warnings.append(py::make_tuple(w.code, w.message));
            return py::make_tuple(p.name, warnings);
        },
        py::arg("source"), "Parses and compiles a protocol. Returns (name, warnings); raises on errors.");

    m.def(
        "render",
        [](const std::string& level, const std::optional<std::string>& source) {
            return render_prompt(protocol_or_default(source), level_of(level)).text;
        },
        py::arg("level"), py::arg("source") = py::none(), "Renders a protocol prompt at L1..L4.");

    m.def(
        "run_session",
        [](const std::string& agent, const std::string& level, std::uint64_t seed,
           const std::optional<std::string>& protocol, const std::optional<std::string>& script) {
            auto p = protocol_or_default(protocol);
            auto s = script_or_default(script);
            auto trace = run_session(*make_agent(agent), s, p, {level_of(level), seed, "py"});
            return write_run_log(trace);
        },
        py::arg("agent"), py::arg("level") = "L4", py::arg("seed") = 0, py::arg("protocol") = py::none(),
        py::arg("script") = py::none(), "Runs one scripted session and returns it as run-log text.");

    m.def(
        "score",
        [](const std::string& log, const std::optional<std::string>& protocol,
           const std::optional<std::string>& script, bool strict) {
            auto annotated = ingest_annotated_trace(log);
            ScoreOptions options;
            options.strict_grading = strict;
            auto scored = score_trace(annotated.trace, script_or_default(script), protocol_or_default(protocol),
                                      options, annotated.verdicts);
            auto d = score_dict(scored.score);
            if (scored.score.first_violation && scored.verdicts.back().failure)
                d["failure"] = std::string(to_string(*scored.verdicts.back().failure));
            return d;
        },
        py::arg("log"), py::arg("protocol") = py::none(), py::arg("script") = py::none(),
        py::arg("strict_grading") = false, "Scores run-log text against a script.");

    m.def(
        "summarize",
        [](const std::vector<py::object>& values) {
            std::vector<Rational> rs;
            for (const auto& v : values)
                rs.push_back(rational(v));
            return summary_dict(summarize(rs));
        },
        py::arg("values"), "Mean, sample variance and five-number summary of exact scores.");

    m.def(
        "select_optimal_formality",
        [](const std::map<std::string, py::object>& means) {
            std::map<FormalityLevel, Rational> row;
            for (const auto& [level, value] : means)
                row[level_of(level)] = rational(value);
            return std::string(to_string(select_optimal_formality(row)));
        },
        py::arg("means"), "Level with the highest mean; ties go to the lowest level.");

    m.def(
        "report",
        [](const std::string& score_grid_csv, const std::string& format) {
            auto table = report_table(parse_score_grid(score_grid_csv));
            return format == "csv" ? table.to_csv() : table.to_text();
        },
        py::arg("score_grid_csv"), py::arg("format") = "table", "Mean (SD) table from a raw score grid.");

    m.def(
        "run_experiment",
        [](const std::vector<std::string>& agents, const std::vector<std::string>& levels, int runs,
           std::uint64_t seed, const std::optional<std::string>& out_dir) {
            std::vector<ExperimentCondition> conds;
            for (const auto& spec : agents) {
                auto agent = make_agent(spec);
                for (const auto& l : levels) {
                    auto level = level_of(l);
                    conds.push_back({agent, agent->id(), level, runs, derive_condition_seed(seed, agent->id(), level)});
                }
            }
            std::vector<ConditionResult> results;
            {
                py::gil_scoped_release release;
                results = run_experiment(conds, canonical_tutor_protocol(), canonical_test_script());
                if (out_dir)
                    write_archive(*out_dir, canonical_tutor_protocol(), canonical_test_script(), results, seed);
            }
            py::list out;
            for (const auto& r : results) {
                if (r.summary)
                    out.append(summary_dict(*r.summary));
                else {
                    py::dict d;
                    d["agent"] = r.condition.agent_id;
                    d["level"] = std::string(to_string(r.condition.level));
                    d["error"] = r.error;
                    out.append(d);
                }
            }
            return out;
        },
        py::arg("agents"), py::arg("levels") = std::vector<std::string>{"L1", "L2", "L3", "L4"},
        py::arg("runs") = 20, py::arg("seed") = 0, py::arg("out_dir") = py::none(),
        "Runs every agent at every level with the built-in tutor and script.");
}
