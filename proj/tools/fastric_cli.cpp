// SPDX-License-Identifier: Apache-2.0
//
// fastric: validate, render, run, score and report on tutor protocols.
// Exit status: 0 success, 1 validation or scoring error, 2 transport error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fastric/agents.hpp"
#include "fastric/detail/text.hpp"
#include "fastric/experiment.hpp"
#include "fastric/report.hpp"
#include "fastric/runlog.hpp"

using namespace fastric;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kTransport = 2;

bool is_transport(ErrorCode code)
{
    return code == ErrorCode::TransportFailure || code == ErrorCode::MissingCredential ||
           code == ErrorCode::MalformedResponse || code == ErrorCode::Timeout;
}

FormalityLevel level_arg(const std::string& text)
{
    auto level = parse_level(text);
    if (!level)
        throw Error(ErrorCode::InvalidArgument, "unknown level '" + text + "', expected L1..L4");
    return *level;
}

void emit(const std::string& text, const std::string& out)
{
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::Io, "cannot write " + out);
    f << text;
}

ProtocolSpec protocol_arg(const std::string& path)
{
    return path.empty() ? canonical_tutor_protocol() : load_protocol(path);
}

TestScript script_arg(const std::string& path)
{
    return path.empty() ? canonical_test_script() : load_script(path);
}

// Summaries come either from an archive or from a raw score grid.
std::vector<ConditionSummary> summaries_from(const std::string& runs_dir, const std::string& scores)
{
    if (!scores.empty())
        return parse_score_grid(detail::read_file(scores));
    if (runs_dir.empty())
        throw Error(ErrorCode::InvalidArgument, "one of --runs-dir or --scores is required");
    return read_archive_summary(runs_dir);
}

int cmd_validate(const std::string& file)
{
    auto protocol = load_protocol(file);
    auto fsm = compile_protocol(protocol);
    auto report = validate_fsm(fsm);
    for (const auto& w : report.warnings)
        std::cout << "warning " << w.code << ": " << w.message << "\n";
    std::cout << "ok: " << protocol.name << ", " << protocol.states.size() << " states, " << protocol.triggers.size()
              << " triggers\n";
    return kOk;
}

int cmd_render(const std::string& file, const std::string& level, const std::string& out)
{
    emit(render_prompt(protocol_arg(file), level_arg(level)).text, out);
    return kOk;
}

int cmd_score(const std::string& trace_path, const std::string& script_path, const std::string& protocol_path,
              bool strict, bool ignore_annotations)
{
    auto protocol = protocol_arg(protocol_path);
    auto script = script_arg(script_path);
    auto log = ingest_annotated_trace(detail::read_file(trace_path));
    if (ignore_annotations)
        log.verdicts.clear();
    ScoreOptions options;
    options.strict_grading = strict;
    auto scored = score_trace(log.trace, script, protocol, options, log.verdicts);
    const auto& s = scored.score;
    std::cout << s.correct_turns << "/" << s.total_turns << " = " << format_fixed2(s.value());
    if (s.first_violation) {
        const auto& v = scored.verdicts.back();
        std::cout << " (failed turn " << *s.first_violation;
        if (v.failure)
            std::cout << ": " << to_string(*v.failure);
        if (!v.note.empty())
            std::cout << ", " << v.note;
        std::cout << ")";
    } else if (static_cast<int>(log.trace.turns.size()) < s.total_turns) {
        std::cout << " (trace ends after turn " << log.trace.turns.size() << ")";
    }
    std::cout << "\n";
    return kOk;
}

// Re-judges every archived log and compares with summary.json.
int cmd_score_archive(const std::string& dir, bool strict)
{
    auto archive = load_archive(dir);
    ScoreOptions options;
    options.strict_grading = strict;
    std::vector<std::string> skipped;
    auto fresh = rescore_archive(archive, options, &skipped);
    auto stored = read_archive_summary(dir);
    for (const auto& note : skipped)
        std::cerr << "skipped: " << note << "\n";
    int mismatches = 0;
    for (const auto& f : fresh) {
        auto it = std::find_if(stored.begin(), stored.end(),
                               [&](const ConditionSummary& s) { return s.agent == f.agent && s.level == f.level; });
        bool same = it != stored.end() && it->scores == f.scores && it->mean == f.mean && it->variance == f.variance;
        mismatches += same ? 0 : 1;
        std::cout << f.agent << " " << to_string(f.level) << " " << f.cell() << " "
                  << to_fraction_string(f.mean) << (same ? "" : "  MISMATCH") << "\n";
    }
    return mismatches == 0 ? kOk : kInvalid;
}

struct RunArgs {
    std::string protocol;
    std::vector<std::string> agents;
    std::string script;
    int runs = 20;
    std::uint64_t seed = 0;
    std::string out;
    std::vector<std::string> levels;
    unsigned threads = 0;
};

int cmd_run(const RunArgs& a)
{
    auto protocol = protocol_arg(a.protocol);
    auto script = script_arg(a.script);
    std::vector<FormalityLevel> levels;
    for (const auto& l : a.levels)
        levels.push_back(level_arg(l));
    if (levels.empty())
        levels.assign(kAllLevels.begin(), kAllLevels.end());

    std::vector<ExperimentCondition> conds;
    for (const auto& spec : a.agents) {
        auto agent = make_agent(spec);
        for (auto level : levels)
            conds.push_back({agent, agent->id(), level, a.runs, derive_condition_seed(a.seed, agent->id(), level)});
    }
    ExperimentOptions options;
    options.threads = a.threads;
    auto results = run_experiment(conds, protocol, script, options);
    write_archive(a.out, protocol, script, results, a.seed);

    int status = kOk;
    std::vector<ConditionSummary> summaries;
    for (const auto& r : results) {
        for (const auto& run : r.runs)
            if (run.status == RunStatus::Aborted)
                std::cerr << r.condition.agent_id << " " << to_string(r.condition.level) << " " << run.run_id
                          << " aborted: " << run.abort_reason << "\n";
        if (r.summary)
            summaries.push_back(*r.summary);
        else {
            std::cerr << r.condition.agent_id << " " << to_string(r.condition.level) << ": " << r.error << "\n";
            status = kTransport;
        }
    }
    if (!summaries.empty())
        std::cout << report_table(summaries).to_text();
    std::cout << "archive written to " << a.out << "\n";
    return status;
}

int cmd_report(const std::string& runs_dir, const std::string& scores, const std::string& format,
               const std::string& out)
{
    auto table = report_table(summaries_from(runs_dir, scores));
    emit(format == "csv" ? table.to_csv() : table.to_text(), out);
    return kOk;
}

int cmd_optimum(const std::string& runs_dir, const std::string& scores)
{
    std::map<std::string, std::map<FormalityLevel, ConditionSummary>> rows;
    std::vector<std::string> order;
    for (auto& s : summaries_from(runs_dir, scores)) {
        if (!rows.count(s.agent))
            order.push_back(s.agent);
        rows[s.agent][s.level] = s;
    }
    for (const auto& agent : order) {
        auto best = select_optimal_formality(rows[agent]);
        std::cout << agent << ": " << to_string(best) << " (" << rows[agent][best].mean_text() << ")\n";
    }
    return kOk;
}

int cmd_distributions(const std::string& runs_dir, const std::string& scores, const std::string& out)
{
    std::vector<ConditionSummary> summaries;
    if (scores.empty() && !runs_dir.empty())
        summaries = rescore_archive(load_archive(runs_dir));
    else
        summaries = summaries_from(runs_dir, scores);
    emit(export_distributions(summaries), out);
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Finite-state tutor protocols: render, run, score and report"};
    app.require_subcommand(1);

    std::string file;
    std::string level;
    std::string out;
    auto* validate = app.add_subcommand("validate", "Parse and compile a protocol file");
    validate->add_option("file", file, "Protocol file")->required();

    auto* render = app.add_subcommand("render", "Render a protocol as a prompt at one formality level");
    render->add_option("file", file, "Protocol file")->required();
    render->add_option("--level", level, "L1..L4")->required();
    render->add_option("-o,--out", out, "Output file (default stdout)");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run scripted sessions and write an archive");
    run->add_option("--protocol", run_args.protocol, "Protocol file (default: built-in tutor)");
    run->add_option("--agent", run_args.agents, "oracle | fault:<kind> | endpoint:<config.json>")->required();
    run->add_option("--script", run_args.script, "Test script (default: built-in 21-turn script)");
    run->add_option("--runs", run_args.runs, "Runs per condition")->check(CLI::PositiveNumber);
    run->add_option("--seed", run_args.seed, "Master seed");
    run->add_option("--out", run_args.out, "Archive directory")->required();
    run->add_option("--levels", run_args.levels, "Levels to run (default all)")->delimiter(',');
    run->add_option("--threads", run_args.threads, "Worker threads (0: hardware concurrency)");

    std::string trace;
    std::string script;
    std::string protocol;
    std::string runs_dir;
    bool strict = false;
    bool ignore_annotations = false;
    auto* score = app.add_subcommand("score", "Score one trace, or re-score every log in an archive");
    auto* trace_opt = score->add_option("--trace", trace, "Run log");
    auto* dir_opt = score->add_option("--runs-dir", runs_dir, "Archive directory");
    trace_opt->excludes(dir_opt);
    score->add_option("--script", script, "Test script (default: built-in)");
    score->add_option("--protocol", protocol, "Protocol file (default: built-in tutor)");
    score->add_flag("--strict-grading", strict, "Check evaluation direction against the student's answer");
    score->add_flag("--ignore-annotations", ignore_annotations, "Judge every turn even if the log carries verdicts");

    std::string scores;
    std::string format = "table";
    auto* report = app.add_subcommand("report", "Mean (SD) table per agent and level");
    report->add_option("--runs-dir", runs_dir, "Archive directory");
    report->add_option("--scores", scores, "Raw score grid CSV instead of an archive");
    report->add_option("--format", format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
    report->add_option("-o,--out", out, "Output file (default stdout)");

    auto* optimum = app.add_subcommand("optimum", "Best formality level per agent");
    optimum->add_option("--runs-dir", runs_dir, "Archive directory");
    optimum->add_option("--scores", scores, "Raw score grid CSV instead of an archive");

    auto* dist = app.add_subcommand("distributions", "Five-number summary and mean per condition (CSV)");
    dist->add_option("--runs-dir", runs_dir, "Archive directory");
    dist->add_option("--scores", scores, "Raw score grid CSV instead of an archive");
    dist->add_option("-o,--out", out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate)
            return cmd_validate(file);
        if (*render)
            return cmd_render(file, level, out);
        if (*run)
            return cmd_run(run_args);
        if (*score) {
            if (!runs_dir.empty())
                return cmd_score_archive(runs_dir, strict);
            if (trace.empty())
                throw Error(ErrorCode::InvalidArgument, "one of --trace or --runs-dir is required");
            return cmd_score(trace, script, protocol, strict, ignore_annotations);
        }
        if (*report)
            return cmd_report(runs_dir, scores, format, out);
        if (*optimum)
            return cmd_optimum(runs_dir, scores);
        if (*dist)
            return cmd_distributions(runs_dir, scores, out);
    } catch (const CompileError& e) {
        std::cerr << "error: " << e.report().to_string();
        return kInvalid;
    } catch (const Error& e) {
        std::cerr << "error " << to_string(e.code()) << ": " << e.what() << "\n";
        return is_transport(e.code()) ? kTransport : kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kOk;
}
