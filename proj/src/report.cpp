// SPDX-License-Identifier: Apache-2.0

#include "fastric/report.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fastric/detail/text.hpp"
#include "fastric/runlog.hpp"

namespace fastric {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t display_width(std::string_view s)
{
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(std::string_view s, std::size_t width)
{
    std::string out(s);
    out.append(width - std::min(width, display_width(s)), ' ');
    return out;
}

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string ReportTable::cell_text(const std::string& agent, FormalityLevel level) const
{
    auto it = cells.find({agent, level});
    return it == cells.end() ? std::string(kMissingCell) : it->second.cell();
}

std::string ReportTable::to_text() const
{
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"Agent"};
    for (auto l : levels)
        header.emplace_back(to_string(l));
    grid.push_back(header);
    for (const auto& a : agents) {
        std::vector<std::string> row{a};
        for (auto l : levels)
            row.push_back(cell_text(a, l));
        grid.push_back(std::move(row));
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], display_width(row[i]));

    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0)
                line += "  ";
            line += pad(row[i], widths[i]);
        }
        while (!line.empty() && line.back() == ' ')
            line.pop_back();
        out += line + "\n";
    };
    emit(grid[0]);
    std::string rule;
    for (std::size_t i = 0; i < widths.size(); ++i)
        rule += (i ? "  " : "") + std::string(widths[i], '-');
    out += rule + "\n";
    for (std::size_t r = 1; r < grid.size(); ++r)
        emit(grid[r]);
    if (!footnotes.empty())
        out += "\n";
    for (const auto& f : footnotes)
        out += f + "\n";
    return out;
}

std::string ReportTable::to_csv() const
{
    std::string out = "agent";
    for (auto l : levels)
        out += "," + std::string(to_string(l));
    out += "\n";
    for (const auto& a : agents) {
        out += csv_field(a);
        for (auto l : levels)
            out += "," + csv_field(cell_text(a, l));
        out += "\n";
    }
    return out;
}

ReportTable report_table(const std::vector<ConditionSummary>& summaries)
{
    ReportTable t;
    int aborted = 0;
    for (const auto& s : summaries) {
        if (!t.cells.emplace(std::pair{s.agent, s.level}, s).second)
            throw Error(ErrorCode::DuplicateCondition,
                        "duplicate condition " + s.agent + " " + std::string(to_string(s.level)));
        if (std::find(t.agents.begin(), t.agents.end(), s.agent) == t.agents.end())
            t.agents.push_back(s.agent);
        aborted += s.aborted;
    }
    t.footnotes.push_back("Values show mean (SD) conformance rate; SD is the sample standard deviation (n - 1).");
    if (aborted > 0) {
        std::string note = "Aborted runs excluded from the mean:";
        for (const auto& s : summaries)
            if (s.aborted > 0)
                note += " " + s.agent + " " + std::string(to_string(s.level)) + " " + std::to_string(s.aborted) + ";";
        note.back() = '.';
        t.footnotes.push_back(note);
    }
    return t;
}

std::pair<double, double> parse_cell(std::string_view cell)
{
    std::string s(detail::trim(cell));
    double mean = 0, sd = 0;
    char open = 0, close = 0;
    std::istringstream is(s);
    if (!(is >> mean >> open >> sd >> close) || open != '(' || close != ')' || !(is >> std::ws).eof())
        throw Error(ErrorCode::BadValue, "bad report cell '" + s + "'");
    return {mean, sd};
}

FormalityLevel select_optimal_formality(const std::map<FormalityLevel, Rational>& means)
{
    if (means.empty())
        throw Error(ErrorCode::InvalidArgument, "no levels to choose from");
    auto best = means.begin();
    for (auto it = means.begin(); it != means.end(); ++it)
        if (it->second > best->second)
            best = it;
    return best->first;
}

FormalityLevel select_optimal_formality(const std::map<FormalityLevel, ConditionSummary>& row)
{
    std::map<FormalityLevel, Rational> means;
    for (const auto& [level, s] : row)
        means[level] = s.mean;
    return select_optimal_formality(means);
}

std::string export_distributions(const std::vector<ConditionSummary>& summaries)
{
    std::string out = "agent,level,n,min,q1,median,q3,max,mean\n";
    for (const auto& s : summaries) {
        if (s.scores.empty())
            throw Error(ErrorCode::MissingRawScores,
                        "no raw scores for " + s.agent + " " + std::string(to_string(s.level)));
        out += csv_field(s.agent) + "," + std::string(to_string(s.level)) + "," + std::to_string(s.scores.size());
        for (const auto& q : s.five_number)
            out += "," + format_fixed(q, 6);
        out += "," + format_fixed(s.mean, 6) + "\n";
    }
    return out;
}

std::vector<ConditionSummary> parse_score_grid(std::string_view csv, int denominator)
{
    std::vector<ConditionSummary> out;
    auto lines = detail::split_lines(csv);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::string line(detail::trim(lines[n]));
        if (line.empty() || line.front() == '#')
            continue;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw ParseError(ErrorCode::SyntaxError, n + 1, "expected agent,level,scores");
        auto level = parse_level(detail::trim(line.substr(c1 + 1, c2 - c1 - 1)));
        if (!level)
            throw ParseError(ErrorCode::BadValue, n + 1, "bad level");
        std::vector<ConformanceScore> scores;
        std::istringstream is(line.substr(c2 + 1));
        std::string tok;
        while (is >> tok) {
            auto k = detail::parse_int(tok);
            if (!k || *k < 0 || *k > denominator)
                throw ParseError(ErrorCode::BadValue, n + 1, "bad score '" + tok + "'");
            ConformanceScore sc{static_cast<int>(*k), denominator, std::nullopt};
            if (sc.correct_turns < denominator)
                sc.first_violation = sc.correct_turns + 1;
            scores.push_back(sc);
        }
        ConditionSummary s = summarize(scores);
        s.agent = std::string(detail::trim(line.substr(0, c1)));
        s.level = *level;
        out.push_back(std::move(s));
    }
    return out;
}

// Archive -------------------------------------------------------------------

std::string sanitize_agent_id(std::string_view agent_id)
{
    std::string out;
    for (char c : agent_id)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
    return out.empty() ? "agent" : out;
}

namespace {

json score_json(const ConformanceScore& s)
{
    json j{{"correct", s.correct_turns}, {"total", s.total_turns}};
    j["first_violation"] = s.first_violation ? json(*s.first_violation) : json(nullptr);
    return j;
}

ConformanceScore score_from_json(const json& j)
{
    ConformanceScore s{j.at("correct").get<int>(), j.at("total").get<int>(), std::nullopt};
    if (!j.at("first_violation").is_null())
        s.first_violation = j.at("first_violation").get<int>();
    return s;
}

json summary_json(const ConditionSummary& s)
{
    json scores = json::array();
    for (const auto& sc : s.scores)
        scores.push_back(score_json(sc));
    json five = json::array();
    for (const auto& q : s.five_number)
        five.push_back(to_fraction_string(q));
    return json{{"agent", s.agent},
                {"level", std::string(to_string(s.level))},
                {"completed", s.scores.size()},
                {"aborted", s.aborted},
                {"mean", to_fraction_string(s.mean)},
                {"variance", to_fraction_string(s.variance)},
                {"cell", s.cell()},
                {"five_number", five},
                {"scores", scores}};
}

std::string condition_dir(const std::string& agent, FormalityLevel level)
{
    return sanitize_agent_id(agent) + "_" + std::string(to_string(level));
}

FormalityLevel level_from(const json& j)
{
    auto l = parse_level(j.get<std::string>());
    if (!l)
        throw Error(ErrorCode::BadValue, "bad level in archive");
    return *l;
}

json read_json(const std::string& path)
{
    json j = json::parse(detail::read_file(path), nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorCode::Io, path + " is not valid JSON");
    return j;
}

} // namespace

void write_archive(const std::string& dir, const ProtocolSpec& protocol, const TestScript& script,
                   const std::vector<ConditionResult>& results, std::uint64_t master_seed)
{
    std::set<std::string> dirs;
    for (const auto& r : results)
        if (!dirs.insert(condition_dir(r.condition.agent_id, r.condition.level)).second)
            throw Error(ErrorCode::DuplicateCondition, "two conditions map to directory " +
                                                           condition_dir(r.condition.agent_id, r.condition.level));
    fs::create_directories(dir);
    detail::write_file((fs::path(dir) / "protocol.fastric").string(), render_protocol_file(protocol));
    detail::write_file((fs::path(dir) / "script.script").string(), render_script(script));

    json summary{{"master_seed", master_seed}, {"conditions", json::array()}};
    for (const auto& r : results) {
        std::string sub = condition_dir(r.condition.agent_id, r.condition.level);
        fs::path cdir = fs::path(dir) / sub;
        fs::create_directories(cdir);
        json runs = json::array();
        for (const auto& rec : r.runs) {
            std::string file = rec.run_id + ".log";
            std::vector<std::optional<TurnVerdict>> verdicts;
            if (rec.scored)
                for (const auto& v : rec.scored->verdicts)
                    verdicts.emplace_back(v);
            // user turns carry no verdict
            for (std::size_t i = 0; i < verdicts.size() && i < rec.trace.turns.size(); ++i)
                if (rec.trace.turns[i].actor == Actor::User)
                    verdicts[i].reset();
            detail::write_file((cdir / file).string(), write_run_log(rec.trace, verdicts));
            json jr{{"index", rec.index},
                    {"seed", rec.seed},
                    {"file", file},
                    {"status", rec.status == RunStatus::Completed ? "completed" : "aborted"},
                    {"unparseable_question", rec.trace.unparseable_question}};
            if (rec.status == RunStatus::Aborted)
                jr["abort_reason"] = rec.abort_reason;
            jr["score"] = rec.scored ? json(to_fraction_string(rec.scored->score.value())) : json(nullptr);
            runs.push_back(std::move(jr));
        }
        json manifest{{"agent", r.condition.agent_id},
                      {"level", std::string(to_string(r.condition.level))},
                      {"seed", r.condition.seed},
                      {"runs", runs}};
        detail::write_file((cdir / "manifest.json").string(), manifest.dump(2) + "\n");

        json entry = r.summary ? summary_json(*r.summary)
                               : json{{"agent", r.condition.agent_id},
                                      {"level", std::string(to_string(r.condition.level))},
                                      {"completed", 0},
                                      {"aborted", r.runs.size()},
                                      {"error", r.error}};
        entry["directory"] = sub;
        summary["conditions"].push_back(std::move(entry));
    }
    detail::write_file((fs::path(dir) / "summary.json").string(), summary.dump(2) + "\n");
}

RunArchive load_archive(const std::string& dir)
{
    RunArchive a;
    a.root = dir;
    a.protocol = load_protocol((fs::path(dir) / "protocol.fastric").string());
    a.script = load_script((fs::path(dir) / "script.script").string());
    json summary = read_json((fs::path(dir) / "summary.json").string());
    try {
        a.master_seed = summary.at("master_seed").get<std::uint64_t>();
        for (const auto& c : summary.at("conditions")) {
            ArchivedCondition ac;
            ac.directory = c.at("directory").get<std::string>();
            json m = read_json((fs::path(dir) / ac.directory / "manifest.json").string());
            ac.agent = m.at("agent").get<std::string>();
            ac.level = level_from(m.at("level"));
            ac.seed = m.at("seed").get<std::uint64_t>();
            for (const auto& r : m.at("runs")) {
                ArchivedRun ar;
                ar.index = r.at("index").get<int>();
                ar.seed = r.at("seed").get<std::uint64_t>();
                ar.file = r.at("file").get<std::string>();
                ar.status = r.at("status").get<std::string>() == "completed" ? RunStatus::Completed : RunStatus::Aborted;
                ar.abort_reason = r.value("abort_reason", "");
                ar.unparseable_question = r.at("unparseable_question").get<bool>();
                if (!r.at("score").is_null())
                    ar.score = parse_fraction(r.at("score").get<std::string>());
                ac.runs.push_back(std::move(ar));
            }
            a.conditions.push_back(std::move(ac));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, "malformed archive in " + dir + ": " + e.what());
    }
    return a;
}

std::vector<ConditionSummary> rescore_archive(const RunArchive& archive, const ScoreOptions& options,
                                              std::vector<std::string>* skipped)
{
    std::vector<ConditionSummary> out;
    for (const auto& c : archive.conditions) {
        std::vector<ConformanceScore> scores;
        int aborted = 0;
        for (const auto& r : c.runs) {
            if (r.status == RunStatus::Aborted) {
                ++aborted;
                continue;
            }
            auto log = load_run_log((fs::path(archive.root) / c.directory / r.file).string());
            // judge afresh rather than trusting stored verdicts
            scores.push_back(score_trace(log.trace, archive.script, archive.protocol, options).score);
        }
        if (scores.empty()) {
            if (skipped)
                skipped->push_back(c.agent + " " + std::string(to_string(c.level)) + ": all " +
                                   std::to_string(aborted) + " run(s) aborted");
            continue;
        }
        ConditionSummary s = summarize(scores);
        s.agent = c.agent;
        s.level = c.level;
        s.aborted = aborted;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ConditionSummary> read_archive_summary(const std::string& dir)
{
    json summary = read_json((fs::path(dir) / "summary.json").string());
    std::vector<ConditionSummary> out;
    try {
        for (const auto& c : summary.at("conditions")) {
            if (c.at("completed").get<int>() == 0)
                continue;
            std::vector<ConformanceScore> scores;
            for (const auto& s : c.at("scores"))
                scores.push_back(score_from_json(s));
            ConditionSummary s = summarize(scores);
            s.agent = c.at("agent").get<std::string>();
            s.level = level_from(c.at("level"));
            s.aborted = c.at("aborted").get<int>();
            if (to_fraction_string(s.mean) != c.at("mean").get<std::string>())
                throw Error(ErrorCode::Io, "summary.json mean disagrees with its scores for " + s.agent);
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, "malformed summary.json in " + dir + ": " + e.what());
    }
    return out;
}

} // namespace fastric
