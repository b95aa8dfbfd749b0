// SPDX-License-Identifier: Apache-2.0

#include "fastric/runlog.hpp"

#include <sstream>

#include "fastric/detail/text.hpp"

namespace fastric {

namespace {

using detail::KvPair;

class RecordReader {
public:
    RecordReader(std::vector<KvPair> fields, std::size_t line) : fields_(std::move(fields)), line_(line) {}

    /// Next field, which must carry `key`.
    const KvPair& expect(std::string_view key)
    {
        if (pos_ >= fields_.size())
            throw ParseError(ErrorCode::MissingKey, line_, "missing field '" + std::string(key) + "'");
        const KvPair& kv = fields_[pos_];
        if (kv.key != key) {
            bool known = false;
            for (auto k : {"run", "turn", "actor", "state", "text", "verdict", "failure", "expect", "level", "input"})
                known = known || kv.key == k;
            if (!known)
                throw ParseError(ErrorCode::UnknownKey, line_, "unknown field '" + kv.key + "'");
            throw ParseError(ErrorCode::MissingKey, line_,
                             "expected field '" + std::string(key) + "', found '" + kv.key + "'");
        }
        ++pos_;
        return kv;
    }

    const KvPair* optional(std::string_view key)
    {
        if (pos_ < fields_.size() && fields_[pos_].key == key)
            return &fields_[pos_++];
        return nullptr;
    }

    const std::string& bare(std::string_view key)
    {
        const KvPair& kv = expect(key);
        if (kv.quoted)
            throw ParseError(ErrorCode::BadValue, line_, "field '" + kv.key + "' must not be quoted");
        if (kv.value.empty())
            throw ParseError(ErrorCode::BadValue, line_, "field '" + kv.key + "' is empty");
        return kv.value;
    }

    int positive_int(std::string_view key)
    {
        const std::string& v = bare(key);
        auto n = detail::parse_int(v);
        if (!n || *n < 0 || *n > 1'000'000 || (key == "turn" && *n == 0) || v.front() == '+')
            throw ParseError(ErrorCode::BadValue, line_, "bad " + std::string(key) + " '" + v + "'");
        return static_cast<int>(*n);
    }

    Actor actor()
    {
        const std::string& v = bare("actor");
        if (v == "user")
            return Actor::User;
        if (v == "executor")
            return Actor::Executor;
        throw ParseError(ErrorCode::BadValue, line_, "actor must be user or executor, got '" + v + "'");
    }

    void finish()
    {
        if (pos_ < fields_.size()) {
            const auto& kv = fields_[pos_];
            bool dup = false;
            for (std::size_t i = 0; i < pos_; ++i)
                dup = dup || fields_[i].key == kv.key;
            throw ParseError(dup ? ErrorCode::DuplicateKey : ErrorCode::UnknownKey, line_,
                             (dup ? "duplicate field '" : "unexpected field '") + kv.key + "'");
        }
    }

    std::size_t line() const { return line_; }

private:
    std::vector<KvPair> fields_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

bool skippable(std::string_view line)
{
    return line.empty() || line.front() == '#';
}

} // namespace

std::string format_run_record(const std::string& run_id, const Turn& turn, const std::optional<TurnVerdict>& verdict)
{
    std::string out = "run=" + run_id + " turn=" + std::to_string(turn.index) + " actor=" +
                      std::string(to_string(turn.actor)) + " state=" + std::to_string(turn.state.value) +
                      " text=" + detail::quote(turn.text);
    if (verdict) {
        out += verdict->pass ? " verdict=pass" : " verdict=fail";
        if (!verdict->pass && verdict->failure)
            out += " failure=" + std::string(to_string(*verdict->failure));
    }
    return out;
}

std::string write_run_log(const ExecutionTrace& trace, const std::vector<std::optional<TurnVerdict>>& verdicts)
{
    std::string out;
    for (std::size_t i = 0; i < trace.turns.size(); ++i) {
        std::optional<TurnVerdict> v = i < verdicts.size() ? verdicts[i] : std::nullopt;
        out += format_run_record(trace.run_id, trace.turns[i], v);
        out += '\n';
    }
    return out;
}

AnnotatedTrace parse_run_log(std::string_view document)
{
    AnnotatedTrace out;
    auto lines = detail::split_lines(document);
    bool have_run = false;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::size_t line_no = n + 1;
        if (skippable(lines[n]))
            continue;
        RecordReader r(detail::parse_kv(lines[n], true, line_no), line_no);
        std::string run = r.bare("run");
        if (run.find_first_of("\"\\") != std::string::npos)
            throw ParseError(ErrorCode::BadValue, line_no, "bad run id");
        Turn turn;
        turn.index = r.positive_int("turn");
        turn.actor = r.actor();
        turn.state = StateId{static_cast<std::uint32_t>(r.positive_int("state"))};
        const KvPair& text = r.expect("text");
        if (!text.quoted)
            throw ParseError(ErrorCode::BadValue, line_no, "text must be double-quoted");
        turn.text = text.value;

        std::optional<TurnVerdict> verdict;
        if (const KvPair* v = r.optional("verdict")) {
            if (turn.actor == Actor::User)
                throw ParseError(ErrorCode::VerdictOnUserTurn, line_no,
                                 "VerdictOnUserTurn: turn " + std::to_string(turn.index) + " is a user turn");
            if (v->quoted || (v->value != "pass" && v->value != "fail"))
                throw ParseError(ErrorCode::BadValue, line_no, "verdict must be pass or fail");
            verdict = TurnVerdict{};
            verdict->pass = v->value == "pass";
            if (const KvPair* f = r.optional("failure")) {
                if (verdict->pass)
                    throw ParseError(ErrorCode::BadValue, line_no, "failure given for a passing verdict");
                auto kind = parse_failure_kind(f->value);
                if (f->quoted || !kind)
                    throw ParseError(ErrorCode::BadValue, line_no, "unknown failure kind '" + f->value + "'");
                verdict->failure = kind;
            } else if (!verdict->pass) {
                throw ParseError(ErrorCode::MissingKey, line_no, "failing verdict needs failure=<kind>");
            }
        } else if (r.optional("failure")) {
            throw ParseError(ErrorCode::BadValue, line_no, "failure given without verdict");
        }
        r.finish();

        if (!have_run) {
            out.trace.run_id = run;
            have_run = true;
        } else if (run != out.trace.run_id) {
            throw ParseError(ErrorCode::MixedRunIds, line_no,
                             "run id '" + run + "' differs from '" + out.trace.run_id + "'");
        }
        int expected_index = static_cast<int>(out.trace.turns.size()) + 1;
        if (turn.index != expected_index)
            throw ParseError(ErrorCode::BadValue, line_no,
                             "turn " + std::to_string(turn.index) + " out of order, expected " +
                                 std::to_string(expected_index));
        if (turn.actor != actor_for_turn(turn.index))
            throw ParseError(ErrorCode::BadValue, line_no,
                             "turn " + std::to_string(turn.index) + " must be a " +
                                 std::string(to_string(actor_for_turn(turn.index))) + " turn");
        out.trace.turns.push_back(std::move(turn));
        out.verdicts.push_back(std::move(verdict));
    }
    return out;
}

AnnotatedTrace ingest_annotated_trace(std::string_view document)
{
    return parse_run_log(document);
}

AnnotatedTrace load_run_log(const std::string& path)
{
    return parse_run_log(detail::read_file(path));
}

TestScript parse_script(std::string_view document)
{
    TestScript script;
    auto lines = detail::split_lines(document);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        std::size_t line_no = n + 1;
        if (skippable(lines[n]))
            continue;
        RecordReader r(detail::parse_kv(lines[n], true, line_no), line_no);
        ScriptStep step;
        step.index = r.positive_int("turn");
        Actor actor = r.actor();
        step.state = StateId{static_cast<std::uint32_t>(r.positive_int("state"))};
        if (actor == Actor::Executor) {
            const std::string& e = r.bare("expect");
            if (e == "ask_choice") {
                step.expected = ExpectedBehavior::ask_choice();
            } else if (e == "ask_question") {
                step.expected = ExpectedBehavior::ask_question(r.bare("level"));
            } else if (e == "evaluate_prompt") {
                step.expected = ExpectedBehavior::evaluate_and_prompt();
            } else if (e == "reprompt_navigation") {
                step.expected = ExpectedBehavior::reprompt();
            } else {
                throw ParseError(ErrorCode::UnknownAction, line_no, "unknown expectation '" + e + "'");
            }
        } else {
            const KvPair& in = r.expect("input");
            if (in.quoted)
                step.expected = ExpectedBehavior::user(in.value);
            else if (in.value == "@correct")
                step.expected = ExpectedBehavior::user(UserRule::CorrectAnswer);
            else if (in.value == "@incorrect")
                step.expected = ExpectedBehavior::user(UserRule::IncorrectAnswer);
            else
                throw ParseError(ErrorCode::BadValue, line_no,
                                 "input must be a quoted literal, @correct or @incorrect");
        }
        r.finish();
        if (step.index != script.total_turns() + 1)
            throw ParseError(ErrorCode::BadValue, line_no, "turn " + std::to_string(step.index) + " out of order");
        if (actor != actor_for_turn(step.index))
            throw ParseError(ErrorCode::BadValue, line_no, "turn parity does not match actor");
        script.steps.push_back(std::move(step));
    }
    return script;
}

std::string render_script(const TestScript& script)
{
    using K = ExpectedBehavior::Kind;
    std::ostringstream os;
    for (const auto& s : script.steps) {
        os << "turn=" << s.index << " actor=" << to_string(s.actor()) << " state=" << s.state.value;
        switch (s.expected.kind) {
        case K::AskDifficultyChoice: os << " expect=ask_choice"; break;
        case K::AskQuestion: os << " expect=ask_question level=" << s.expected.difficulty; break;
        case K::EvaluateAndPrompt: os << " expect=evaluate_prompt"; break;
        case K::RePromptNavigation: os << " expect=reprompt_navigation"; break;
        case K::ScriptedUserInput:
            switch (s.expected.rule) {
            case UserRule::Literal: os << " input=" << detail::quote(s.expected.literal); break;
            case UserRule::CorrectAnswer: os << " input=@correct"; break;
            case UserRule::IncorrectAnswer: os << " input=@incorrect"; break;
            }
            break;
        }
        os << '\n';
    }
    return os.str();
}

TestScript load_script(const std::string& path)
{
    return parse_script(detail::read_file(path));
}

} // namespace fastric
