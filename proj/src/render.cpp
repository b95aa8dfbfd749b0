// SPDX-License-Identifier: Apache-2.0

#include "fastric/render.hpp"

#include <regex>
#include <sstream>
#include <vector>

#include "fastric/detail/text.hpp"

namespace fastric {

std::string_view to_string(FormalityLevel level)
{
    switch (level) {
    case FormalityLevel::L1: return "L1";
    case FormalityLevel::L2: return "L2";
    case FormalityLevel::L3: return "L3";
    case FormalityLevel::L4: return "L4";
    }
    return "L?";
}

std::optional<FormalityLevel> parse_level(std::string_view text)
{
    std::string t = detail::to_upper(detail::trim(text));
    for (auto l : kAllLevels)
        if (t == to_string(l))
            return l;
    return std::nullopt;
}

std::size_t word_count(std::string_view text)
{
    std::istringstream is{std::string(text)};
    std::size_t n = 0;
    std::string w;
    while (is >> w)
        ++n;
    return n;
}

namespace {

RolePlan shape_of(RolePlan plan)
{
    for (auto& a : plan.actions) {
        if (auto* q = std::get_if<AskQuestion>(&a))
            q->level.clear();
        if (auto* n = std::get_if<PromptNavigation>(&a)) {
            n->stay_label.clear();
            n->change_label.clear();
        }
    }
    return plan;
}

/// Collects numbered lines for one step block.
class StepWriter {
public:
    void preamble(std::string line) { pre_.push_back(std::move(line)); }
    void item(std::string line) { items_.push_back(std::move(line)); }

    void flush(std::ostream& os, const std::string& heading) const
    {
        os << heading << '\n';
        for (const auto& l : pre_)
            os << l << '\n';
        for (std::size_t i = 0; i < items_.size(); ++i)
            os << (i + 1) << ". " << items_[i] << '\n';
    }

private:
    std::vector<std::string> pre_;
    std::vector<std::string> items_;
};

class PromptRenderer {
public:
    PromptRenderer(const ProtocolSpec& p, FormalityLevel level) : p_(p), level_(level) {}

    std::string render()
    {
        const auto& a = p_.agents;
        os_ << kInstructionBegin << '\n';
        os_ << "Note: \"" << a.executor << "\" refers to " << a.executor_description << "; \"" << a.user
            << "\" refers to " << a.user_description << ".\n";
        os_ << '\n';
        initial_step();
        if (level_ <= FormalityLevel::L2) {
            os_ << '\n';
            unified_step();
        } else {
            for (const auto& s : p_.loop_states()) {
                if (p_.finals.contains(s.id))
                    continue;
                os_ << '\n';
                separated_step(s);
            }
            if (level_ == FormalityLevel::L4 && !p_.constraints.empty()) {
                os_ << "\n## Critical Rules\n";
                int k = 1;
                for (const auto& c : p_.constraints)
                    os_ << k++ << ". " << c.text << '\n';
            }
        }
        os_ << kInstructionEnd << '\n';
        return os_.str();
    }

private:
    const std::string& me() const { return p_.agents.executor; }
    const std::string& you() const { return p_.agents.user; }

    std::string step_title(StateId id) const
    {
        return "Step " + std::to_string(p_.step_number(id)) + ": " + p_.label_of(id) + " problems";
    }

    std::string choice_list() const
    {
        auto ts = p_.triggers_from(p_.initial);
        std::string out;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (i > 0)
                out += (i + 1 == ts.size()) ? " and " : ", ";
            out += ts[i].token.str();
        }
        return out;
    }

    void initial_step()
    {
        StepWriter w;
        if (level_ >= FormalityLevel::L2)
            w.preamble(me() + " will start with this step.");
        const RolePlan* plan = p_.role_for(p_.initial);
        RolePlan fallback = implicit_initial_plan();
        if (!plan)
            plan = &fallback;
        for (const auto& a : plan->actions) {
            if (std::holds_alternative<AskDifficultyChoice>(a)) {
                w.item(me() + " will ask " + you() + " to choose between " + choice_list() + " problems.");
            } else if (std::holds_alternative<Wait>(a)) {
                if (level_ == FormalityLevel::L2 || level_ == FormalityLevel::L4)
                    w.item(me() + " will wait for your answer.");
            }
        }
        if (level_ == FormalityLevel::L2) {
            w.item(me() + " will proceed to Step 1.");
        } else if (level_ >= FormalityLevel::L3) {
            std::string jumps;
            for (const auto& t : p_.triggers_from(p_.initial)) {
                jumps += jumps.empty() ? "If " : "; if ";
                jumps += you() + " choose " + t.token.str() + ", " + me() + " will jump to Step " +
                         std::to_string(p_.step_number(t.to));
            }
            if (!jumps.empty())
                w.item(jumps + ".");
        }
        w.flush(os_, "## Step 0");
    }

    void unified_step()
    {
        if (!has_symmetric_states(p_))
            throw Error(ErrorCode::AsymmetricStates,
                        std::string(to_string(level_)) + " needs loop states with identical role plans");
        auto loops = p_.loop_states();
        const RolePlan* plan = nullptr;
        for (const auto& s : loops)
            if ((plan = p_.role_for(s.id)))
                break;
        StepWriter w;
        bool l1 = level_ == FormalityLevel::L1;
        if (!l1)
            w.preamble(me() + " will now enter a loop based on your choice.");
        bool evaluated = false;
        for (const auto& a : plan ? plan->actions : std::vector<RoleAction>{}) {
            if (std::holds_alternative<AskQuestion>(a)) {
                w.item(me() + (l1 ? " will first ask ONE " : " will ask ONE ") + p_.subject +
                       " question based on your choice of difficulty level.");
            } else if (auto* ev = std::get_if<Evaluate>(&a)) {
                if (!l1) {
                    w.item(me() + " will evaluate the answer by saying ONLY \"" + ev->correct_verdict() +
                           "\" OR \"" + ev->wrong_verdict() + "\".");
                    evaluated = true;
                }
            } else if (auto* nav = std::get_if<PromptNavigation>(&a)) {
                std::string q = nav->stay.str() + " at the same level, or " + nav->change.str() + " difficulty level?";
                if (l1) {
                    w.item("After " + you() + " answer the question, " + me() + " will then ask " + you() + ": \"" +
                           q + "\"");
                } else {
                    w.item(std::string(evaluated ? "After evaluating" : "Then") + ", " + me() + " must ask: \"" + q +
                           "\".");
                    w.item("If your command is \"" + nav->stay.str() + "\", " + me() +
                           " will stay at the same difficulty level; if your command is \"" + nav->change.str() +
                           "\", " + me() + " will change the difficulty level.");
                }
            }
        }
        w.flush(os_, "## Step 1");
    }

    std::string destination(StateId from, const TriggerSymbol& token) const
    {
        for (const auto& t : p_.triggers)
            if (t.from == from && t.token == token)
                return t.to == from ? me() + " will stay in this step"
                                    : me() + " will jump to " + step_title(t.to);
        return me() + " will stay in this step";
    }

    void separated_step(const State& s)
    {
        const RolePlan* plan = p_.role_for(s.id);
        StepWriter w;
        bool l4 = level_ == FormalityLevel::L4;
        bool evaluated = false;
        for (const auto& a : plan ? plan->actions : std::vector<RoleAction>{}) {
            if (std::holds_alternative<AskDifficultyChoice>(a)) {
                w.item(me() + " will ask " + you() + " to choose between " + choice_list() + " problems.");
            } else if (auto* q = std::get_if<AskQuestion>(&a)) {
                w.item(me() + " will ask ONE " + q->level + " " + p_.subject + " question.");
            } else if (std::holds_alternative<Wait>(a)) {
                if (l4)
                    w.item(me() + " wait for your answer.");
            } else if (auto* ev = std::get_if<Evaluate>(&a)) {
                w.item(me() + " will evaluate the answer by saying ONLY \"" + ev->correct_verdict() + "\" OR \"" +
                       ev->wrong_verdict() + "\".");
                evaluated = true;
            } else if (auto* nav = std::get_if<PromptNavigation>(&a)) {
                std::string lead = std::string(evaluated ? "After evaluating" : "Then") + ", " + me();
                if (l4)
                    w.item(lead + " MUST ask the following question exactly: \"" + nav->question() + "\"");
                else
                    w.item(lead + " must ask: \"" + nav->question() + "\".");
                w.item("If your command is \"" + nav->stay.str() + "\", " + destination(s.id, nav->stay) +
                       "; if your command is \"" + nav->change.str() + "\", " + destination(s.id, nav->change) + ".");
            }
        }
        w.flush(os_, "## " + step_title(s.id));
    }

    const ProtocolSpec& p_;
    FormalityLevel level_;
    std::ostringstream os_;
};

} // namespace

bool has_symmetric_states(const ProtocolSpec& p)
{
    std::optional<RolePlan> first;
    for (const auto& s : p.loop_states()) {
        if (p.finals.contains(s.id))
            continue;
        const RolePlan* plan = p.role_for(s.id);
        RolePlan shape = plan ? shape_of(*plan) : RolePlan{};
        if (!first)
            first = shape;
        else if (!(*first == shape))
            return false;
    }
    return true;
}

RenderedPrompt render_prompt(const ProtocolSpec& p, FormalityLevel level)
{
    RenderedPrompt r;
    r.level = level;
    r.text = PromptRenderer(p, level).render();
    r.token_estimate = word_count(r.text);
    return r;
}

FeatureVector formality_features(const RenderedPrompt& r)
{
    static const std::regex block(R"(^## Step [0-9]+: .+$)");
    static const std::regex numbered(R"(^[0-9]+\. .*$)");
    static const std::regex emphasis(R"(\b(MUST|ONLY)\b)");

    FeatureVector f;
    for (const auto& line : detail::split_lines(r.text)) {
        if (std::regex_match(line, block))
            ++f.separated_blocks;
        if (std::regex_match(line, numbered))
            ++f.numbered_substeps;
        if (detail::contains_ci(line, "wait for your answer"))
            ++f.waits;
        if (line == "## Critical Rules")
            f.critical_rules = true;
        f.emphasized_imperatives += static_cast<int>(
            std::distance(std::sregex_iterator(line.begin(), line.end(), emphasis), std::sregex_iterator()));
    }
    return f;
}

} // namespace fastric
