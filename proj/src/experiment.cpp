// SPDX-License-Identifier: Apache-2.0

#include "fastric/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace fastric {

std::uint64_t derive_condition_seed(std::uint64_t master, std::string_view agent_id, FormalityLevel level)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    feed(agent_id);
    feed("/");
    feed(to_string(level));
    return splitmix64(master ^ h);
}

std::uint64_t derive_run_seed(std::uint64_t condition_seed, int index)
{
    return splitmix64(condition_seed + static_cast<std::uint64_t>(index));
}

double ConditionSummary::sd() const
{
    return std::sqrt(to_double(variance));
}

std::string ConditionSummary::mean_text() const
{
    return format_fixed2(mean);
}

std::string ConditionSummary::sd_text() const
{
    return format_sqrt_fixed2(variance);
}

std::string ConditionSummary::cell() const
{
    return mean_text() + " (" + sd_text() + ")";
}

Rational quantile(const std::vector<Rational>& sorted, Rational p)
{
    if (sorted.empty())
        throw Error(ErrorCode::EmptyCondition, "quantile of an empty list");
    Rational h = Rational(static_cast<long long>(sorted.size()) - 1) * p;
    long long lo = h.numerator() / h.denominator();
    Rational frac = h - lo;
    auto i = static_cast<std::size_t>(lo);
    if (i + 1 >= sorted.size())
        return sorted.back();
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

ConditionSummary summarize(const std::vector<Rational>& values)
{
    if (values.empty())
        throw Error(ErrorCode::EmptyCondition, "no completed runs to summarize");
    ConditionSummary s;
    const auto n = static_cast<long long>(values.size());
    Rational sum, sum_sq;
    for (const auto& v : values) {
        sum += v;
        sum_sq += v * v;
    }
    s.mean = sum / n;
    s.variance = n > 1 ? (sum_sq * n - sum * sum) / (n * (n - 1)) : Rational(0);
    std::vector<Rational> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.five_number = {sorted.front(), quantile(sorted, Rational(1, 4)), quantile(sorted, Rational(1, 2)),
                     quantile(sorted, Rational(3, 4)), sorted.back()};
    return s;
}

ConditionSummary summarize(const std::vector<ConformanceScore>& scores)
{
    std::vector<Rational> values;
    values.reserve(scores.size());
    for (const auto& sc : scores)
        values.push_back(sc.value());
    ConditionSummary s = summarize(values);
    s.scores = scores;
    return s;
}

namespace {

std::string run_name(int index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03d", index);
    return buf;
}

void execute(RunRecord& rec, const ExperimentCondition& cond, const std::string& agent_id,
             const ProtocolSpec& protocol, const TestScript& script, const ScoreOptions& scoring)
{
    SessionOptions opts{cond.level, rec.seed, rec.run_id};
    try {
        rec.trace = run_session(*cond.agent, script, protocol, opts);
        rec.trace.condition.agent = agent_id;
        rec.scored = score_trace(rec.trace, script, protocol, scoring);
        rec.status = RunStatus::Completed;
    } catch (const SessionError& e) {
        rec.status = RunStatus::Aborted;
        rec.abort_reason = std::string(to_string(e.code())) + ": " + e.what();
        rec.trace = e.partial();
        rec.trace.condition.agent = agent_id;
    }
}

} // namespace

std::vector<ConditionResult> run_experiment(const std::vector<ExperimentCondition>& conditions,
                                            const ProtocolSpec& protocol, const TestScript& script,
                                            const ExperimentOptions& options)
{
    check_script(script, protocol);
    std::vector<ConditionResult> results(conditions.size());
    struct Job {
        std::size_t cond;
        std::size_t run;
    };
    std::vector<Job> parallel, serial;
    std::vector<std::string> ids(conditions.size());

    for (std::size_t c = 0; c < conditions.size(); ++c) {
        const auto& cond = conditions[c];
        if (!cond.agent)
            throw Error(ErrorCode::InvalidArgument, "condition " + std::to_string(c) + " has no agent");
        if (cond.runs < 1)
            throw Error(ErrorCode::InvalidArgument, "condition " + std::to_string(c) + " needs at least one run");
        ids[c] = cond.agent_id.empty() ? cond.agent->id() : cond.agent_id;
        results[c].condition = cond;
        results[c].condition.agent_id = ids[c];
        results[c].runs.resize(static_cast<std::size_t>(cond.runs));
        for (int i = 0; i < cond.runs; ++i) {
            auto& rec = results[c].runs[static_cast<std::size_t>(i)];
            rec.index = i;
            rec.seed = derive_run_seed(cond.seed, i);
            rec.run_id = run_name(i);
            (cond.agent->concurrency_safe() ? parallel : serial).push_back({c, static_cast<std::size_t>(i)});
        }
    }

    auto run_job = [&](const Job& j) {
        execute(results[j.cond].runs[j.run], conditions[j.cond], ids[j.cond], protocol, script, options.scoring);
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(parallel.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < parallel.size();) {
            if (failed)
                return;
            try {
                run_job(parallel[k]);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    for (const auto& j : serial)
        run_job(j);

    for (auto& r : results) {
        std::vector<ConformanceScore> scores;
        int aborted = 0;
        for (const auto& rec : r.runs) {
            if (rec.status == RunStatus::Completed)
                scores.push_back(rec.scored->score);
            else
                ++aborted;
        }
        if (scores.empty()) {
            r.error = "EmptyCondition: all " + std::to_string(aborted) + " run(s) aborted";
            continue;
        }
        r.summary = summarize(scores);
        r.summary->agent = r.condition.agent_id;
        r.summary->level = r.condition.level;
        r.summary->aborted = aborted;
    }
    return results;
}

} // namespace fastric
