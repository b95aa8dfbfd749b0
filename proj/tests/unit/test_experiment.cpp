// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "fastric/experiment.hpp"
#include "stub_chat_server.hpp"
#include "fastric/endpoint.hpp"

using namespace fastric;

namespace {

std::vector<ConformanceScore> scores_of(const std::vector<int>& ks)
{
    std::vector<ConformanceScore> out;
    for (int k : ks)
        out.push_back(ConformanceScore{k, 21, k < 21 ? std::optional(k + 1) : std::nullopt});
    return out;
}

ExperimentCondition condition(const std::string& agent, FormalityLevel level, int runs, std::uint64_t master = 7)
{
    auto a = make_agent(agent);
    return ExperimentCondition{a, a->id(), level, runs, derive_condition_seed(master, a->id(), level)};
}

} // namespace

TEST(Summarize, TwentyPerfectRuns)
{
    auto s = summarize(scores_of(std::vector<int>(20, 21)));
    EXPECT_EQ(s.mean, Rational(1));
    EXPECT_EQ(s.variance, Rational(0));
    EXPECT_EQ(s.cell(), "1.00 (0.00)");
    for (const auto& q : s.five_number)
        EXPECT_EQ(q, Rational(1));
}

TEST(Summarize, ZeroAndOne)
{
    auto s = summarize(std::vector<Rational>{Rational(0), Rational(1)});
    EXPECT_EQ(s.mean, Rational(1, 2));
    EXPECT_EQ(s.variance, Rational(1, 2));
    EXPECT_NEAR(s.sd(), std::sqrt(0.5), 1e-12);
    EXPECT_EQ(s.sd_text(), "0.71");
}

TEST(Summarize, ConstantFaultScore)
{
    auto s = summarize(scores_of(std::vector<int>(20, 10)));
    EXPECT_EQ(s.mean, Rational(10, 21));
    EXPECT_EQ(s.variance, Rational(0));
    EXPECT_EQ(s.cell(), "0.48 (0.00)");
}

TEST(Summarize, TwoPointMultiset)
{
    std::vector<int> ks(10, 10);
    ks.insert(ks.end(), 10, 21);
    auto s = summarize(scores_of(ks));
    EXPECT_EQ(s.mean, Rational(31, 42));
    EXPECT_EQ(s.five_number[2], Rational(31, 42));
    EXPECT_EQ(format_fixed(s.five_number[2], 3), "0.738");
    EXPECT_EQ(s.five_number[0], Rational(10, 21));
    EXPECT_EQ(s.five_number[4], Rational(1));
}

TEST(Summarize, EmptyIsAnError)
{
    try {
        summarize(std::vector<ConformanceScore>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyCondition);
    }
}

TEST(Summarize, QuantilesMatchLinearInterpolation)
{
    // closed-form type-7 quantiles of 1..5 and 1..4
    std::vector<Rational> five{1, 2, 3, 4, 5};
    EXPECT_EQ(quantile(five, Rational(1, 4)), Rational(2));
    EXPECT_EQ(quantile(five, Rational(1, 2)), Rational(3));
    std::vector<Rational> four{1, 2, 3, 4};
    EXPECT_EQ(quantile(four, Rational(1, 4)), Rational(7, 4));
    EXPECT_EQ(quantile(four, Rational(1, 2)), Rational(5, 2));
    EXPECT_EQ(quantile(four, Rational(3, 4)), Rational(13, 4));
    EXPECT_EQ(quantile(four, Rational(1)), Rational(4));
}

TEST(Summarize, VarianceMatchesTwoPassFormula)
{
    std::vector<int> ks{0, 8, 8, 8, 10, 12, 12, 12, 12, 14, 14, 14, 16, 16, 16, 16, 18, 18, 20, 20};
    auto s = summarize(scores_of(ks));
    double mean = 0;
    for (int k : ks)
        mean += k / 21.0;
    mean /= static_cast<double>(ks.size());
    double ss = 0;
    for (int k : ks)
        ss += (k / 21.0 - mean) * (k / 21.0 - mean);
    EXPECT_NEAR(to_double(s.mean), mean, 1e-12);
    EXPECT_NEAR(s.sd(), std::sqrt(ss / static_cast<double>(ks.size() - 1)), 1e-12);
}

TEST(Experiment, OracleEveryCellPerfect)
{
    std::vector<ExperimentCondition> conds;
    for (auto level : kAllLevels)
        conds.push_back(condition("oracle", level, 20));
    auto results = run_experiment(conds, canonical_tutor_protocol(), canonical_test_script());
    ASSERT_EQ(results.size(), 4u);
    for (std::size_t i = 0; i < results.size(); ++i) {
        ASSERT_TRUE(results[i].summary);
        EXPECT_EQ(results[i].summary->level, kAllLevels[i]);
        EXPECT_EQ(results[i].summary->mean, Rational(1));
        EXPECT_EQ(results[i].summary->variance, Rational(0));
        EXPECT_EQ(results[i].summary->scores.size(), 20u);
    }
}

TEST(Experiment, DeterministicFaultMeans)
{
    auto results = run_experiment({condition("fault:confirmation_seeker", FormalityLevel::L2, 20),
                                   condition("fault:ambiguity_misreader", FormalityLevel::L2, 20),
                                   condition("fault:case_brittle", FormalityLevel::L2, 20)},
                                  canonical_tutor_protocol(), canonical_test_script());
    EXPECT_EQ(results[0].summary->mean, Rational(10, 21));
    EXPECT_EQ(results[1].summary->mean, Rational(14, 21));
    EXPECT_EQ(results[2].summary->mean, Rational(6, 21));
    for (const auto& r : results)
        EXPECT_EQ(r.summary->variance, Rational(0));
}

TEST(Experiment, ThreadCountDoesNotChangeResults)
{
    std::vector<ExperimentCondition> conds{condition("fault:random_deviator(0.5)", FormalityLevel::L1, 12),
                                           condition("fault:random_deviator(0.1)", FormalityLevel::L3, 12)};
    ExperimentOptions one;
    one.threads = 1;
    ExperimentOptions four;
    four.threads = 4;
    auto a = run_experiment(conds, canonical_tutor_protocol(), canonical_test_script(), one);
    auto b = run_experiment(conds, canonical_tutor_protocol(), canonical_test_script(), four);
    for (std::size_t c = 0; c < a.size(); ++c) {
        EXPECT_EQ(a[c].summary->scores, b[c].summary->scores);
        for (std::size_t r = 0; r < a[c].runs.size(); ++r)
            EXPECT_EQ(a[c].runs[r].trace, b[c].runs[r].trace);
    }
}

TEST(Experiment, RunSeedsAreDistinct)
{
    auto cond = condition("oracle", FormalityLevel::L1, 50);
    std::set<std::uint64_t> seeds;
    for (int i = 0; i < 50; ++i)
        seeds.insert(derive_run_seed(cond.seed, i));
    EXPECT_EQ(seeds.size(), 50u);
    EXPECT_NE(derive_condition_seed(1, "oracle", FormalityLevel::L1),
              derive_condition_seed(1, "oracle", FormalityLevel::L2));
    EXPECT_NE(derive_condition_seed(1, "oracle", FormalityLevel::L1),
              derive_condition_seed(2, "oracle", FormalityLevel::L1));
}

TEST(Experiment, AllRunsAbortedIsAnErrorSummary)
{
    ::setenv("FASTRIC_TEST_KEY", "k", 1);
    fastric::testing::StubChatServer server(canonical_tutor_protocol(), fastric::testing::StubChatServer::Mode::Failing);
    ChatEndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "down";
    cfg.api_key_env = "FASTRIC_TEST_KEY";
    cfg.max_retries = 0;
    cfg.backoff_ms = 0;
    auto agent = std::make_shared<EndpointTutor>(cfg);
    std::vector<ExperimentCondition> conds{{agent, "", FormalityLevel::L4, 2, 1},
                                           condition("oracle", FormalityLevel::L4, 2)};
    auto results = run_experiment(conds, canonical_tutor_protocol(), canonical_test_script());
    EXPECT_FALSE(results[0].summary);
    EXPECT_NE(results[0].error.find("EmptyCondition"), std::string::npos);
    for (const auto& r : results[0].runs)
        EXPECT_EQ(r.status, RunStatus::Aborted);
    ASSERT_TRUE(results[1].summary);
    ::unsetenv("FASTRIC_TEST_KEY");
}

TEST(Experiment, RejectsBadConditions)
{
    auto c = condition("oracle", FormalityLevel::L1, 0);
    EXPECT_THROW(run_experiment({c}, canonical_tutor_protocol(), canonical_test_script()), Error);
    c.runs = 1;
    c.agent = nullptr;
    EXPECT_THROW(run_experiment({c}, canonical_tutor_protocol(), canonical_test_script()), Error);
}
