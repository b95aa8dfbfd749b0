// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fastric/detail/text.hpp"
#include "fastric/report.hpp"
#include "fastric/runlog.hpp"

using namespace fastric;
namespace fs = std::filesystem;

namespace {

std::vector<ConditionSummary> reference_grid()
{
    return parse_score_grid(
        detail::read_file(std::string(FASTRIC_SOURCE_DIR) + "/fixtures/reference_grid_scores.csv"));
}

ConditionSummary cell(const std::string& agent, FormalityLevel level, const std::vector<int>& ks)
{
    std::vector<ConformanceScore> scores;
    for (int k : ks)
        scores.push_back({k, 21, k < 21 ? std::optional(k + 1) : std::nullopt});
    auto s = summarize(scores);
    s.agent = agent;
    s.level = level;
    return s;
}

fs::path temp_dir(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("fastric_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Report, ReferenceGridReproducesPublishedCells)
{
    auto table = report_table(reference_grid());
    const std::map<std::string, std::array<const char*, 4>> published{
        {"DeepSeek-V3.2", {"0.67 (0.16)", "1.00 (0.00)", "1.00 (0.00)", "1.00 (0.00)"}},
        {"ChatGPT-5", {"0.46 (0.06)", "0.63 (0.23)", "0.90 (0.16)", "0.39 (0.26)"}},
        {"Phi4-14.7B", {"0.59 (0.16)", "0.32 (0.27)", "0.52 (0.28)", "0.75 (0.36)"}},
    };
    ASSERT_EQ(table.agents.size(), 3u);
    for (const auto& [agent, cells] : published)
        for (std::size_t i = 0; i < 4; ++i)
            EXPECT_EQ(table.cell_text(agent, kAllLevels[i]), cells[i]) << agent << " " << to_string(kAllLevels[i]);
}

TEST(Report, TextAndCsvRendering)
{
    auto table = report_table({cell("oracle", FormalityLevel::L1, std::vector<int>(20, 21)),
                               cell("oracle", FormalityLevel::L2, std::vector<int>(20, 21)),
                               cell("oracle", FormalityLevel::L3, std::vector<int>(20, 21)),
                               cell("oracle", FormalityLevel::L4, std::vector<int>(20, 21))});
    auto text = table.to_text();
    EXPECT_NE(text.find("oracle  1.00 (0.00)  1.00 (0.00)  1.00 (0.00)  1.00 (0.00)"), std::string::npos) << text;
    EXPECT_EQ(table.to_csv(), "agent,L1,L2,L3,L4\noracle,1.00 (0.00),1.00 (0.00),1.00 (0.00),1.00 (0.00)\n");
}

TEST(Report, MissingCellsAndSingleCell)
{
    auto table = report_table({cell("solo", FormalityLevel::L3, {10, 21})});
    EXPECT_EQ(table.agents.size(), 1u);
    EXPECT_EQ(table.cells.size(), 1u);
    EXPECT_EQ(table.cell_text("solo", FormalityLevel::L1), std::string(kMissingCell));
    EXPECT_EQ(table.to_csv(), "agent,L1,L2,L3,L4\nsolo,—,—,0.74 (0.37),—\n");
}

TEST(Report, DuplicateCondition)
{
    try {
        report_table({cell("a", FormalityLevel::L1, {21}), cell("a", FormalityLevel::L1, {10})});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateCondition);
    }
}

TEST(Report, Stability)
{
    auto grid = reference_grid();
    EXPECT_EQ(report_table(grid).to_text(), report_table(grid).to_text());
    EXPECT_EQ(report_table(grid).to_csv(), report_table(reference_grid()).to_csv());
}

TEST(Report, CellsParseBackWithinRounding)
{
    for (const auto& s : reference_grid()) {
        auto [mean, sd] = parse_cell(s.cell());
        EXPECT_NEAR(mean, to_double(s.mean), 0.005 + 1e-12);
        EXPECT_NEAR(sd, s.sd(), 0.005 + 1e-12);
    }
    EXPECT_THROW(parse_cell("0.39 0.26"), Error);
}

TEST(Report, FootnoteCountsAborts)
{
    auto s = cell("live", FormalityLevel::L2, {21, 21});
    s.aborted = 1;
    auto table = report_table({s});
    ASSERT_EQ(table.footnotes.size(), 2u);
    EXPECT_NE(table.footnotes[1].find("live L2 1"), std::string::npos);
}

TEST(Optimum, PublishedRows)
{
    using L = FormalityLevel;
    auto means = [](double a, double b, double c, double d) {
        auto r = [](double x) { return Rational(static_cast<long long>(std::llround(x * 100)), 100); };
        return std::map<L, Rational>{{L::L1, r(a)}, {L::L2, r(b)}, {L::L3, r(c)}, {L::L4, r(d)}};
    };
    EXPECT_EQ(select_optimal_formality(means(0.67, 1.00, 1.00, 1.00)), L::L2);
    EXPECT_EQ(select_optimal_formality(means(0.46, 0.63, 0.90, 0.39)), L::L3);
    EXPECT_EQ(select_optimal_formality(means(0.5, 0.5, 0.5, 0.5)), L::L1);
    EXPECT_THROW(select_optimal_formality(std::map<L, Rational>{}), Error);
}

// Scaling every mean in a row by a positive constant keeps the argmax.
TEST(Optimum, ScalingInvariance)
{
    std::map<FormalityLevel, ConditionSummary> chatgpt;
    for (const auto& s : reference_grid())
        if (s.agent == "ChatGPT-5")
            chatgpt[s.level] = s;
    ASSERT_EQ(chatgpt.size(), 4u);
    auto best = select_optimal_formality(chatgpt);
    EXPECT_EQ(best, FormalityLevel::L3);
    for (Rational k : {Rational(1, 3), Rational(2), Rational(7, 5), Rational(1, 100)}) {
        std::map<FormalityLevel, Rational> scaled;
        for (const auto& [l, s] : chatgpt)
            scaled[l] = s.mean * k;
        EXPECT_EQ(select_optimal_formality(scaled), best);
    }
}

TEST(Distributions, Export)
{
    auto csv = export_distributions({cell("oracle", FormalityLevel::L1, std::vector<int>(20, 21))});
    EXPECT_EQ(csv, "agent,level,n,min,q1,median,q3,max,mean\n"
                   "oracle,L1,20,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000\n");
    std::vector<int> ks(10, 10);
    ks.insert(ks.end(), 10, 21);
    csv = export_distributions({cell("mix", FormalityLevel::L2, ks)});
    EXPECT_NE(csv.find("mix,L2,20,0.476190,0.476190,0.738095,1.000000,1.000000,0.738095"), std::string::npos) << csv;
}

TEST(Distributions, MissingRawScores)
{
    auto s = cell("x", FormalityLevel::L1, {21});
    s.scores.clear();
    try {
        export_distributions({s});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingRawScores);
    }
}

TEST(Archive, RoundTripAndRescore)
{
    auto dir = temp_dir("archive");
    std::vector<ExperimentCondition> conds;
    for (auto spec : {"oracle", "fault:case_brittle", "fault:random_deviator(0.3)"}) {
        auto agent = make_agent(spec);
        for (auto level : {FormalityLevel::L1, FormalityLevel::L4})
            conds.push_back({agent, agent->id(), level, 5, derive_condition_seed(11, agent->id(), level)});
    }
    auto results = run_experiment(conds, canonical_tutor_protocol(), canonical_test_script());
    write_archive(dir.string(), canonical_tutor_protocol(), canonical_test_script(), results, 11);

    auto archive = load_archive(dir.string());
    EXPECT_EQ(archive.master_seed, 11u);
    EXPECT_EQ(archive.protocol, canonical_tutor_protocol());
    EXPECT_EQ(archive.script, canonical_test_script());
    ASSERT_EQ(archive.conditions.size(), conds.size());
    EXPECT_EQ(archive.conditions[2].directory, "fault_case_brittle_L1");

    auto rescored = rescore_archive(archive);
    auto stored = read_archive_summary(dir.string());
    ASSERT_EQ(rescored.size(), results.size());
    ASSERT_EQ(stored.size(), results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        EXPECT_EQ(rescored[i].mean, results[i].summary->mean);
        EXPECT_EQ(rescored[i].variance, results[i].summary->variance);
        EXPECT_EQ(rescored[i].scores, results[i].summary->scores);
        EXPECT_EQ(stored[i].scores, results[i].summary->scores);
        EXPECT_EQ(stored[i].agent, results[i].condition.agent_id);
    }

    // regenerate from the manifest seeds: identical bytes
    auto dir2 = temp_dir("archive2");
    write_archive(dir2.string(), canonical_tutor_protocol(), canonical_test_script(),
                  run_experiment(conds, canonical_tutor_protocol(), canonical_test_script()), 11);
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        auto rel = fs::relative(entry.path(), dir);
        EXPECT_EQ(detail::read_file(entry.path().string()), detail::read_file((dir2 / rel).string())) << rel;
    }
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST(Archive, SanitizeAgentIds)
{
    EXPECT_EQ(sanitize_agent_id("fault:random_deviator(0.5)"), "fault_random_deviator_0.5_");
    EXPECT_EQ(sanitize_agent_id("endpoint:gpt/x"), "endpoint_gpt_x");
    EXPECT_EQ(sanitize_agent_id(""), "agent");
}

TEST(ScoreGrid, RejectsBadRows)
{
    EXPECT_THROW(parse_score_grid("a,L1\n"), ParseError);
    EXPECT_THROW(parse_score_grid("a,L9,21\n"), ParseError);
    EXPECT_THROW(parse_score_grid("a,L1,22\n"), ParseError);
    EXPECT_THROW(parse_score_grid("a,L1,\n"), Error);
}
