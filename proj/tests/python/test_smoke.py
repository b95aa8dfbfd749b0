# SPDX-License-Identifier: Apache-2.0
import os
from fractions import Fraction
from pathlib import Path

import pytest

import fastric

SOURCE = Path(os.environ.get("FASTRIC_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_render_matches_fixture():
    for level in fastric.LEVELS:
        expected = (SOURCE / "fixtures" / "appendix_c" / f"{level}.txt").read_text(encoding="utf-8")
        assert fastric.render(level) == expected


def test_validate_builtin():
    name, warnings = fastric.validate(fastric.canonical_protocol_source())
    assert name
    assert warnings == []


def test_oracle_session_scores_one():
    log = fastric.run_session("oracle", "L2", seed=5)
    s = fastric.score(log)
    assert s["value"] == Fraction(1)
    assert s["first_violation"] is None


def test_case_brittle_fails_turn_seven():
    s = fastric.score(fastric.run_session("fault:case_brittle", "L4"))
    assert (s["correct_turns"], s["total_turns"], s["first_violation"]) == (6, 21, 7)
    assert s["failure"] == "CaseRejection"


def test_summarize_and_select():
    d = fastric.summarize([Fraction(0), Fraction(1)])
    assert d["mean"] == Fraction(1, 2)
    assert d["cell"] == "0.50 (0.71)"
    row = {"L1": Fraction(46, 100), "L2": Fraction(63, 100), "L3": Fraction(90, 100), "L4": Fraction(39, 100)}
    assert fastric.select_optimal_formality(row) == "L3"
    assert fastric.select_optimal_formality({"L1": 1, "L2": 1}) == "L1"


def test_report_from_grid():
    text = fastric.report((SOURCE / "fixtures" / "reference_grid_scores.csv").read_text(), "csv")
    assert "ChatGPT-5,0.46 (0.06),0.63 (0.23),0.90 (0.16),0.39 (0.26)" in text


def test_experiment_and_archive(tmp_path):
    rows = fastric.run_experiment(["oracle", "fault:ambiguity_misreader"], ["L1", "L3"], runs=3, seed=1,
                                  out_dir=str(tmp_path / "a"))
    assert [r["mean"] for r in rows] == [1, 1, Fraction(14, 21), Fraction(14, 21)]
    assert (tmp_path / "a" / "summary.json").is_file()


def test_errors_are_typed():
    with pytest.raises(fastric.FastricError, match="InvalidArgument"):
        fastric.render("L9")
    with pytest.raises(fastric.FastricError, match="EmptyCondition"):
        fastric.summarize([])
