# SPDX-License-Identifier: Apache-2.0
"""Finite-state tutor protocols: rendering, simulated sessions and
conformance scoring. Thin wrapper over the C++ core."""

# the compiled module may live in a build tree next to this source package
__path__ = __import__("pkgutil").extend_path(__path__, __name__)

from ._core import (  # noqa: E402
    FastricError,
    canonical_protocol_source,
    canonical_script_source,
    render,
    report,
    run_experiment,
    run_session,
    score,
    select_optimal_formality,
    summarize,
    validate,
)

LEVELS = ("L1", "L2", "L3", "L4")

__all__ = [
    "FastricError",
    "LEVELS",
    "canonical_protocol_source",
    "canonical_script_source",
    "render",
    "report",
    "run_experiment",
    "run_session",
    "score",
    "select_optimal_formality",
    "summarize",
    "validate",
]
