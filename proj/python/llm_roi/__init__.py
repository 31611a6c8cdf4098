"""Expected earnings, RoI, break-even and sensitivity analysis for LLM deployments.

Inputs are plain dicts (or paths to JSON files) in the scenario and Sobol-spec
schemas used by the ``llm-roi`` command line tool. Results are dicts with the
same field names as the tool's JSON output.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping

from . import _core
from ._core import DomainError, IoError, ParseError, ValidationError

__version__ = _core.__version__

__all__ = [
    "DomainError",
    "IoError",
    "ParseError",
    "ValidationError",
    "breakeven",
    "compare",
    "evaluate",
    "load_scenarios",
    "local_sensitivity",
    "sobol",
    "sweep",
]

Document = Mapping[str, Any] | str | os.PathLike


def _text(doc: Document) -> str:
    if isinstance(doc, Mapping):
        return json.dumps(doc)
    try:
        with open(doc, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise IoError(f"cannot read {doc}: {e.strerror}") from e


def load_scenarios(doc: Document) -> dict:
    """Validates a scenario document and returns it with defaults resolved."""
    return json.loads(_core.normalize_scenarios(_text(doc)))


def evaluate(scenario: Mapping[str, Any], variant: str = "canonical") -> dict:
    """Expected earnings, RoI and outcome contributions of one scenario object."""
    return json.loads(_core.evaluate(json.dumps(scenario), variant))


def compare(doc: Document, variant: str = "canonical") -> dict:
    """Evaluates every scenario of a document and their pairwise deltas."""
    return json.loads(_core.compare(_text(doc), variant))


def breakeven(
    doc: Document,
    solve_for: str = "probability",
    reference: str | None = None,
    candidate: str | None = None,
    at: Mapping[str, float] | None = None,
) -> dict:
    """Solves for the value where two single-outcome scenarios earn the same.

    ``at`` assigns variables (T, P, C, G, L) on both scenarios first.
    """
    return json.loads(_core.breakeven(_text(doc), solve_for, reference, candidate, dict(at or {})))


def sweep(doc: Document, variable: str, start: float, stop: float, steps: int) -> dict:
    """Earnings of each scenario at ``steps`` evenly spaced values of ``variable``."""
    return json.loads(_core.sweep(_text(doc), variable, start, stop, steps))


def sobol(spec: Document, workers: int = 1) -> dict:
    """First-, total- and (optionally) second-order Sobol indices."""
    return json.loads(_core.sobol(_text(spec), workers))


def local_sensitivity(
    model: str,
    target: str,
    point: Mapping[str, float],
    cost_units: str = "per-token",
    rel_step: float = 1e-4,
) -> dict:
    """Analytic gradient and Hessian at ``point``, with finite-difference checks."""
    return json.loads(_core.local_sensitivity(model, target, dict(point), cost_units, rel_step))
