"""k-sweep over longest-street removal/splitting and Pareto selection.

Coverage (surviving property count) and spatial distance correlation
pull in opposite directions as k grows; the sweep enumerates k, keeps
the non-dominated points, and picks the correlation-maximizing one by
default.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .data_model import Database, Dimensionality
from .errors import MalformedRecord
from .extract import ExtractionMethod, Scope, extract
from .metrics import GraphSummary, summarize


@dataclass(frozen=True)
class SweepPoint:
    k: int
    coverage: int  # surviving property count
    rho: float
    summary: GraphSummary


def default_k_range(db: Database) -> range:
    """0 up to 10% of the rankable (non-punctual) streets, inclusive."""
    streets = sum(1 for o in db.objects.values()
                  if o.is_street and o.dim is not Dimensionality.PUNCTUAL)
    return range(0, math.ceil(streets / 10) + 1)


def sweep_k(db: Database, base_method: ExtractionMethod,
            k_values: Sequence[int]) -> list[SweepPoint]:
    if base_method.scope is not Scope.TOP_K:
        raise MalformedRecord(
            f"sweep requires a TopK-scope method, got "
            f"{base_method.code!r}")
    if len(set(k_values)) != len(k_values):
        raise MalformedRecord("duplicate k in sweep range")
    points = []
    for k in k_values:
        method = ExtractionMethod(
            use_additional=base_method.use_additional,
            keep_hierarchy=base_method.keep_hierarchy,
            split=base_method.split, scope=Scope.TOP_K, k=k,
            component_threshold=base_method.component_threshold)
        summary = summarize(extract(db, method), db.property_baseline)
        points.append(SweepPoint(k=k, coverage=summary.property_count,
                                 rho=summary.rho_d, summary=summary))
    return points


def _rho_key(p: SweepPoint) -> float:
    # NaN rho (degenerate graph) never wins a dominance comparison.
    return -math.inf if math.isnan(p.rho) else p.rho


def pareto_front(points: Sequence[SweepPoint]) -> list[SweepPoint]:
    """Non-dominated points, sorted by descending coverage.

    Scan in coverage order, tracking the best rho seen at strictly
    higher coverage: a point survives iff it has the top rho of its
    coverage group and strictly beats that running best (exact ties on
    both objectives are all kept).
    """
    if not points:
        raise MalformedRecord("pareto_front needs at least one point")
    ordered = sorted(points, key=lambda p: (-p.coverage, -_rho_key(p), p.k))
    front: list[SweepPoint] = []
    best_rho: float | None = None
    pos = 0
    while pos < len(ordered):
        end = pos
        while (end < len(ordered)
               and ordered[end].coverage == ordered[pos].coverage):
            end += 1
        group_best = _rho_key(ordered[pos])
        if best_rho is None or group_best > best_rho:
            front.extend(p for p in ordered[pos:end]
                         if _rho_key(p) == group_best)
            best_rho = group_best
        pos = end
    return front


def select_best(points: Sequence[SweepPoint],
                policy: Callable[[Sequence[SweepPoint]], SweepPoint] | None = None,
                ) -> SweepPoint:
    """Pick a sweep point: max rho on the Pareto front, smallest k on
    ties. A custom policy receives the front and overrides the default."""
    front = pareto_front(points)
    if policy is not None:
        return policy(front)
    return max(front, key=lambda p: (_rho_key(p), -p.k))
