"""Certification of the spectral-gap hypotheses over the whole parameter box.

Gaps of an affine drift are affine in alpha, so their extrema over the box are
attained at its vertices and a vertex sweep is an exact certificate. Other
drifts are only checked on a tensor grid.
"""

import logging
from typing import List, Literal, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from chirpedensemble.core.control import ChirpedPulse, LinearChirp
from chirpedensemble.core.model import EnsembleSystem, FloatArray, check_level_pair
from chirpedensemble.exceptions import ArgumentError, DomainError, UnsupportedDriftError
from chirpedensemble.schemas.condition_schemas import ConditionReport, Violation

logger = logging.getLogger(__name__)

Method = Literal["vertex", "grid"]


def _evaluation_points(
    ens: EnsembleSystem, method: Method, allow_grid: bool, points_per_axis: int
) -> Tuple[FloatArray, Method, List[str]]:
    warnings: List[str] = []
    if not ens.drift.is_affine:
        if not allow_grid:
            raise UnsupportedDriftError(
                "Vertex certification needs an affine drift; pass allow_grid=True to "
                "estimate gap ranges on a grid instead."
            )
        message = (
            f"non-affine drift: gap ranges estimated on a {points_per_axis}-point-per-axis grid, "
            f"not certified"
        )
        logger.warning(message)
        warnings.append(message)
        return ens.box.grid(points_per_axis), "grid", warnings
    if method == "grid":
        return ens.box.grid(points_per_axis), "grid", warnings
    return ens.box.vertices(), "vertex", warnings


def _window_hit(
    gaps: FloatArray, alphas: FloatArray, lo: float, hi: float
) -> Optional[Tuple[List[List[float]], List[float]]]:
    """Witnesses of gaps meeting the closed window [lo, hi], or None."""
    i_min, i_max = int(np.argmin(gaps)), int(np.argmax(gaps))
    g_min, g_max = gaps[i_min], gaps[i_max]
    if g_max < lo or g_min > hi:
        return None
    if lo <= g_min <= hi:
        picks = [i_min]
    elif lo <= g_max <= hi:
        picks = [i_max]
    else:
        # min below, max above: an affine gap crosses the whole window
        picks = [i_min, i_max]
    return [alphas[i].tolist() for i in picks], [float(gaps[i]) for i in picks]


def _check(
    ens: EnsembleSystem,
    p: int,
    q: int,
    v0: float,
    v1: float,
    margin: float,
    allow_grid: bool,
    method: Method,
    points_per_axis: int,
    second_order: bool,
) -> ConditionReport:
    ip, iq = check_level_pair(ens.n, p, q)
    if not (0 < v0 < v1):
        raise ArgumentError(f"Need 0 < v0 < v1, got v0={v0}, v1={v1}.")
    if margin < 0 or v0 + margin >= v1 - margin:
        raise ArgumentError(f"Safety margin {margin} leaves no room inside ({v0}, {v1}).")

    alphas, method_used, warnings = _evaluation_points(ens, method, allow_grid, points_per_axis)
    gaps = ens.gap_table(alphas)
    violations: List[Violation] = []

    # Hypothesis 1: the target gap stays strictly inside the (tightened) window
    target = gaps[:, ip, iq]
    lo, hi = v0 + margin, v1 - margin
    i_min, i_max = int(np.argmin(target)), int(np.argmax(target))
    if target[i_min] <= lo:
        violations.append(
            Violation(
                pair=(p, q),
                condition="thm1-c1",
                witnesses=[alphas[i_min].tolist()],
                gaps=[float(target[i_min])],
                detail=f"gap must exceed {lo:g}",
            )
        )
    if target[i_max] >= hi:
        violations.append(
            Violation(
                pair=(p, q),
                condition="thm1-c1",
                witnesses=[alphas[i_max].tolist()],
                gaps=[float(target[i_max])],
                detail=f"gap must stay below {hi:g}",
            )
        )

    # Hypothesis 2: every other gap avoids [v0, v1]
    n = ens.n
    for j in range(n):
        for k in range(j + 1, n):
            if (j, k) == (ip, iq):
                continue
            hit = _window_hit(gaps[:, j, k], alphas, v0, v1)
            if hit is not None:
                violations.append(
                    Violation(
                        pair=(j + 1, k + 1),
                        condition="thm1-c2",
                        witnesses=hit[0],
                        gaps=hit[1],
                        detail=f"gap meets [{v0:g}, {v1:g}]",
                    )
                )

    lower = ens.coupling_lower[ip, iq]
    upper = ens.coupling_upper[ip, iq]
    if lower <= 0.0 <= upper:
        violations.append(
            Violation(
                pair=(p, q),
                condition="coupling-zero",
                detail=f"coupling interval [{lower:g}, {upper:g}] contains 0",
            )
        )

    if second_order:
        for j in range(n):
            for k in range(j + 1, n):
                hit = _window_hit(gaps[:, j, k], alphas, 2.0 * v0, 2.0 * v1)
                if hit is not None:
                    violations.append(
                        Violation(
                            pair=(j + 1, k + 1),
                            condition="prop2",
                            witnesses=hit[0],
                            gaps=hit[1],
                            detail=f"gap meets [{2 * v0:g}, {2 * v1:g}]",
                        )
                    )

    report = ConditionReport(
        holds=not violations, violations=violations, warnings=warnings, method=method_used
    )
    for violation in violations:
        logger.warning(
            f"Condition {violation.condition} fails for pair {violation.pair}: "
            f"gaps {violation.gaps} at {violation.witnesses} ({violation.detail})."
        )
    return report


def check_theorem1(
    ens: EnsembleSystem,
    p: int,
    q: int,
    v0: float,
    v1: float,
    margin: float = 0.0,
    allow_grid: bool = False,
    method: Method = "vertex",
    points_per_axis: int = 101,
) -> ConditionReport:
    """Checks both gap hypotheses and 0 not in I_pq over the whole box.

    Args:
        ens: The ensemble.
        p: Lower target level (1-based).
        q: Upper target level (1-based).
        v0: Chirp start frequency.
        v1: Chirp end frequency.
        margin: Tightens hypothesis 1 to (v0 + margin, v1 - margin).
        allow_grid: Permit grid estimation for non-affine drifts.
        method: "vertex" (exact for affine drifts) or "grid".
        points_per_axis: Grid resolution when a grid is used.

    Returns:
        The report; `holds` is True exactly when no violation was found.
    """
    return _check(ens, p, q, v0, v1, margin, allow_grid, method, points_per_axis, False)


def check_prop2(
    ens: EnsembleSystem,
    p: int,
    q: int,
    v0: float,
    v1: float,
    margin: float = 0.0,
    allow_grid: bool = False,
    method: Method = "vertex",
    points_per_axis: int = 101,
) -> ConditionReport:
    """check_theorem1 plus: no gap (target pair included) meets [2 v0, 2 v1]."""
    return _check(ens, p, q, v0, v1, margin, allow_grid, method, points_per_axis, True)


def crossing_time(pulse: ChirpedPulse, delta_gap: float) -> float:
    """Slow time s_bar with f(s_bar) = delta_gap."""
    if not (pulse.v0 < delta_gap < pulse.v1):
        raise DomainError(
            f"Gap {delta_gap} is outside the chirp window ({pulse.v0}, {pulse.v1})."
        )
    if isinstance(pulse.chirp, LinearChirp):
        return (delta_gap - pulse.v0) / (pulse.v1 - pulse.v0) * pulse.t_slow
    chirp = pulse.chirp
    return float(
        brentq(
            lambda s: float(chirp.value(s)) - delta_gap,
            0.0,
            pulse.t_slow,
            xtol=1e-15,
            rtol=4.0 * np.finfo(float).eps,
            maxiter=500,
        )
    )
