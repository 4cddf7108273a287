"""Diagnostics for whether the analytic bound is attained.

Three checks are combined:

* dimension counting: the adjoint orbit of ``iH_d`` fills the unit sphere of p
  exactly when dim centralizer_k(H_d) = 1 + dim k - dim p (sufficient only);
* for k = so(n), the centralizer dimension is the number of degenerate
  eigenvalue pairs of the drift;
* for SU(3)/SO(3), a degenerate drift cannot reach the part of the cut locus
  selected by one of the two root conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations

import numpy as np

from .lie_engine import (
    DEGENERACY_TOL,
    ControlSystem,
    GroupKind,
    LieBasis,
    centralizer_dim,
    project_drift,
)

TIGHT_GUARANTEED = "TIGHT_GUARANTEED"
EXPECTED_NOT_TIGHT = "EXPECTED_NOT_TIGHT"
INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class TightnessVerdict:
    status: str
    reasons: list = field(default_factory=list)


@dataclass(frozen=True)
class RootAnalysis:
    eigenvalues: tuple
    cond1_lhs: float
    cond2_lhs: float
    degenerate: bool


def _spectrum(drift: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (drift + drift.conj().T))


def dimension_criterion(system: ControlSystem, k: LieBasis, p: LieBasis) -> tuple[bool, int, int]:
    """Return ``(holds, lhs, rhs)`` of the dimension-counting criterion."""
    drift = project_drift(system.drift, k)
    lhs = centralizer_dim(drift, k)
    rhs = 1 + len(k) - len(p)
    if lhs < rhs:
        raise RuntimeError(f"centralizer dimension {lhs} below the lower limit {rhs}; k/p inconsistent")
    return lhs == rhs, lhs, rhs


def so_degeneracy_analysis(drift: np.ndarray, n: int | None = None, tol: float = DEGENERACY_TOL) -> tuple[int, int]:
    """Count degenerate eigenvalue pairs M; the so(n) adjoint orbit has dimension n(n-1)/2 - M."""
    n = drift.shape[0] if n is None else n
    lam = _spectrum(np.asarray(drift, dtype=complex))
    scale = tol * max(1.0, float(np.max(np.abs(lam))))
    m = sum(1 for a, b in combinations(lam, 2) if abs(a - b) <= scale)
    return m, n * (n - 1) // 2 - m


def su3_root_analysis(drift: np.ndarray, tol: float = DEGENERACY_TOL) -> RootAnalysis:
    """Root conditions ``(l1 + 2 l2) t = m pi`` and ``(l1 - l2) t = m pi`` for a 3x3 drift.

    The reported left-hand sides use the descending ordering; ``degenerate`` is
    set when any ordering makes one of them vanish.
    """
    drift = np.asarray(drift, dtype=complex)
    if drift.shape != (3, 3):
        raise ValueError(f"root analysis needs a 3x3 drift, got {drift.shape}")
    lam = _spectrum(drift)[::-1]
    lam = lam - lam.mean()
    scale = tol * max(1.0, float(np.max(np.abs(lam))))
    degenerate = False
    for l1, l2, _ in permutations(lam):
        if abs(l1 + 2 * l2) <= scale or abs(l1 - l2) <= scale:
            degenerate = True
            break
    l1, l2, l3 = (float(x) for x in lam)
    return RootAnalysis((l1, l2, l3), l1 + 2 * l2, l1 - l2, degenerate)


def classify_tightness(
    system: ControlSystem,
    kind: GroupKind,
    k: LieBasis,
    p: LieBasis,
    tol: float = DEGENERACY_TOL,
) -> TightnessVerdict:
    holds, lhs, rhs = dimension_criterion(system, k, p)
    reasons = [{"criterion": "dimension_counting", "centralizer_dim": lhs, "required": rhs, "holds": holds}]
    if holds:
        return TightnessVerdict(TIGHT_GUARANTEED, reasons)
    if kind.tag == "SO":
        drift = project_drift(system.drift, k)
        m, orbit = so_degeneracy_analysis(drift, system.n, tol)
        reasons.append({"criterion": "so_degeneracy", "degenerate_pairs": m, "orbit_dim": orbit})
        if m > 0:
            if system.n == 3:
                roots = su3_root_analysis(drift, tol)
                reasons.append(
                    {
                        "criterion": "su3_roots",
                        "eigenvalues": roots.eigenvalues,
                        "cond1_lhs": roots.cond1_lhs,
                        "cond2_lhs": roots.cond2_lhs,
                        "degenerate": roots.degenerate,
                    }
                )
                if not roots.degenerate:
                    return TightnessVerdict(INDETERMINATE, reasons)
            reasons.append(
                {
                    "criterion": "cut_locus",
                    "note": "degenerate drift cannot reach the cut-locus branch of one root; "
                    "the same verdict holds for every drift with the same degeneracy pattern",
                }
            )
            return TightnessVerdict(EXPECTED_NOT_TIGHT, reasons)
    return TightnessVerdict(INDETERMINATE, reasons)
