"""Analytic lower bounds on the minimum time to reach every unitary.

The bound is ``diam(G/K) / v`` with ``v = sqrt(2n Tr H_d^2)`` the constant
speed at which the drift moves the system through G/K, and the diameters of
the three symmetric spaces of SU(n) taken in the Killing metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lie_engine import ControlSystem, GroupKind, LieBasis, control_algebra, project_drift


class BoundError(ValueError):
    """The bound cannot be evaluated for the given input."""


@dataclass(frozen=True)
class BoundReport:
    kind: GroupKind
    n: int
    drift_speed: float
    diameter: float
    bound_theorem: float
    bound_published: float | None
    single_control: float | None = None
    tightness: object | None = None

    @property
    def published_ratio(self) -> float | None:
        if self.bound_published is None:
            return None
        return self.bound_published / self.bound_theorem


def trace_square(h: np.ndarray) -> float:
    h = np.asarray(h, dtype=complex)
    return float(np.real(np.sum(h * h.T)))


def drift_speed(drift: np.ndarray, n: int | None = None) -> float:
    """Speed ``sqrt(2n Tr H_d^2)`` of motion in G/K under the drift."""
    n = drift.shape[0] if n is None else n
    return math.sqrt(max(2.0 * n * trace_square(drift), 0.0))


def diameter(kind: GroupKind, n: int | None = None) -> float:
    """Killing-metric diameter of SU(n)/K for the three symmetric cases."""
    n = kind.n if n is None else n
    if kind.tag == "SO":
        if n % 2 == 0:
            return math.sqrt(2) / 2 * math.pi * n
        return math.sqrt(2) / 2 * math.pi * math.sqrt(n * n - 1)
    if kind.tag == "Sp":
        m = n // 2
        if m % 2 == 0:
            return math.pi * m
        return math.pi * math.sqrt(m * m - 1)
    if kind.tag == "SU_pq":
        return math.pi * math.sqrt((kind.p + kind.q) * kind.p)
    raise BoundError(f"no tabulated diameter for {kind}")


def published_bound(kind: GroupKind, n: int, trace_hd2: float) -> float:
    """Closed-form bounds for SO, Sp and S(U(p)xU(q)) controls as usually quoted.

    For Sp the integer entering the formula is the symplectic index m (n = 2m).
    These agree with ``diameter / drift_speed`` for SO and S(U(p)xU(q)); for Sp
    they are larger by a constant factor sqrt(2).
    """
    if trace_hd2 <= 0:
        raise BoundError("bound undefined: Tr(H_d^2) must be positive")
    if kind.tag == "SO":
        if n % 2 == 0:
            return math.sqrt(n) * math.pi / (2 * math.sqrt(trace_hd2))
        return math.pi * math.sqrt(n * n - 1) / (2 * math.sqrt(n * trace_hd2))
    if kind.tag == "Sp":
        m = n // 2
        if m % 2 == 0:
            return math.sqrt(m) * math.pi / math.sqrt(2 * trace_hd2)
        return math.pi * math.sqrt(m * m - 1) / math.sqrt(2 * m * trace_hd2)
    if kind.tag == "SU_pq":
        return math.sqrt(kind.p) * math.pi / math.sqrt(2 * trace_hd2)
    raise BoundError(f"no tabulated diameter for {kind}")


def single_control_bound(drift: np.ndarray, n: int | None = None) -> float:
    """Lower bound for one control Hamiltonian, by embedding into S(U(p)xU(q)), p = n // 2."""
    n = drift.shape[0] if n is None else n
    tr = trace_square(drift)
    if tr <= 0:
        raise BoundError("bound undefined: zero drift speed")
    return math.sqrt(n // 2) * math.pi / math.sqrt(2 * tr)


def qsl_bound(system: ControlSystem, kind: GroupKind, k: LieBasis | None = None) -> BoundReport:
    """Diameter over drift speed, after removing the drift's component along k.

    ``k`` defaults to the Lie algebra generated by the controls.
    """
    if not kind.tabulated:
        raise BoundError(f"no tabulated diameter for {kind}")
    n = system.n
    if k is None:
        k = control_algebra(system)
    drift = project_drift(system.drift, k)
    v = drift_speed(drift, n)
    if v <= 1e-14:
        raise BoundError("bound undefined: zero drift speed")
    diam = diameter(kind, n)
    single = single_control_bound(drift, n) if len(system.controls) == 1 else None
    return BoundReport(
        kind=kind,
        n=n,
        drift_speed=v,
        diameter=diam,
        bound_theorem=diam / v,
        bound_published=published_bound(kind, n, trace_square(drift)),
        single_control=single,
    )
