"""Lie-algebraic analysis of bilinear control systems.

A control system ``H = H_d + sum_j f_j(t) H_j`` is analysed through the real
Lie algebras generated by ``i H_d`` and ``i H_j``. Subalgebras of su(n) are
carried as Killing-orthonormal bases (:class:`LieBasis`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .matrix_core import (
    DEFAULT_RANK_TOL,
    MatrixError,
    as_matrix,
    commutator,
    from_real_vector,
    is_hermitian,
    orthonormalize,
    remove_trace,
    to_real_vector,
)

DEGENERACY_TOL = 1e-8
KERNEL_TOL = 1e-9
CARTAN_TOL = 1e-9


@dataclass(frozen=True)
class LieBasis:
    """Killing-orthonormal basis of a real subspace of su(n)."""

    n: int
    elements: np.ndarray  # shape (d, n, n)

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex).reshape(-1, self.n, self.n)
        object.__setattr__(self, "elements", els)

    def __len__(self) -> int:
        return self.elements.shape[0]

    @property
    def dim(self) -> int:
        return len(self)

    def vectors(self) -> np.ndarray:
        """Real coordinates of the elements, shape (d, 2n^2), orthonormal rows."""
        return to_real_vector(self.elements).reshape(len(self), 2 * self.n * self.n)

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        return self.vectors() @ to_real_vector(x)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of ``x`` onto the span."""
        if len(self) == 0:
            return np.zeros_like(x, dtype=complex)
        return from_real_vector(self.coefficients(x) @ self.vectors(), self.n)

    def gram(self) -> np.ndarray:
        v = self.vectors()
        return v @ v.T


@dataclass(frozen=True)
class GroupKind:
    """Which compact subgroup of SU(n) the controls generate.

    ``tag`` is one of ``SO``, ``Sp``, ``SU_pq``, ``FullSU`` or ``Other``. For
    ``Sp`` the group is Sp(m) inside SU(2m); for ``SU_pq`` it is
    S(U(p) x U(q)) with ``p <= q``.
    """

    tag: str
    n: int
    p: int = 0
    q: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.tag == "Sp" and self.n % 2:
            raise ValueError(f"Sp needs even n, got n={self.n}")
        if self.tag == "SU_pq":
            if self.p < 1 or self.p > self.q or self.p + self.q != self.n:
                raise ValueError(f"SU_pq needs 1 <= p <= q, p + q = n (got p={self.p}, q={self.q}, n={self.n})")
        if self.tag not in ("SO", "Sp", "SU_pq", "FullSU", "Other"):
            raise ValueError(f"unknown group kind {self.tag!r}")

    @property
    def m(self) -> int:
        """Sp index: the group is Sp(m) with n = 2m."""
        return self.n // 2

    @property
    def tabulated(self) -> bool:
        return self.tag in ("SO", "Sp", "SU_pq")

    def __str__(self) -> str:
        if self.tag == "SO":
            return f"SO({self.n})"
        if self.tag == "Sp":
            return f"Sp({self.m})"
        if self.tag == "SU_pq":
            return f"S(U({self.p})xU({self.q}))"
        if self.tag == "FullSU":
            return f"SU({self.n})"
        return "Other"

    @classmethod
    def parse(cls, text: str, n: int) -> "GroupKind":
        """Parse ``SO``, ``Sp``, ``SU_pq(p,q)``, ``FullSU`` or ``Other``."""
        t = text.strip()
        mt = re.fullmatch(r"SU_?pq\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)", t, flags=re.I)
        if mt:
            p, q = sorted((int(mt.group(1)), int(mt.group(2))))
            return cls("SU_pq", n, p, q)
        low = t.lower()
        names = {"so": "SO", "sp": "Sp", "fullsu": "FullSU", "su": "FullSU", "other": "Other"}
        if low in names:
            return cls(names[low], n)
        raise ValueError(f"cannot parse group kind {text!r}")


@dataclass(frozen=True)
class ControlSystem:
    """Drift Hamiltonian plus control Hamiltonians on C^n.

    Matrices are made traceless on construction (with a warning when the
    removed trace is not negligible).
    """

    drift: np.ndarray
    controls: tuple = field(default_factory=tuple)

    def __post_init__(self):
        d = as_matrix(self.drift)
        n = d.shape[0]
        if not is_hermitian(d):
            raise MatrixError("drift Hamiltonian is not Hermitian")
        ctrls = []
        for j, c in enumerate(self.controls):
            c = as_matrix(c)
            if c.shape != (n, n):
                raise MatrixError(f"control {j} has shape {c.shape}, expected {(n, n)}")
            if not is_hermitian(c):
                raise MatrixError(f"control {j} is not Hermitian")
            ctrls.append(remove_trace(c, f"control {j}"))
        if not ctrls:
            raise MatrixError("at least one control Hamiltonian is required")
        object.__setattr__(self, "drift", remove_trace(d, "drift"))
        object.__setattr__(self, "controls", tuple(ctrls))

    @property
    def n(self) -> int:
        return self.drift.shape[0]

    @property
    def control_array(self) -> np.ndarray:
        return np.array(self.controls)


@dataclass(frozen=True)
class CartanReport:
    kk_in_k: bool
    kp_in_p: bool
    pp_in_k: bool
    max_residual: float

    @property
    def is_cartan(self) -> bool:
        return self.kk_in_k and self.kp_in_p and self.pp_in_k


def full_su_basis(n: int) -> LieBasis:
    """Orthonormal basis of su(n) from the generalized Gell-Mann matrices."""
    gens = []
    for j, k in combinations(range(n), 2):
        s = np.zeros((n, n), dtype=complex)
        s[j, k] = s[k, j] = 1j
        gens.append(s)
        a = np.zeros((n, n), dtype=complex)
        a[j, k], a[k, j] = 1.0, -1.0
        gens.append(a)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        gens.append(1j * np.diag(d))
    return LieBasis(n, orthonormalize(gens, n))


def lie_closure(generators, n: int, tol: float = DEFAULT_RANK_TOL) -> LieBasis:
    """Smallest real Lie algebra containing the given skew-Hermitian generators.

    Breadth-first: every new element is bracketed with all current elements in
    insertion order; residuals with relative norm above ``tol`` are adjoined.
    """
    full = n * n - 1
    mats = list(orthonormalize(generators, n, tol))
    basis = to_real_vector(np.array(mats)).reshape(-1, 2 * n * n) if mats else np.zeros((0, 2 * n * n))
    frontier = 0
    while frontier < len(mats) and len(mats) < full:
        new_start = len(mats)
        for i in range(frontier, new_start):
            for j in range(i):
                r = to_real_vector(commutator(mats[i], mats[j]))
                norm0 = float(np.linalg.norm(r))
                if norm0 == 0.0:
                    continue
                for _ in range(2):
                    r = r - (basis @ r) @ basis
                norm = float(np.linalg.norm(r))
                if norm > tol * norm0:
                    v = r / norm
                    basis = np.vstack([basis, v])
                    mats.append(from_real_vector(v, n))
                    if len(mats) >= full:
                        return LieBasis(n, np.array(mats))
        frontier = new_start
    return LieBasis(n, np.array(mats) if mats else np.zeros((0, n, n), dtype=complex))


def dynamical_algebra(system: ControlSystem, tol: float = DEFAULT_RANK_TOL) -> LieBasis:
    gens = [1j * system.drift] + [1j * c for c in system.controls]
    return lie_closure(gens, system.n, tol)


def control_algebra(system: ControlSystem, tol: float = DEFAULT_RANK_TOL) -> LieBasis:
    return lie_closure([1j * c for c in system.controls], system.n, tol)


def is_controllable(system: ControlSystem, tol: float = DEFAULT_RANK_TOL) -> bool:
    return len(dynamical_algebra(system, tol)) == system.n**2 - 1


def _unit(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def _u_block(k: int) -> list[np.ndarray]:
    """Spanning set of u(k)."""
    out = []
    for i in range(k):
        out.append(1j * _unit(k, i, i))
    for i, j in combinations(range(k), 2):
        out.append(_unit(k, i, j) - _unit(k, j, i))
        out.append(1j * (_unit(k, i, j) + _unit(k, j, i)))
    return out


def standard_basis(kind: GroupKind, n: int | None = None) -> LieBasis:
    """Orthonormal basis of so(n), sp(n/2), s(u(p)+u(q)) or su(n) in standard form."""
    if n is None:
        n = kind.n
    if n != kind.n:
        raise ValueError(f"kind {kind} is inconsistent with n={n}")
    if kind.tag == "SO":
        gens = [_unit(n, i, j) - _unit(n, j, i) for i, j in combinations(range(n), 2)]
    elif kind.tag == "Sp":
        m = kind.m
        gens = []
        for l1 in _u_block(m):
            g = np.zeros((n, n), dtype=complex)
            g[:m, :m] = l1
            g[m:, m:] = l1.conj()
            gens.append(g)
        for i in range(m):
            for j in range(i, m):
                sym = _unit(m, i, j) + _unit(m, j, i) if i != j else _unit(m, i, i)
                for l2 in (sym, 1j * sym):
                    g = np.zeros((n, n), dtype=complex)
                    g[:m, m:] = l2
                    g[m:, :m] = -l2.conj()
                    gens.append(g)
    elif kind.tag == "SU_pq":
        p, q = kind.p, kind.q
        gens = []
        for a in _u_block(p):
            g = np.zeros((n, n), dtype=complex)
            g[:p, :p] = a
            gens.append(g - np.trace(g) / n * np.eye(n))
        for b in _u_block(q):
            g = np.zeros((n, n), dtype=complex)
            g[p:, p:] = b
            gens.append(g - np.trace(g) / n * np.eye(n))
    elif kind.tag == "FullSU":
        return full_su_basis(n)
    else:
        raise ValueError(f"no standard basis for kind {kind}")
    return LieBasis(n, orthonormalize(gens, n))


def standard_controls(kind: GroupKind) -> list[np.ndarray]:
    """Hermitian control Hamiltonians spanning the standard subalgebra.

    Each ``H_j = -i b_j`` is rescaled to ``Tr H_j^2 = 2`` (Pauli / Gell-Mann
    normalization).
    """
    basis = standard_basis(kind)
    out = []
    for b in basis.elements:
        h = -1j * b
        h = 0.5 * (h + h.conj().T)
        out.append(h * np.sqrt(2.0 / np.real(np.trace(h @ h))))
    return out


def orthogonal_complement(k: LieBasis, n: int | None = None) -> LieBasis:
    """Killing-orthogonal complement of span(k) inside su(n)."""
    n = k.n if n is None else n
    full = full_su_basis(n)
    if len(k) == 0:
        return full
    # residuals of unit vectors: an absolute cut removes round-off debris
    residuals = [r for r in (b - k.project(b) for b in full.elements) if np.linalg.norm(to_real_vector(r)) > 1e-8]
    ortho = orthonormalize(list(k.elements) + residuals, n, tol=1e-8)
    return LieBasis(n, ortho[len(k):])


def project_drift(drift: np.ndarray, k: LieBasis) -> np.ndarray:
    """Remove from ``i H_d`` its component along span(k); returns the Hermitian result."""
    a = 1j * np.asarray(drift, dtype=complex)
    res = -1j * (a - k.project(a))
    return 0.5 * (res + res.conj().T)


def _residual_outside(c: np.ndarray, target: LieBasis) -> float:
    """Killing norm of the part of ``c`` orthogonal to span(target)."""
    r = to_real_vector(c)
    if len(target):
        v = target.vectors()
        r = r - (v @ r) @ v
    return float(np.linalg.norm(r))


def verify_cartan(k: LieBasis, p: LieBasis, tol: float = CARTAN_TOL) -> CartanReport:
    """Check [k,k] in k, [k,p] in p and [p,p] in k by commutator residuals."""
    def worst(xs, ys, target, same):
        res = 0.0
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                if same and j <= i:
                    continue
                res = max(res, _residual_outside(commutator(x, y), target))
        return res

    r_kk = worst(k.elements, k.elements, k, True)
    r_kp = worst(k.elements, p.elements, p, False)
    r_pp = worst(p.elements, p.elements, k, True)
    return CartanReport(r_kk <= tol, r_kp <= tol, r_pp <= tol, max(r_kk, r_kp, r_pp))


def algebra_dims(kind: GroupKind) -> tuple[int, int]:
    """(dim k, dim p) in closed form."""
    n = kind.n
    if kind.tag == "SO":
        return n * (n - 1) // 2, (n * n + n - 2) // 2
    if kind.tag == "Sp":
        return n * (n + 1) // 2, (n * n - n - 2) // 2
    if kind.tag == "SU_pq":
        return kind.p**2 + kind.q**2 - 1, 2 * kind.p * kind.q
    if kind.tag == "FullSU":
        return n * n - 1, 0
    raise ValueError(f"no closed-form dimensions for kind {kind}")


def _same_span(a: LieBasis, b: LieBasis, tol: float) -> bool:
    if len(a) != len(b):
        return False
    return all(_residual_outside(x, b) <= tol for x in a.elements)


def classify_control_group(k: LieBasis, n: int | None = None, tol: float = 1e-8) -> GroupKind:
    """Identify k as one of the standard subalgebras; conjugated copies give Other.

    Every one-dimensional subalgebra of su(2) is conjugate to so(2), and all
    three symmetric spaces of SU(2) coincide, so that case is reported as SO(2).
    """
    n = k.n if n is None else n
    d = len(k)
    if d == n * n - 1:
        return GroupKind("FullSU", n)
    if n == 2 and d == 1:
        return GroupKind("SO", 2)
    candidates = [GroupKind("SO", n)]
    if n % 2 == 0:
        candidates.append(GroupKind("Sp", n))
    candidates += [GroupKind("SU_pq", n, p, n - p) for p in range(1, n // 2 + 1)]
    for kind in candidates:
        if algebra_dims(kind)[0] != d:
            continue
        std = standard_basis(kind)
        if _same_span(k, std, tol) and verify_cartan(k, orthogonal_complement(k), tol).is_cartan:
            return kind
    return GroupKind("Other", n)


def commutator_image(drift: np.ndarray, k: LieBasis) -> np.ndarray:
    """Matrix of ``A -> [iH_d, A]`` from k-coordinates to su(n)-coordinates."""
    n = k.n
    a = 1j * np.asarray(drift, dtype=complex)
    target = full_su_basis(n).vectors()
    cols = [target @ to_real_vector(commutator(a, b)) for b in k.elements]
    if not cols:
        return np.zeros((n * n - 1, 0))
    return np.array(cols).T


def centralizer_dim(drift: np.ndarray, k: LieBasis, tol: float = KERNEL_TOL) -> int:
    """dim {A in k : [H_d, A] = 0}."""
    if len(k) == 0:
        return 0
    m = commutator_image(drift, k)
    s = np.linalg.svd(m, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(drift)))))
    rank = int(np.sum(s > tol * scale))
    return len(k) - rank


def adjoint_orbit_dim(drift: np.ndarray, k: LieBasis, tol: float = KERNEL_TOL) -> int:
    return len(k) - centralizer_dim(drift, k, tol)


def minimal_generators_check(k: LieBasis, candidates, tol: float = DEFAULT_RANK_TOL) -> bool:
    """True when the two candidate elements already generate all of k."""
    gen = lie_closure(list(candidates), k.n, tol)
    return len(gen) == len(k) and _same_span(gen, k, 1e-7)
