"""Piecewise-constant pulse optimization (GRAPE) against unitary targets.

The evolution ``i dU/dt = (H_d + sum_j f_j(t) H_j) U`` is discretised into
``N`` slots of width ``T/N`` with constant amplitudes. The figure of merit is
the phase-insensitive fidelity ``F = |Tr(W^dagger U(T))| / n`` and the
optimizer minimizes the error ``1 - F``.

Randomness is derived from ``numpy.random.SeedSequence`` with spawn keys
``(target_id, t_index, restart)``, so every (target, time, restart) task has a
private stream and results do not depend on execution order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.optimize import minimize

from .lie_engine import ControlSystem

log = logging.getLogger(__name__)

GRID_CAVEAT = (
    "minimum times are resolved only on the sampled time grid; a faster solution "
    "at an untested time would not be seen"
)


@dataclass(frozen=True)
class ControlSchedule:
    horizon: float
    amplitudes: np.ndarray  # shape (m, N)

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def slots(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def dt(self) -> float:
        return self.horizon / self.slots


@dataclass(frozen=True)
class GrapeConfig:
    slots: int = 100
    restarts: int = 20
    max_iter: int = 1000
    cutoff: float = 1e-7
    init_scale: float = 1.0
    method: str = "lbfgs"  # "lbfgs" or "gradient"
    step0: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    stall_window: int = 50
    stall_rtol: float = 1e-12
    predictive_stop: bool = True
    amp_max: float | None = None
    warm_start: bool = True
    stop_at_success: bool = True
    full_sweep: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.slots < 1 or self.restarts < 1 or self.max_iter < 1:
            raise ValueError("slots, restarts and max_iter must be positive")
        if not 0 < self.cutoff < 1:
            raise ValueError("cutoff must lie in (0, 1)")
        if self.method not in ("lbfgs", "gradient"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class GrapeOutcome:
    error: float
    schedule: ControlSchedule
    converged: bool
    iterations: int
    restart: int  # -1 marks the warm-started attempt


@dataclass
class SweepRecord:
    target_id: int
    times: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    min_time: float | None = None


# ---------------------------------------------------------------------------
# propagation and fidelity


def _slot_hamiltonians(system: ControlSystem, amps: np.ndarray) -> np.ndarray:
    return system.drift[None, :, :] + np.einsum("jk,jab->kab", amps, system.control_array)


def _slot_unitaries(h: np.ndarray, dt: float):
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * dt * w)
    u = (v * phases[:, None, :]) @ np.swapaxes(v.conj(), 1, 2)
    return u, w, v, phases


def _chain(units: np.ndarray) -> np.ndarray:
    out = units[0]
    for u in units[1:]:
        out = u @ out
    return out


@numba.njit(cache=True)
def _partial_products(u):
    """before[k] = U_{k-1}..U_1 and after[k] = U_N..U_{k+1} for slot k (0-based)."""
    nslots, n, _ = u.shape
    before = np.zeros_like(u)
    after = np.zeros_like(u)
    for a in range(n):
        before[0, a, a] = 1.0
        after[nslots - 1, a, a] = 1.0
    for k in range(1, nslots):
        for a in range(n):
            for b in range(n):
                acc = 0j
                for c in range(n):
                    acc += u[k - 1, a, c] * before[k - 1, c, b]
                before[k, a, b] = acc
    for k in range(nslots - 2, -1, -1):
        for a in range(n):
            for b in range(n):
                acc = 0j
                for c in range(n):
                    acc += after[k + 1, a, c] * u[k + 1, c, b]
                after[k, a, b] = acc
    return before, after


def propagate(system: ControlSystem, sched: ControlSchedule) -> np.ndarray:
    """Total propagator ``U_N ... U_1`` with slot 1 applied first."""
    amps = sched.amplitudes
    if amps.shape[0] != len(system.controls):
        raise ValueError(f"schedule has {amps.shape[0]} controls, system has {len(system.controls)}")
    u, *_ = _slot_unitaries(_slot_hamiltonians(system, amps), sched.dt)
    return _chain(u)


def fidelity(u: np.ndarray, target: np.ndarray) -> float:
    n = u.shape[0]
    return float(min(1.0, abs(np.trace(target.conj().T @ u)) / n))


def _error_and_gradient(system: ControlSystem, target: np.ndarray, amps: np.ndarray, dt: float, want_grad=True):
    n = system.n
    u, w, v, phases = _slot_unitaries(_slot_hamiltonians(system, amps), dt)
    wd = target.conj().T
    before, after = _partial_products(u)
    total = u[-1] @ before[-1]
    g = np.trace(wd @ total)
    err = 1.0 - abs(g) / n
    if not want_grad:
        return err, None, total
    # dg/df_jk = Tr(M_k dU_k) with M_k = (U_{k-1}..U_1) W^dagger (U_N..U_{k+1})
    mk = before @ wd[None] @ after
    vh = np.swapaxes(v.conj(), 1, 2)
    mt = np.swapaxes(vh @ mk @ v, 1, 2)
    # divided differences of exp(-i lam dt): -i dt e^{-i dt (a+b)/2} sinc(dt (a-b) / 2)
    mean = 0.5 * (w[:, :, None] + w[:, None, :])
    half = 0.5 * dt * (w[:, :, None] - w[:, None, :])
    kern = -1j * dt * np.exp(-1j * dt * mean) * np.sinc(half / np.pi)
    q = v @ np.swapaxes(mt * kern, 1, 2) @ vh
    dg = np.einsum("kdc,jcd->jk", q, system.control_array)
    if abs(g) < 1e-300:
        grad = np.zeros_like(amps)
    else:
        grad = -np.real(np.conj(g) * dg) / (n * abs(g))
    return err, grad, total


def gradient(system: ControlSystem, sched: ControlSchedule, target: np.ndarray) -> np.ndarray:
    """Exact gradient of ``1 - F`` with respect to every slot amplitude, shape (m, N)."""
    _, grad, _ = _error_and_gradient(system, np.asarray(target, dtype=complex), sched.amplitudes, sched.dt)
    return grad


def fidelity_error(system: ControlSystem, sched: ControlSchedule, target: np.ndarray) -> float:
    return 1.0 - fidelity(propagate(system, sched), np.asarray(target, dtype=complex))


# ---------------------------------------------------------------------------
# random targets and seeding


def haar_random_su(n: int, seed=None) -> np.ndarray:
    """Haar-random element of SU(n).

    QR of a complex Ginibre matrix with the phases of R's diagonal moved into
    Q, then the determinant divided out on the principal branch.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))[None, :]
    return q * np.linalg.det(q) ** (-1.0 / n)


def task_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def target_unitary(n: int, seed: int, target_id: int) -> np.ndarray:
    return haar_random_su(n, task_rng(seed, 0, target_id))


# ---------------------------------------------------------------------------
# optimization


class _Stop(Exception):
    pass


def _should_stop(history: list, cfg: GrapeConfig) -> bool:
    """Stall test over the last ``stall_window`` iterations.

    Besides the plain relative-improvement test, with ``predictive_stop`` the
    run is abandoned when the decrease rate of the last window, continued over
    the remaining iteration budget, cannot bring the error down to the cutoff.
    """
    w = cfg.stall_window
    if len(history) <= w:
        return False
    old, new = history[-w - 1], history[-1]
    if old - new < cfg.stall_rtol * max(old, 1e-300):
        return True
    if cfg.predictive_stop and new > cfg.cutoff and old > 0:
        windows_left = (cfg.max_iter - len(history)) / w
        projected = new * (new / old) ** windows_left
        return projected > cfg.cutoff
    return False


class _Objective:
    """Wraps the error/gradient and remembers the best point seen."""

    def __init__(self, system, target, shape, dt, cfg):
        self.system = system
        self.target = target
        self.shape = shape
        self.dt = dt
        self.cfg = cfg
        self.best_err = math.inf
        self.best_x = None
        self.evals = 0

    def __call__(self, x):
        amps = x.reshape(self.shape)
        err, grad, _ = _error_and_gradient(self.system, self.target, amps, self.dt)
        self.evals += 1
        if err < self.best_err:
            self.best_err = err
            self.best_x = x.copy()
        if err <= self.cfg.cutoff:
            raise _Stop
        return err, grad.ravel()


def _run_lbfgs(obj: _Objective, x0: np.ndarray, cfg: GrapeConfig) -> int:
    history = []

    def callback(xk):
        history.append(obj.best_err)
        if _should_stop(history, cfg):
            raise _Stop

    bounds = None
    if cfg.amp_max is not None:
        bounds = [(-cfg.amp_max, cfg.amp_max)] * x0.size
    try:
        minimize(
            obj,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            callback=callback,
            options={"maxiter": cfg.max_iter, "ftol": 1e-16, "gtol": 1e-10, "maxcor": 20},
        )
    except _Stop:
        pass
    return len(history)


def _run_gradient(obj: _Objective, x0: np.ndarray, cfg: GrapeConfig, trace: list | None = None) -> int:
    """Steepest descent on the error with Armijo backtracking."""
    x = x0.copy()
    try:
        err, grad = obj(x)
    except _Stop:
        return 0
    if trace is not None:
        trace.append(err)
    history = [err]
    step = cfg.step0
    it = 0
    try:
        for it in range(1, cfg.max_iter + 1):
            gg = float(grad @ grad)
            if gg == 0.0:
                break
            t = step
            while True:
                xn = x - t * grad
                if cfg.amp_max is not None:
                    xn = np.clip(xn, -cfg.amp_max, cfg.amp_max)
                en, gn = obj(xn)
                if en <= err - cfg.armijo * t * gg:
                    break
                t *= cfg.shrink
                if t < 1e-14:
                    return it
            x, err, grad = xn, en, gn
            if trace is not None:
                trace.append(err)
            # allow the step to grow again after easy progress
            step = min(t / cfg.shrink, 1e6)
            history.append(err)
            if _should_stop(history, cfg):
                break
    except _Stop:
        if trace is not None:
            trace.append(obj.best_err)
    return it


def _attempt(system, target, horizon, x0, cfg, trace=None) -> tuple[float, np.ndarray, int]:
    shape = (len(system.controls), cfg.slots)
    obj = _Objective(system, target, shape, horizon / cfg.slots, cfg)
    if cfg.method == "lbfgs":
        iters = _run_lbfgs(obj, x0.ravel(), cfg)
    else:
        iters = _run_gradient(obj, x0.ravel(), cfg, trace)
    if obj.best_x is None:
        obj.best_x = x0.ravel().copy()
        obj.best_err = fidelity_error(system, ControlSchedule(horizon, x0.reshape(shape)), target)
    return obj.best_err, obj.best_x.reshape(shape), iters


def optimize(
    system: ControlSystem,
    target: np.ndarray,
    horizon: float,
    cfg: GrapeConfig = GrapeConfig(),
    target_id: int = 0,
    t_index: int = 0,
    init: np.ndarray | None = None,
) -> GrapeOutcome:
    """Multi-start optimization of a schedule of length ``horizon`` towards ``target``.

    An optional warm start ``init`` is tried first; then up to ``cfg.restarts``
    random starts with i.i.d. normal amplitudes of scale ``cfg.init_scale``.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    target = np.asarray(target, dtype=complex)
    m = len(system.controls)
    best = None
    total_iters = 0
    starts = []
    if init is not None:
        starts.append((-1, resample(init, cfg.slots)))
    for r in range(cfg.restarts):
        starts.append((r, None))
    for r, x0 in starts:
        if x0 is None:
            x0 = cfg.init_scale * task_rng(cfg.seed, 1, target_id, t_index, r).standard_normal((m, cfg.slots))
        err, x, iters = _attempt(system, target, horizon, x0, cfg)
        total_iters += iters
        if best is None or err < best[0]:
            best = (err, x, r)
        if cfg.stop_at_success and err <= cfg.cutoff:
            break
    err, x, r = best
    err = float(min(max(err, 0.0), 1.0))
    return GrapeOutcome(err, ControlSchedule(horizon, x), err <= cfg.cutoff, total_iters, r)


def resample(amps: np.ndarray, slots: int) -> np.ndarray:
    """Piecewise-constant resampling of an (m, N) schedule onto ``slots`` slots."""
    amps = np.atleast_2d(amps)
    if amps.shape[1] == slots:
        return amps.copy()
    src = (np.arange(slots) + 0.5) / slots * amps.shape[1]
    return amps[:, np.minimum(src.astype(int), amps.shape[1] - 1)]


def min_time_for_target(
    system: ControlSystem,
    target: np.ndarray,
    grid,
    cfg: GrapeConfig = GrapeConfig(),
    target_id: int = 0,
) -> SweepRecord:
    """Scan an ascending time grid; ``min_time`` is the first time reaching the cutoff."""
    grid = [float(t) for t in grid]
    if any(t <= 0 for t in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("time grid must be positive and strictly ascending")
    rec = SweepRecord(target_id)
    prev = None
    for i, t in enumerate(grid):
        out = optimize(system, target, t, cfg, target_id, i, prev if cfg.warm_start else None)
        rec.times.append(t)
        rec.errors.append(out.error)
        prev = out.schedule.amplitudes
        log.debug("target %d T=%.4f error=%.3e", target_id, t, out.error)
        if out.converged and rec.min_time is None:
            rec.min_time = t
            if not cfg.full_sweep:
                break
    return rec


def _sweep_task(args):
    system, grid, cfg, tid, target_fn = args
    target = target_unitary(system.n, cfg.seed, tid) if target_fn is None else target_fn(tid)
    return min_time_for_target(system, target, grid, cfg, tid)


def estimate_qsl(
    system: ControlSystem,
    num_targets: int,
    grid,
    cfg: GrapeConfig = GrapeConfig(),
    jobs: int = 1,
    target_fn=None,
) -> tuple[float | None, list[SweepRecord]]:
    """Largest per-target minimum time over Haar-random targets.

    ``target_fn(target_id)`` replaces the Haar draw when given; it must be
    picklable if ``jobs > 1``. Returns ``(None, records)`` when some target
    never converges on the grid.
    """
    if num_targets < 1:
        raise ValueError("num_targets must be at least 1")
    tasks = [(system, list(grid), cfg, tid, target_fn) for tid in range(num_targets)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_sweep_task, tasks))
    else:
        records = [_sweep_task(t) for t in tasks]
    times = [r.min_time for r in records]
    if any(t is None for t in times):
        return None, records
    return max(times), records


def uniform_grid(tmin: float, tmax: float, step: float) -> list[float]:
    count = int(math.floor((tmax - tmin) / step + 1e-9)) + 1
    return [round(tmin + i * step, 12) for i in range(count) if tmin + i * step > 0]

