"""JSON control-system files.

Layout::

    {
      "n": 2,
      "drift":    [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]],
      "controls": [[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]],
      "kind": "auto"
    }

Every matrix entry is a ``[re, im]`` pair. ``kind`` is optional and one of
``auto``, ``SO``, ``Sp``, ``SU_pq(p,q)``.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .lie_engine import ControlSystem
from .matrix_core import MatrixError

log = logging.getLogger(__name__)

HERMITIAN_WARN_TOL = 1e-8


class SpecError(ValueError):
    """A control-system file could not be parsed."""


def _decode_matrix(raw, n: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n:
        raise SpecError(f"{where}: expected {n} rows")
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n:
            raise SpecError(f"{where}[{i}]: expected {n} entries")
        for j, entry in enumerate(row):
            if isinstance(entry, (int, float)):
                entry = [entry, 0.0]
            if not isinstance(entry, list) or len(entry) != 2:
                raise SpecError(f"{where}[{i}][{j}]: expected a [re, im] pair")
            try:
                out[i, j] = complex(float(entry[0]), float(entry[1]))
            except (TypeError, ValueError) as exc:
                raise SpecError(f"{where}[{i}][{j}]: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise SpecError(f"{where}: non-finite entries")
    asym = float(np.linalg.norm(out - out.conj().T))
    if asym > 0.0:
        if asym > HERMITIAN_WARN_TOL * max(1.0, float(np.linalg.norm(out))):
            log.warning("%s is not Hermitian (deviation %.3g); symmetrizing", where, asym)
        out = 0.5 * (out + out.conj().T)
    return out


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def parse_spec(text: str) -> tuple[ControlSystem, str]:
    """Parse file contents into a control system and the declared kind string."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise SpecError("top level must be an object")
    for key in ("n", "drift", "controls"):
        if key not in data:
            raise SpecError(f"missing field {key!r}")
    n = data["n"]
    if not isinstance(n, int) or n < 2:
        raise SpecError("field 'n' must be an integer >= 2")
    drift = _decode_matrix(data["drift"], n, "drift")
    controls_raw = data["controls"]
    if not isinstance(controls_raw, list) or not controls_raw:
        raise SpecError("field 'controls' must be a non-empty list")
    controls = [_decode_matrix(c, n, f"controls[{j}]") for j, c in enumerate(controls_raw)]
    kind = data.get("kind", "auto")
    if not isinstance(kind, str):
        raise SpecError("field 'kind' must be a string")
    try:
        system = ControlSystem(drift, tuple(controls))
    except MatrixError as exc:
        raise SpecError(str(exc)) from None
    return system, kind


def load_spec(path) -> tuple[ControlSystem, str]:
    return parse_spec(Path(path).read_text())


def dump_spec(system: ControlSystem, kind: str = "auto") -> str:
    # one matrix row per line; repr-exact floats so a reload is bitwise identical
    def block(m, indent):
        rows = [json.dumps(row) for row in _encode_matrix(m)]
        pad = " " * indent
        return "[\n" + ",\n".join(pad + "  " + r for r in rows) + "\n" + pad + "]"

    controls = ",\n".join("    " + block(c, 4) for c in system.controls)
    return (
        "{\n"
        f'  "n": {system.n},\n'
        f'  "kind": {json.dumps(kind)},\n'
        f'  "drift": {block(system.drift, 2)},\n'
        f'  "controls": [\n{controls}\n  ]\n'
        "}"
    )
