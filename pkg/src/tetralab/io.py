"""File formats: moment cache CSV, basis JSON, operator-window JSON, reports."""

from __future__ import annotations

import csv
import io as _io
import json
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .hardy import GradedBasis, enumerate_hom_minus
from .measure import MeasureContext, MultiIndex, QuadratureSpec, normalization_C
from .toeplitz import OperatorWindow

SCHEMA = "tetralab.report/1"
CACHE_COLUMNS = ["a1", "a2", "a3", "b1", "b2", "b3", "re", "im"]


class CacheFormatError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _g17(x: float) -> str:
    return "%.17g" % x


# ---------------------------------------------------------------------------
# moment cache


def save_moment_cache(ctx: MeasureContext, path) -> None:
    lines = [f"# {ctx.spec.header()}", ",".join(CACHE_COLUMNS)]
    for key in sorted(ctx.cache):
        v = ctx.cache[key]
        lines.append(",".join([*(str(k) for k in key), _g17(v.real), _g17(v.imag)]))
    Path(path).write_text("\n".join(lines) + "\n")


_HEADER = re.compile(r"^# max_degree=(\d+),n_phase=(\d+),n_angle=(\d+),n_gauss=(\d+)$")


def load_moment_cache(path, ctx: Optional[MeasureContext] = None) -> MeasureContext:
    """Read a cache file into ``ctx`` (or a fresh context built from its header)."""
    text = Path(path).read_text().splitlines()
    if not text:
        raise CacheFormatError("empty cache file", 1)
    m = _HEADER.match(text[0])
    if not m:
        raise CacheFormatError(f"malformed header comment {text[0]!r}", 1)
    spec = QuadratureSpec(*(int(g) for g in m.groups()))
    if ctx is None:
        ctx = MeasureContext(spec)
    elif ctx.spec.max_degree != spec.max_degree:
        raise CacheFormatError(
            f"cache was written for max_degree {spec.max_degree}, context has {ctx.spec.max_degree}", 1
        )
    if len(text) < 2 or text[1] != ",".join(CACHE_COLUMNS):
        raise CacheFormatError("missing column header", 2)
    for lineno, row in enumerate(csv.reader(text[2:]), start=3):
        if len(row) != 8:
            raise CacheFormatError(f"expected 8 fields, found {len(row)}", lineno)
        try:
            key = tuple(int(x) for x in row[:6])
            val = complex(float(row[6]), float(row[7]))
        except ValueError as exc:
            raise CacheFormatError(str(exc), lineno) from None
        if any(k < 0 for k in key):
            raise CacheFormatError("negative exponent", lineno)
        ctx.cache[key] = val
    return ctx


# ---------------------------------------------------------------------------
# basis


def basis_to_dict(basis: GradedBasis) -> Dict[str, object]:
    degrees = []
    for n in basis.degrees:
        V = basis.vectors[n]
        degrees.append({
            "n": n,
            "monomials": [list(m) for m in basis.monomials[n]],
            "vectors": [[[float(c.real), float(c.imag)] for c in V[:, i]] for i in range(V.shape[1])],
            "ladder_from_prev": basis.ladder_from_prev[n],
        })
    return {
        "max_degree": basis.N,
        "measure": basis.ctx.describe(),
        "degrees": degrees,
    }


def save_basis(basis: GradedBasis, path) -> None:
    Path(path).write_text(dumps(basis_to_dict(basis)))


def load_basis(path, ctx: Optional[MeasureContext] = None) -> GradedBasis:
    doc = json.loads(Path(path).read_text())
    meas = doc["measure"]
    spec = QuadratureSpec(meas["max_degree"], meas["n_phase"], meas["n_angle"], meas["n_gauss"])
    if ctx is None:
        ctx = MeasureContext(spec)
    if abs(normalization_C(ctx) - meas["C"]) > 1e-12:
        raise ValueError(f"basis file normalization C={meas['C']} disagrees with the measure context")
    basis = GradedBasis(int(doc["max_degree"]), ctx)
    for entry in doc["degrees"]:
        n = int(entry["n"])
        mons = [MultiIndex(*m) for m in entry["monomials"]]
        if mons != enumerate_hom_minus(n):
            raise ValueError(f"degree {n}: monomial list is not in canonical order")
        V = np.array([[complex(re, im) for re, im in vec] for vec in entry["vectors"]], dtype=complex).T
        basis.monomials[n] = mons
        basis.vectors[n] = V.reshape(len(mons), len(entry["vectors"]))
        basis.ladder_from_prev[n] = int(entry["ladder_from_prev"])
    return basis


# ---------------------------------------------------------------------------
# operator windows


def window_to_dict(win: OperatorWindow) -> Dict[str, object]:
    return {
        "degrees": [win.lo, win.hi],
        "dims": [win.dims[n] for n in range(win.lo, win.hi + 1)],
        "basis": win.basis_id,
        "real": win.matrix.real.tolist(),
        "imag": win.matrix.imag.tolist(),
    }


def save_window(win: OperatorWindow, path) -> None:
    Path(path).write_text(dumps(window_to_dict(win)))


def load_window(path, basis: GradedBasis) -> OperatorWindow:
    doc = json.loads(Path(path).read_text())
    lo, hi = (int(x) for x in doc["degrees"])
    if lo != 1:
        raise ValueError("windows must start at degree 1")
    if hi > basis.N:
        raise ValueError(f"window reaches degree {hi}, basis only to {basis.N}")
    M = np.array(doc["real"], dtype=float) + 1j * np.array(doc.get("imag", np.zeros_like(doc["real"])), dtype=float)
    dims = {n: basis.dim(n) for n in range(1, hi + 1)}
    return OperatorWindow(M, lo, hi, dims, doc.get("basis", ""))


# ---------------------------------------------------------------------------
# reports


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def decay_csv(profile: Iterable[Tuple[int, float]]) -> str:
    buf = _io.StringIO()
    buf.write("r,max_abs_entry\n")
    for r, v in profile:
        buf.write(f"{r},{_g17(v)}\n")
    return buf.getvalue()
