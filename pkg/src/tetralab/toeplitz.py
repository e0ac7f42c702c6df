"""Finite windows of Toeplitz operators on the odd Hardy space.

All windows are expressed in the ladder basis of :mod:`tetralab.hardy` and
indexed by degree blocks.  Entries are exact quadratic forms
``<u e_j, e_i>`` (never products of truncated matrices), and every relation
check restricts test vectors to degrees where the multiplied vectors stay
inside the computed window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .hardy import GradedBasis, enumerate_hom_minus, gram_matrix
from .measure import DegreeError, MultiIndex, moment, phi_polys
from .poly import Poly
from .symbols import Key, SymbolExpr, dictionary_terms, symbol_pullback

QUADRATURE_TOL = 1e-9
BH_TOL = 1e-8
RECOVERY_TOL = 1e-6


class WindowTooSmall(ValueError):
    def __init__(self, need_hi: int, have_hi: int):
        self.need_hi = need_hi
        super().__init__(f"window must cover degrees 1..{need_hi}, but it stops at degree {have_hi}")


@dataclass
class OperatorWindow:
    """Square block of an operator over basis degrees ``lo..hi``."""

    matrix: np.ndarray
    lo: int
    hi: int
    dims: Dict[int, int]
    basis_id: str = ""

    def __post_init__(self):
        size = sum(self.dims[n] for n in range(self.lo, self.hi + 1))
        if self.matrix.shape != (size, size):
            raise ValueError(f"window matrix has shape {self.matrix.shape}, expected {(size, size)}")

    @property
    def offsets(self) -> Dict[int, int]:
        off, pos = {}, 0
        for n in range(self.lo, self.hi + 1):
            off[n] = pos
            pos += self.dims[n]
        return off

    def size_upto(self, n: int) -> int:
        return sum(self.dims[m] for m in range(self.lo, n + 1))

    def block(self, m: int, n: int) -> np.ndarray:
        """Rows of degree ``m``, columns of degree ``n``."""
        off = self.offsets
        return self.matrix[off[m]:off[m] + self.dims[m], off[n]:off[n] + self.dims[n]]

    def restrict(self, hi: int) -> "OperatorWindow":
        s = self.size_upto(hi)
        return OperatorWindow(self.matrix[:s, :s].copy(), self.lo, hi, self.dims, self.basis_id)

    def entry(self, m: int, j: int, n: int, i: int) -> complex:
        """``<A e_i^n, e_j^m>``."""
        off = self.offsets
        return complex(self.matrix[off[m] + j, off[n] + i])


def basis_id(basis: GradedBasis) -> str:
    s = basis.ctx.spec
    return f"ladder(N={basis.N};{s.header()})"


def _empty(basis: GradedBasis, hi: int) -> OperatorWindow:
    dims = {n: basis.dim(n) for n in range(1, hi + 1)}
    size = sum(dims.values())
    return OperatorWindow(np.zeros((size, size), dtype=complex), 1, hi, dims, basis_id(basis))


def _check_hi(basis: GradedBasis, hi: int) -> None:
    if hi < 1:
        raise ValueError("window needs at least degree 1")
    if hi > basis.N:
        raise DegreeError(2 * hi, basis.ctx.spec.max_degree, f"window up to degree {hi} (basis built to {basis.N})")


def required_degree(s: SymbolExpr, hi: int) -> int:
    """Moment degree needed to assemble the window of ``s`` over degrees 1..hi."""
    need = 0
    u = symbol_pullback(s)
    for exp in u.terms:
        g, d = sum(exp[:3]), sum(exp[3:])
        for n in range(1, hi + 1):
            m = n + g - d
            if 1 <= m <= hi:
                need = max(need, n + g + m + d)
    return need


def toeplitz_window(s: SymbolExpr, basis: GradedBasis, N: int) -> OperatorWindow:
    """``A[i, j] = <u e_j, e_i>`` over degrees ``1..N`` with ``u = s o phi``."""
    _check_hi(basis, N)
    need = required_degree(s, N)
    if need > basis.ctx.spec.max_degree:
        raise DegreeError(need, basis.ctx.spec.max_degree, "Toeplitz window")
    win = _empty(basis, N)
    u = symbol_pullback(s)
    off = win.offsets
    ctx = basis.ctx
    by_shift: Dict[int, List[Tuple[Tuple[int, ...], complex]]] = {}
    for exp, c in u.items():
        by_shift.setdefault(sum(exp[:3]) - sum(exp[3:]), []).append((exp, c))
    for n in range(1, N + 1):
        src = basis.monomials[n]
        for shift, terms in sorted(by_shift.items()):
            m = n + shift
            if not 1 <= m <= N:
                continue
            dst = basis.monomials[m]
            # K[q, p] = sum_t c_t moment(mu_q + gamma_t, nu_p + delta_t)
            K = np.zeros((len(src), len(dst)), dtype=complex)
            for exp, c in terms:
                g, d = exp[:3], exp[3:]
                for q, mu in enumerate(src):
                    a = (mu[0] + g[0], mu[1] + g[1], mu[2] + g[2])
                    for p, nu in enumerate(dst):
                        b = (nu[0] + d[0], nu[1] + d[1], nu[2] + d[2])
                        if 2 * a[0] + a[2] == 2 * b[0] + b[2] and 2 * a[1] + a[2] == 2 * b[1] + b[2]:
                            K[q, p] += c * moment(a, b, ctx)
            blk = basis.vectors[m].conj().T @ K.T @ basis.vectors[n]
            win.matrix[off[m]:off[m] + win.dims[m], off[n]:off[n] + win.dims[n]] += blk
    return win


def _multiplication_window(basis: GradedBasis, factor: Poly, step: int, hi: int) -> OperatorWindow:
    """Exact window of multiplication by a homogeneous holomorphic ``factor``.

    Images leaving the window (degree > hi) are dropped, which is the
    compression onto the window.
    """
    win = _empty(basis, hi)
    off = win.offsets
    for n in range(1, hi - step + 1):
        for i in range(basis.dim(n)):
            col = basis.expand(factor * basis.poly(n, i), n + step)
            win.matrix[off[n + step]:off[n + step] + len(col), off[n] + i] = col
    return win


def coordinate_windows(basis: GradedBasis, N: int) -> Tuple[OperatorWindow, OperatorWindow, OperatorWindow]:
    """Windows of multiplication by ``phi_1``, ``phi_2`` (degree +1) and ``phi_3`` (degree +2)."""
    _check_hi(basis, N)
    p1, p2, p3 = phi_polys()
    return (
        _multiplication_window(basis, p1, 1, N),
        _multiplication_window(basis, p2, 1, N),
        _multiplication_window(basis, p3, 2, N),
    )


# ---------------------------------------------------------------------------
# relation checks


@dataclass
class RelationReport:
    check: str
    N: int
    tol: float
    residuals: Dict[str, float]
    passed: bool
    extra: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return {
            "check": self.check,
            "N": self.N,
            "tol": self.tol,
            "residuals": dict(self.residuals),
            "pass": self.passed,
            **self.extra,
        }


def _monomial_gram(basis: GradedBasis, n: int) -> np.ndarray:
    G = basis.grams.get(n)
    if G is None:
        G = gram_matrix(n, basis.ctx)
        basis.grams[n] = G
    return G


def _coeffs(p: Poly, n: int) -> np.ndarray:
    mons = enumerate_hom_minus(n)
    index = {m: k for k, m in enumerate(mons)}
    v = np.zeros(len(mons), dtype=complex)
    for exp, c in p.terms.items():
        v[index[MultiIndex(*exp)]] = c
    return v


def _form(basis: GradedBasis, f: Poly, g: Poly, n: int) -> complex:
    G = _monomial_gram(basis, n)
    return complex(_coeffs(f, n) @ G @ _coeffs(g, n).conj())


def check_tuple_relations(basis: GradedBasis, N: int, tol: float = QUADRATURE_TOL) -> RelationReport:
    """Residuals of ``T1 = T2* T3``, ``T2 = T1* T3`` and ``T3* T3 = I`` as
    quadratic forms on basis vectors of degree <= N."""
    _check_hi(basis, N)
    if 2 * (N + 2) > basis.ctx.spec.max_degree:
        raise DegreeError(2 * (N + 2), basis.ctx.spec.max_degree, "tuple relations")
    p1, p2, p3 = phi_polys()
    polys = {n: [basis.poly(n, i) for i in range(basis.dim(n))] for n in range(1, N + 1)}
    r1 = r2 = r3 = 0.0
    for n in range(1, N + 1):
        for j, ej in enumerate(polys[n]):
            # <phi_1 e_j, e_i> vs <phi_3 e_j, phi_2 e_i>: only degree n+1 targets
            if n + 1 <= N:
                for ei in polys[n + 1]:
                    lhs1 = _form(basis, p1 * ej, ei, n + 1)
                    rhs1 = _form(basis, p3 * ej, p2 * ei, n + 2)
                    lhs2 = _form(basis, p2 * ej, ei, n + 1)
                    rhs2 = _form(basis, p3 * ej, p1 * ei, n + 2)
                    r1 = max(r1, abs(lhs1 - rhs1))
                    r2 = max(r2, abs(lhs2 - rhs2))
            for i, ei in enumerate(polys[n]):
                val = _form(basis, p3 * ej, p3 * ei, n + 2)
                r3 = max(r3, abs(val - (1.0 if i == j else 0.0)))
    res = {"T1_minus_T2adj_T3": r1, "T2_minus_T1adj_T3": r2, "T3adj_T3_minus_I": r3}
    return RelationReport("relations", N, tol, res, max(res.values()) <= tol)


def _as_array(A) -> np.ndarray:
    return A.matrix if isinstance(A, OperatorWindow) else np.asarray(A, dtype=complex)


def brown_halmos_residual(A: OperatorWindow, basis: GradedBasis, N: int) -> Dict[str, float]:
    """Max-entry residuals of the three algebraic relations characterizing
    Toeplitz operators, on test vectors of degree <= N.

    ``A`` must cover degrees ``1..N+2``.
    """
    if A.lo != 1 or A.hi < N + 2:
        raise WindowTooSmall(N + 2, A.hi)
    win = A.restrict(N + 2) if A.hi > N + 2 else A
    Z1, Z2, Z3 = (z.matrix for z in coordinate_windows(basis, N + 2))
    M = win.matrix
    s = win.size_upto(N)
    R1 = (M @ Z1 - Z2.conj().T @ M @ Z3)[:s, :s]
    R2 = (M @ Z2 - Z1.conj().T @ M @ Z3)[:s, :s]
    R3 = (Z3.conj().T @ M @ Z3 - M)[:s, :s]
    return {
        "A_T1_minus_T2adj_A_T3": float(np.abs(R1).max()) if s else 0.0,
        "A_T2_minus_T1adj_A_T3": float(np.abs(R2).max()) if s else 0.0,
        "T3adj_A_T3_minus_A": float(np.abs(R3).max()) if s else 0.0,
    }


def rank_one_window(basis: GradedBasis, hi: int, n: int = 1, i: int = 0) -> OperatorWindow:
    """Orthogonal projector onto the single basis vector ``e_i^n``."""
    win = _empty(basis, hi)
    k = win.offsets[n] + i
    win.matrix[k, k] = 1.0
    return win


def identity_window(basis: GradedBasis, hi: int) -> OperatorWindow:
    win = _empty(basis, hi)
    win.matrix[:] = np.eye(win.matrix.shape[0])
    return win


# ---------------------------------------------------------------------------
# ladder invariance and the compactness mechanism


def ladder_shift_check(s: SymbolExpr, basis: GradedBasis, N: int, r: int,
                       window: Optional[OperatorWindow] = None) -> float:
    """Max of ``|<u e_i^n, e_j^m> - <u e_i^{n+2r}, e_j^{m+2r}>|`` over all
    index pairs with ``n + 2r <= N`` and ``m + 2r <= N``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    W = window if window is not None else toeplitz_window(s, basis, N)
    if r == 0:
        return 0.0
    dev = 0.0
    for n in range(1, N - 2 * r + 1):
        for m in range(1, N - 2 * r + 1):
            lo = W.block(m, n)
            up = W.block(m + 2 * r, n + 2 * r)[: lo.shape[0], : lo.shape[1]]
            if lo.size:
                dev = max(dev, float(np.abs(lo - up).max()))
    return dev


def _seed_degree_of_term(key: Key) -> int:
    # A term maps weight (w1, w2) to (w1 + 2k, w2 + 2a - 2b + 2k) and degree n to
    # n + shift.  Odd monomials of degree n carry w1 = 1, 3, ..., 2n - 1, so an
    # entry can be nonzero once both weights fit in their degrees.
    a, b, k = key
    delta = SymbolExpr.shift(key)
    n = max(1, 1 - delta, k + 1 - delta if k >= 0 else 1 - k)
    return n + max(delta, 0)


def default_seed_degree(s: SymbolExpr) -> int:
    """Smallest seed block in which every term of ``s`` has a nonzero-capable entry."""
    return max((_seed_degree_of_term(k) for k in s.terms), default=1)


def compactness_probe(s: SymbolExpr, basis: GradedBasis, N: int, seed_degree: Optional[int] = None,
                      window: Optional[OperatorWindow] = None) -> List[Tuple[int, float]]:
    """``[(r, max |<u e_i^{n+2r}, e_j^{m+2r}>|)]`` over the seed set ``n, m <= seed_degree``.

    A compact operator would have entries tending to zero along the ladder;
    Toeplitz entries are constant along it.
    """
    s0 = default_seed_degree(s) if seed_degree is None else seed_degree
    if s0 < 1 or s0 > N:
        raise DegreeError(s0, N, "compactness probe seed block")
    W = window if window is not None else toeplitz_window(s, basis, N)
    profile = []
    for r in range((N - s0) // 2 + 1):
        best = 0.0
        for n in range(1, s0 + 1):
            for m in range(1, s0 + 1):
                blk = W.block(m + 2 * r, n + 2 * r)[: basis.dim(m), : basis.dim(n)]
                if blk.size:
                    best = max(best, float(np.abs(blk).max()))
        profile.append((r, best))
    return profile


# ---------------------------------------------------------------------------
# symbol recovery


def visible_terms(dict_degree: int, hi: int) -> List[Key]:
    """Dictionary terms whose degree shift fits inside a window of degrees 1..hi."""
    return [k for k in dictionary_terms(dict_degree) if abs(SymbolExpr.shift(k)) <= hi - 1]


class DictionarySingular(np.linalg.LinAlgError):
    pass


def symbol_recovery(A: OperatorWindow, basis: GradedBasis, N: int, dict_degree: int,
                    coeff_floor: float = 1e-9) -> Tuple[SymbolExpr, float]:
    """Least-squares fit of ``A`` by Toeplitz windows of dictionary symbols.

    The fit uses degrees ``1..N+2`` of ``A``; terms whose degree shift cannot
    appear in that range are left out.  Returns the fitted symbol and the
    relative Frobenius residual.
    """
    if A.lo != 1 or A.hi < N + 2:
        raise WindowTooSmall(N + 2, A.hi)
    hi = N + 2
    target = A.restrict(hi).matrix
    terms = visible_terms(dict_degree, hi)
    cols = [toeplitz_window(SymbolExpr.term(*k), basis, hi).matrix.ravel() for k in terms]
    D = np.column_stack(cols)
    sv = np.linalg.svd(D, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DictionarySingular(f"dictionary windows are linearly dependent (sigma_min/sigma_max = {sv[-1] / sv[0]:.2e})")
    coef, *_ = np.linalg.lstsq(D, target.ravel(), rcond=None)
    scale = max(1.0, float(np.abs(coef).max()) if coef.size else 0.0)
    coef = np.where(np.abs(coef) <= coeff_floor * scale, 0.0, coef)
    norm = np.linalg.norm(target)
    resid = np.linalg.norm(target.ravel() - D @ coef)
    rel = float(resid / norm) if norm > 0 else float(resid)
    return SymbolExpr({k: c for k, c in zip(terms, coef)}), rel
