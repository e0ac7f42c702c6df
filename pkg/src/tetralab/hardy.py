"""Graded odd subspaces of the Hardy space and the phi_3-ladder basis.

``Hom^-(n)`` is spanned by the monomials ``z1^a1 z2^a2 z3^a3`` of degree ``n``
with ``a3`` odd.  Distinct degrees are orthogonal, so each degree is
orthonormalized on its own.  Multiplication by ``phi_3 = z1 z2 - z3^2`` is an
isometry (``|phi_3| = 1`` on the boundary) mapping ``Hom^-(n)`` into
``Hom^-(n+2)``; the basis built here contains ``phi_3 * e`` for every ``e``
two degrees lower, as the first vectors of each degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .measure import (
    DegreeError,
    MeasureContext,
    MultiIndex,
    moment,
    normalization_C,
    phi_polys,
)
from .poly import PRUNE_TOL, Poly

GRAM_EIG_FLOOR = 1e-12
DEPENDENCE_TOL = 1e-8


class GramSchmidtBreakdown(RuntimeError):
    pass


def enumerate_hom_minus(n: int) -> List[MultiIndex]:
    """Odd monomials of degree ``n``: ``a3`` descending, then ``a1`` descending."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    out = []
    for a3 in range(n if n % 2 else n - 1, 0, -2):
        for a1 in range(n - a3, -1, -1):
            out.append(MultiIndex(a1, n - a3 - a1, a3))
    return out


def dim_hom_minus(n: int) -> int:
    if n < 0:
        raise ValueError("degree must be >= 0")
    return (n + 1) ** 2 // 4 if n % 2 else n * (n + 2) // 4


def gram_matrix(n: int, ctx: MeasureContext) -> np.ndarray:
    """``G[i, j] = moment(mu_i, mu_j)`` over :func:`enumerate_hom_minus`."""
    if 2 * n > ctx.spec.max_degree:
        raise DegreeError(2 * n, ctx.spec.max_degree, f"Gram matrix of degree {n}")
    mons = enumerate_hom_minus(n)
    d = len(mons)
    G = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(i, d):
            G[i, j] = moment(mons[i], mons[j], ctx)
            G[j, i] = G[i, j].conjugate()
    if d:
        lo = np.linalg.eigvalsh(G).min()
        if lo < GRAM_EIG_FLOOR:
            raise np.linalg.LinAlgError(f"Gram matrix of degree {n} is numerically singular (min eigenvalue {lo:.3e})")
    return G


def _inner(x: np.ndarray, y: np.ndarray, G: np.ndarray) -> complex:
    # <sum x_i m_i, sum y_j m_j> = sum_ij x_i G_ij conj(y_j)
    return complex(x @ G @ y.conj())


def _pruned(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    v[np.abs(v) <= PRUNE_TOL] = 0.0
    return v


def _phi3_times(vec: np.ndarray, src: List[MultiIndex], dst_index: Dict[MultiIndex, int]) -> np.ndarray:
    out = np.zeros(len(dst_index), dtype=complex)
    for c, m in zip(vec, src):
        if c == 0:
            continue
        out[dst_index[MultiIndex(m.a1 + 1, m.a2 + 1, m.a3)]] += c
        out[dst_index[MultiIndex(m.a1, m.a2, m.a3 + 2)]] -= c
    return _pruned(out)


@dataclass
class GradedBasis:
    """Orthonormal bases of ``Hom^-(n)`` for ``1 <= n <= N``.

    ``vectors[n]`` has one column per basis vector, expressed over
    ``monomials[n]``; the first ``ladder_from_prev[n]`` columns equal
    ``phi_3`` times the columns of degree ``n - 2``.
    """

    N: int
    ctx: MeasureContext
    monomials: Dict[int, List[MultiIndex]] = field(default_factory=dict)
    vectors: Dict[int, np.ndarray] = field(default_factory=dict)
    ladder_from_prev: Dict[int, int] = field(default_factory=dict)
    grams: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def degrees(self) -> range:
        return range(1, self.N + 1)

    def dim(self, n: int) -> int:
        return self.vectors[n].shape[1]

    def offsets(self, lo: int = 1, hi: int | None = None) -> Dict[int, int]:
        hi = self.N if hi is None else hi
        off, pos = {}, 0
        for n in range(lo, hi + 1):
            off[n] = pos
            pos += self.dim(n)
        return off

    def size(self, lo: int = 1, hi: int | None = None) -> int:
        hi = self.N if hi is None else hi
        return sum(self.dim(n) for n in range(lo, hi + 1))

    def poly(self, n: int, i: int) -> Poly:
        return Poly({tuple(m): c for m, c in zip(self.monomials[n], self.vectors[n][:, i])})

    def gram_of_basis(self, n: int) -> np.ndarray:
        V = self.vectors[n]
        G = self.grams.get(n)
        if G is None:
            G = gram_matrix(n, self.ctx)
        # B[i, j] = <e_j, e_i>
        return V.T.conj() @ G.T @ V

    def expand(self, p: Poly, n: int) -> np.ndarray:
        """Coordinates of a degree-``n`` odd polynomial in the basis of degree ``n``."""
        index = {m: k for k, m in enumerate(self.monomials[n])}
        coeffs = np.zeros(len(index), dtype=complex)
        for exp, c in p.terms.items():
            m = MultiIndex(*exp)
            if m not in index:
                raise ValueError(f"monomial {exp} is not in Hom^-({n})")
            coeffs[index[m]] = c
        return np.linalg.solve(self.vectors[n], coeffs)

    def ladder_link_holds(self, n: int) -> bool:
        """Exact coefficient identity ``e_i^n == phi_3 * e_i^{n-2}``."""
        if n < 3:
            return True
        k = self.ladder_from_prev[n]
        phi3 = phi_polys()[2]
        return all((phi3 * self.poly(n - 2, i)) == self.poly(n, i) for i in range(k))


def build_ladder_basis(N: int, ctx: MeasureContext) -> GradedBasis:
    """Orthonormal bases of ``Hom^-(1..N)`` closed under multiplication by ``phi_3``.

    Each degree starts from the ``phi_3``-images of the previous-but-one degree
    and is completed from its monomials in canonical order by modified
    Gram-Schmidt with one re-orthogonalization pass.  Monomials already in the
    span are skipped.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if 2 * N > ctx.spec.max_degree:
        raise DegreeError(2 * N, ctx.spec.max_degree, f"ladder basis up to degree {N}")
    basis = GradedBasis(N, ctx)
    for n in range(1, N + 1):
        mons = enumerate_hom_minus(n)
        index = {m: k for k, m in enumerate(mons)}
        G = gram_matrix(n, ctx)
        d = len(mons)
        cols: List[np.ndarray] = []
        if n >= 3:
            prev = basis.vectors[n - 2]
            for i in range(prev.shape[1]):
                cols.append(_phi3_times(prev[:, i], basis.monomials[n - 2], index))
        seeded = len(cols)
        for k in range(d):
            if len(cols) == d:
                break
            v = np.zeros(d, dtype=complex)
            v[k] = 1.0
            start = math.sqrt(_inner(v, v, G).real)
            for _ in range(2):
                for e in cols:
                    v = v - _inner(v, e, G) * e
            nrm = math.sqrt(max(_inner(v, v, G).real, 0.0))
            if nrm <= DEPENDENCE_TOL * start:
                continue
            cols.append(_pruned(v / nrm))
        if len(cols) != d:
            raise GramSchmidtBreakdown(f"degree {n}: obtained {len(cols)} of {d} basis vectors")
        basis.monomials[n] = mons
        basis.vectors[n] = np.column_stack(cols) if cols else np.zeros((0, 0), dtype=complex)
        basis.ladder_from_prev[n] = seeded
        basis.grams[n] = G
    return basis


# ---------------------------------------------------------------------------
# transfer between the tetrablock and the odd Hardy space


def parity_check(f: Poly) -> bool:
    """True iff every monomial has an odd z3 exponent (``f o sigma = -f``)."""
    return all(exp[2] % 2 == 1 for exp in f.terms)


def psi_forward(f: Poly, ctx: MeasureContext) -> Poly:
    """``C^{-1/2} J_phi (f o phi)``; isometric from L^2(S_E) into the odd part."""
    z3 = Poly.variable(2)
    scale = -2.0 / math.sqrt(normalization_C(ctx))
    return (z3 * f.substitute(phi_polys())) * scale


def psi_inverse(g: Poly, ctx: MeasureContext) -> Poly:
    """The polynomial ``f`` on the tetrablock side with ``psi_forward(f) == g``.

    Writes ``g = z3 * h(z1, z2, z3^2)`` and eliminates ``z3^2 = z1 z2 - phi_3``.
    """
    if not parity_check(g):
        raise ValueError("psi_inverse needs a sigma-odd polynomial (odd z3 exponents only)")
    x1, x2, x3 = (Poly.variable(i) for i in range(3))
    s = x1 * x2 - x3
    out = Poly()
    for (a1, a2, a3), c in g.terms.items():
        out = out + (x1**a1) * (x2**a2) * (s ** ((a3 - 1) // 2)) * c
    return out * (-math.sqrt(normalization_C(ctx)) / 2.0)
