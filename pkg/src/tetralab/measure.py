"""The invariant boundary measure of the 3-dimensional type-II Cartan domain.

Points of the Shilov boundary are 2x2 symmetric unitary matrices

    W = [[w11, w12],
         [w12, w22]]

identified with ``(z1, z2, z3) = (w11, w22, w12)``.  The invariant probability
measure is the law of ``U @ U.T`` for Haar-distributed ``U`` in U(2) (the
circular orthogonal ensemble), and it is realized here twice:

* by Monte-Carlo sampling (:func:`sample_boundary_R`), and
* by a deterministic tensor grid over a parametrization of ``U``
  (:func:`moment`), which is exact for polynomial integrands up to the
  declared degree.

Writing ``U = e^{ig} [[e^{ip} c, e^{ix} s], [-e^{-ix} s, e^{-ip} c]]`` with
``t = s^2`` uniform on [0, 1], ``u = p - x`` and ``v = p + x`` gives

    w11 = e^{2ig} e^{iv} zeta,   w22 = e^{2ig} e^{-iv} conj(zeta),
    w12 = -2i e^{2ig} c s sin(u),       zeta = e^{iu} c^2 + e^{-iu} s^2.

The global phase ``g`` is integrated analytically, ``u`` and ``v`` use
equispaced nodes and ``t`` uses Gauss-Legendre nodes.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .poly import Poly

ALGEBRAIC_TOL = 1e-12
QUADRATURE_TOL = 1e-10

MC_BATCH = 1 << 16


class DegreeError(ValueError):
    """A request needs more polynomial exactness than the grid provides."""

    def __init__(self, required: int, available: int, what: str = "moment"):
        self.required = required
        self.available = available
        super().__init__(
            f"{what} needs max_degree >= {required}, but the measure context "
            f"was built for max_degree = {available}"
        )


class MultiIndex(NamedTuple):
    """Exponents of z1, z2, z3."""

    a1: int
    a2: int
    a3: int

    @property
    def degree(self) -> int:
        return self.a1 + self.a2 + self.a3

    def weight(self) -> Tuple[int, int]:
        """Character of the diagonal torus acting by W -> D W D^T."""
        return (2 * self.a1 + self.a3, 2 * self.a2 + self.a3)


def _mi(x) -> MultiIndex:
    return x if isinstance(x, MultiIndex) else MultiIndex(*(int(v) for v in x))


@dataclass(frozen=True)
class BoundaryPointR:
    w11: complex
    w22: complex
    w12: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.w11, self.w12], [self.w12, self.w22]])

    @property
    def z(self) -> Tuple[complex, complex, complex]:
        return (self.w11, self.w22, self.w12)

    def check(self, tol: float = ALGEBRAIC_TOL) -> bool:
        W = self.matrix
        unitary = np.max(np.abs(W.conj().T @ W - np.eye(2))) <= tol
        det = abs(self.w11 * self.w22 - self.w12**2)
        return bool(unitary and abs(det - 1.0) <= tol)


# ---------------------------------------------------------------------------
# sampling


def thread_count() -> int:
    """Worker cap taken from ``TETRALAB_THREADS`` (default 1)."""
    raw = os.environ.get("TETRALAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"TETRALAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def haar_unitary_batch(rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` Haar-distributed 2x2 unitaries, shape ``(count, 2, 2)``."""
    Z = (rng.standard_normal((count, 2, 2)) + 1j * rng.standard_normal((count, 2, 2))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    bad = np.abs(d).min(axis=1) == 0.0
    if bad.any():
        Q[bad] = haar_unitary_batch(rng, int(bad.sum()))
        d = np.where(bad[:, None], 1.0, d)
    return Q * (d / np.abs(d))[:, None, :]


def haar_unitary_sample(rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed 2x2 unitary.

    QR of a complex Ginibre matrix, with the phases of ``R``'s diagonal
    moved into ``Q`` so the factorization is unique.
    """
    return haar_unitary_batch(rng, 1)[0]


def _boundary_batch(seed_seq: np.random.SeedSequence, count: int):
    rng = np.random.default_rng(seed_seq)
    U = haar_unitary_batch(rng, count)
    W = U @ np.transpose(U, (0, 2, 1))
    return W[:, 0, 0], W[:, 1, 1], W[:, 0, 1]


def _batch_plan(count: int, seed: int):
    sizes = [MC_BATCH] * (count // MC_BATCH)
    if count % MC_BATCH:
        sizes.append(count % MC_BATCH)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(seqs, sizes))


def sample_boundary_arrays(count: int, seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays ``(w11, w22, w12)`` of ``count`` COE samples.

    Samples are drawn in fixed-size batches with spawned seeds, so the
    output does not depend on the number of worker threads.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    plan = _batch_plan(count, seed)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        parts = list(pool.map(lambda p: _boundary_batch(*p), plan))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def sample_boundary_R(count: int, seed: int) -> List[BoundaryPointR]:
    w11, w22, w12 = sample_boundary_arrays(count, seed)
    return [BoundaryPointR(complex(a), complex(b), complex(c)) for a, b, c in zip(w11, w22, w12)]


def monte_carlo_moments(
    pairs: Sequence[Tuple[Sequence[int], Sequence[int]]], count: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Sample means of ``z^a conj(z)^b`` and their complex standard errors.

    The standard error is ``sqrt(E|f - mean|^2 / count)``, i.e. the combined
    real and imaginary spread.
    """
    pairs = [(_mi(a), _mi(b)) for a, b in pairs]
    total = np.zeros(len(pairs), dtype=complex)
    second = np.zeros(len(pairs))
    for seq, size in _batch_plan(count, seed):
        z = _boundary_batch(seq, size)
        for k, (a, b) in enumerate(pairs):
            f = np.ones(size, dtype=complex)
            for i in range(3):
                if a[i]:
                    f = f * z[i] ** a[i]
                if b[i]:
                    f = f * np.conj(z[i]) ** b[i]
            total[k] += f.sum()
            second[k] += np.sum(np.abs(f) ** 2)
    mean = total / count
    var = np.maximum(second / count - np.abs(mean) ** 2, 0.0)
    return mean, np.sqrt(var / count)


def monte_carlo_gram(
    monomials: Sequence[Sequence[int]], count: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """All sample moments ``E[z^m_i conj(z^m_j)]`` at once, with standard errors.

    Returns ``(mean, se)`` with ``mean[i, j]`` estimating
    ``moment(monomials[i], monomials[j])``.
    """
    mons = [_mi(m) for m in monomials]
    n = len(mons)
    acc = np.zeros((n, n), dtype=complex)
    acc2 = np.zeros((n, n))
    for seq, size in _batch_plan(count, seed):
        z = _boundary_batch(seq, size)
        top = max(m.degree for m in mons)
        pw = [np.stack([zi**e for e in range(top + 1)]) for zi in z]
        Z = np.empty((size, n), dtype=complex)
        for j, m in enumerate(mons):
            Z[:, j] = pw[0][m.a1] * pw[1][m.a2] * pw[2][m.a3]
        A = np.abs(Z) ** 2
        acc += Z.T @ Z.conj()
        acc2 += A.T @ A
    mean = acc / count
    var = np.maximum(acc2 / count - np.abs(mean) ** 2, 0.0)
    return mean, np.sqrt(var / count)


# ---------------------------------------------------------------------------
# deterministic quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor grid exact for integrands of combined degree <= ``max_degree``.

    ``n_phase`` and ``n_angle`` are the equispaced node counts in ``v`` and
    ``u``; ``n_gauss`` the Gauss-Legendre count in ``t``.
    """

    max_degree: int
    n_phase: int
    n_angle: int
    n_gauss: int

    @classmethod
    def for_degree(cls, max_degree: int, refine: int = 1) -> "QuadratureSpec":
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        periodic = 2 * max_degree + 1
        return cls(max_degree, refine * periodic, refine * periodic, refine * (max_degree + 2))

    def __post_init__(self):
        periodic = 2 * self.max_degree + 1
        if self.n_phase < periodic or self.n_angle < periodic:
            raise ValueError(f"periodic node counts must be >= {periodic} for max_degree {self.max_degree}")
        if self.n_gauss < self.max_degree + 2:
            raise ValueError(f"Gauss node count must be >= {self.max_degree + 2}")

    def header(self) -> str:
        return (
            f"max_degree={self.max_degree},n_phase={self.n_phase},"
            f"n_angle={self.n_angle},n_gauss={self.n_gauss}"
        )

    def as_dict(self) -> Dict[str, int]:
        return {
            "max_degree": self.max_degree,
            "n_phase": self.n_phase,
            "n_angle": self.n_angle,
            "n_gauss": self.n_gauss,
        }


MomentKey = Tuple[int, int, int, int, int, int]


def canonical_key(alpha, beta) -> Tuple[MomentKey, bool]:
    """Representative of the orbit of ``(alpha, beta)`` under conjugation and
    the z1 <-> z2 relabeling, plus whether the stored value must be conjugated."""
    a, b = tuple(alpha), tuple(beta)
    sa, sb = (a[1], a[0], a[2]), (b[1], b[0], b[2])
    candidates = [
        (a + b, False),
        (b + a, True),
        (sa + sb, False),
        (sb + sa, True),
    ]
    return min(candidates)


def _self_conjugate(key: MomentKey) -> bool:
    # the orbit contains the key both with and without conjugation: value is real
    a, b = key[:3], key[3:]
    return key == b + a or key == (b[1], b[0], b[2], a[1], a[0], a[2])


class MeasureContext:
    """Quadrature grid, normalization constant and moment cache."""

    def __init__(self, spec: QuadratureSpec | int):
        if isinstance(spec, int):
            spec = QuadratureSpec.for_degree(spec)
        self.spec = spec
        self._lock = threading.Lock()
        self.cache: Dict[MomentKey, complex] = {}
        self.quadrature_evaluations = 0
        self.cache_hits = 0
        self._C: Optional[float] = None
        self._build_grid()

    def _build_grid(self) -> None:
        s = self.spec
        u = 2.0 * np.pi * np.arange(s.n_angle) / s.n_angle
        x, w = np.polynomial.legendre.leggauss(s.n_gauss)
        t = 0.5 * (x + 1.0)
        wt = 0.5 * w
        U, T = np.meshgrid(u, t, indexing="ij")
        self._weights = (np.outer(np.full(s.n_angle, 1.0 / s.n_angle), wt)).ravel()
        c2, s2 = 1.0 - T, T
        self._zeta = (np.exp(1j * U) * c2 + np.exp(-1j * U) * s2).ravel()
        self._x = (np.sqrt(c2 * s2) * np.sin(U)).ravel()
        self._v = 2.0 * np.pi * np.arange(s.n_phase) / s.n_phase
        self._pow: Dict[Tuple[str, int], np.ndarray] = {}
        self._core: Dict[Tuple[int, int, int], complex] = {}
        self._phase: Dict[int, complex] = {}

    @property
    def node_counts(self) -> Dict[str, int]:
        return {"n_phase": self.spec.n_phase, "n_angle": self.spec.n_angle, "n_gauss": self.spec.n_gauss}

    @property
    def C(self) -> float:
        return normalization_C(self)

    def describe(self) -> Dict[str, object]:
        return {**self.spec.as_dict(), "C": self.C}

    # grid internals --------------------------------------------------------

    def _power(self, name: str, e: int) -> np.ndarray:
        key = (name, e)
        arr = self._pow.get(key)
        if arr is None:
            base = {"zeta": self._zeta, "zetabar": self._zeta.conj(), "x": self._x}[name]
            arr = base**e
            self._pow[key] = arr
        return arr

    def _core_integral(self, p: int, q: int, r: int) -> complex:
        key = (p, q, r)
        val = self._core.get(key)
        if val is None:
            f = self._weights * self._power("zeta", p) * self._power("zetabar", q) * self._power("x", r)
            val = complex(np.sum(f))
            self._core[key] = val
        return val

    def _phase_mean(self, k: int) -> complex:
        val = self._phase.get(k)
        if val is None:
            val = 1.0 + 0j if k == 0 else complex(np.mean(np.exp(1j * k * self._v)))
            self._phase[k] = val
        return val

    def _quadrature(self, a: MultiIndex, b: MultiIndex) -> complex:
        p = a.a1 + b.a2
        q = a.a2 + b.a1
        r = a.a3 + b.a3
        k = a.a1 - a.a2 - b.a1 + b.a2
        factor = (-2j) ** a.a3 * (2j) ** b.a3
        return factor * self._phase_mean(k) * self._core_integral(p, q, r)


def moment(alpha, beta, ctx: MeasureContext) -> complex:
    """``integral of z^alpha conj(z)^beta`` against the invariant boundary measure."""
    a, b = _mi(alpha), _mi(beta)
    total = a.degree + b.degree
    if total > ctx.spec.max_degree:
        raise DegreeError(total, ctx.spec.max_degree)
    if total == 0:
        return 1.0 + 0j
    if a.degree != b.degree:
        # integrating the global phase e^{2ig(|a|-|b|)} gives zero
        return 0j
    key, flip = canonical_key(a, b)
    val = ctx.cache.get(key)
    if val is None:
        val = ctx._quadrature(MultiIndex(*key[:3]), MultiIndex(*key[3:]))
        if _self_conjugate(key):
            val = complex(val.real)
        with ctx._lock:
            ctx.cache.setdefault(key, val)
            ctx.quadrature_evaluations += 1
        val = ctx.cache[key]
    else:
        ctx.cache_hits += 1
    return val.conjugate() if flip else val


def selection_rule_allows(alpha, beta) -> bool:
    a, b = _mi(alpha), _mi(beta)
    return a.weight() == b.weight()


def inner(f: Poly, g: Poly, ctx: MeasureContext) -> complex:
    """``<f, g>`` in L^2 of the boundary measure for holomorphic polynomials."""
    total = 0j
    for ka, va in f.terms.items():
        for kb, vb in g.terms.items():
            if sum(ka) == sum(kb):
                total += va * vb.conjugate() * moment(ka, kb, ctx)
            elif sum(ka) + sum(kb) > ctx.spec.max_degree:
                raise DegreeError(sum(ka) + sum(kb), ctx.spec.max_degree)
    return total


def integrate(u: Poly, ctx: MeasureContext) -> complex:
    """Integral of a boundary function (6-variable polynomial)."""
    if u.nvars == 3:
        u = u.as_boundary()
    return sum((c * moment(k[:3], k[3:], ctx) for k, c in u.items()), 0j)


# ---------------------------------------------------------------------------
# the proper map and its companions


def map_phi(z):
    z1, z2, z3 = z
    return (z1, z2, z1 * z2 - z3 * z3)


def jacobian_phi(z):
    """Determinant of the Jacobian of ``map_phi``.

    The Jacobian matrix is lower triangular with diagonal ``(1, 1, -2 z3)``.
    """
    return -2 * z[2]


def involution_sigma(z):
    z1, z2, z3 = z
    return (z1, z2, -z3)


def phi_polys() -> Tuple[Poly, Poly, Poly]:
    """``phi`` as three holomorphic polynomials in ``(z1, z2, z3)``."""
    z1, z2, z3 = (Poly.variable(i) for i in range(3))
    return (z1, z2, z1 * z2 - z3 * z3)


def shilov_E_membership(z, tol: float = ALGEBRAIC_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    z1, z2, z3 = (complex(v) for v in z)
    return (
        abs(z1 - z2.conjugate() * z3) <= tol
        and abs(abs(z3) - 1.0) <= tol
        and abs(z2) <= 1.0 + tol
    )


def normalization_C(ctx: MeasureContext) -> float:
    """``C = integral of |J_phi|^2`` = ``4 * moment(z3, z3)``."""
    if ctx._C is None:
        if ctx.spec.max_degree < 2:
            raise DegreeError(2, ctx.spec.max_degree, "normalization constant")
        ctx._C = 4.0 * moment((0, 0, 1), (0, 0, 1), ctx).real
    return ctx._C


def pullback(f: Poly) -> Poly:
    """``f o phi`` for a holomorphic polynomial on the tetrablock side."""
    return f.substitute(phi_polys())


def moment_E(alpha, beta, ctx: MeasureContext) -> complex:
    """Moment of ``z^alpha conj(z)^beta`` against the pushed-forward measure on S_E."""
    a, b = _mi(alpha), _mi(beta)
    z3 = Poly.variable(2)
    fa = pullback(Poly.monomial(tuple(a))) * z3
    fb = pullback(Poly.monomial(tuple(b))) * z3
    need = fa.degree() + fb.degree()
    if need > ctx.spec.max_degree:
        raise DegreeError(need, ctx.spec.max_degree, "moment_E")
    return 4.0 * inner(fa, fb, ctx) / normalization_C(ctx)


def inner_E(f: Poly, g: Poly, ctx: MeasureContext) -> complex:
    """``<f, g>`` in L^2 of the pushed-forward measure on S_E."""
    z3 = Poly.variable(2)
    return 4.0 * inner(pullback(f) * z3, pullback(g) * z3, ctx) / normalization_C(ctx)


def monomials_up_to(degree: int) -> List[MultiIndex]:
    out = []
    for d in range(degree + 1):
        for a1 in range(d, -1, -1):
            for a2 in range(d - a1, -1, -1):
                out.append(MultiIndex(a1, a2, d - a1 - a2))
    return out


def precompute(ctx: MeasureContext, pairs: Iterable[Tuple[Sequence[int], Sequence[int]]]) -> None:
    """Fill the cache for many pairs, spreading quadrature over worker threads."""
    todo = sorted({canonical_key(_mi(a), _mi(b))[0] for a, b in pairs})
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        list(pool.map(lambda k: moment(k[:3], k[3:], ctx), todo))
