"""Sparse complex polynomials keyed by exponent tuples.

Two flavours are used throughout the package:

* holomorphic polynomials in ``(z1, z2, z3)`` -- exponent tuples of length 3;
* boundary functions in ``(z1, z2, z3, conj z1, conj z2, conj z3)`` --
  exponent tuples of length 6, the first three holomorphic, the last three
  antiholomorphic.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Tuple

Exponent = Tuple[int, ...]

PRUNE_TOL = 1e-15


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    """Finite sum ``sum_k c_k x^k`` with complex coefficients.

    Coefficients of modulus at most ``PRUNE_TOL`` are dropped, so exact
    cancellation and rounding debris both vanish from the table.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, terms: Mapping[Exponent, complex] | Iterable = (), nvars: int = 3):
        self.nvars = nvars
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Exponent, complex] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent {exp}")
            acc[exp] = acc.get(exp, 0j) + complex(c)
        self.terms = {k: v for k, v in acc.items() if abs(v) > PRUNE_TOL}

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c: complex, nvars: int = 3) -> "Poly":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def monomial(cls, exp: Exponent, c: complex = 1.0) -> "Poly":
        return cls({tuple(exp): c}, len(exp))

    @classmethod
    def variable(cls, i: int, nvars: int = 3) -> "Poly":
        exp = [0] * nvars
        exp[i] = 1
        return cls({tuple(exp): 1.0}, nvars)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("cannot mix polynomials in different variable sets")
            return other
        return Poly.constant(other, self.nvars)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        return Poly(list(self.terms.items()) + list(other.terms.items()), self.nvars)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({k: -v for k, v in self.terms.items()}, self.nvars)

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = complex(other)
            return Poly({k: c * v for k, v in self.terms.items()}, self.nvars)
        other = self._coerce(other)
        acc: Dict[Exponent, complex] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = _add_exp(ka, kb)
                acc[k] = acc.get(k, 0j) + va * vb
        return Poly(acc, self.nvars)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Poly":
        return self * (1.0 / complex(c))

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.constant(1.0, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.constant(other, self.nvars)
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        parts = [f"({v:.6g})*{k}" for k, v in sorted(self.terms.items())]
        return "Poly(" + " + ".join(parts) + ")"

    # queries --------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(k) for k in self.terms), default=-1)

    def coeff(self, exp: Exponent) -> complex:
        return self.terms.get(tuple(exp), 0j)

    def items(self):
        return sorted(self.terms.items())

    def max_abs_diff(self, other: "Poly") -> float:
        other = self._coerce(other)
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coeff(k) - other.coeff(k)) for k in keys), default=0.0)

    def substitute(self, images: Iterable["Poly"]) -> "Poly":
        """Compose: replace variable ``i`` by ``images[i]``."""
        images = list(images)
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        out_nvars = images[0].nvars
        result = Poly((), out_nvars)
        power_cache: Dict[Tuple[int, int], Poly] = {}
        for exp, c in self.terms.items():
            term = Poly.constant(c, out_nvars)
            for i, e in enumerate(exp):
                if e:
                    key = (i, e)
                    if key not in power_cache:
                        power_cache[key] = images[i] ** e
                    term = term * power_cache[key]
            result = result + term
        return result

    def evaluate(self, values) -> complex:
        """Evaluate at a point (or at arrays of points, broadcasting)."""
        total = 0j
        for exp, c in self.terms.items():
            t = c
            for v, e in zip(values, exp):
                if e:
                    t = t * v**e
            total = total + t
        return total

    # holomorphic <-> boundary --------------------------------------------

    def as_boundary(self) -> "Poly":
        """Embed a holomorphic polynomial as a boundary function."""
        if self.nvars != 3:
            raise ValueError("as_boundary expects a 3-variable polynomial")
        return Poly({k + (0, 0, 0): v for k, v in self.terms.items()}, 6)

    def conj(self) -> "Poly":
        """Complex conjugate of a boundary function (or of a holomorphic one,
        which becomes antiholomorphic)."""
        src = self.as_boundary() if self.nvars == 3 else self
        return Poly({k[3:] + k[:3]: v.conjugate() for k, v in src.terms.items()}, 6)


def holo_vars():
    """The coordinate functions z1, z2, z3 as holomorphic polynomials."""
    return tuple(Poly.variable(i, 3) for i in range(3))
