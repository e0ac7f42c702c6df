"""Trigonometric-polynomial symbols on the Shilov boundary of the tetrablock.

On ``S_E`` we have ``z1 = conj(z2) z3``, ``|z3| = 1`` and therefore
``conj(z3) = 1/z3``.  Every polynomial in the coordinates and their
conjugates reduces to a unique finite sum of

    c * z2^a * conj(z2)^b * z3^k,     a, b >= 0,  k any integer,

which is the canonical form held by :class:`SymbolExpr`.

Text syntax accepted by :func:`parse_symbol`::

    expr   := ["-"] term {("+" | "-") term}
    term   := coeff | [coeff "*"] factor {"*" factor}
    factor := var ["^" int]
    var    := "z1" | "z2" | "z3" | "~z1" | "~z2" | "~z3"
    coeff  := float | "(" ["-"] float ("+" | "-") float "i" ")"

``~`` denotes complex conjugation.  Negative exponents are allowed on
``z3`` and ``~z3`` only.
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, List, Tuple

from .measure import phi_polys
from .poly import PRUNE_TOL, Poly

Key = Tuple[int, int, int]

MAX_EXPONENT = 64


class SymbolSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class SymbolExpr:
    """Canonical symbol: mapping ``(a, b, k) -> coefficient``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Key, complex] | Iterable = ()):
        items = terms.items() if isinstance(terms, dict) else terms
        acc: Dict[Key, complex] = {}
        for key, c in items:
            a, b, k = (int(v) for v in key)
            if a < 0 or b < 0:
                raise ValueError(f"z2 exponents must be nonnegative, got {(a, b, k)}")
            acc[(a, b, k)] = acc.get((a, b, k), 0j) + complex(c)
        self.terms = {k: v for k, v in acc.items() if abs(v) > PRUNE_TOL}

    @classmethod
    def term(cls, a: int, b: int, k: int, coeff: complex = 1.0) -> "SymbolExpr":
        return cls({(a, b, k): coeff})

    def __add__(self, other: "SymbolExpr") -> "SymbolExpr":
        return SymbolExpr(list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other: "SymbolExpr") -> "SymbolExpr":
        return self + other * -1

    def __mul__(self, c) -> "SymbolExpr":
        if isinstance(c, SymbolExpr):
            acc: List = []
            for (a1, b1, k1), v1 in self.terms.items():
                for (a2, b2, k2), v2 in c.terms.items():
                    acc.append(((a1 + a2, b1 + b2, k1 + k2), v1 * v2))
            return SymbolExpr(acc)
        return SymbolExpr({k: v * complex(c) for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolExpr) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"SymbolExpr({self.to_text()!r})"

    def is_zero(self) -> bool:
        return not self.terms

    def conj(self) -> "SymbolExpr":
        return SymbolExpr({(b, a, -k): v.conjugate() for (a, b, k), v in self.terms.items()})

    def items(self):
        return sorted(self.terms.items())

    def max_abs_diff(self, other: "SymbolExpr") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys), default=0.0)

    @staticmethod
    def shift(key: Key) -> int:
        """Degree change of the Toeplitz operator of a single term."""
        a, b, k = key
        return a - b + 2 * k

    def pullback_degree(self) -> int:
        """Combined (holomorphic + antiholomorphic) degree of the pullback."""
        return max((a + b + 2 * abs(k) for a, b, k in self.terms), default=0)

    def evaluate(self, z) -> complex:
        """Value at a point of ``S_E``, given as ``(z1, z2, z3)``."""
        _, z2, z3 = (complex(v) for v in z)
        return sum(
            (v * z2**a * z2.conjugate() ** b * z3**k for (a, b, k), v in self.terms.items()),
            0j,
        )

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b, k), v in self.items():
            factors = []
            if a:
                factors.append("z2" if a == 1 else f"z2^{a}")
            if b:
                factors.append("~z2" if b == 1 else f"~z2^{b}")
            if k:
                factors.append("z3" if k == 1 else f"z3^{k}")
            coeff = f"({v.real!r}{'+' if v.imag >= 0 else '-'}{abs(v.imag)!r}i)"
            parts.append("*".join([coeff] + factors))
        return " + ".join(parts)


def symbol_pullback(s: SymbolExpr) -> Poly:
    """``u = s o phi`` as a boundary function (6-variable polynomial)."""
    p1, p2, p3 = (p.as_boundary() for p in phi_polys())
    cp2, cp3 = p2.conj(), p3.conj()
    out = Poly((), 6)
    for (a, b, k), v in s.items():
        t = (p2**a) * (cp2**b) * (p3**k if k >= 0 else cp3 ** (-k))
        out = out + t * v
    return out


# ---------------------------------------------------------------------------
# parser


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<var>~?z[123])"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<op>[-+*^()i])"
    r")"
)

_VAR_KEYS: Dict[str, Key] = {
    "z1": (0, 1, 1),  # z1 = conj(z2) z3
    "~z1": (1, 0, -1),  # conj(z1) = z2 conj(z3)
    "z2": (1, 0, 0),
    "~z2": (0, 1, 0),
    "z3": (0, 0, 1),
    "~z3": (0, 0, -1),
}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SymbolSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise SymbolSyntaxError(f"expected {want!r}, found {got!r}", tok[2], self.text)
        self.i += 1
        return tok

    def at(self, kind, value=None) -> bool:
        tok = self.peek()
        return tok[0] == kind and (value is None or tok[1] == value)

    def expr(self) -> SymbolExpr:
        sign = 1.0
        if self.at("op", "-"):
            self.take()
            sign = -1.0
        result = self.term() * sign
        while self.at("op", "+") or self.at("op", "-"):
            op = self.take()[1]
            t = self.term()
            result = result + (t if op == "+" else t * -1.0)
        self.take("end")
        return result

    def number(self) -> float:
        return float(self.take("num")[1])

    def coeff(self) -> complex:
        if self.at("num"):
            return complex(self.number())
        self.take("op", "(")
        neg = self.at("op", "-")
        if neg:
            self.take()
        re_part = -self.number() if neg else self.number()
        if not (self.at("op", "+") or self.at("op", "-")):
            tok = self.peek()
            raise SymbolSyntaxError("expected '+' or '-' in complex coefficient", tok[2], self.text)
        sgn = 1.0 if self.take()[1] == "+" else -1.0
        im_part = self.number()
        self.take("op", "i")
        self.take("op", ")")
        return complex(re_part, sgn * im_part)

    def term(self) -> SymbolExpr:
        c = 1.0 + 0j
        if self.at("num") or self.at("op", "("):
            c = self.coeff()
            if not self.at("op", "*"):
                return SymbolExpr.term(0, 0, 0, c)
            self.take("op", "*")
        key = self.factor()
        while self.at("op", "*"):
            self.take()
            k2 = self.factor()
            key = (key[0] + k2[0], key[1] + k2[1], key[2] + k2[2])
        return SymbolExpr.term(*key, c)

    def factor(self) -> Key:
        tok = self.peek()
        if tok[0] != "var":
            got = tok[1] or "end of input"
            raise SymbolSyntaxError(f"expected a variable, found {got!r}", tok[2], self.text)
        name = self.take()[1]
        e = 1
        if self.at("op", "^"):
            self.take()
            neg = False
            if self.at("op", "-"):
                self.take()
                neg = True
            num = self.take("num")
            if not num[1].isdigit():
                raise SymbolSyntaxError("exponent must be an integer", num[2], self.text)
            e = int(num[1])
            if e > MAX_EXPONENT:
                raise SymbolSyntaxError(f"exponent {e} exceeds {MAX_EXPONENT}", num[2], self.text)
            if neg:
                if name not in ("z3", "~z3"):
                    raise SymbolSyntaxError(f"negative exponent on {name}", num[2], self.text)
                e = -e
        a, b, k = _VAR_KEYS[name]
        return (a * e, b * e, k * e)


def parse_symbol(text: str) -> SymbolExpr:
    if not text or not text.strip():
        raise SymbolSyntaxError("empty symbol", 0, text)
    return _Parser(text).expr()


def dictionary_terms(dict_degree: int) -> List[Key]:
    """Canonical dictionary ``{(a, b, k): a + b <= D, |k| <= D}``, sorted."""
    return sorted(
        (a, b, k)
        for a in range(dict_degree + 1)
        for b in range(dict_degree + 1 - a)
        for k in range(-dict_degree, dict_degree + 1)
    )
