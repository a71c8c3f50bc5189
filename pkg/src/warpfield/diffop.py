"""Differential operators with polynomial coefficients.

An operator is kept in normal order, ``sum_alpha c_alpha(x) d^alpha`` with all
derivatives to the right, so structural equality decides operator equality.
"""
from __future__ import annotations

from itertools import product
from math import comb
from typing import Dict, Iterable, Tuple

from .polyalg import Poly, canonical_string, coord

__all__ = ["DiffOp", "MultiIndex", "apply", "compose", "commutator"]

MultiIndex = Tuple[int, ...]


def _sub_indices(alpha: MultiIndex) -> Iterable[MultiIndex]:
    return product(*(range(a + 1) for a in alpha))


class DiffOp:
    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms: Dict[MultiIndex, Poly] | None = None):
        self.d = d
        clean: Dict[MultiIndex, Poly] = {}
        for alpha, c in (terms or {}).items():
            if len(alpha) != d:
                raise ValueError(f"multi-index {alpha} has wrong length for d={d}")
            if not isinstance(c, Poly):
                c = Poly.const(c)
            if c.terms:
                clean[tuple(alpha)] = c
        self.terms = clean

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, d: int) -> "DiffOp":
        return cls(d)

    @classmethod
    def identity(cls, d: int) -> "DiffOp":
        return cls(d, {(0,) * d: Poly.const(1)})

    @classmethod
    def multiplication(cls, d: int, p: Poly) -> "DiffOp":
        return cls(d, {(0,) * d: p})

    @classmethod
    def partial(cls, d: int, mu: int, coeff: Poly | None = None) -> "DiffOp":
        alpha = [0] * d
        alpha[mu] = 1
        return cls(d, {tuple(alpha): Poly.const(1) if coeff is None else coeff})

    # -- linear structure ---------------------------------------------------
    def _check(self, other: "DiffOp"):
        if self.d != other.d:
            raise ValueError(f"dimension mismatch: {self.d} vs {other.d}")

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return DiffOp(self.d, out)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.d, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        """Left-multiply by a scalar or polynomial."""
        return DiffOp(self.d, {a: (v * c if isinstance(c, Poly) else v.scale(c)) for a, v in self.terms.items()})

    def __mul__(self, c):
        if isinstance(c, DiffOp):
            return compose(self, c)
        return self.scale(c)

    def __rmul__(self, c):
        return self.scale(c)

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def __call__(self, p: Poly) -> Poly:
        return apply(self, p)

    # -- output -------------------------------------------------------------
    def __str__(self):
        return canonical_diffop_string(self)

    def __repr__(self):
        return f"DiffOp(d={self.d}, {canonical_diffop_string(self)!r})"

    def to_json(self) -> list:
        return [
            {"derivative": list(a), "coeff": self.terms[a].to_json(), "text": canonical_string(self.terms[a])}
            for a in sorted(self.terms, key=lambda a: (-sum(a), tuple(-x for x in a)))
        ]


def _deriv_text(alpha: MultiIndex) -> str:
    return "*".join(f"d{mu}" if k == 1 else f"d{mu}^{k}" for mu, k in enumerate(alpha) if k)


def canonical_diffop_string(op: DiffOp) -> str:
    if not op.terms:
        return "0"
    parts = []
    for a in sorted(op.terms, key=lambda a: (-sum(a), tuple(-x for x in a))):
        coeff = canonical_string(op.terms[a])
        dt = _deriv_text(a)
        if not dt:
            parts.append(f"({coeff})")
        elif coeff == "1":
            parts.append(dt)
        else:
            parts.append(f"({coeff})*{dt}")
    return " + ".join(parts)


def _derivative(p: Poly, alpha: MultiIndex, cache: Dict[MultiIndex, Poly]) -> Poly:
    """d^alpha p, memoised on partial multi-indices."""
    if alpha in cache:
        return cache[alpha]
    # peel one derivative off the last nonzero slot
    for mu in range(len(alpha) - 1, -1, -1):
        if alpha[mu]:
            prev = alpha[:mu] + (alpha[mu] - 1,) + alpha[mu + 1:]
            out = _derivative(p, prev, cache).diff(coord(mu))
            break
    else:
        out = p
    cache[alpha] = out
    return out


def apply(op: DiffOp, p: Poly) -> Poly:
    """sum_alpha c_alpha * d^alpha p."""
    cache: Dict[MultiIndex, Poly] = {}
    out = Poly()
    for alpha, c in op.terms.items():
        dp = _derivative(p, alpha, cache)
        if dp.terms:
            out = out + c * dp
    return out


def compose(A: DiffOp, B: DiffOp) -> DiffOp:
    """A o B re-normal-ordered with the generalised Leibniz rule."""
    A._check(B)
    out: Dict[MultiIndex, Poly] = {}
    for beta, b in B.terms.items():
        cache: Dict[MultiIndex, Poly] = {}
        for alpha, a in A.terms.items():
            for gamma in _sub_indices(alpha):
                db = _derivative(b, gamma, cache)
                if not db.terms:
                    continue
                mult = 1
                for ai, gi in zip(alpha, gamma):
                    mult *= comb(ai, gi)
                target = tuple(ai - gi + bi for ai, gi, bi in zip(alpha, gamma, beta))
                term = a * db
                if mult != 1:
                    term = term.scale(mult)
                out[target] = out[target] + term if target in out else term
    return DiffOp(A.d, out)


def commutator(A: DiffOp, B: DiffOp) -> DiffOp:
    return compose(A, B) - compose(B, A)
