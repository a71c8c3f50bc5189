"""Sparse multivariate polynomials over the Gaussian rationals.

Variables are coordinates ``x<k>`` (contravariant x^k), deformation-matrix
entries ``th<m><n>`` (m < n; the entry with swapped indices is the negative),
and parameters ``b<k>``, ``lam``, ``eta``.  A monomial is a sorted tuple of
``(Var, exponent)`` pairs; a polynomial maps monomials to nonzero coefficients.

Text grammar::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := INT ('/' INT)? | 'i' | VAR | '(' expr ')'
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, NamedTuple, Tuple

from .exactnum import ONE, ZERO, GaussianRational

__all__ = [
    "Var", "COORD", "THETA", "BPARAM", "LAM", "ETA",
    "coord", "theta", "bparam", "LAMBDA_VAR", "ETA_VAR",
    "Monomial", "Poly", "ParseError", "parse_poly", "canonical_string",
    "partial_derivative", "theta_order",
]

COORD, THETA, BPARAM, LAM, ETA = range(5)


class Var(NamedTuple):
    """Variable id.  Tuple order gives Coordinate < ThetaEntry < Param."""

    kind: int
    a: int = 0
    b: int = 0

    @property
    def name(self) -> str:
        if self.kind == COORD:
            return f"x{self.a}"
        if self.kind == THETA:
            return f"th{self.a}{self.b}"
        if self.kind == BPARAM:
            return f"b{self.a}"
        return "lam" if self.kind == LAM else "eta"

    def to_json(self) -> dict:
        kind = ("coordinate", "theta", "b", "lam", "eta")[self.kind]
        if self.kind == THETA:
            idx = [self.a, self.b]
        elif self.kind in (COORD, BPARAM):
            idx = [self.a]
        else:
            idx = []
        return {"kind": kind, "indices": idx}


def coord(mu: int) -> Var:
    return Var(COORD, mu)


def theta(mu: int, nu: int) -> Var:
    if not mu < nu:
        raise ValueError(f"theta symbols are stored with mu < nu, got ({mu}, {nu})")
    return Var(THETA, mu, nu)


def bparam(k: int) -> Var:
    return Var(BPARAM, k)


LAMBDA_VAR = Var(LAM)
ETA_VAR = Var(ETA)

Monomial = Tuple[Tuple[Var, int], ...]
_ONE_MONO: Monomial = ()


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _coerce_coeff(c) -> GaussianRational:
    return c if isinstance(c, GaussianRational) else GaussianRational.coerce(c)


class Poly:
    """Immutable sparse polynomial.  ``terms`` never holds zero coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, GaussianRational] | None = None, *, _trusted=False):
        if terms is None:
            self.terms: Dict[Monomial, GaussianRational] = {}
        elif _trusted:
            self.terms = terms  # type: ignore[assignment]
        else:
            clean = {}
            for m, c in terms.items():
                c = _coerce_coeff(c)
                if c:
                    clean[tuple(sorted((v, e) for v, e in m if e))] = c
            self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        c = _coerce_coeff(c)
        return cls({_ONE_MONO: c}, _trusted=True) if c else cls()

    @classmethod
    def var(cls, v: Var, exp: int = 1) -> "Poly":
        if exp == 0:
            return cls.const(1)
        return cls({((v, exp),): ONE}, _trusted=True)

    @classmethod
    def x(cls, mu: int) -> "Poly":
        return cls.var(coord(mu))

    # -- ring structure -----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Poly.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                c = _coerce_coeff(other)
            except TypeError:
                return NotImplemented
            return self.scale(c)
        if not self.terms or not other.terms:
            return Poly()
        out: Dict[Monomial, GaussianRational] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m)
                out[m] = c1 * c2 if s is None else s + c1 * c2
        return Poly({m: c for m, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        c = _coerce_coeff(c)
        if not c:
            return Poly()
        if c == ONE:
            return self
        return Poly({m: v * c for m, v in self.terms.items()}, _trusted=True)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = Poly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Poly.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    # -- inspection ---------------------------------------------------------
    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=-1)

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def kind_degree(self, kind: int) -> int:
        return max((sum(e for v, e in m if v.kind == kind) for m in self.terms), default=-1)

    def coefficient(self, mono: Monomial) -> GaussianRational:
        return self.terms.get(mono, ZERO)

    def conj(self) -> "Poly":
        return Poly({m: c.conj() for m, c in self.terms.items()}, _trusted=True)

    # -- calculus and substitution -------------------------------------------
    def diff(self, v: Var) -> "Poly":
        out: Dict[Monomial, GaussianRational] = {}
        for m, c in self.terms.items():
            for pos, (w, e) in enumerate(m):
                if w == v:
                    rest = m[:pos] + (((w, e - 1),) if e > 1 else ()) + m[pos + 1:]
                    cc = c * e
                    s = out.get(rest)
                    out[rest] = cc if s is None else s + cc
                    break
        return Poly({m: c for m, c in out.items() if c}, _trusted=True)

    def subs(self, mapping: Mapping[Var, "Poly"]) -> "Poly":
        """Substitute polynomials for variables (simultaneously)."""
        cache: Dict[Tuple[Var, int], Poly] = {}
        out = Poly()
        for m, c in self.terms.items():
            term = Poly.const(c)
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = _coerce_poly(mapping[v]) ** e
                    term = term * cache[key]
                else:
                    term = term * Poly.var(v, e)
            out = out + term
        return out

    # -- text / json --------------------------------------------------------
    def __str__(self):
        return canonical_string(self)

    def __repr__(self):
        return f"Poly({canonical_string(self)!r})"

    def to_json(self) -> list:
        out = []
        for m in sorted(self.terms, key=_sort_key):
            vars_ = []
            for v, e in m:
                item = v.to_json()
                item["exp"] = e
                vars_.append(item)
            out.append({"coeff": self.terms[m].to_json(), "vars": vars_})
        return out

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "Poly":
        kinds = {"coordinate": COORD, "theta": THETA, "b": BPARAM, "lam": LAM, "eta": ETA}
        terms: Dict[Monomial, GaussianRational] = {}
        for item in data:
            mono = []
            for vj in item["vars"]:
                idx = list(vj.get("indices", [])) + [0, 0]
                mono.append((Var(kinds[vj["kind"]], idx[0], idx[1]), int(vj["exp"])))
            key = tuple(sorted(mono))
            terms[key] = terms.get(key, ZERO) + GaussianRational.from_json(item["coeff"])
        return cls(terms)


def _coerce_poly(p) -> Poly:
    return p if isinstance(p, Poly) else Poly.const(p)


def partial_derivative(p: Poly, mu: int) -> Poly:
    """Formal derivative with respect to the coordinate x^mu."""
    return p.diff(coord(mu))


def theta_order(p: Poly) -> Dict[int, Poly]:
    """Split ``p`` into components homogeneous in the theta symbols."""
    parts: Dict[int, Dict[Monomial, GaussianRational]] = {}
    for m, c in p.terms.items():
        k = sum(e for v, e in m if v.kind == THETA)
        parts.setdefault(k, {})[m] = c
    return {k: Poly(t, _trusted=True) for k, t in sorted(parts.items())}


# ---------------------------------------------------------------------------
# printing

def _sort_key(m: Monomial):
    # descending total degree, then lexicographically larger exponent first
    return (-mono_degree(m), tuple((v, -e) for v, e in m))


def _rat_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _mono_text(m: Monomial) -> str:
    return "*".join(v.name if e == 1 else f"{v.name}^{e}" for v, e in m)


def _term_text(c: GaussianRational, m: Monomial) -> Tuple[bool, str]:
    """Return (negative, body) for one term."""
    mono = _mono_text(m)
    if c.im == 0 or c.re == 0:
        imag = c.re == 0
        val = c.im if imag else c.re
        neg = val < 0
        val = abs(val)
        parts = []
        if val != 1:
            parts.append(_rat_text(val))
        if imag:
            parts.append("i")
        if mono:
            parts.append(mono)
        return neg, "*".join(parts) if parts else "1"
    re_s = _rat_text(c.re)
    im_abs = abs(c.im)
    im_s = "i" if im_abs == 1 else f"{_rat_text(im_abs)}*i"
    body = f"({re_s} {'-' if c.im < 0 else '+'} {im_s})"
    return False, f"{body}*{mono}" if mono else body


def canonical_string(p: Poly) -> str:
    if not p.terms:
        return "0"
    chunks = []
    for idx, m in enumerate(sorted(p.terms, key=_sort_key)):
        neg, body = _term_text(p.terms[m], m)
        if idx == 0:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f" - {body}" if neg else f" + {body}")
    return "".join(chunks)


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class _Parser:
    def __init__(self, text: str, d: int):
        self.text = text
        self.d = d
        self.toks = self._tokenize(text)
        self.i = 0

    def _tokenize(self, text):
        toks = []
        j = 0
        n = len(text)
        while j < n:
            ch = text[j]
            if ch.isspace():
                j += 1
            elif ch.isdigit():
                k = j
                while k < n and text[k].isdigit():
                    k += 1
                toks.append(("int", text[j:k], j))
                j = k
            elif ch.isalpha():
                k = j
                while k < n and text[k].isalpha():
                    k += 1
                while k < n and text[k].isdigit():
                    k += 1
                toks.append(("name", text[j:k], j))
                j = k
            elif ch in "+-*^/()":
                toks.append((ch, ch, j))
                j += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", j)
        toks.append(("end", "", n))
        return toks

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return p

    def expr(self) -> Poly:
        p = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.unary()
        while self.peek()[0] == "*":
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> Poly:
        tok = self.peek()
        if tok[0] == "-":
            self.take()
            return -self.unary()
        if tok[0] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "int":
                what = "end of input" if tok[0] == "end" else repr(tok[1])
                raise ParseError(f"exponent must be a non-negative integer, found {what}", tok[2])
            self.take()
            base = base ** int(tok[1])
        return base

    def atom(self) -> Poly:
        tok = self.peek()
        kind, text, pos = tok
        if kind == "int":
            self.take()
            num = int(text)
            if self.peek()[0] == "/":
                self.take()
                den_tok = self.peek()
                if den_tok[0] != "int":
                    raise ParseError("expected denominator", den_tok[2])
                self.take()
                if int(den_tok[1]) == 0:
                    raise ParseError("zero denominator", den_tok[2])
                return Poly.const(Fraction(num, int(den_tok[1])))
            return Poly.const(num)
        if kind == "(":
            self.take()
            p = self.expr()
            self.take(")")
            return p
        if kind == "name":
            self.take()
            return Poly.const(GaussianRational(0, 1)) if text == "i" else Poly.var(self._var(text, pos))
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", pos)

    def _var(self, name: str, pos: int) -> Var:
        d = self.d
        if name == "lam":
            return LAMBDA_VAR
        if name == "eta":
            return ETA_VAR
        head = name.rstrip("0123456789")
        digits = name[len(head):]
        if head in ("x", "b") and digits:
            k = int(digits)
            if k >= d:
                raise ParseError(f"index {k} out of range for dimension {d} in {name!r}", pos)
            return coord(k) if head == "x" else bparam(k)
        if head == "th" and len(digits) == 2:
            mu, nu = int(digits[0]), int(digits[1])
            if mu >= d or nu >= d:
                raise ParseError(f"index out of range for dimension {d} in {name!r}", pos)
            if not mu < nu:
                raise ParseError(f"theta symbol needs first index < second in {name!r}", pos)
            return theta(mu, nu)
        raise ParseError(f"unknown variable {name!r}", pos)


def parse_poly(text: str, d: int = 4) -> Poly:
    """Parse the polynomial text format for dimension ``d`` (2 <= d <= 10)."""
    if not 1 <= d <= 10:
        raise ValueError("dimension must be between 1 and 10")
    return _Parser(text, d).parse()
