"""Conformal generators as differential operators and exact algebra checks.

Vector fields (no factors of i)::

    P_s = d_s
    K_s = 2 x_s x^l d_l - x^2 d_s
    D   = x^l d_l
    L_mn = x_m d_n - x_n d_m

The hermitian generators are ``(+-i)`` times these.  The prefactors are not
chosen by hand: :func:`calibrate_signs` searches all sixteen assignments and
keeps the first that satisfies every commutation relation of the table.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Dict, List, Tuple

from .diffop import DiffOp, apply, commutator
from .exactnum import I, ONE, GaussianRational
from .polyalg import ETA_VAR, LAMBDA_VAR, Poly, bparam, canonical_string

__all__ = [
    "Metric", "GeneratorSet", "So2dSet", "AlgebraReport", "RelationResult",
    "build_vector_fields", "calibrate_signs", "verify_conformal_algebra",
    "build_so2d", "verify_so2d", "scaled_generators", "flow_series",
    "flow_consistency_check", "ConsistencyError",
]


class ConsistencyError(RuntimeError):
    """No sign/embedding choice satisfies the algebra: an implementation bug."""


@dataclass(frozen=True)
class Metric:
    """Diagonal Minkowski metric diag(+1, -1, ..., -1)."""

    d: int

    @property
    def signature(self) -> Tuple[int, ...]:
        return (1,) + (-1,) * (self.d - 1)

    def __getitem__(self, idx: Tuple[int, int]) -> int:
        mu, nu = idx
        return self.signature[mu] if mu == nu else 0

    def sign(self, mu: int) -> int:
        return 1 if mu == 0 else -1

    def x_lower(self, mu: int) -> Poly:
        """x_mu = eta_{mu mu} x^mu."""
        p = Poly.x(mu)
        return p if mu == 0 else -p

    def x_squared(self) -> Poly:
        out = Poly()
        for mu in range(self.d):
            out = out + Poly.x(mu) * self.x_lower(mu)
        return out


# ---------------------------------------------------------------------------
# vector fields

def _euler(d: int) -> DiffOp:
    out = DiffOp.zero(d)
    for lam in range(d):
        out = out + DiffOp.partial(d, lam, Poly.x(lam))
    return out


@dataclass
class GeneratorSet:
    d: int
    metric: Metric
    P: List[DiffOp]
    K: List[DiffOp]
    D: DiffOp
    L: List[List[DiffOp]]
    signs: Dict[str, GaussianRational]
    vectorFieldP: List[DiffOp]
    vectorFieldK: List[DiffOp]
    vectorFieldD: DiffOp = None
    vectorFieldL: List[List[DiffOp]] = None

    def with_signs(self, signs: Dict[str, GaussianRational]) -> "GeneratorSet":
        d = self.d
        return GeneratorSet(
            d=d,
            metric=self.metric,
            P=[op.scale(signs["P"]) for op in self.vectorFieldP],
            K=[op.scale(signs["K"]) for op in self.vectorFieldK],
            D=self.vectorFieldD.scale(signs["D"]),
            L=[[op.scale(signs["L"]) for op in row] for row in self.vectorFieldL],
            signs=dict(signs),
            vectorFieldP=self.vectorFieldP,
            vectorFieldK=self.vectorFieldK,
            vectorFieldD=self.vectorFieldD,
            vectorFieldL=self.vectorFieldL,
        )


def build_vector_fields(d: int) -> GeneratorSet:
    """Vector-field forms of P, K, D, L (hermitian slots left as the bare fields)."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    g = Metric(d)
    x2 = g.x_squared()
    euler = _euler(d)
    vp = [DiffOp.partial(d, s) for s in range(d)]
    vk = [euler.scale(g.x_lower(s).scale(2)) - DiffOp.partial(d, s, x2) for s in range(d)]
    vl = [
        [DiffOp.partial(d, n, g.x_lower(m)) - DiffOp.partial(d, m, g.x_lower(n)) for n in range(d)]
        for m in range(d)
    ]
    unit = {"P": ONE, "K": ONE, "D": ONE, "L": ONE}
    return GeneratorSet(d, g, vp, vk, euler, vl, unit, vp, vk, euler, vl)


# ---------------------------------------------------------------------------
# reports

@dataclass
class RelationResult:
    relation_id: str
    lhs: str
    rhs: str
    residual: DiffOp

    @property
    def passed(self) -> bool:
        return self.residual.is_zero()

    def to_json(self) -> dict:
        return {
            "relation_id": self.relation_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual_canonical_string": str(self.residual),
            "pass": self.passed,
        }


@dataclass
class AlgebraReport:
    name: str
    results: List[RelationResult] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[RelationResult]:
        return [r for r in self.results if not r.passed]

    def to_json(self) -> list:
        return [r.to_json() for r in self.results]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _conformal_relations(g: GeneratorSet):
    """Yield (id, lhs, rhs, A, B, expected) for the whole commutator table."""
    d, eta = g.d, g.metric
    P, K, D, L = g.P, g.K, g.D, g.L
    zero = DiffOp.zero(d)

    def comb(*pairs):
        out = zero
        for c, op in pairs:
            if c:
                out = out + op.scale(c)
        return out

    for m, n, r, s in product(range(d), repeat=4):
        rhs = comb((I * eta[m, s], L[n][r]), (I * eta[n, r], L[m][s]),
                   (-I * eta[m, r], L[n][s]), (-I * eta[n, s], L[m][r]))
        yield (f"LL[{m}{n},{r}{s}]", f"[L_{m}{n},L_{r}{s}]",
               f"i(eta_{m}{s} L_{n}{r} + eta_{n}{r} L_{m}{s} - eta_{m}{r} L_{n}{s} - eta_{n}{s} L_{m}{r})",
               L[m][n], L[r][s], rhs)
    for name, G in (("P", P), ("K", K)):
        for r, m, n in product(range(d), repeat=3):
            rhs = comb((I * eta[r, m], G[n]), (-I * eta[r, n], G[m]))
            yield (f"{name}L[{r},{m}{n}]", f"[{name}_{r},L_{m}{n}]",
                   f"i(eta_{r}{m} {name}_{n} - eta_{r}{n} {name}_{m})", G[r], L[m][n], rhs)
    for r in range(d):
        yield (f"PD[{r}]", f"[P_{r},D]", f"i P_{r}", P[r], D, P[r].scale(I))
        yield (f"KD[{r}]", f"[K_{r},D]", f"-i K_{r}", K[r], D, K[r].scale(-I))
    for r, m in product(range(d), repeat=2):
        rhs = comb((2 * I * eta[r, m], D), (-2 * I, L[r][m]))
        yield (f"PK[{r},{m}]", f"[P_{r},K_{m}]", f"2i(eta_{r}{m} D - L_{r}{m})", P[r], K[m], rhs)
    # everything not listed vanishes
    for r, m in product(range(d), repeat=2):
        yield (f"PP[{r},{m}]", f"[P_{r},P_{m}]", "0", P[r], P[m], zero)
        yield (f"KK[{r},{m}]", f"[K_{r},K_{m}]", "0", K[r], K[m], zero)
    yield ("DD", "[D,D]", "0", D, D, zero)
    for m, n in product(range(d), repeat=2):
        yield (f"DL[{m}{n}]", f"[D,L_{m}{n}]", "0", D, L[m][n], zero)


def verify_conformal_algebra(g: GeneratorSet, stop_on_failure: bool = False) -> AlgebraReport:
    report = AlgebraReport("conformal", meta={"d": g.d, "signs": {k: str(v) for k, v in g.signs.items()}})
    for rid, lhs, rhs, A, B, expected in _conformal_relations(g):
        res = RelationResult(rid, lhs, rhs, commutator(A, B) - expected)
        report.results.append(res)
        if stop_on_failure and not res.passed:
            break
    return report


_SIGN_ORDER = (I, -I)


@functools.lru_cache(maxsize=None)
def calibrate_signs(d: int) -> GeneratorSet:
    """First assignment of +-i prefactors (P, K, D, L; +i tried first) obeying every relation."""
    base = build_vector_fields(d)
    for sp, sk, sd, sl in product(_SIGN_ORDER, repeat=4):
        cand = base.with_signs({"P": sp, "K": sk, "D": sd, "L": sl})
        if verify_conformal_algebra(cand, stop_on_failure=True).passed:
            return cand
    raise ConsistencyError(f"no sign assignment satisfies the conformal algebra at d={d}")


# ---------------------------------------------------------------------------
# SO(2,d)

@dataclass
class So2dSet:
    d: int
    J: List[List[DiffOp]]
    extendedMetric: Tuple[int, ...]
    embedding: dict

    def eta(self, a: int, b: int) -> int:
        return self.extendedMetric[a] if a == b else 0


def _so2d_candidate(g: GeneratorSet, minus_slot: int, s_minus: int, s_plus: int, s_dil: int) -> So2dSet:
    d = g.d
    n = d + 2
    ext = (1,) + (-1,) * d + (1,)
    plus_slot = 2 * d + 1 - minus_slot  # the other extra slot
    zero = DiffOp.zero(d)
    J = [[zero] * n for _ in range(n)]
    for m in range(d):
        for k in range(d):
            J[m][k] = g.L[m][k]
    half = Fraction(1, 2)
    for m in range(d):
        jm = (g.P[m] - g.K[m]).scale(half * s_minus)
        jp = (g.P[m] + g.K[m]).scale(half * s_plus)
        J[m][minus_slot], J[minus_slot][m] = jm, -jm
        J[m][plus_slot], J[plus_slot][m] = jp, -jp
    dil = g.D.scale(s_dil)
    J[d][d + 1], J[d + 1][d] = dil, -dil
    emb = {
        "half(P-K)": {"slot": minus_slot, "sign": s_minus, "orientation": "J[mu][slot]"},
        "half(P+K)": {"slot": plus_slot, "sign": s_plus, "orientation": "J[mu][slot]"},
        "D": {"slots": [d, d + 1], "sign": s_dil},
    }
    return So2dSet(d, J, ext, emb)


def _so2d_relations(s: So2dSet):
    n = s.d + 2
    J = s.J
    zero = DiffOp.zero(s.d)
    for a, b, c, e in product(range(n), repeat=4):
        rhs = zero
        for coef, op in ((s.eta(a, e), J[b][c]), (s.eta(b, c), J[a][e]),
                         (-s.eta(a, c), J[b][e]), (-s.eta(b, e), J[a][c])):
            if coef and op.terms:
                rhs = rhs + op.scale(I * coef)
        yield (a, b, c, e), rhs


def verify_so2d(s: So2dSet, stop_on_failure: bool = False) -> AlgebraReport:
    report = AlgebraReport("so2d", meta={"d": s.d, "extended_metric": list(s.extendedMetric),
                                          "embedding": s.embedding})
    J = s.J
    cache: Dict[Tuple[int, int, int, int], DiffOp] = {}
    for (a, b, c, e), rhs in _so2d_relations(s):
        if a > b:
            lhs = -cache[(b, a, c, e)]
        elif c > e:
            lhs = -cache[(a, b, e, c)]
        else:
            lhs = commutator(J[a][b], J[c][e])
        cache[(a, b, c, e)] = lhs
        res = RelationResult(
            f"JJ[{a}{b},{c}{e}]", f"[J_{a}{b},J_{c}{e}]",
            f"i(eta_{a}{e} J_{b}{c} + eta_{b}{c} J_{a}{e} - eta_{a}{c} J_{b}{e} - eta_{b}{e} J_{a}{c})",
            lhs - rhs,
        )
        report.results.append(res)
        if stop_on_failure and not res.passed:
            break
    return report


def build_so2d(g: GeneratorSet) -> So2dSet:
    """Place half(P-K), half(P+K) and D into the extra slots d, d+1.

    Tries both slot assignments and all orientation signs (deterministic order)
    and keeps the first embedding whose full SO(2,d) table checks out.
    """
    d = g.d
    for minus_slot, s_m, s_p, s_d in product((d, d + 1), (1, -1), (1, -1), (1, -1)):
        cand = _so2d_candidate(g, minus_slot, s_m, s_p, s_d)
        if verify_so2d(cand, stop_on_failure=True).passed:
            return cand
    raise ConsistencyError(f"no embedding satisfies the SO(2,{d}) algebra")


# ---------------------------------------------------------------------------
# scaled generators

def _as_scalar_poly(v, name: str) -> Poly:
    if isinstance(v, Poly):
        return v
    if isinstance(v, str):
        if v == "lam":
            return Poly.var(LAMBDA_VAR)
        if v == "eta":
            return Poly.var(ETA_VAR)
        raise ValueError(f"unknown symbol {v!r}")
    return Poly.const(Fraction(v))


def scaled_generators(kind: str, lam="lam", eta="eta", d: int = 4) -> List[DiffOp]:
    """Componentwise scaled translations (``plus``) or special conformal fields (``minus``).

    ``lam`` scales components 0 and 1, ``eta`` components 2 and 3.  Either may be
    a number or the symbols ``"lam"`` / ``"eta"``.  Built as
    ``J5 +- J4`` with ``J4 = (P~ - K~)/2`` and ``J5 = (P~ + K~)/2``.
    """
    if d != 4:
        raise ValueError("scaled generators are defined for d = 4")
    if kind not in ("plus", "minus"):
        raise ValueError("kind must be 'plus' or 'minus'")
    if not isinstance(lam, (str, Poly)) and Fraction(lam) <= 0:
        raise ValueError("lambda must be positive")
    lam_p = _as_scalar_poly(lam, "lam")
    eta_p = _as_scalar_poly(eta, "eta")
    scales = [lam_p, lam_p, eta_p, eta_p]
    base = build_vector_fields(d)
    half = Fraction(1, 2)
    out = []
    for mu in range(d):
        pt = base.vectorFieldP[mu].scale(scales[mu])
        kt = base.vectorFieldK[mu].scale(scales[mu])
        j4 = (pt - kt).scale(half)
        j5 = (pt + kt).scale(half)
        out.append(j5 + j4 if kind == "plus" else j5 - j4)
    return out


# ---------------------------------------------------------------------------
# flow of b^s K_s

def flow_series(order: int, d: int = 4) -> List[Dict[int, Poly]]:
    """Per coordinate mu: {k: (b.K)^k x^mu / k!} for k <= order."""
    vf = build_vector_fields(d).vectorFieldK
    bk = DiffOp.zero(d)
    for s in range(d):
        bk = bk + vf[s].scale(Poly.var(bparam(s)))
    out = []
    for mu in range(d):
        cur = Poly.x(mu)
        terms = {0: cur}
        for k in range(1, order + 1):
            cur = apply(bk, cur)
            terms[k] = cur.scale(Fraction(1, factorial(k)))
        out.append(terms)
    return out


def flow_consistency_check(max_order: int = 6, d: int = 4) -> List[dict]:
    """Compare the truncated exponential of b.K on x^mu with the b-expansion of x_b."""
    from .wedge import mobius_taylor

    series = flow_series(max_order, d)
    rows = []
    for n in range(max_order + 1):
        ref = mobius_taylor(n, d)
        for mu in range(d):
            lhs = Poly()
            for k in range(n + 1):
                lhs = lhs + series[mu][k]
            diff = lhs - ref[mu]
            rows.append({"order": n, "mu": mu, "pass": diff.is_zero(),
                         "residual": canonical_string(diff)})
    return rows
