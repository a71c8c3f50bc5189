"""Deformed product and commutator through the twist series.

    A x_th B = sum_k (s i)^k / k!  th^{s1 l1} ... th^{sk lk} (G_s1..G_sk A)(G_l1..G_lk B)

``G`` is a family of d vector fields (translations, special conformal fields
or their scaled versions).  Only equal-order pairs are generated; see
:func:`unequal_order_check` for the moment computation that kills the rest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial, lcm
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .conformal import ConsistencyError, Metric, build_vector_fields, scaled_generators
from .diffop import DiffOp, apply
from .exactnum import I, GaussianRational
from .polyalg import COORD, THETA, Poly, canonical_string, mono_mul, theta

__all__ = [
    "TwistSeriesConfig", "DeformedProductResult", "twist_product", "deformed_commutator",
    "calibrate_series_sign", "parity_vanishing_check", "moyal_reference",
    "nonconstant_reference", "theta_upper", "unequal_order_check", "translation_config",
    "special_conformal_config", "scaled_config", "substitute_theta",
]

_BLOCK = 1 << 18  # pairs per kernel call


def theta_upper(mu: int, nu: int) -> Poly:
    """Symbolic theta^{mu nu}: th_mn for mu < nu, its negative for mu > nu."""
    if mu == nu:
        return Poly()
    if mu < nu:
        return Poly.var(theta(mu, nu))
    return -Poly.var(theta(nu, mu))


@dataclass
class TwistSeriesConfig:
    """Generators, deformation matrix and truncation order.

    ``theta`` is ``"symbolic"`` or a d x d antisymmetric rational matrix in
    upper-index form.  ``seriesSign=None`` means: use the calibrated sign.
    """

    generators: Sequence[DiffOp]
    theta: object = "symbolic"
    maxOrder: int = 4
    seriesSign: Optional[int] = None
    _chains: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.generators = list(self.generators)
        d = len(self.generators)
        if d < 1 or any(g.d != d for g in self.generators):
            raise ValueError("need d generators acting on d coordinates")
        if self.maxOrder < 0:
            raise ValueError("maxOrder must be >= 0")
        if self.seriesSign not in (None, 1, -1):
            raise ValueError("seriesSign is +1, -1 or None")
        if isinstance(self.theta, str):
            if self.theta != "symbolic":
                raise ValueError("theta must be 'symbolic' or a matrix")
        else:
            m = tuple(tuple(Fraction(c) for c in row) for row in self.theta)
            if len(m) != d or any(len(r) != d for r in m):
                raise ValueError(f"theta must be {d}x{d}")
            if any(m[i][j] != -m[j][i] for i in range(d) for j in range(d)):
                raise ValueError("theta must be antisymmetric in upper indices")
            self.theta = m

    @property
    def d(self) -> int:
        return len(self.generators)

    @property
    def symbolic(self) -> bool:
        return isinstance(self.theta, str)

    def sign(self) -> int:
        return self.seriesSign if self.seriesSign is not None else calibrate_series_sign()


def translation_config(d: int = 4, theta="symbolic", maxOrder: int = 4, seriesSign=None) -> TwistSeriesConfig:
    return TwistSeriesConfig(build_vector_fields(d).vectorFieldP, theta, maxOrder, seriesSign)


def special_conformal_config(d: int = 4, theta="symbolic", maxOrder: int = 4, seriesSign=None) -> TwistSeriesConfig:
    return TwistSeriesConfig(build_vector_fields(d).vectorFieldK, theta, maxOrder, seriesSign)


def scaled_config(kind: str = "minus", lam="lam", eta="eta", theta="symbolic", maxOrder: int = 4,
                  seriesSign=None) -> TwistSeriesConfig:
    return TwistSeriesConfig(scaled_generators(kind, lam, eta), theta, maxOrder, seriesSign)


@dataclass
class DeformedProductResult:
    value: Poly
    orderComponents: Dict[int, Poly]
    terminated: bool
    termination_order: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "value": canonical_string(self.value),
            "terminated": self.terminated,
            "termination_order": self.termination_order,
            "orders": [{"order": k, "poly": canonical_string(p), "zero": p.is_zero()}
                       for k, p in sorted(self.orderComponents.items())],
        }


# ---------------------------------------------------------------------------
# generator chains

class _Level:
    """Chains of one order as an integer matrix over a shared monomial basis."""

    __slots__ = ("polys", "basis", "den", "re", "im", "nonzero")

    def __init__(self, polys: List[Poly]):
        self.polys = polys
        basis = sorted(set().union(*(p.terms for p in polys))) if polys else []
        self.basis = basis
        col = {m: j for j, m in enumerate(basis)}
        den = 1
        for p in polys:
            for c in p.terms.values():
                den = lcm(den, c.re.denominator, c.im.denominator)
        self.den = den
        re = [[0] * len(basis) for _ in polys]
        im = [[0] * len(basis) for _ in polys]
        has_im = False
        for r, p in enumerate(polys):
            for m, c in p.terms.items():
                j = col[m]
                re[r][j] = int(c.re * den)
                if c.im:
                    im[r][j] = int(c.im * den)
                    has_im = True
        self.re = _int_array(re, len(basis))
        self.im = _int_array(im, len(basis)) if has_im else None
        self.nonzero = np.array([bool(p.terms) for p in polys], dtype=bool)


def _int_array(rows, ncol):
    big = any(abs(v) >= 2 ** 62 for row in rows for v in row)
    arr = np.array(rows, dtype=object if big else np.int64)
    return arr.reshape(len(rows), ncol)


def _chains(cfg: TwistSeriesConfig, p: Poly, k: int) -> _Level:
    key = (p, k)
    hit = cfg._chains.get(key)
    if hit is not None:
        return hit
    if k == 0:
        lvl = _Level([p])
    else:
        prev = _chains(cfg, p, k - 1).polys
        lvl = _Level([apply(g, q) if q.terms else q for g in cfg.generators for q in prev])
    cfg._chains[key] = lvl
    return lvl


def _level_vanishes(cfg: TwistSeriesConfig, p: Poly, k: int) -> bool:
    """True when every chain of length k on p is zero; stops at the first nonzero one."""
    if (p, k) in cfg._chains:
        return not cfg._chains[(p, k)].nonzero.any()
    if k == 0:
        return not p.terms
    prev = _chains(cfg, p, k - 1).polys
    for g in cfg.generators:
        for q in prev:
            if q.terms and apply(g, q).terms:
                return False
    return True


# ---------------------------------------------------------------------------
# index pairs

@lru_cache(maxsize=None)
def _offdiag(d: int):
    sig, lam = zip(*[(s, l) for s in range(d) for l in range(d) if s != l])
    return np.array(sig, dtype=np.int64), np.array(lam, dtype=np.int64)


@lru_cache(maxsize=None)
def _symbolic_table(d: int):
    sig, lam = _offdiag(d)
    nsym = d * (d - 1) // 2
    sym_of = {}
    for a in range(d):
        for b in range(a + 1, d):
            sym_of[(a, b)] = len(sym_of)
    sym = np.array([sym_of[(min(s, l), max(s, l))] for s, l in zip(sig, lam)], dtype=np.int64)
    sgn = np.where(sig < lam, 1, -1).astype(np.int64)
    inv = {v: k for k, v in sym_of.items()}
    return sym, sgn, nsym, inv


def _pair_blocks(cfg: TwistSeriesConfig, k: int):
    """Yield (sig_row, lam_row, coeff, code) arrays over all nonzero theta-pairs of order k.

    Rows index chains in base d with the first generator most significant.
    ``code`` identifies the theta monomial (sorted symbol ids in base nsym).
    """
    d = cfg.d
    sig0, lam0 = _offdiag(d)
    if cfg.symbolic:
        sym, sgn, nsym, _ = _symbolic_table(d)
        weight = sgn
    else:
        th = cfg.theta
        den = 1
        for row in th:
            for c in row:
                den = lcm(den, c.denominator)
        num = np.array([int(th[s][l] * den) for s, l in zip(sig0, lam0)], dtype=object)
        keep = num != 0
        sig0, lam0, num = sig0[keep], lam0[keep], num[keep]
        weight = num
    m = len(sig0)
    if k == 0:
        yield (np.zeros(1, np.int64), np.zeros(1, np.int64), np.ones(1, dtype=object), np.zeros(1, np.int64))
        return
    if m == 0:
        return
    inner = 1
    while inner < k and m ** (inner + 1) <= _BLOCK:
        inner += 1
    inner = min(inner, k)
    outer = k - inner
    grid = np.indices((m,) * inner).reshape(inner, -1).T  # (m^inner, inner)
    for lead in product(range(m), repeat=outer):
        choice = np.hstack([np.tile(np.array(lead, dtype=np.int64), (grid.shape[0], 1)), grid]) if outer else grid
        sig = np.zeros(choice.shape[0], dtype=np.int64)
        lam = np.zeros(choice.shape[0], dtype=np.int64)
        for pos in range(k):
            sig = sig * d + sig0[choice[:, pos]]
            lam = lam * d + lam0[choice[:, pos]]
        coeff = np.ones(choice.shape[0], dtype=object)
        for pos in range(k):
            coeff = coeff * weight[choice[:, pos]]
        if cfg.symbolic:
            syms = np.sort(sym[choice], axis=1)
            code = np.zeros(choice.shape[0], dtype=np.int64)
            for pos in range(k):
                code = code * nsym + syms[:, pos]
        else:
            code = np.zeros(choice.shape[0], dtype=np.int64)
        yield sig, lam, coeff, code


def _decode_theta(code: int, k: int, d: int) -> tuple:
    _, _, nsym, inv = _symbolic_table(d)
    ids = []
    for _ in range(k):
        code, r = divmod(code, nsym)
        ids.append(r)
    counts: Dict[int, int] = {}
    for r in ids:
        counts[r] = counts.get(r, 0) + 1
    return tuple(sorted((theta(*inv[r]), e) for r, e in counts.items()))


def _order_term(cfg: TwistSeriesConfig, A: Poly, B: Poly, k: int) -> Poly:
    la, lb = _chains(cfg, A, k), _chains(cfg, B, k)
    if not la.basis or not lb.basis:
        return Poly()
    out_basis: Dict[tuple, int] = {}
    xprod = np.empty((len(la.basis), len(lb.basis)), dtype=np.int64)
    for i, ma in enumerate(la.basis):
        for j, mb in enumerate(lb.basis):
            xprod[i, j] = out_basis.setdefault(mono_mul(ma, mb), len(out_basis))
    n_out = len(out_basis)
    acc_re: Dict[int, np.ndarray] = {}
    acc_im: Dict[int, np.ndarray] = {}
    for sig, lam, coeff, code in _pair_blocks(cfg, k):
        keep = la.nonzero[sig] & lb.nonzero[lam]
        if not keep.any():
            continue
        sig, lam, coeff, code = sig[keep], lam[keep], coeff[keep], code[keep]
        codes, tidx = np.unique(code, return_inverse=True)
        tidx = tidx.ravel()
        c = _maybe_int64(coeff)
        run = lambda a, b: _kernels.contract_pairs(sig, lam, c, tidx, a, b, xprod, len(codes), n_out)
        re = run(la.re, lb.re)
        im = None
        if la.im is not None and lb.im is not None:
            re = re - run(la.im, lb.im)
        if la.im is not None:
            im = run(la.im, lb.re)
        if lb.im is not None:
            t = run(la.re, lb.im)
            im = t if im is None else im + t
        for row, cd in enumerate(codes.tolist()):
            _accumulate(acc_re, cd, re[row])
            if im is not None:
                _accumulate(acc_im, cd, im[row])
    if cfg.symbolic:
        theta_den = 1
    else:
        theta_den = 1
        for row in cfg.theta:
            for cc in row:
                theta_den = lcm(theta_den, cc.denominator)
        theta_den = theta_den ** k
    pref = (I * cfg.sign()) ** k * GaussianRational(Fraction(1, factorial(k) * la.den * lb.den * theta_den))
    mono_of = list(out_basis)
    terms: Dict[tuple, GaussianRational] = {}
    for cd in sorted(set(acc_re) | set(acc_im)):
        tmono = _decode_theta(cd, k, cfg.d) if cfg.symbolic else ()
        re = acc_re.get(cd)
        im = acc_im.get(cd)
        for j in range(n_out):
            r = int(re[j]) if re is not None else 0
            s = int(im[j]) if im is not None else 0
            if r or s:
                terms[mono_mul(tmono, mono_of[j])] = GaussianRational(r, s) * pref
    return Poly(terms)


def _maybe_int64(coeff):
    vals = coeff.tolist()
    if all(abs(v) < 2 ** 62 for v in vals):
        return np.array(vals, dtype=np.int64)
    return coeff


def _accumulate(acc, code, row):
    if code in acc:
        acc[code] = acc[code] + row
    else:
        acc[code] = row.astype(object) if row.dtype == object else row.copy()


# ---------------------------------------------------------------------------
# public operations

def _check_args(A: Poly, B: Poly, cfg: TwistSeriesConfig):
    for p in (A, B):
        if any(v.kind == THETA for m in p.terms for v, _ in m):
            raise ValueError("arguments of the deformed product must not contain theta symbols")
        if any(v.kind == COORD and v.a >= cfg.d for m in p.terms for v, _ in m):
            raise ValueError(f"coordinate index out of range for d={cfg.d}")


def twist_product(A: Poly, B: Poly, cfg: TwistSeriesConfig) -> DeformedProductResult:
    _check_args(A, B, cfg)
    comps: Dict[int, Poly] = {}
    stop = None
    for k in range(cfg.maxOrder + 1):
        if _level_vanishes(cfg, A, k) or _level_vanishes(cfg, B, k):
            stop = k
            break
        comps[k] = _order_term(cfg, A, B, k)
    if stop is None and (_level_vanishes(cfg, A, cfg.maxOrder + 1) or _level_vanishes(cfg, B, cfg.maxOrder + 1)):
        stop = cfg.maxOrder + 1
    for k in range(cfg.maxOrder + 1):
        comps.setdefault(k, Poly())
    value = Poly()
    for k in sorted(comps):
        value = value + comps[k]
    term = None if stop is None else max(stop - 1, 0)
    return DeformedProductResult(value, comps, stop is not None, term)


def deformed_commutator(A: Poly, B: Poly, cfg: TwistSeriesConfig) -> DeformedProductResult:
    ab = twist_product(A, B, cfg)
    ba = twist_product(B, A, cfg)
    comps = {k: ab.orderComponents[k] - ba.orderComponents[k] for k in ab.orderComponents}
    done = ab.terminated and ba.terminated
    term = max(ab.termination_order, ba.termination_order) if done else None
    return DeformedProductResult(ab.value - ba.value, comps, done, term)


@lru_cache(maxsize=None)
def calibrate_series_sign() -> int:
    """Pick s in (s i)^k so that translations give the constant commutator -2i theta_{mu nu}."""
    metric = Metric(4)
    a, b = metric.x_lower(0), metric.x_lower(1)
    ok = []
    for s in (1, -1):
        cfg = translation_config(4, maxOrder=2, seriesSign=s)
        if deformed_commutator(a, b, cfg).value == moyal_reference(0, 1):
            ok.append(s)
    if len(ok) != 1:
        raise ConsistencyError(f"series sign calibration found {len(ok)} consistent signs")
    return ok[0]


def _lower_factor(mu: int, nu: int, d: int, index: str) -> int:
    if index == "lower":
        return 1
    if index == "upper":
        m = Metric(d)
        return m.sign(mu) * m.sign(nu)
    raise ValueError("index must be 'lower' or 'upper'")


def moyal_reference(mu: int, nu: int, d: int = 4, index: str = "lower") -> Poly:
    """-2i theta_{mu nu}; with index='upper' the commutator of x^mu, x^nu instead."""
    if not (0 <= mu < d and 0 <= nu < d):
        raise ValueError("index out of range")
    m = Metric(d)
    th_low = theta_upper(mu, nu).scale(m.sign(mu) * m.sign(nu))
    return th_low.scale(GaussianRational(0, -2) * _lower_factor(mu, nu, d, index))


def nonconstant_reference(mu: int, nu: int, d: int = 4, index: str = "lower",
                          theta_fn: Callable[[int, int], Poly] = theta_upper) -> Poly:
    """-2i th_{mu nu} x^4 - 4i((th x)_mu x_nu - (th x)_nu x_mu) x^2.

    (th x)_mu = eta_{mu a} x_s th^{s a}; ``theta_fn`` supplies th^{s a}.
    """
    if not (0 <= mu < d and 0 <= nu < d):
        raise ValueError("index out of range")
    m = Metric(d)
    x2 = m.x_squared()
    xl = [m.x_lower(a) for a in range(d)]

    def thx(a):
        out = Poly()
        for s in range(d):
            out = out + xl[s] * theta_fn(s, a)
        return out.scale(m.sign(a))

    th_low = theta_fn(mu, nu).scale(m.sign(mu) * m.sign(nu))
    res = (th_low * x2 * x2).scale(GaussianRational(0, -2)) \
        + ((thx(mu) * xl[nu] - thx(nu) * xl[mu]) * x2).scale(GaussianRational(0, -4))
    return res.scale(_lower_factor(mu, nu, d, index))


def substitute_theta(p: Poly, matrix) -> Poly:
    """Replace th_mn by the (m, n) entry of an upper-index numeric matrix."""
    n = len(matrix)
    return p.subs({theta(a, b): Poly.const(Fraction(matrix[a][b])) for a in range(n) for b in range(a + 1, n)})


# ---------------------------------------------------------------------------
# checks

def parity_vanishing_check(A: Poly, B: Poly, cfg: TwistSeriesConfig, maxEven: int) -> dict:
    """Every even-order component of [A x_th, B] up to maxEven is zero."""
    if maxEven > cfg.maxOrder:
        cfg = TwistSeriesConfig(cfg.generators, cfg.theta, maxEven, cfg.seriesSign)
    res = deformed_commutator(A, B, cfg)
    orders = {k: res.orderComponents[k].is_zero() for k in range(0, maxEven + 1, 2)}
    return {"orders": orders, "pass": all(orders.values()),
            "terminated": res.terminated, "termination_order": res.termination_order}


def _moment(rho: Tuple[int, ...], lam: Tuple[int, ...]) -> GaussianRational:
    """(2 pi)^-d int int e^{-i v^a u_a} u_rho v^lam = delta * prod(n!) (-i)^|rho|."""
    if sorted(rho) != sorted(lam):
        return GaussianRational(0)
    weight = 1
    for a in set(rho):
        weight *= factorial(rho.count(a))
    return GaussianRational(weight) * (-I) ** len(rho)


def unequal_order_check(A: Poly, B: Poly, cfg: TwistSeriesConfig, max_order: int = 2) -> dict:
    """Expand both deformed factors to orders (k, l) <= max_order and integrate the moments.

    The (th u)^s factors of A and the v^l factors of B are paired through the
    oscillatory moment; terms with k != l must vanish and k == l must agree with
    the twist component.  Symbolic theta only.
    """
    if not cfg.symbolic:
        raise ValueError("unequal_order_check works with symbolic theta")
    _check_args(A, B, cfg)
    d = cfg.d
    rows = []
    ok = True
    for k in range(max_order + 1):
        ca = _chains(cfg, A, k).polys
        for l in range(max_order + 1):
            cb = _chains(cfg, B, l).polys
            total = Poly()
            for si, sig in enumerate(product(range(d), repeat=k)):
                if not ca[si].terms:
                    continue
                for li, lam in enumerate(product(range(d), repeat=l)):
                    if not cb[li].terms:
                        continue
                    coef = Poly()
                    for rho in product(range(d), repeat=k):
                        mom = _moment(rho, lam)
                        if not mom:
                            continue
                        t = Poly.const(mom)
                        for s, r in zip(sig, rho):
                            t = t * theta_upper(s, r)
                        coef = coef + t
                    if coef.terms:
                        total = total + coef * ca[si] * cb[li]
            total = total.scale(Fraction(1, factorial(k) * factorial(l)))
            if k == l:
                expected = _order_term(cfg, A, B, k)
            else:
                expected = Poly()
            match = total == expected
            ok &= match
            rows.append({"k": k, "l": l, "zero": total.is_zero(), "matches_series": match})
    return {"pairs": rows, "pass": ok}
