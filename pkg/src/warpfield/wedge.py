"""Exact-rational wedge geometry in four dimensions.

Vectors are contravariant 4-tuples of Fractions, metric diag(+1,-1,-1,-1).
Every check here is a decision in exact arithmetic; nothing uses tolerances.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .exactnum import parse_rational
from .polyalg import BPARAM, Poly, bparam

__all__ = [
    "Vec4", "vec4", "minkowski_dot", "minkowski_square", "in_right_wedge", "in_left_wedge",
    "scale_factor", "special_conformal_map", "SingularPointError", "ThetaMatrix",
    "LorentzTransform", "boost01", "rot23", "reflection_j", "identity_transform",
    "gamma_lambda", "is_admissible", "sample_wedge_point", "sample_forward_cone",
    "sample_admissible", "wedge_preservation_check", "spacelike_separation_check",
    "gamma_group_action_check", "stabilizer_check", "mobius_taylor", "CheckReport",
    "load_theta_file", "SAMPLING",
]

Vec4 = Tuple[Fraction, Fraction, Fraction, Fraction]
Matrix4 = Tuple[Tuple[Fraction, ...], ...]
ETA = (1, -1, -1, -1)

# coverage knobs for the random rational draws
SAMPLING = {
    "max_num": 24,
    "max_den": 12,
    "lambda_zero_prob": 0.05,
    "cone_boundary_prob": 0.1,
}


class SingularPointError(ZeroDivisionError):
    pass


def vec4(*xs) -> Vec4:
    if len(xs) == 1:
        xs = tuple(xs[0])
    if len(xs) != 4:
        raise ValueError("need four components")
    return tuple(parse_rational(x) if isinstance(x, str) else Fraction(x) for x in xs)


def minkowski_dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]


def minkowski_square(x: Sequence[Fraction]) -> Fraction:
    return minkowski_dot(x, x)


def in_right_wedge(x: Sequence[Fraction]) -> bool:
    return x[1] > abs(x[0])


def in_left_wedge(x: Sequence[Fraction]) -> bool:
    return x[1] < -abs(x[0])


def scale_factor(b: Sequence[Fraction], x: Sequence[Fraction]) -> Fraction:
    """sigma_b(x) = 1 - 2 b.x + b^2 x^2."""
    return 1 - 2 * minkowski_dot(b, x) + minkowski_square(b) * minkowski_square(x)


def special_conformal_map(b: Sequence[Fraction], x: Sequence[Fraction]) -> Vec4:
    """x_b^mu = (x^mu - b^mu x^2) / sigma_b(x)."""
    sigma = scale_factor(b, x)
    if sigma == 0:
        raise SingularPointError(f"sigma_b(x) = 0 at b={_fmt(b)}, x={_fmt(x)}")
    x2 = minkowski_square(x)
    return tuple((xi - bi * x2) / sigma for xi, bi in zip(x, b))


def _fmt(v) -> list:
    return [str(Fraction(c)) for c in v]


# ---------------------------------------------------------------------------
# deformation matrices and Lorentz transformations

def _matmul(a: Matrix4, b: Matrix4) -> Matrix4:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(4)) for j in range(4)) for i in range(4))


def _transpose(a: Matrix4) -> Matrix4:
    return tuple(tuple(a[j][i] for j in range(4)) for i in range(4))


def _matvec(a: Matrix4, v: Sequence[Fraction]) -> Vec4:
    return tuple(sum(a[i][k] * v[k] for k in range(4)) for i in range(4))


def _as_matrix(m) -> Matrix4:
    rows = tuple(tuple(parse_rational(c) if isinstance(c, str) else Fraction(c) for c in row) for row in m)
    if len(rows) != 4 or any(len(r) != 4 for r in rows):
        raise ValueError("expected a 4x4 matrix")
    return rows


@dataclass(frozen=True)
class ThetaMatrix:
    """Admissible deformation matrix with parameters (lambda >= 0, eta).

    ``mixedForm`` acts on contravariant vectors:
    (th v)^0 = lam v^1, (th v)^1 = lam v^0, (th v)^2 = eta v^3, (th v)^3 = -eta v^2.
    ``upperForm`` is theta^{mu nu} = mixed^mu_a eta^{a nu}; it is antisymmetric.
    """

    lam: Fraction
    eta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lam", Fraction(self.lam))
        object.__setattr__(self, "eta", Fraction(self.eta))
        if self.lam < 0:
            raise ValueError("admissible matrices need lambda >= 0")

    @property
    def mixedForm(self) -> Matrix4:
        z = Fraction(0)
        l, e = self.lam, self.eta
        return ((z, l, z, z), (l, z, z, z), (z, z, z, e), (z, z, -e, z))

    @property
    def upperForm(self) -> Matrix4:
        m = self.mixedForm
        return tuple(tuple(m[i][j] * ETA[j] for j in range(4)) for i in range(4))

    def apply(self, v: Sequence[Fraction]) -> Vec4:
        return _matvec(self.mixedForm, v)

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "eta": str(self.eta)}


def mixed_from_upper(upper: Matrix4) -> Matrix4:
    return tuple(tuple(upper[i][j] * ETA[j] for j in range(4)) for i in range(4))


@dataclass(frozen=True)
class LorentzTransform:
    matrix: Matrix4
    orthochronous: bool

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        eta = tuple(tuple(Fraction(ETA[i]) if i == j else Fraction(0) for j in range(4)) for i in range(4))
        if _matmul(_matmul(_transpose(m), eta), m) != eta:
            raise ValueError("matrix does not preserve the Minkowski metric")
        if (m[0][0] > 0) != self.orthochronous:
            raise ValueError("orthochronous flag disagrees with the 00 entry")

    def __matmul__(self, other: "LorentzTransform") -> "LorentzTransform":
        m = _matmul(self.matrix, other.matrix)
        return LorentzTransform(m, m[0][0] > 0)


def _lt(m) -> LorentzTransform:
    m = _as_matrix(m)
    return LorentzTransform(m, m[0][0] > 0)


def identity_transform() -> LorentzTransform:
    return _lt([[int(i == j) for j in range(4)] for i in range(4)])


def boost01(cosh, sinh) -> LorentzTransform:
    c, s = Fraction(cosh), Fraction(sinh)
    if c * c - s * s != 1 or c <= 0:
        raise ValueError(f"({c}, {s}) is not on the unit hyperbola")
    return _lt([[c, s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def rot23(cos, sin) -> LorentzTransform:
    c, s = Fraction(cos), Fraction(sin)
    if c * c + s * s != 1:
        raise ValueError(f"({c}, {s}) is not on the unit circle")
    return _lt([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, c, -s], [0, 0, s, c]])


def reflection_j() -> LorentzTransform:
    return _lt([[-1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def gamma_lambda(lt: LorentzTransform, th) -> Matrix4:
    """+-(L th L^T) on the upper-index form; minus for non-orthochronous L."""
    upper = th.upperForm if isinstance(th, ThetaMatrix) else _as_matrix(th)
    out = _matmul(_matmul(lt.matrix, upper), _transpose(lt.matrix))
    if not lt.orthochronous:
        out = tuple(tuple(-c for c in row) for row in out)
    return out


def is_admissible(m) -> Tuple[bool, Optional[Tuple[Fraction, Fraction]]]:
    """Is the upper-index matrix an admissible one?  Returns (flag, (lam, eta))."""
    upper = m.upperForm if isinstance(m, ThetaMatrix) else _as_matrix(m)
    lam = upper[1][0]
    eta = -upper[2][3]
    try:
        expected = ThetaMatrix(lam, eta).upperForm
    except ValueError:
        return False, None
    if upper != expected:
        return False, None
    return True, (lam, eta)


# ---------------------------------------------------------------------------
# sampling

def _rng(seed: int) -> random.Random:
    return random.Random(seed)


def _rat(rng: random.Random, positive=False) -> Fraction:
    num = rng.randint(1 if positive else -SAMPLING["max_num"], SAMPLING["max_num"])
    return Fraction(num, rng.randint(1, SAMPLING["max_den"]))


def sample_wedge_point(seed) -> Vec4:
    """Exact point of W1 = {x1 > |x0|}; deterministic in ``seed`` (int or Random)."""
    rng = seed if isinstance(seed, random.Random) else _rng(seed)
    x0, x2, x3 = _rat(rng), _rat(rng), _rat(rng)
    delta = _rat(rng, positive=True)
    x = (x0, abs(x0) + delta, x2, x3)
    assert in_right_wedge(x)
    return x


_NULL_RAYS = ((1, 1, 0, 0), (1, -1, 0, 0), (1, 0, 1, 0), (5, 3, 4, 0), (13, 3, 4, 12), (3, -1, 2, 2), (9, 4, -4, 7))


def sample_forward_cone(seed) -> Vec4:
    """Exact point of the closed forward cone, including occasional null rays and 0."""
    rng = seed if isinstance(seed, random.Random) else _rng(seed)
    if rng.random() < SAMPLING["cone_boundary_prob"]:
        pick = rng.randrange(len(_NULL_RAYS) + 1)
        if pick == len(_NULL_RAYS):
            return (Fraction(0),) * 4
        t = _rat(rng, positive=True)
        v = tuple(t * c for c in _NULL_RAYS[pick])
    else:
        sp = (_rat(rng), _rat(rng), _rat(rng))
        r = 1 + abs(_rat(rng))
        v = (r * (1 + sum(abs(c) for c in sp)),) + sp
    if not (minkowski_square(v) >= 0 and v[0] >= 0):
        raise AssertionError(f"cone sample {v} outside the closed forward cone")
    return v


def sample_admissible(seed) -> ThetaMatrix:
    rng = seed if isinstance(seed, random.Random) else _rng(seed)
    lam = Fraction(0) if rng.random() < SAMPLING["lambda_zero_prob"] else _rat(rng, positive=True)
    return ThetaMatrix(lam, _rat(rng))


def _sample_seed(seed: int, i: int) -> int:
    return seed * 1_000_003 + i


# ---------------------------------------------------------------------------
# checks

@dataclass
class CheckReport:
    name: str
    samples: int
    seed: int
    failures: List[dict] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"check": self.name, "samples": self.samples, "seed": self.seed,
                "failures": len(self.failures), "counterexamples": self.failures[:20],
                "pass": self.passed, **self.data}


def wedge_preservation_check(samples: int, seed: int = 0) -> CheckReport:
    """sigma_{th v}(x) > 0 and x_{th v} in W1 for x in W1; mirrored for -W1 with -th u."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rep = CheckReport("wedge_preservation", samples, seed)
    for i in range(samples):
        rng = _rng(_sample_seed(seed, i))
        x = sample_wedge_point(rng)
        v = sample_forward_cone(rng)
        th = sample_admissible(rng)
        y = tuple(-c for c in sample_wedge_point(rng))
        u = sample_forward_cone(rng)
        for side, pt, b, inside in (("right", x, th.apply(v), in_right_wedge),
                                    ("left", y, tuple(-c for c in th.apply(u)), in_left_wedge)):
            sigma = scale_factor(b, pt)
            ok = sigma > 0 and inside(special_conformal_map(b, pt))
            if not ok:
                rep.failures.append({"sample": i, "side": side, "x": _fmt(pt), "b": _fmt(b),
                                     "theta": th.to_json(), "sigma": str(sigma)})
    return rep


def spacelike_separation_check(samples: int, seed: int = 0) -> CheckReport:
    """(x_{th v} - y_{-th u})^2 < 0 for x in W1, y in -W1, v, u in the forward cone."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rep = CheckReport("spacelike_separation", samples, seed)
    for i in range(samples):
        rng = _rng(_sample_seed(seed, i) + 7)
        x = sample_wedge_point(rng)
        y = tuple(-c for c in sample_wedge_point(rng))
        v = sample_forward_cone(rng)
        u = sample_forward_cone(rng)
        th = sample_admissible(rng)
        xb = special_conformal_map(th.apply(v), x)
        yb = special_conformal_map(tuple(-c for c in th.apply(u)), y)
        sep = minkowski_square(tuple(a - b for a, b in zip(xb, yb)))
        if not sep < 0:
            rep.failures.append({"sample": i, "x": _fmt(x), "y": _fmt(y), "v": _fmt(v), "u": _fmt(u),
                                 "theta": th.to_json(), "separation": str(sep)})
    return rep


def _random_lorentz(rng: random.Random) -> LorentzTransform:
    kind = rng.randrange(4)
    if kind == 0:
        return identity_transform()
    if kind == 3:
        return reflection_j()
    t = Fraction(rng.randint(-9, 9), 10)
    if kind == 1:
        return boost01((1 + t * t) / (1 - t * t), 2 * t / (1 - t * t))
    return rot23((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t))


def gamma_group_action_check(samples: int, seed: int = 0) -> CheckReport:
    """gamma_{L1}(gamma_{L2}(th)) = gamma_{L1 L2}(th).

    Pairs where both factors are antichronous are recorded in ``data`` rather
    than counted as failures.
    """
    rep = CheckReport("gamma_group_action", samples, seed)
    anti = {"pairs": 0, "agree": 0}
    for i in range(samples):
        rng = _rng(_sample_seed(seed, i) + 13)
        l1, l2 = _random_lorentz(rng), _random_lorentz(rng)
        th = sample_admissible(rng)
        lhs = gamma_lambda(l1, gamma_lambda(l2, th))
        rhs = gamma_lambda(l1 @ l2, th)
        if not l1.orthochronous and not l2.orthochronous:
            anti["pairs"] += 1
            anti["agree"] += int(lhs == rhs)
        elif lhs != rhs:
            rep.failures.append({"sample": i, "L1": [_fmt(r) for r in l1.matrix],
                                 "L2": [_fmt(r) for r in l2.matrix], "theta": th.to_json()})
    rep.data["antichronous_pairs"] = anti
    return rep


def stabilizer_check(samples: int, seed: int = 0) -> CheckReport:
    """Boosts in the 0-1 plane and rotations in the 2-3 plane fix admissible matrices."""
    rep = CheckReport("stabilizer", samples, seed)
    for i in range(samples):
        rng = _rng(_sample_seed(seed, i) + 29)
        t = Fraction(rng.randint(-9, 9), 10)
        lts = (boost01((1 + t * t) / (1 - t * t), 2 * t / (1 - t * t)),
               rot23((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t)))
        th = sample_admissible(rng)
        for lt in lts:
            ok, params = is_admissible(gamma_lambda(lt, th))
            if not ok or params != (th.lam, th.eta):
                rep.failures.append({"sample": i, "t": str(t), "theta": th.to_json()})
    return rep


# ---------------------------------------------------------------------------
# symbolic Moebius map

def _truncate_b(p: Poly, n: int) -> Poly:
    return Poly({m: c for m, c in p.terms.items()
                 if sum(e for v, e in m if v.kind == BPARAM) <= n}, _trusted=True)


def mobius_taylor(order: int, d: int = 4) -> List[Poly]:
    """Taylor expansion in the b^k symbols of x_b^mu, truncated at total b-degree ``order``.

    1/sigma_b(x) is expanded as the geometric series in u = 2 b.x - b^2 x^2.
    """
    sig = (1,) + (-1,) * (d - 1)
    xs = [Poly.x(m) for m in range(d)]
    bs = [Poly.var(bparam(m)) for m in range(d)]
    x2 = sum((xs[m] * xs[m]).scale(sig[m]) for m in range(d))
    b2 = sum((bs[m] * bs[m]).scale(sig[m]) for m in range(d))
    bx = sum((bs[m] * xs[m]).scale(sig[m]) for m in range(d))
    u = bx.scale(2) - b2 * x2
    inv = Poly.const(1)
    power = Poly.const(1)
    for _ in range(order):
        power = _truncate_b(power * u, order)
        inv = inv + power
    return [_truncate_b((xs[m] - bs[m] * x2) * inv, order) for m in range(d)]


# ---------------------------------------------------------------------------
# theta input file

def load_theta_file(path: str) -> Matrix4:
    """Read ``{"lambda": "p/q", "eta": "p/q"}`` or a 4x4 upper-index matrix.

    A matrix may be given bare or as ``{"matrix": [...], "form": "upper"|"mixed"}``;
    it must be antisymmetric in upper-index form.
    """
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "lambda" in data:
        return ThetaMatrix(parse_rational(str(data["lambda"])), parse_rational(str(data.get("eta", "0")))).upperForm
    form = "upper"
    if isinstance(data, dict):
        form = data.get("form", "upper")
        data = data["matrix"]
    m = _as_matrix(data)
    if form == "mixed":
        m = tuple(tuple(m[i][j] * ETA[j] for j in range(4)) for i in range(4))
    elif form != "upper":
        raise ValueError(f"unknown matrix form {form!r}")
    if any(m[i][j] != -m[j][i] for i in range(4) for j in range(4)):
        raise ValueError("theta matrix must be antisymmetric in upper-index form")
    return m
