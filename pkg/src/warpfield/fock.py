"""Truncated bosonic Fock space over a finite momentum grid.

Modes c_i live on grid points p_i with weights w_i ~ d^n p / (2|p|).  Smeared
operators are

    a(f)  = sum_i sqrt(w_i) conj(f_i) c_i
    a*(f) = sum_i sqrt(w_i) f_i c_i^dagger

so that [a(f), a*(g)] = (f, g) = sum_i w_i conj(f_i) g_i on the grid.  States
are occupation-number vectors with total occupation <= mMax.  Everything is
binary64; operators are dense matrices (the default space has 165 states).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from dataclasses import field as _dc_field
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels

__all__ = [
    "MomentumGrid", "FockSpace", "FockVector", "ThetaNumeric", "FockConfig",
    "annihilate", "create", "field", "deformed_field_P", "second_quantize", "smear",
    "calibrate_phase", "s_m_state", "random_theta", "random_grid_function",
    "random_state", "random_involution", "householder", "conjugation_identity_check",
    "bound_check", "hermiticity_check", "run_batteries", "DEFAULT_TOLERANCES",
]

DEFAULT_TOLERANCES = {
    "commutation": 1e-12,
    "vacuum": 1e-12,
    "hermiticity": 1e-10,
    "bound_slack": 1e-10,
    "s_m": 1e-10,
    "conjugation": 1e-10,
    "unitarity": 1e-12,
}


# ---------------------------------------------------------------------------
# grid and theta

@dataclass
class MomentumGrid:
    n: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if not 1 <= self.n <= 3:
            raise ValueError("spatial dimension must be 1, 2 or 3")
        if self.points.shape[1] != self.n or len(self.weights) != len(self.points):
            raise ValueError("points must be (K, n) with one weight per point")
        if len(self.points) == 0:
            raise ValueError("grid needs at least one point")
        if np.any(np.linalg.norm(self.points, axis=1) == 0):
            raise ValueError("grid points must avoid the origin")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")

    @property
    def size(self) -> int:
        return len(self.points)

    @classmethod
    def auto(cls, n: int = 1, h: float = 0.5) -> "MomentumGrid":
        """Eight symmetric points: 4 radii on a line (n=1), 2 per half-axis (n=2), cube corners (n=3)."""
        if n == 1:
            pts = np.array([[s * h * k] for s in (-1, 1) for k in (1, 2, 3, 4)])
        elif n == 2:
            pts = np.array([s * h * k * e for e in np.eye(2) for s in (-1, 1) for k in (1, 2)])
        elif n == 3:
            pts = h * np.array([[a, b, c] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)])
        else:
            raise ValueError("spatial dimension must be 1, 2 or 3")
        w = h ** n / (2 * np.linalg.norm(pts, axis=1))
        return cls(n, pts, w)

    @classmethod
    def from_points(cls, n: int, points, cell: Optional[float] = None) -> "MomentumGrid":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if cell is None:
            cell = 1.0
        return cls(n, pts, cell / (2 * np.linalg.norm(pts, axis=1)))

    def onshell(self) -> np.ndarray:
        """(K, n+1) array of p = (|p|, p)."""
        return np.hstack([np.linalg.norm(self.points, axis=1)[:, None], self.points])

    def inner(self, f, g) -> complex:
        return complex(np.sum(self.weights * np.conj(f) * g))

    def norm(self, f) -> float:
        return math.sqrt(max(self.inner(f, f).real, 0.0))


@dataclass
class ThetaNumeric:
    """Deformation matrix acting on (n+1)-momenta.

    ``mixed`` acts on contravariant vectors; p.th q = p^T eta mixed q with the
    bilinear form eta*mixed antisymmetric.
    """

    mixed: np.ndarray

    def __post_init__(self):
        self.mixed = np.asarray(self.mixed, dtype=float)
        k = self.mixed.shape[0]
        if self.mixed.shape != (k, k):
            raise ValueError("theta must be square")
        form = self.form
        if not np.allclose(form, -form.T, atol=1e-14):
            raise ValueError("theta must be skew with respect to the Minkowski product")

    @property
    def eta(self) -> np.ndarray:
        return np.diag([1.0] + [-1.0] * (self.mixed.shape[0] - 1))

    @property
    def form(self) -> np.ndarray:
        return self.eta @ self.mixed

    @classmethod
    def from_form(cls, form) -> "ThetaNumeric":
        form = np.asarray(form, dtype=float)
        eta = np.diag([1.0] + [-1.0] * (form.shape[0] - 1))
        return cls(eta @ form)

    @classmethod
    def zero(cls, n: int) -> "ThetaNumeric":
        return cls(np.zeros((n + 1, n + 1)))

    def pair(self, p, q) -> np.ndarray:
        """p.th q for stacked momenta (broadcast over leading axes)."""
        return np.einsum("...a,ab,...b->...", p, self.form, q)


def random_theta(n: int, rng: np.random.Generator, scale: float = 1.0) -> ThetaNumeric:
    a = rng.normal(scale=scale, size=(n + 1, n + 1))
    return ThetaNumeric.from_form(a - a.T)


# ---------------------------------------------------------------------------
# Fock space

class FockSpace:
    """Occupation-number basis ordered by particle number."""

    def __init__(self, grid: MomentumGrid, mMax: int = 3):
        if mMax < 0:
            raise ValueError("mMax must be >= 0")
        self.grid = grid
        self.mMax = mMax
        K = grid.size
        states: List[Tuple[int, ...]] = []
        rows: List[Tuple[int, ...]] = []
        self.sectors: List[slice] = []
        for N in range(mMax + 1):
            start = len(states)
            for combo in combinations_with_replacement(range(K), N):
                occ = [0] * K
                for i in combo:
                    occ[i] += 1
                states.append(tuple(occ))
                rows.append(combo)
            self.sectors.append(slice(start, len(states)))
        self.states = states
        self.mode_rows = rows
        self.index = {s: k for k, s in enumerate(states)}
        self.dim = len(states)
        self.number = np.array([sum(s) for s in states])
        occ = np.array(states, dtype=float).reshape(self.dim, K)
        self.momenta = occ @ grid.onshell()
        self._sqrtw = np.sqrt(grid.weights)
        # c[i] annihilates one particle in mode i
        c = np.zeros((K, self.dim, self.dim))
        for k, s in enumerate(states):
            for i in range(K):
                if s[i]:
                    t = list(s)
                    t[i] -= 1
                    c[i, self.index[tuple(t)], k] = math.sqrt(s[i])
        self.c = c
        self._top = self.number == mMax

    # -- vectors ------------------------------------------------------------
    def vacuum(self) -> "FockVector":
        amps = np.zeros(self.dim, dtype=complex)
        amps[0] = 1.0
        return FockVector(self, amps)

    def vector(self, amps) -> "FockVector":
        return FockVector(self, np.asarray(amps, dtype=complex))

    def headroom_mask(self, room: int = 1) -> np.ndarray:
        return self.number <= self.mMax - room

    # -- operators ----------------------------------------------------------
    def annihilation_op(self, f) -> np.ndarray:
        return np.tensordot(self._sqrtw * np.conj(np.asarray(f, dtype=complex)), self.c, axes=1)

    def creation_op(self, f) -> np.ndarray:
        return np.tensordot(self._sqrtw * np.asarray(f, dtype=complex), self.c, axes=1).T

    def field_op(self, fPlus, fMinus) -> np.ndarray:
        return self.annihilation_op(np.conj(fMinus)) + self.creation_op(fPlus)

    def number_op(self) -> np.ndarray:
        return np.diag(self.number.astype(float))

    def phase(self, theta: ThetaNumeric) -> np.ndarray:
        ordering, sign = calibrate_phase()
        return _phase_matrix(self.momenta, theta, ordering, sign)

    def deform(self, op: np.ndarray, theta: ThetaNumeric) -> np.ndarray:
        """Warped convolution with the translations: a phase on each matrix element."""
        return self.phase(theta) * op

    def deformed_field_op(self, theta: ThetaNumeric, fPlus, fMinus) -> np.ndarray:
        return self.deform(self.field_op(fPlus, fMinus), theta)

    def mode_unitary(self, V) -> np.ndarray:
        """W^{1/2} V W^{-1/2}: the grid operator V in orthonormal mode coordinates."""
        s = self._sqrtw
        return (s[:, None] * np.asarray(V, dtype=complex)) / s[None, :]

    def second_quantize_op(self, V, tol: float = 1e-12) -> np.ndarray:
        u = self.mode_unitary(V)
        if np.max(np.abs(u.conj().T @ u - np.eye(len(u)))) > tol:
            raise ValueError("V is not unitary for the grid inner product")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for N, sl in enumerate(self.sectors):
            rows = np.array(self.mode_rows[sl], dtype=np.int64).reshape(sl.stop - sl.start, N)
            norms = np.array([math.sqrt(math.prod(math.factorial(k) for k in s)) for s in self.states[sl]])
            out[sl, sl] = _kernels.second_quantize_sector(u, rows, norms)
        return out

    def apply(self, op: np.ndarray, psi: "FockVector", raises: bool = False) -> "FockVector":
        flag = psi.truncated
        if raises and np.any(psi.amplitudes[self._top] != 0):
            flag = True
        return FockVector(self, op @ psi.amplitudes, flag)


@dataclass
class FockVector:
    space: FockSpace
    amplitudes: np.ndarray
    truncated: bool = False

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def sector(self, N: int) -> np.ndarray:
        return self.amplitudes[self.space.sectors[N]]

    def __add__(self, other):
        return FockVector(self.space, self.amplitudes + other.amplitudes, self.truncated or other.truncated)

    def __sub__(self, other):
        return FockVector(self.space, self.amplitudes - other.amplitudes, self.truncated or other.truncated)

    def __rmul__(self, c):
        return FockVector(self.space, c * self.amplitudes, self.truncated)


def _phase_matrix(P: np.ndarray, theta: ThetaNumeric, ordering: str, sign: int) -> np.ndarray:
    form = theta.form
    # P_a . th P_b for all pairs of basis states
    cross = P @ form @ P.T
    if ordering == "right":
        return np.exp(1j * sign * cross)
    if ordering == "left":
        return np.exp(-1j * sign * cross.T)
    raise ValueError(ordering)


# ---------------------------------------------------------------------------
# module-level operations

def annihilate(f, psi: FockVector) -> FockVector:
    sp = psi.space
    return sp.apply(sp.annihilation_op(f), psi)


def create(f, psi: FockVector) -> FockVector:
    sp = psi.space
    return sp.apply(sp.creation_op(f), psi, raises=bool(np.any(np.asarray(f) != 0)))


def field(fPlus, fMinus, psi: FockVector) -> FockVector:
    sp = psi.space
    return sp.apply(sp.field_op(fPlus, fMinus), psi, raises=bool(np.any(np.asarray(fPlus) != 0)))


def deformed_field_P(theta: ThetaNumeric, fPlus, fMinus, psi: FockVector) -> FockVector:
    sp = psi.space
    return sp.apply(sp.deformed_field_op(theta, fPlus, fMinus), psi, raises=bool(np.any(np.asarray(fPlus) != 0)))


def second_quantize(V, psi: FockVector) -> FockVector:
    sp = psi.space
    return sp.apply(sp.second_quantize_op(V), psi)


def smear(samples: Sequence[Sequence[float]], values: Sequence[complex], weights: Sequence[float],
          grid: MomentumGrid) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature version of f^{+-}(p) = int d^dx f(x) e^{+-i p.x} on the mass shell."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    vals = np.asarray(values, dtype=complex) * np.asarray(weights, dtype=float)
    p = grid.onshell()
    eta = np.array([1.0] + [-1.0] * grid.n)
    px = (p * eta) @ x.T  # (K, samples)
    return np.exp(1j * px) @ vals, np.exp(-1j * px) @ vals


# ---------------------------------------------------------------------------
# oracles and calibration

def s_m_state(space: FockSpace, theta: ThetaNumeric, fs: Sequence[np.ndarray]) -> np.ndarray:
    """sqrt(m!) P_m(S_m f_1 x ... x f_m) in the occupation basis, built from the full tensor."""
    m = len(fs)
    K = space.grid.size
    p = space.grid.onshell()
    modes = [space._sqrtw * np.asarray(f, dtype=complex) for f in fs]
    tensor = modes[0]
    for g in modes[1:]:
        tensor = np.multiply.outer(tensor, g)
    tensor = np.asarray(tensor).reshape((K,) * m)
    # S_m(p_1..p_m) = prod_{l<k} exp(i p_l th p_k)
    pair = theta.pair(p[:, None, :], p[None, :, :])
    smat = np.ones((K,) * m, dtype=complex)
    for l in range(m):
        for k in range(l + 1, m):
            shape = [1] * m
            shape[l] = K
            shape[k] = K
            smat = smat * np.exp(1j * pair).reshape(shape)
    t = smat * tensor
    sym = sum(np.transpose(t, perm) for perm in permutations(range(m))) / math.factorial(m)
    sym = sym * math.sqrt(math.factorial(m))
    out = np.zeros(space.dim, dtype=complex)
    sl = space.sectors[m]
    for k, rows in enumerate(space.mode_rows[sl]):
        occ = space.states[sl.start + k]
        mult = math.factorial(m) / math.prod(math.factorial(c) for c in occ)
        out[sl.start + k] = math.sqrt(mult) * sym[rows]
    return out


def _creators_on_vacuum(space: FockSpace, theta: ThetaNumeric, fs, ordering: str, sign: int) -> np.ndarray:
    ph = _phase_matrix(space.momenta, theta, ordering, sign)
    psi = space.vacuum().amplitudes
    for f in reversed(fs):
        psi = (ph * space.creation_op(f)) @ psi
    return psi


@lru_cache(maxsize=None)
def calibrate_phase() -> Tuple[str, int]:
    """Fix (phase ordering, sign) against the two-particle S_2 identity on a 2-mode grid."""
    grid = MomentumGrid.from_points(1, [[0.75], [-1.25]])
    space = FockSpace(grid, 2)
    theta = ThetaNumeric.from_form([[0.0, 0.9], [-0.9, 0.0]])
    fs = [np.array([0.3 + 0.8j, -0.5 + 0.2j]), np.array([1.1 - 0.4j, 0.6 + 0.7j])]
    target = s_m_state(space, theta, fs)
    found = []
    for ordering in ("right", "left"):
        for sign in (1, -1):
            got = _creators_on_vacuum(space, theta, fs, ordering, sign)
            if np.max(np.abs(got - target)) < 1e-12:
                found.append((ordering, sign))
    signs = {s for _, s in found}
    if len(signs) != 1:
        raise RuntimeError(f"phase calibration ambiguous or empty: {found}")
    return found[0]


# ---------------------------------------------------------------------------
# random data

def random_grid_function(grid: MomentumGrid, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=grid.size) + 1j * rng.normal(size=grid.size)


def random_state(space: FockSpace, rng: np.random.Generator, room: int = 1) -> FockVector:
    mask = space.headroom_mask(room)
    amps = np.zeros(space.dim, dtype=complex)
    k = int(mask.sum())
    amps[mask] = rng.normal(size=k) + 1j * rng.normal(size=k)
    amps /= np.linalg.norm(amps)
    return FockVector(space, amps)


def householder(grid: MomentumGrid, psi) -> np.ndarray:
    """V = 1 - 2 psi psi^H W, psi normalised in the grid inner product."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / grid.norm(psi)
    return np.eye(grid.size) - 2 * np.outer(psi, np.conj(psi) * grid.weights)


def random_involution(grid: MomentumGrid, rng: np.random.Generator) -> np.ndarray:
    """Random self-adjoint unitary for the grid inner product (V^2 = 1)."""
    K = grid.size
    if rng.random() < 0.5:
        return householder(grid, random_grid_function(grid, rng))
    z = rng.normal(size=(K, K)) + 1j * rng.normal(size=(K, K))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    signs = rng.choice([-1.0, 1.0], size=K)
    u = (q * signs) @ q.conj().T
    s = np.sqrt(grid.weights)
    return (u * s[None, :]) / s[:, None]


# ---------------------------------------------------------------------------
# checks

def _bar(fPlus, fMinus):
    return np.conj(fMinus), np.conj(fPlus)


def conjugation_identity_check(space: FockSpace, V, theta: ThetaNumeric, fPlus, fMinus, psi: FockVector,
                               tol: float = 1e-10) -> dict:
    """||G (G phi G)_th G psi|| = ||(phi(V f))_th G psi|| with G = Gamma(V), V^2 = 1."""
    grid = space.grid
    V = np.asarray(V, dtype=complex)
    if np.max(np.abs(V @ V - np.eye(grid.size))) > 1e-12:
        raise ValueError("V must be an involution")
    G = space.second_quantize_op(V)
    phi = space.field_op(fPlus, fMinus)
    lhs = np.linalg.norm(G @ (space.deform(G @ phi @ G, theta) @ (G @ psi.amplitudes)))
    phi_v = space.annihilation_op(V @ np.conj(fMinus)) + space.creation_op(V @ fPlus)
    rhs = np.linalg.norm(space.deform(phi_v, theta) @ (G @ psi.amplitudes))
    inv = max(abs(grid.norm(V @ fPlus) - grid.norm(fPlus)), abs(grid.norm(V @ fMinus) - grid.norm(fMinus)))
    res = abs(lhs - rhs) / max(lhs, rhs, 1e-300)
    return {"lhs": lhs, "rhs": rhs, "residual": res, "norm_invariance": inv,
            "pass": res <= tol and inv <= 1e-12 * max(1.0, grid.norm(fPlus), grid.norm(fMinus))}


def bound_check(space: FockSpace, samples: int, seed: int, slack: float = 1e-10) -> dict:
    """||phi_th(f) psi|| <= (||f+|| + ||f-||) ||(N+1)^{1/2} psi|| on random data."""
    rng = np.random.default_rng(seed)
    grid = space.grid
    sqrtN1 = np.sqrt(space.number + 1.0)
    violations = []
    worst = -np.inf
    for s in range(samples):
        theta = random_theta(grid.n, rng)
        fp = random_grid_function(grid, rng) * rng.choice([0.0, 1.0], p=[0.05, 0.95])
        fm = random_grid_function(grid, rng) * rng.choice([0.0, 1.0], p=[0.05, 0.95])
        psi = random_state(space, rng)
        lhs = np.linalg.norm(space.deformed_field_op(theta, fp, fm) @ psi.amplitudes)
        rhs = (grid.norm(fp) + grid.norm(fm)) * np.linalg.norm(sqrtN1 * psi.amplitudes)
        worst = max(worst, lhs - rhs)
        if lhs > rhs + slack:
            violations.append({"sample": s, "lhs": lhs, "rhs": rhs})
    return {"samples": samples, "violations": len(violations), "max_excess": worst,
            "counterexamples": violations[:5], "pass": not violations}


def hermiticity_check(space: FockSpace, samples: int, seed: int, tol: float = 1e-10,
                      conjugate_with: Optional[str] = None) -> dict:
    """<Phi, phi_th(f) Psi> = <phi_th(fbar) Phi, Psi>; optionally for the V-conjugated field."""
    rng = np.random.default_rng(seed)
    grid = space.grid
    worst = 0.0
    for _ in range(samples):
        theta = random_theta(grid.n, rng)
        fp, fm = random_grid_function(grid, rng), random_grid_function(grid, rng)
        a, b = random_state(space, rng), random_state(space, rng)
        if conjugate_with == "involution":
            G = space.second_quantize_op(random_involution(grid, rng))
            op = lambda p, m: G @ space.deform(G @ space.field_op(p, m) @ G, theta) @ G
        else:
            op = lambda p, m: space.deformed_field_op(theta, p, m)
        lhs = np.vdot(a.amplitudes, op(fp, fm) @ b.amplitudes)
        rhs = np.vdot(op(*_bar(fp, fm)) @ a.amplitudes, b.amplitudes)
        scale = max(abs(lhs), grid.norm(fp) + grid.norm(fm))
        worst = max(worst, abs(lhs - rhs) / scale)
    return {"samples": samples, "max_residual": worst, "pass": worst <= tol}


@dataclass
class FockConfig:
    n: int = 1
    points: object = "auto"
    mMax: int = 3
    samples: int = 1000
    involutions: int = 100
    seed: int = 0
    tolerances: Dict[str, float] = _dc_field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @classmethod
    def from_json(cls, data: dict) -> "FockConfig":
        known = {"n", "points", "mMax", "samples", "involutions", "seed", "tolerances"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**{k: v for k, v in data.items() if k != "tolerances"})
        tol = dict(DEFAULT_TOLERANCES)
        for k, v in data.get("tolerances", {}).items():
            if k not in tol:
                raise ValueError(f"unknown tolerance {k!r}")
            tol[k] = float(v)
        cfg.tolerances = tol
        if cfg.mMax < 3:
            raise ValueError("the batteries need mMax >= 3")
        if cfg.samples < 1 or cfg.involutions < 1:
            raise ValueError("samples and involutions must be >= 1")
        return cfg

    @classmethod
    def load(cls, path: str) -> "FockConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def grid(self) -> MomentumGrid:
        if self.points == "auto":
            return MomentumGrid.auto(self.n)
        return MomentumGrid.from_points(self.n, self.points)


def run_batteries(cfg: Optional[FockConfig] = None) -> dict:
    """All Fock-space batteries; each reports its max residual against its tolerance."""
    cfg = cfg or FockConfig()
    tol = cfg.tolerances
    grid = cfg.grid()
    space = FockSpace(grid, cfg.mMax)
    rng = np.random.default_rng(cfg.seed)
    out: Dict[str, dict] = {}

    # smeared commutation relations on states with room for one more particle
    worst = 0.0
    for _ in range(50):
        f, g = random_grid_function(grid, rng), random_grid_function(grid, rng)
        psi = random_state(space, rng, room=2).amplitudes
        af, ag = space.annihilation_op(f), space.annihilation_op(g)
        cf, cg = space.creation_op(f), space.creation_op(g)
        scale = grid.norm(f) * grid.norm(g)
        r1 = np.linalg.norm((af @ cg - cg @ af) @ psi - grid.inner(f, g) * psi)
        r2 = np.linalg.norm((af @ ag - ag @ af) @ psi)
        r3 = np.linalg.norm((cf @ cg - cg @ cf) @ psi)
        worst = max(worst, max(r1, r2, r3) / scale)
    out["commutation"] = {"max_residual": worst, "tolerance": tol["commutation"]}

    # deformed and free field agree on the vacuum
    worst = 0.0
    omega = space.vacuum().amplitudes
    for _ in range(50):
        theta = random_theta(grid.n, rng)
        fp, fm = random_grid_function(grid, rng), random_grid_function(grid, rng)
        d = space.deformed_field_op(theta, fp, fm) @ omega - space.field_op(fp, fm) @ omega
        worst = max(worst, np.linalg.norm(d) / grid.norm(fp))
    out["vacuum"] = {"max_residual": worst, "tolerance": tol["vacuum"]}

    h1 = hermiticity_check(space, 50, int(rng.integers(2 ** 31)), tol["hermiticity"])
    h2 = hermiticity_check(space, 20, int(rng.integers(2 ** 31)), tol["hermiticity"], "involution")
    out["hermiticity"] = {"max_residual": max(h1["max_residual"], h2["max_residual"]),
                          "tolerance": tol["hermiticity"]}

    b = bound_check(space, cfg.samples, int(rng.integers(2 ** 31)), tol["bound_slack"])
    out["bound"] = {"violations": b["violations"], "samples": b["samples"],
                    "max_excess": b["max_excess"], "pass": b["pass"]}

    worst = 0.0
    for m in (2, 3):
        for _ in range(20):
            theta = random_theta(grid.n, rng)
            fs = [random_grid_function(grid, rng) for _ in range(m)]
            got = space.vacuum().amplitudes
            for f in reversed(fs):
                got = space.deform(space.creation_op(f), theta) @ got
            ref = s_m_state(space, theta, fs)
            worst = max(worst, np.linalg.norm(got - ref) / np.linalg.norm(ref))
    out["s_m"] = {"max_residual": worst, "tolerance": tol["s_m"], "m": [2, 3]}

    worst = 0.0
    norm_worst = 0.0
    for _ in range(cfg.involutions):
        V = random_involution(grid, rng)
        theta = random_theta(grid.n, rng)
        fp, fm = random_grid_function(grid, rng), random_grid_function(grid, rng)
        psi = random_state(space, rng)
        r = conjugation_identity_check(space, V, theta, fp, fm, psi, tol["conjugation"])
        worst = max(worst, r["residual"])
        G = space.second_quantize_op(V)
        norm_worst = max(norm_worst, abs(np.linalg.norm(G @ psi.amplitudes) - 1.0), r["norm_invariance"])
    out["conjugation"] = {"max_residual": worst, "tolerance": tol["conjugation"], "involutions": cfg.involutions}
    out["unitarity"] = {"max_residual": norm_worst, "tolerance": tol["unitarity"]}

    for name, rep in out.items():
        if "pass" not in rep:
            rep["pass"] = bool(rep["max_residual"] <= rep["tolerance"])
    return {"config": {"n": cfg.n, "points": cfg.points if cfg.points == "auto" else np.asarray(cfg.points).tolist(),
                       "mMax": cfg.mMax, "samples": cfg.samples, "involutions": cfg.involutions,
                       "seed": cfg.seed, "states": space.dim},
            "phase_calibration": list(calibrate_phase()),
            "batteries": out, "pass": all(r["pass"] for r in out.values())}
