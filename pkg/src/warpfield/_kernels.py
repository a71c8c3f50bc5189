"""Hot loops: twist-series contraction and bosonic second quantization.

Each kernel exists twice, a numba ``@njit`` loop and a pure-numpy version.
Set ``WARPFIELD_DISABLE_NUMBA=1`` (or call :func:`set_backend`) to use numpy.
Both produce identical integers / identical floats up to summation order.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

__all__ = ["backend", "set_backend", "contract_pairs", "second_quantize_sector", "HAVE_NUMBA"]

_backend = "numpy" if (os.environ.get("WARPFIELD_DISABLE_NUMBA", "") not in ("", "0") or not HAVE_NUMBA) else "numba"


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch kernels; returns the previous backend name."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    prev, _backend = _backend, name
    return prev


# ---------------------------------------------------------------------------
# twist contraction
#
# out[t[p], xprod[i, j]] += c[p] * A[sig[p], i] * B[lam[p], j]

def _contract_numpy(sig, lam, coeff, tidx, A, B, xprod, n_t, n_out):
    out = np.zeros((n_t, n_out), dtype=np.int64)
    flat = xprod.ravel()
    order = np.argsort(tidx, kind="stable")
    bounds = np.searchsorted(tidx[order], np.arange(n_t + 1))
    for t in range(n_t):
        sel = order[bounds[t]:bounds[t + 1]]
        if sel.size == 0:
            continue
        m = A[sig[sel]].T @ (coeff[sel, None] * B[lam[sel]])
        np.add.at(out[t], flat, m.ravel())
    return out


def _contract_py(sig, lam, coeff, tidx, A, B, xprod, n_t, n_out):
    # exact python-int path for when int64 could overflow
    out = [[0] * n_out for _ in range(n_t)]
    A = [[int(v) for v in row] for row in A]
    B = [[int(v) for v in row] for row in B]
    nz_b = [[(j, v) for j, v in enumerate(row) if v] for row in B]
    for s, l, c, t in zip(sig.tolist(), lam.tolist(), coeff.tolist(), tidx.tolist()):
        row = out[t]
        for i, a in enumerate(A[s]):
            if not a:
                continue
            ca = c * a
            xp = xprod[i]
            for j, b in nz_b[l]:
                row[xp[j]] += ca * b
    return np.array(out, dtype=object).reshape(n_t, n_out)


if HAVE_NUMBA:

    @njit(cache=True)
    def _contract_numba(sig, lam, coeff, tidx, A, B, xprod, n_t, n_out):
        out = np.zeros((n_t, n_out), dtype=np.int64)
        na = A.shape[1]
        nb = B.shape[1]
        for p in range(sig.shape[0]):
            c = coeff[p]
            t = tidx[p]
            ra = sig[p]
            rb = lam[p]
            for i in range(na):
                a = A[ra, i]
                if a == 0:
                    continue
                ca = c * a
                for j in range(nb):
                    b = B[rb, j]
                    if b != 0:
                        out[t, xprod[i, j]] += ca * b
        return out


_INT64_SAFE = 2 ** 62


def contract_pairs(sig, lam, coeff, tidx, A, B, xprod, n_t, n_out, *, force=None):
    """Sum contracted chain products into a (theta-monomial x output-monomial) table.

    ``A`` and ``B`` are integer matrices (rows = generator chains, columns =
    basis monomials).  Falls back to exact Python ints when the worst-case sum
    could leave int64.
    """
    sig = np.asarray(sig, dtype=np.int64)
    lam = np.asarray(lam, dtype=np.int64)
    tidx = np.asarray(tidx, dtype=np.int64)
    xprod = np.asarray(xprod, dtype=np.int64)
    big = any(isinstance(v, int) and abs(v) >= _INT64_SAFE for v in _iter_obj(coeff, A, B))
    if not big:
        coeff = np.asarray(coeff, dtype=np.int64)
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        na = int(np.abs(A).sum(axis=1).max(initial=0))
        nb = int(np.abs(B).sum(axis=1).max(initial=0))
        big = int(np.abs(coeff).astype(object).sum()) * na * nb >= _INT64_SAFE
    if big:
        return _contract_py(sig, lam, np.asarray(coeff, dtype=object), tidx, np.asarray(A, dtype=object),
                            np.asarray(B, dtype=object), xprod.tolist(), n_t, n_out)
    which = force or _backend
    if which == "numba":
        return _contract_numba(sig, lam, coeff, tidx, A, B, xprod, n_t, n_out)
    return _contract_numpy(sig, lam, coeff, tidx, A, B, xprod, n_t, n_out)


def _iter_obj(*arrays):
    for a in arrays:
        arr = np.asarray(a)
        if arr.dtype == object:
            yield from arr.ravel().tolist()


# ---------------------------------------------------------------------------
# second quantization on an N-particle sector
#
# G[a, b] = perm(u[rows_a, rows_b]) / sqrt(prod m_a! prod m_b!)
# rows_a lists the occupied modes of state a with multiplicity.

def _ryser_subsets(n):
    subs = np.array([[(s >> k) & 1 for k in range(n)] for s in range(1, 1 << n)], dtype=np.float64)
    signs = np.array([(-1) ** (n - int(r.sum())) for r in subs], dtype=np.float64)
    return subs, signs


def _sector_numpy(u, rows, norms):
    s, n = rows.shape
    if n == 0:
        return np.ones((s, s), dtype=np.complex128)
    sub = u[rows[:, None, :, None], rows[None, :, None, :]]  # (s, s, n, n)
    subs, signs = _ryser_subsets(n)
    # row sums restricted to column subsets: (s, s, n, 2^n-1)
    rs = np.einsum("abij,kj->abik", sub, subs)
    perm = np.einsum("k,abk->ab", signs, np.prod(rs, axis=2))
    return perm / np.outer(norms, norms)


if HAVE_NUMBA:

    @njit(cache=True)
    def _sector_numba(u, rows, norms):
        s, n = rows.shape
        out = np.zeros((s, s), dtype=np.complex128)
        sub = np.zeros((n, n), dtype=np.complex128)
        for a in range(s):
            for b in range(s):
                for i in range(n):
                    for j in range(n):
                        sub[i, j] = u[rows[a, i], rows[b, j]]
                total = 0j
                for mask in range(1, 1 << n):
                    prod = 1.0 + 0j
                    bits = 0
                    for j in range(n):
                        if (mask >> j) & 1:
                            bits += 1
                    for i in range(n):
                        acc = 0j
                        for j in range(n):
                            if (mask >> j) & 1:
                                acc += sub[i, j]
                        prod *= acc
                    if (n - bits) % 2:
                        total -= prod
                    else:
                        total += prod
                if n == 0:
                    total = 1.0 + 0j
                out[a, b] = total / (norms[a] * norms[b])
        return out


def second_quantize_sector(u, rows, norms, *, force=None):
    """Matrix of the second-quantized one-particle operator ``u`` on one sector."""
    u = np.ascontiguousarray(u, dtype=np.complex128)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    norms = np.ascontiguousarray(norms, dtype=np.float64)
    if (force or _backend) == "numba":
        return _sector_numba(u, rows, norms)
    return _sector_numpy(u, rows, norms)
