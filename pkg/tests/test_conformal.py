from fractions import Fraction
from itertools import product

import pytest
import sympy

from warpfield.conformal import (
    ConsistencyError, GeneratorSet, Metric, build_so2d, build_vector_fields, calibrate_signs,
    flow_consistency_check, flow_series, scaled_generators, verify_conformal_algebra, verify_so2d,
)
from warpfield.diffop import DiffOp, apply, commutator
from warpfield.exactnum import I
from warpfield.polyalg import Poly, bparam

from test_polyalg import to_sympy


def test_metric():
    m = Metric(4)
    assert m.signature == (1, -1, -1, -1)
    assert m.x_squared() == Poly.x(0) ** 2 - Poly.x(1) ** 2 - Poly.x(2) ** 2 - Poly.x(3) ** 2


def test_vector_field_examples():
    g = build_vector_fields(4)
    m = g.metric
    assert apply(g.vectorFieldK[0], m.x_lower(0)) == 2 * Poly.x(0) ** 2 - m.x_squared()
    assert apply(g.vectorFieldP[1], m.x_lower(1)) == Poly.const(-1)
    for s in range(4):
        assert apply(g.vectorFieldK[s], Poly.const(7)).is_zero()


def test_vector_fields_are_real():
    g = build_vector_fields(4)
    ops = g.vectorFieldP + g.vectorFieldK + [g.vectorFieldD] + [op for row in g.vectorFieldL for op in row]
    for op in ops:
        assert all(c.im == 0 for p in op.terms.values() for c in p.terms.values())


def test_dimension_guard():
    with pytest.raises(ValueError):
        build_vector_fields(1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_calibrated_algebra(d):
    g = calibrate_signs(d)
    rep = verify_conformal_algebra(g)
    assert rep.passed, [r.relation_id for r in rep.failures][:5]
    for k in range(d):
        for l in range(d):
            assert g.L[k][l] == -g.L[l][k]


def test_calibration_result_frozen():
    # first satisfying assignment in (P, K, D, L) order with +i tried first
    g = calibrate_signs(4)
    assert g.signs == {"P": I, "K": I, "D": I, "L": I}


def test_calibrated_examples():
    g = calibrate_signs(4)
    assert commutator(g.P[0], g.K[0]) == g.D.scale(2 * I)
    assert commutator(g.P[0], g.P[1]).is_zero()
    assert commutator(g.D, g.D).is_zero()


def test_tampered_set_fails():
    g = calibrate_signs(4)
    bad = GeneratorSet(**{**g.__dict__, "P": [g.P[0].scale(2)] + g.P[1:]})
    rep = verify_conformal_algebra(bad)
    failed = {r.relation_id for r in rep.failures}
    assert "PK[0,0]" in failed
    assert "PD[1]" not in failed
    res = next(r for r in rep.results if r.relation_id == "PK[0,0]")
    assert res.residual == g.D.scale(2 * I)


def test_report_json_shape():
    rep = verify_conformal_algebra(calibrate_signs(2))
    row = rep.to_json()[0]
    assert set(row) == {"relation_id", "lhs", "rhs", "residual_canonical_string", "pass"}
    assert row["residual_canonical_string"] == "0"


# independent oracle: Lie brackets of the real vector fields with sympy

def _sympy_fields(d):
    xs = sympy.symbols(f"x0:{d}")
    eta = [1] + [-1] * (d - 1)
    xl = [eta[k] * xs[k] for k in range(d)]
    x2 = sum(xs[k] * xl[k] for k in range(d))
    P = [[int(a == s) for a in range(d)] for s in range(d)]
    K = [[2 * xl[s] * xs[a] - x2 * int(a == s) for a in range(d)] for s in range(d)]
    D = list(xs)
    L = [[[xl[m] * int(a == n) - xl[n] * int(a == m) for a in range(d)] for n in range(d)] for m in range(d)]
    return xs, eta, P, K, D, L


def _bracket(xs, X, Y):
    d = len(xs)
    return [sympy.expand(sum(X[b] * sympy.diff(Y[a], xs[b]) - Y[b] * sympy.diff(X[a], xs[b]) for b in range(d)))
            for a in range(d)]


def _lin(*terms):
    d = len(terms[0][1])
    return [sympy.expand(sum(c * v[a] for c, v in terms)) for a in range(d)]


@pytest.mark.parametrize("d", [2, 4])
def test_real_form_relations_oracle(d):
    # with every prefactor +i, [iX, iY] = -[X, Y]; the hermitian table becomes
    # [X_P, X_K] = 2(eta X_D - X_L), [X_P, X_D] = X_P, [X_K, X_D] = -X_K
    xs, eta, P, K, D, L = _sympy_fields(d)
    zero = [0] * d
    for r, m in product(range(d), repeat=2):
        assert _bracket(xs, P[r], K[m]) == _lin((2 * eta[r] * int(r == m), D), (-2, L[r][m]))
        assert _bracket(xs, P[r], P[m]) == zero
        assert _bracket(xs, K[r], K[m]) == zero
    for r in range(d):
        assert _bracket(xs, P[r], D) == _lin((1, P[r]))
        assert _bracket(xs, K[r], D) == _lin((-1, K[r]))


def _field_of(op: DiffOp, d):
    comps = [0] * d
    for alpha, c in op.terms.items():
        assert sum(alpha) == 1
        comps[alpha.index(1)] = to_sympy(c)
    return [sympy.expand(c) for c in comps]


def test_diffop_fields_match_oracle_fields():
    d = 4
    g = build_vector_fields(d)
    _, _, P, K, D, L = _sympy_fields(d)
    for s in range(d):
        assert _field_of(g.vectorFieldP[s], d) == [sympy.expand(v) for v in P[s]]
        assert _field_of(g.vectorFieldK[s], d) == [sympy.expand(v) for v in K[s]]
    assert _field_of(g.vectorFieldD, d) == list(sympy.symbols("x0:4"))
    for m, n in product(range(d), repeat=2):
        assert _field_of(g.vectorFieldL[m][n], d) == [sympy.expand(v) for v in L[m][n]] or m == n


@pytest.mark.parametrize("d", [2, 4])
def test_so2d(d):
    s = build_so2d(calibrate_signs(d))
    assert s.extendedMetric == (1,) + (-1,) * d + (1,)
    rep = verify_so2d(s)
    assert rep.passed
    assert len(rep.results) == (d + 2) ** 4
    n = d + 2
    for a, b in product(range(n), repeat=2):
        assert s.J[a][b] == -s.J[b][a]
        assert commutator(s.J[a][b], s.J[a][b]).is_zero()


def test_so2d_embedding_frozen():
    s = build_so2d(calibrate_signs(4))
    assert s.embedding["half(P-K)"]["slot"] == 4
    assert s.embedding["half(P+K)"]["slot"] == 5
    assert s.embedding["D"]["sign"] == -1
    g = calibrate_signs(4)
    x0 = Poly.x(0)
    assert apply(s.J[0][4], x0) == (apply(g.P[0], x0) - apply(g.K[0], x0)).scale(Fraction(1, 2))


def test_scaled_unit_reduce_to_plain():
    g = build_vector_fields(4)
    assert scaled_generators("plus", 1, 1) == g.vectorFieldP
    assert scaled_generators("minus", 1, 1) == g.vectorFieldK


def test_scaled_componentwise():
    g = build_vector_fields(4)
    got = scaled_generators("minus", 2, 0)
    assert got == [g.vectorFieldK[0].scale(2), g.vectorFieldK[1].scale(2), DiffOp.zero(4), DiffOp.zero(4)]


@pytest.mark.parametrize("kind, lam", [("plus", 0), ("minus", -1), ("sideways", 1)])
def test_scaled_rejects(kind, lam):
    with pytest.raises(ValueError):
        scaled_generators(kind, lam, 1)


def test_flow_low_order():
    # first order of exp(b.K) x^mu is 2(b.x) x^mu - x^2 b^mu
    series = flow_series(1)
    m = Metric(4)
    b = [Poly.var(bparam(k)) for k in range(4)]
    bx = sum((b[k] * m.x_lower(k) for k in range(4)), Poly())
    for mu in range(4):
        assert series[mu][1] == (bx * Poly.x(mu)).scale(2) - m.x_squared() * b[mu]


def test_flow_consistency_to_order_4():
    rows = flow_consistency_check(4)
    assert all(r["pass"] for r in rows)


def test_consistency_error_is_runtime_error():
    assert issubclass(ConsistencyError, RuntimeError)
