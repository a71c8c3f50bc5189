import random

import sympy
from hypothesis import given, strategies as st

from warpfield.conformal import Metric
from warpfield.diffop import DiffOp, apply, commutator, compose
from warpfield.exactnum import I
from warpfield.polyalg import Poly

from strategies import coord_polys, random_poly
from test_polyalg import to_sympy

D = 4
x = [Poly.x(k) for k in range(D)]


def d(mu):
    return DiffOp.partial(D, mu)


def random_op(rng, order=3, terms=3, deg=2):
    out = DiffOp.zero(D)
    for _ in range(rng.randint(1, terms)):
        alpha = [0] * D
        for _ in range(rng.randint(0, order)):
            alpha[rng.randrange(D)] += 1
        out = out + DiffOp(D, {tuple(alpha): random_poly(rng, terms=2, max_deg=deg, coords_only=True)})
    return out


@st.composite
def ops(draw, order=2):
    seed = draw(st.integers(0, 2 ** 32))
    return random_op(random.Random(seed), order=order)


def test_apply_examples():
    assert apply(DiffOp.identity(D), x[0] * x[1]) == x[0] * x[1]
    assert apply(d(0), x[1]).is_zero()


def test_apply_special_conformal_field():
    # 2 x_s x^l d_l - x^2 d_s on x_mu gives 2 x_s x_mu - x^2 eta_{s mu}
    m = Metric(D)
    for s in range(D):
        op = DiffOp.zero(D)
        for l in range(D):
            op = op + d(l).scale(m.x_lower(s) * x[l]).scale(2)
        op = op - d(s).scale(m.x_squared())
        for mu in range(D):
            expected = (m.x_lower(s) * m.x_lower(mu)).scale(2) - m.x_squared().scale(m[s, mu])
            assert apply(op, m.x_lower(mu)) == expected


def test_compose_examples():
    x0_op = DiffOp.multiplication(D, x[0])
    assert compose(d(0), x0_op) == DiffOp(D, {(1, 0, 0, 0): x[0]}) + DiffOp.identity(D)
    assert compose(d(0), d(1)).terms == {(1, 1, 0, 0): Poly.const(1)}
    rng = random.Random(3)
    A = random_op(rng)
    assert compose(A, DiffOp.identity(D)) == A
    assert compose(DiffOp.identity(D), A) == A


def test_commutator_examples():
    rng = random.Random(5)
    A = random_op(rng)
    assert commutator(A, A).is_zero()
    assert commutator(d(0), DiffOp.multiplication(D, x[0])) == DiffOp.identity(D)


def test_canonical_commutation_in_all_directions():
    for a in range(D):
        for b in range(D):
            expected = DiffOp.identity(D) if a == b else DiffOp.zero(D)
            assert commutator(d(a), DiffOp.multiplication(D, x[b])) == expected


def test_compose_matches_sequential_apply():
    rng = random.Random(11)
    for _ in range(1000):
        A = random_op(rng, order=3, deg=2)
        B = random_op(rng, order=3, deg=2)
        p = random_poly(rng, terms=3, max_deg=4, coords_only=True)
        assert apply(compose(A, B), p) == apply(A, apply(B, p))


def sympy_apply(op: DiffOp, p: Poly):
    syms = [sympy.Symbol(f"x{k}") for k in range(D)]
    expr = to_sympy(p)
    out = 0
    for alpha, c in op.terms.items():
        term = expr
        for k, n in enumerate(alpha):
            if n:
                term = sympy.diff(term, syms[k], n)
        out += to_sympy(c) * term
    return sympy.expand(out)


@given(ops(), coord_polys(max_terms=3))
def test_apply_matches_sympy(A, p):
    assert to_sympy(apply(A, p)) == sympy_apply(A, p)


@given(ops(), ops(), ops())
def test_associativity(A, B, C):
    assert compose(compose(A, B), C) == compose(A, compose(B, C))


@given(ops(order=1), ops(order=2), ops(order=1))
def test_jacobi(A, B, C):
    total = commutator(A, commutator(B, C)) + commutator(B, commutator(C, A)) + commutator(C, commutator(A, B))
    assert total.is_zero()


def test_scale_and_order():
    op = d(0).scale(I) + DiffOp(D, {(2, 1, 0, 0): x[3]})
    assert op.order() == 3
    assert (op - op).order() == -1
    assert str(d(0) * d(0)) == "d0^2"


def test_json_shape():
    op = DiffOp(D, {(0, 1, 0, 0): x[2]})
    (entry,) = op.to_json()
    assert entry["derivative"] == [0, 1, 0, 0]
    assert entry["text"] == "x2"
