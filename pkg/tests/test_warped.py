import random
from fractions import Fraction
from itertools import product
from math import factorial

import pytest
import sympy
from hypothesis import given, settings

from warpfield.conformal import Metric
from warpfield.exactnum import GaussianRational
from warpfield.polyalg import ETA_VAR, LAMBDA_VAR, Poly, parse_poly, theta
from warpfield.warped import (
    TwistSeriesConfig, calibrate_series_sign, deformed_commutator, moyal_reference, nonconstant_reference,
    parity_vanishing_check, scaled_config, special_conformal_config, substitute_theta, theta_upper,
    translation_config, twist_product, unequal_order_check,
)

from strategies import coord_polys, random_poly
from test_polyalg import to_sympy

X = sympy.symbols("x0:4")
ETA = (1, -1, -1, -1)


def _th_sym(a, b):
    if a == b:
        return 0
    if a < b:
        return sympy.Symbol(f"th{a}{b}")
    return -sympy.Symbol(f"th{b}{a}")


def _K(f, s):
    # 2 x_s x^n d_n f - x^2 d_s f, derivatives in the upper coordinates
    x2 = sum(ETA[a] * X[a] ** 2 for a in range(4))
    return sympy.expand(2 * ETA[s] * X[s] * sum(X[n] * sympy.diff(f, X[n]) for n in range(4)) - x2 * sympy.diff(f, X[s]))


def _P(f, s):
    return sympy.diff(f, X[s])


def _series_oracle(a, b, field, k, sign=-1):
    total = 0
    for sig in product(range(4), repeat=k):
        fa = a
        for s in sig:
            fa = field(fa, s)
        if fa == 0:
            continue
        for lam in product(range(4), repeat=k):
            coef = 1
            for s, l in zip(sig, lam):
                coef *= _th_sym(s, l)
            if coef == 0:
                continue
            fb = b
            for l in lam:
                fb = field(fb, l)
            total += coef * fa * fb
    return sympy.expand((sign * sympy.I) ** k / factorial(k) * total)


x = [Poly.x(mu) for mu in range(4)]
th01 = Poly.var(theta(0, 1))


def test_series_sign_frozen():
    assert calibrate_series_sign() == -1


def test_translation_example():
    m = Metric(4)
    a, b = m.x_lower(0), m.x_lower(1)
    res = twist_product(a, b, translation_config())
    assert res.value == a * b + moyal_reference(0, 1).scale(GaussianRational(1, 0) / 2)
    assert res.terminated and res.termination_order == 1
    assert deformed_commutator(a, b, translation_config()).value == moyal_reference(0, 1)


def test_upper_index_example():
    res = deformed_commutator(x[0], x[1], translation_config())
    assert res.value == th01.scale(GaussianRational(0, -2))
    assert twist_product(x[0], x[1], translation_config()).value == x[0] * x[1] - th01.scale(GaussianRational(0, 1))


def test_constant_factor_terminates_at_zero():
    p = parse_poly("x0*x1 + 3*x2")
    res = twist_product(Poly.const(1), p, special_conformal_config())
    assert res.value == p and res.terminated and res.termination_order == 0


@pytest.mark.parametrize("mu, nu", [(0, 0), (2, 2)])
def test_moyal_reference_diagonal(mu, nu):
    assert moyal_reference(mu, nu).is_zero()


def test_moyal_reference_index_forms():
    # theta_01 = eta_00 eta_11 th^01 = -th01
    assert moyal_reference(0, 1) == th01.scale(GaussianRational(0, 2))
    assert moyal_reference(0, 1, index="upper") == th01.scale(GaussianRational(0, -2))
    assert moyal_reference(2, 3) == Poly.var(theta(2, 3)).scale(GaussianRational(0, -2))
    with pytest.raises(ValueError):
        moyal_reference(0, 4)


@pytest.mark.parametrize("mu, nu", [(0, 1), (1, 3), (3, 2)])
def test_translation_commutator_all_lower(mu, nu):
    m = Metric(4)
    res = deformed_commutator(m.x_lower(mu), m.x_lower(nu), translation_config())
    assert res.value == moyal_reference(mu, nu)


@pytest.mark.parametrize("field, cfg_fn", [(_P, translation_config), (_K, special_conformal_config)])
@pytest.mark.parametrize("seed", range(3))
def test_order_components_against_sympy(field, cfg_fn, seed):
    rng = random.Random(seed)
    a = random_poly(rng, terms=2, max_deg=2, coords_only=True)
    b = random_poly(rng, terms=2, max_deg=2, coords_only=True)
    res = twist_product(a, b, cfg_fn(maxOrder=2))
    sa, sb = to_sympy(a), to_sympy(b)
    for k in range(3):
        want = _series_oracle(sa, sb, field, k)
        assert sympy.expand(to_sympy(res.orderComponents[k]) - want) == 0


def test_k_order_one_matches_closed_form():
    m = Metric(4)
    cfg = special_conformal_config(maxOrder=2)
    for mu, nu in [(0, 1), (1, 2), (3, 0)]:
        res = deformed_commutator(m.x_lower(mu), m.x_lower(nu), cfg)
        assert res.orderComponents[0].is_zero()
        assert res.orderComponents[1] == nonconstant_reference(mu, nu)
        assert res.orderComponents[2].is_zero()


@settings(max_examples=25)
@given(coord_polys(max_terms=3, max_exp=2), coord_polys(max_terms=3, max_exp=2))
def test_commutator_antisymmetric(a, b):
    cfg = translation_config(maxOrder=3)
    assert (deformed_commutator(a, b, cfg).value + deformed_commutator(b, a, cfg).value).is_zero()


@settings(max_examples=25)
@given(coord_polys(max_terms=3, max_exp=2), coord_polys(max_terms=3, max_exp=2))
def test_zero_theta_gives_pointwise_product(a, b):
    zero = [[0] * 4 for _ in range(4)]
    assert twist_product(a, b, special_conformal_config(theta=zero, maxOrder=2)).value == a * b


@settings(max_examples=25)
@given(coord_polys(max_terms=3, max_exp=3), coord_polys(max_terms=3, max_exp=3))
def test_translation_series_terminates(a, b):
    res = twist_product(a, b, translation_config(maxOrder=7))
    degs = [max((sum(e for _, e in m) for m in p.terms), default=0) for p in (a, b)]
    assert res.terminated
    if not (a.is_zero() or b.is_zero()):
        assert res.termination_order == min(degs)


def test_substitution_commutes_with_computation():
    rng = random.Random(4)
    mat = [[Fraction(0)] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i + 1, 4):
            mat[i][j] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            mat[j][i] = -mat[i][j]
    for _ in range(3):
        a = random_poly(rng, terms=2, max_deg=2, coords_only=True)
        b = random_poly(rng, terms=2, max_deg=2, coords_only=True)
        sym = twist_product(a, b, special_conformal_config(maxOrder=2)).value
        num = twist_product(a, b, special_conformal_config(theta=mat, maxOrder=2)).value
        assert substitute_theta(sym, mat) == num


def test_theta_config_validation():
    with pytest.raises(ValueError):
        translation_config(theta=[[0, 1, 0, 0], [1, 0, 0, 0], [0] * 4, [0] * 4])
    with pytest.raises(ValueError):
        translation_config(theta="numeric")
    with pytest.raises(ValueError):
        twist_product(th01, x[0], translation_config())
    with pytest.raises(ValueError):
        TwistSeriesConfig([], maxOrder=1)


def _scaled_theta(lam, eta):
    scale = [lam, lam, eta, eta]
    return lambda a, b: theta_upper(a, b) * scale[a] * scale[b]


def test_scaled_generators_match_scaled_references():
    m = Metric(4)
    lam, eta = Poly.var(LAMBDA_VAR), Poly.var(ETA_VAR)
    fn = _scaled_theta(lam, eta)
    minus = deformed_commutator(m.x_lower(1), m.x_lower(2), scaled_config("minus", maxOrder=2))
    assert minus.orderComponents[0].is_zero() and minus.orderComponents[2].is_zero()
    assert minus.orderComponents[1] == nonconstant_reference(1, 2, theta_fn=fn)
    plus = deformed_commutator(m.x_lower(0), m.x_lower(3), scaled_config("plus", maxOrder=2))
    want = fn(0, 3).scale(GaussianRational(0, -2) * m.sign(0) * m.sign(3))
    assert plus.value == want and plus.terminated


def test_unit_scaling_reduces_to_unscaled():
    a, b = Poly.x(0) * Poly.x(1), Poly.x(2)
    for kind, base in (("minus", special_conformal_config), ("plus", translation_config)):
        one = twist_product(a, b, scaled_config(kind, 1, 1, maxOrder=2)).value
        assert one == twist_product(a, b, base(maxOrder=2)).value


@pytest.mark.parametrize("seed", range(3))
def test_parity_general_arguments(seed):
    rng = random.Random(10 + seed)
    a = random_poly(rng, terms=2, max_deg=2, coords_only=True)
    b = random_poly(rng, terms=2, max_deg=2, coords_only=True)
    assert parity_vanishing_check(a, b, special_conformal_config(maxOrder=2), 2)["pass"]


def test_unequal_orders_vanish():
    m = Metric(4)
    rep = unequal_order_check(m.x_lower(0), m.x_lower(1), translation_config(), max_order=2)
    assert rep["pass"]
    assert all(r["zero"] for r in rep["pairs"] if r["k"] != r["l"])
    rep = unequal_order_check(Poly.x(0) * Poly.x(2), Poly.x(1), special_conformal_config(), max_order=1)
    assert rep["pass"]


def test_theta_upper_antisymmetric():
    for a in range(4):
        for b in range(4):
            assert (theta_upper(a, b) + theta_upper(b, a)).is_zero()
