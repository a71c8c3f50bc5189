import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from warpfield.fock import (
    FockConfig, FockSpace, MomentumGrid, ThetaNumeric, annihilate, bound_check, calibrate_phase,
    conjugation_identity_check, create, deformed_field_P, field, hermiticity_check, householder,
    random_grid_function, random_involution, random_state, random_theta, run_batteries, s_m_state,
    second_quantize, smear,
)


@pytest.fixture(scope="module")
def space():
    return FockSpace(MomentumGrid.auto(1), 3)


@pytest.fixture
def rng():
    return np.random.default_rng(123)


def test_default_space_shape(space):
    assert space.grid.size == 8
    assert space.dim == math.comb(8 + 3, 3)
    assert [sl.stop - sl.start for sl in space.sectors] == [1, 8, 36, 120]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_auto_grids(n):
    g = MomentumGrid.auto(n)
    assert g.size == 8 and g.points.shape == (8, n)
    np.testing.assert_allclose(g.onshell()[:, 0], np.linalg.norm(g.points, axis=1))


def test_grid_validation():
    with pytest.raises(ValueError):
        MomentumGrid(1, [[0.0], [1.0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        MomentumGrid(4, np.ones((2, 4)), [1.0, 1.0])
    with pytest.raises(ValueError):
        MomentumGrid(1, [[1.0]], [-1.0])


def test_annihilation_kills_vacuum(space, rng):
    f = random_grid_function(space.grid, rng)
    assert annihilate(f, space.vacuum()).norm() == 0


def test_two_point_function(space, rng):
    g = space.grid
    for _ in range(10):
        f, h = random_grid_function(g, rng), random_grid_function(g, rng)
        om = space.vacuum()
        val = annihilate(f, create(h, om)).inner(om)
        assert abs(np.conj(val) - g.inner(f, h)) < 1e-12 * (1 + abs(g.inner(f, h)))


def test_creation_adjoint_of_annihilation(space, rng):
    f = random_grid_function(space.grid, rng)
    np.testing.assert_allclose(space.creation_op(f), space.annihilation_op(f).conj().T, atol=1e-15)


def test_truncation_flag(space, rng):
    f = random_grid_function(space.grid, rng)
    low = random_state(space, rng, room=1)
    assert not create(f, low).truncated
    top = space.vector(np.eye(space.dim)[space.dim - 1])
    assert create(f, top).truncated
    assert not create(np.zeros(8), top).truncated


def test_zero_theta_is_free_field(space, rng):
    fp, fm = random_grid_function(space.grid, rng), random_grid_function(space.grid, rng)
    psi = random_state(space, rng)
    np.testing.assert_allclose(deformed_field_P(ThetaNumeric.zero(1), fp, fm, psi).amplitudes,
                               field(fp, fm, psi).amplitudes, atol=1e-15)


def test_deformed_field_on_vacuum(space, rng):
    th = random_theta(1, rng)
    fp, fm = random_grid_function(space.grid, rng), random_grid_function(space.grid, rng)
    om = space.vacuum()
    np.testing.assert_allclose(deformed_field_P(th, fp, fm, om).amplitudes, field(fp, fm, om).amplitudes, atol=1e-14)


def test_theta_skewness_enforced():
    with pytest.raises(ValueError):
        ThetaNumeric(np.eye(2))
    th = ThetaNumeric.from_form([[0, 1.5], [-1.5, 0]])
    assert th.pair(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.5


def test_phase_calibration_frozen():
    assert calibrate_phase() == ("right", 1)


@pytest.mark.parametrize("m", [2, 3])
def test_s_m_identity(space, rng, m):
    th = random_theta(1, rng)
    fs = [random_grid_function(space.grid, rng) for _ in range(m)]
    psi = space.vacuum()
    for f in reversed(fs):
        psi = space.apply(space.deform(space.creation_op(f), th), psi)
    want = s_m_state(space, th, fs)
    assert np.max(np.abs(psi.amplitudes - want)) <= 1e-10 * np.max(np.abs(want))


def test_s_m_zero_theta_is_symmetric_product(space, rng):
    fs = [random_grid_function(space.grid, rng) for _ in range(2)]
    a = s_m_state(space, ThetaNumeric.zero(1), fs)
    b = s_m_state(space, ThetaNumeric.zero(1), fs[::-1])
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_second_quantize_identity(space, rng):
    psi = random_state(space, rng, room=0)
    np.testing.assert_allclose(second_quantize(np.eye(8), psi).amplitudes, psi.amplitudes, atol=1e-14)


def test_second_quantize_is_unitary_and_intertwines(space, rng):
    g = space.grid
    V = random_involution(g, rng)
    G = space.second_quantize_op(V)
    np.testing.assert_allclose(G.conj().T @ G, np.eye(space.dim), atol=1e-12)
    f = random_grid_function(g, rng)
    om = space.vacuum().amplitudes
    np.testing.assert_allclose(G @ space.creation_op(f) @ G.conj().T @ om, space.creation_op(V @ f) @ om, atol=1e-12)


def test_second_quantize_rejects_non_unitary(space):
    with pytest.raises(ValueError):
        space.second_quantize_op(2 * np.eye(8))


def test_involutions(space, rng):
    g = space.grid
    for _ in range(10):
        V = random_involution(g, rng)
        np.testing.assert_allclose(V @ V, np.eye(8), atol=1e-12)
        f = random_grid_function(g, rng)
        assert abs(g.norm(V @ f) - g.norm(f)) < 1e-12 * g.norm(f)
    h = householder(g, random_grid_function(g, rng))
    np.testing.assert_allclose(h @ h, np.eye(8), atol=1e-12)


def test_conjugation_identity(space, rng):
    g = space.grid
    for _ in range(5):
        res = conjugation_identity_check(space, random_involution(g, rng), random_theta(1, rng),
                                         random_grid_function(g, rng), random_grid_function(g, rng),
                                         random_state(space, rng))
        assert res["pass"], res
    with pytest.raises(ValueError):
        conjugation_identity_check(space, np.diag([1j] * 8), random_theta(1, rng), np.ones(8), np.ones(8),
                                   space.vacuum())


def test_conjugation_with_identity_is_plain_deformation(space, rng):
    fp, fm = random_grid_function(space.grid, rng), random_grid_function(space.grid, rng)
    res = conjugation_identity_check(space, np.eye(8), random_theta(1, rng), fp, fm, random_state(space, rng))
    assert res["residual"] < 1e-14


def test_bound_and_hermiticity_small(space):
    assert bound_check(space, 50, seed=1)["pass"]
    assert hermiticity_check(space, 10, seed=1)["pass"]
    assert hermiticity_check(space, 3, seed=2, conjugate_with="involution")["pass"]


@settings(max_examples=30)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(0.1, 1)),
                min_size=1, max_size=6))
def test_smear_real_function(samples):
    g = MomentumGrid.auto(1)
    xs = [(t, x) for t, x, _, _ in samples]
    vals = [v for _, _, v, _ in samples]
    ws = [w for _, _, _, w in samples]
    fp, fm = smear(xs, vals, ws, g)
    np.testing.assert_allclose(fm, np.conj(fp), atol=1e-12)


def test_smear_edge_cases():
    g = MomentumGrid.auto(1)
    fp, fm = smear([[0.3, 0.1]], [0.0], [1.0], g)
    assert not fp.any() and not fm.any()
    fp, fm = smear([[0.0, 0.0]], [2.0], [0.5], g)
    np.testing.assert_allclose(fp, np.ones(8))
    np.testing.assert_allclose(fm, np.ones(8))


def test_config_parsing(tmp_path):
    cfg = FockConfig.from_json({"seed": 3, "tolerances": {"vacuum": 1e-9}})
    assert cfg.seed == 3 and cfg.tolerances["vacuum"] == 1e-9 and cfg.tolerances["s_m"] == 1e-10
    for bad in ({"bogus": 1}, {"tolerances": {"bogus": 1}}, {"mMax": 2}, {"samples": 0}):
        with pytest.raises(ValueError):
            FockConfig.from_json(bad)
    g = FockConfig.from_json({"points": [[0.5], [-1.0]]}).grid()
    assert g.size == 2


def test_small_battery_run():
    rep = run_batteries(FockConfig(samples=30, involutions=5, seed=2))
    assert rep["pass"], {k: v for k, v in rep["batteries"].items()}
    assert rep["phase_calibration"] == ["right", 1]
