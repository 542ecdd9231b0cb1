import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointwave.bc_algebra import build_config
from pointwave.free_wave import (BumpProfile, ForcingTrace, InadmissibleData, InitialData,
                                 SphereRule, check_admissible, eval_initial, forcing_trace,
                                 kirchhoff_eval, kirchhoff_field, radial_oracle)

UNIT = BumpProfile((0, 0, 0), 1.0, 1.0)
RADIAL = InitialData([UNIT])


def test_initial_at_center():
    b = BumpProfile((1, 2, 3), 0.7, 2 - 1j)
    value, grad = eval_initial(InitialData([b]), (1, 2, 3))
    assert value == 2 - 1j
    assert np.all(grad == 0)


def test_initial_outside_support():
    value, grad = eval_initial(RADIAL, (0, 1.2, 0))
    assert value == 0 and np.all(grad == 0)


def test_initial_polynomial_value():
    value, _ = eval_initial(RADIAL, (0.5, 0, 0))
    assert value == 0.31640625


def test_initial_gradient_matches_finite_difference():
    x = np.array([0.3, -0.2, 0.4])
    _, grad = eval_initial(RADIAL, x)
    eps = 1e-6
    fd = [(eval_initial(RADIAL, x + eps * e)[0] - eval_initial(RADIAL, x - eps * e)[0]) / (2 * eps)
          for e in np.eye(3)]
    np.testing.assert_allclose(grad, fd, atol=1e-8)


def test_kirchhoff_zero_data():
    assert kirchhoff_eval(InitialData(), 1.3, (0, 0, 0)) == 0


def test_kirchhoff_at_time_zero_is_initial_value():
    data = InitialData([BumpProfile((0.2, 0, 0), 0.8, 1.5)], [BumpProfile((0, 0, 0), 1, 3)])
    x = (0.5, 0.1, -0.2)
    assert kirchhoff_eval(data, 0.0, x) == eval_initial(data, x)[0]


def test_kirchhoff_negative_time_rejected():
    with pytest.raises(ValueError):
        kirchhoff_eval(RADIAL, -0.1, (0, 0, 0))


def test_kirchhoff_radial_point():
    assert kirchhoff_eval(RADIAL, 2.0, (2, 0, 0)) == pytest.approx(radial_oracle(UNIT, 2.0, 2.0), abs=1e-6)


@pytest.mark.parametrize("t", [0.3, 0.5, 0.9, 1.0, 1.7, 3.0])
@pytest.mark.parametrize("r", [0.0, 0.25, 0.8, 1.5, 2.5])
def test_kirchhoff_velocity_against_oracle(t, r):
    data = InitialData([], [UNIT])
    x = r * np.array([0.0, 0.6, 0.8])
    assert kirchhoff_eval(data, t, x) == pytest.approx(radial_oracle(UNIT, t, r, velocity=True), abs=1e-10)


def test_oracle_edge_cases():
    assert radial_oracle(UNIT, 0.0, 0.5) == pytest.approx(0.31640625)
    assert radial_oracle(UNIT, 1.0, 2.5) == 0  # sphere misses the ball
    assert radial_oracle(UNIT, 4.0, 2.0) == 0  # inside the trailing lacuna


def _miss(x, t, c=np.zeros(3), R=1.0):
    rho = np.linalg.norm(np.asarray(x) - c)
    return rho - R > t or rho + R < t


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[st.floats(-6, 6)] * 3), st.floats(0.01, 8))
def test_huygens_support(x, t):
    if not _miss(x, t):
        return
    data = InitialData([UNIT], [BumpProfile((0, 0, 0), 1.0, 0.7)])
    assert abs(kirchhoff_eval(data, t, x)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.tuples(*[st.floats(-3, 3)] * 3), st.floats(0.0, 4))
def test_linearity(x, t):
    b1 = BumpProfile((0.5, 0, 0), 0.8, 1 + 2j)
    b2 = BumpProfile((-0.3, 0.4, 0), 1.1, -0.5)
    v1 = BumpProfile((0, 0, 0.6), 0.9, 2.0)
    whole = kirchhoff_eval(InitialData([b1, b2], [v1]), t, x)
    parts = (kirchhoff_eval(InitialData([b1]), t, x) + kirchhoff_eval(InitialData([b2]), t, x)
             + kirchhoff_eval(InitialData([], [v1]), t, x))
    assert abs(whole - parts) <= 1e-12 * max(1.0, abs(whole))


def test_quadrature_convergence():
    data = InitialData([BumpProfile((0.5, 0.2, 0), 0.8, 1.0), BumpProfile((-1, 0, 0.3), 0.6, -2j)],
                       [BumpProfile((0, 0.5, 0), 1.0, 0.4)])
    rng = np.random.default_rng(7)
    X = rng.uniform(-3, 3, (200, 3))
    T = rng.uniform(0, 4, 200)
    base = kirchhoff_field(data, T, X, SphereRule(24, 48))
    fine = kirchhoff_field(data, T, X, SphereRule(48, 96))
    assert np.max(np.abs(base - fine)) < 1e-8


def test_forcing_trace_zero_before_arrival():
    data = InitialData([BumpProfile((3, 0, 0), 0.5)])
    cfg = build_config([[0, 0, 0]], [[1]], [[1]])
    tr = forcing_trace(data, cfg, 4.0, 0.01)
    early = tr.times < 2.5
    assert np.all(tr.values[early] == 0)
    assert np.any(tr.values[~early] != 0)


def test_forcing_trace_zero_data():
    cfg = build_config([[0, 0, 0], [1, 0, 0]], np.eye(2), np.eye(2))
    tr = forcing_trace(InitialData(), cfg, 1.0, 0.1)
    assert np.all(tr.values == 0)


def test_forcing_trace_matches_oracle():
    b = BumpProfile((2, 0, 0), 1.0)
    cfg = build_config([[0, 0, 0]], [[1]], [[0]])
    tr = forcing_trace(InitialData([b]), cfg, 5.0, 0.01)
    origin = BumpProfile((0, 0, 0), 1.0)
    expected = np.array([radial_oracle(origin, t, 2.0) for t in tr.times])
    assert np.max(np.abs(tr.values[:, 0] - expected)) <= 1e-6
    # interpolated values between nodes
    ts = np.linspace(0, 5, 333)
    interp = tr.at(ts)[:, 0]
    exact = np.array([radial_oracle(origin, t, 2.0) for t in ts])
    assert np.max(np.abs(interp - exact)) <= 1e-6


def test_forcing_trace_interpolation_reproduces_nodes():
    tr = ForcingTrace.from_function(lambda t: [np.sin(t), np.cos(3 * t)], 2, 1.0, 0.1)
    np.testing.assert_array_equal(tr.at(tr.times), tr.values)
    with pytest.raises(ValueError):
        tr.at(1.5)


def test_reflection_flips_velocity_only():
    data = InitialData([BumpProfile((0, 0, 0), 1, 2)], [BumpProfile((1, 0, 0), 1, 3)])
    r = data.reflected()
    assert r.position_bumps == data.position_bumps
    assert r.velocity_bumps[0].amplitude == -3


def test_admissibility():
    cfg = build_config([[0, 0, 0]], [[1]], [[1]])
    check_admissible(InitialData([BumpProfile((2, 0, 0), 0.5)]), cfg)
    with pytest.raises(InadmissibleData, match="inside"):
        check_admissible(InitialData([BumpProfile((0.1, 0, 0), 0.5)]), cfg)
    with pytest.raises(InadmissibleData, match="charges"):
        check_admissible(InitialData([BumpProfile((2, 0, 0), 0.5)], charges0=[1.0]), cfg)


def test_support_geometry():
    data = InitialData([BumpProfile((-2, 0, 0), 0.5)], [BumpProfile((1, 0, 0), 0.25)])
    assert data.support_diameter() == pytest.approx(3.75)
    assert data.distance_to_support((0, 0, 0)) == pytest.approx(0.75)
