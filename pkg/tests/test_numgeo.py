import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FROZEN, conformal_christoffels
from spinc.numgeo import (
    ChartGeometry,
    GeometryError,
    christoffels,
    cr_model,
    fd_derivative,
    fefferman_chart,
    fefferman_points,
    frame_and_spin_connection,
    gram_schmidt_frame,
    kulkarni_nomizu,
    metricity_residual,
    point_residuals,
    tanaka_webster,
)

coords = st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4).map(np.array)


def flat(p=1, n=4):
    eta = np.diag([-1.0] * p + [1.0] * (n - p))
    return ChartGeometry(n=n, p=p, metric=lambda x: eta)


def conformal(n=4):
    return ChartGeometry(n=n, p=0, metric=lambda x: math.exp(2 * x[0]) * np.eye(n))


def test_fd_derivative_is_fourth_order():
    f = lambda x: np.array([math.sin(x[0]) * x[1]])
    d = fd_derivative(f, np.array([0.3, 2.0]), 1e-2)
    assert abs(d[0, 0] - math.cos(0.3) * 2.0) < 1e-8
    assert abs(d[1, 0] - math.sin(0.3)) < 1e-8


@given(coords)
def test_flat_christoffels_vanish(x):
    assert np.abs(christoffels(flat(), x)).max() < 1e-12


@given(coords)
def test_conformal_christoffels_match_closed_form(x):
    assert np.abs(christoffels(conformal(), x) - conformal_christoffels(x, 4)).max() < 1e-7


@given(coords)
def test_metricity(x):
    assert metricity_residual(conformal(), x) < 1e-7


@given(coords, st.integers(0, 4))
def test_gram_schmidt_frame_is_pseudo_orthonormal(x, p):
    A = np.array([[2.0, 0.3, 0.1, 0.0], [0.3, 1.5, 0.2, 0.1], [0.1, 0.2, 1.0, 0.0], [0.0, 0.1, 0.0, 1.2]])
    sig = np.diag([-1.0] * p + [1.0] * (4 - p))
    chart = ChartGeometry(n=4, p=p, metric=lambda y: A @ sig @ A.T * (1 + 0.1 * y[0] ** 2))
    S = gram_schmidt_frame(chart, x)
    assert np.allclose(S @ chart.g(x) @ S.T, np.diag(chart.epsilon), atol=1e-10)


def test_flat_spin_connection_vanishes():
    S, om = frame_and_spin_connection(flat(), np.zeros(4))
    assert np.allclose(S, np.eye(4)) and np.abs(om).max() < 1e-12


def test_signature_mismatch_detected():
    with pytest.raises(GeometryError):
        ChartGeometry(n=4, p=1, metric=lambda x: np.eye(4)).check_signature(np.zeros(4))


def test_kulkarni_nomizu_of_metric_is_constant_curvature():
    eps = (-1, 1, 1)
    g = np.diag(eps).astype(float)
    R = kulkarni_nomizu(g, eps)
    assert abs(abs(R[0, 1, 0, 1]) - 2.0) < 1e-12
    assert np.allclose(R, -R.transpose(1, 0, 2, 3))


@pytest.mark.parametrize("tag", ["Heisenberg", "Sphere3"])
def test_cr_structure(tag):
    model = cr_model(tag)
    for x in model.sample_points(np.random.default_rng(1), 4):
        s = model.structure_checks(x)
        assert s["theta_T"] < 1e-10 and s["T_dtheta"] < 1e-7 and s["levi_min"] > 0
        assert tanaka_webster(model, x)["torsion_residual"] < 1e-6


def test_tanaka_webster_scalar_curvature():
    sphere, heis = cr_model("Sphere3"), cr_model("Heisenberg")
    for x in sphere.sample_points(np.random.default_rng(2), 4):
        assert abs(tanaka_webster(sphere, x)["RW"] - FROZEN["sphere3_RW"]) < 1e-4
        assert abs(sphere.RW(x) - FROZEN["sphere3_RW"]) < 1e-12
    for x in heis.sample_points(np.random.default_rng(2), 4):
        assert abs(tanaka_webster(heis, x)["RW"]) < 1e-6


@pytest.mark.parametrize("tag", ["Heisenberg", "Sphere3"])
def test_fundamental_field_is_null(tag):
    model = cr_model(tag)
    chart = fefferman_chart(model)
    for P in fefferman_points(model, np.random.default_rng(3), 4):
        N = np.zeros(chart.n)
        N[-1] = 1.5
        assert abs(N @ chart.g(P) @ N) < 1e-12
        chart.check_signature(P)


@settings(max_examples=5)
@given(st.integers(0, 2**16))
def test_fefferman_spinor_is_twistor_at_random_points(seed):
    model = cr_model("Heisenberg")
    P = fefferman_points(model, np.random.default_rng(seed), 1)[0]
    r = point_residuals(fefferman_chart(model), P, depth=1)
    assert r["twistor"] < 1e-7 and r["nabla_N"] < 1e-7
