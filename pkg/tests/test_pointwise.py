import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinc.bilinear import generic_inner_spec, random_spinor, reality_table
from spinc.clifford import build_rep
from spinc.exact import ExactScalar
from spinc.forms import KForm
from spinc.lowdim import killing_type_data, length_derivative_residual
from spinc.pointwise import (
    CurvatureBlock,
    FramePointData,
    classical_reduction,
    cov_deriv,
    dirac_and_twistor,
    gauge_transform,
    kernel_identity,
    random_curvature_block,
)

seeds = st.integers(0, 2**32 - 1)
_CACHE = {}


def setup(p, q):
    if (p, q) not in _CACHE:
        rep = build_rep(p, q)
        spec = generic_inner_spec(rep)
        _CACHE[p, q] = rep, spec, reality_table(rep, spec, samples=20)
    return _CACHE[p, q]


def zero_omega(n):
    return np.full((n, n, n), Fraction(0), dtype=object)


def random_data(p, q, rng, curvature=False):
    rep, spec, table = setup(p, q)
    n = rep.n
    om = zero_omega(n)
    for i in range(n):
        for k in range(n):
            for l in range(k + 1, n):
                v = Fraction(int(rng.integers(-2, 3)))
                om[i, k, l], om[i, l, k] = v, -v
    A = tuple(ExactScalar(0, int(rng.integers(-2, 3))) for _ in range(n))
    phi = random_spinor(rep.dim, rng)
    dphi = tuple(random_spinor(rep.dim, rng) for _ in range(n))
    cb = random_curvature_block(rep.epsilon, rng) if curvature else None
    return FramePointData(rep, spec, table, om, A, phi, dphi, cb)


def test_constant_spinor_on_flat_data_is_twistor():
    rep, spec, table = setup(1, 3)
    phi = random_spinor(rep.dim, np.random.default_rng(0))
    data = FramePointData(rep, spec, table, zero_omega(4), (0, 0, 0, 0), phi)
    D, res = dirac_and_twistor(data)
    assert all(c.is_zero() for c in D)
    assert all(c.is_zero() for r in res for c in r)


@given(st.sampled_from([(1, 3), (2, 2), (0, 3)]), seeds)
def test_twistor_residuals_lie_in_kernel_of_clifford_multiplication(sig, seed):
    data = random_data(*sig, np.random.default_rng(seed))
    _, res = dirac_and_twistor(data)
    assert all(c.is_zero() for c in kernel_identity(data, res))


@given(seeds, st.integers(-4, 4), st.lists(st.integers(-2, 2), min_size=4, max_size=4))
def test_gauge_covariance_exact(seed, k, dtau):
    data = random_data(1, 3, np.random.default_rng(seed))
    g = gauge_transform(data, k * math.pi / 2, [Fraction(t) for t in dtau])
    assert g.exact
    phase = g.phi[next(i for i, c in enumerate(data.phi) if not c.is_zero())] / \
        data.phi[next(i for i, c in enumerate(data.phi) if not c.is_zero())]
    for i in range(4):
        want = [phase * c for c in cov_deriv(data, i)]
        assert all((a - b).is_zero() for a, b in zip(cov_deriv(g, i), want))


@given(seeds, st.floats(-3, 3))
def test_gauge_covariance_numeric(seed, tau):
    rng = np.random.default_rng(seed)
    data = random_data(2, 2, rng)
    dtau = rng.normal(size=4)
    g = gauge_transform(data, tau, dtau)
    for i in range(4):
        lhs = cov_deriv(g, i)
        rhs = np.exp(0.5j * tau) * np.array([complex(c) for c in cov_deriv(data, i)])
        assert np.allclose(lhs, rhs, atol=1e-10)


def test_validation_messages_name_the_field():
    rep, spec, table = setup(1, 3)
    phi = random_spinor(rep.dim, np.random.default_rng(0))
    bad = zero_omega(4)
    bad[0, 1, 2] = Fraction(1)
    with pytest.raises(ValueError, match="omega"):
        FramePointData(rep, spec, table, bad, (0,) * 4, phi)
    with pytest.raises(ValueError, match="A"):
        FramePointData(rep, spec, table, zero_omega(4), (1, 0, 0, 0), phi)
    with pytest.raises(ValueError, match="phi"):
        FramePointData(rep, spec, table, zero_omega(4), (0,) * 4, phi[:3])
    with pytest.raises(ValueError, match="dA"):
        FramePointData(rep, spec, table, zero_omega(4), (0,) * 4, phi,
                       curvature=CurvatureBlock(dA=KForm(rep.epsilon, 2, {(0, 1): 1})))


@settings(max_examples=10)
@given(st.sampled_from([(1, 3), (2, 2), (0, 4), (1, 4)]), seeds)
def test_generated_curvature_has_weyl_symmetries(sig, seed):
    rep, *_ = setup(*sig)
    eps = rep.epsilon
    n = rep.n
    cb = random_curvature_block(eps, np.random.default_rng(seed))
    # pair symmetry and first Bianchi identity on the Weyl part
    W = lambda a, b, c, d: cb.w(a, b).value((c, d)) if a != b and c != d else 0
    for a, b, c, d in np.ndindex(n, n, n, n):
        assert W(a, b, c, d) == W(c, d, a, b)
        assert W(a, b, c, d) + W(b, c, a, d) + W(c, a, b, d) == 0
    assert all(cb.K[a, b] == cb.K[b, a] for a, b in np.ndindex(n, n))


@settings(max_examples=6)
@given(st.sampled_from([(1, 3), (2, 2), (0, 4)]), seeds)
def test_classical_reduction_is_exact(sig, seed):
    rng = np.random.default_rng(seed)
    data = random_data(*sig, rng, curvature=True)
    psi = random_spinor(data.rep.dim, rng)
    gaps = classical_reduction(data, psi)
    assert all(v == 0 for v in gaps.values()), gaps


@given(seeds, st.sampled_from([1, -1, Fraction(1, 2)]))
def test_killing_type_data_has_constant_length(seed, lam):
    data = killing_type_data("R05", lam, np.random.default_rng(seed))
    assert all(v.is_zero() for v in length_derivative_residual(data, lam))


def test_missing_curvature_block():
    from spinc.pointwise import rhs_1p

    data = random_data(1, 3, np.random.default_rng(0))
    with pytest.raises(ValueError, match="curvature"):
        rhs_1p(data)
