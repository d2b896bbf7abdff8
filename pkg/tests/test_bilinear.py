from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import FROZEN
from spinc.bilinear import (
    IMAGINARY,
    REAL,
    RealityInconsistency,
    alpha_k,
    causal_character,
    detect_dkp,
    dirac_current,
    equivariance_check,
    generic_inner_spec,
    hermitian_flag_oracle,
    inner,
    random_spinor,
    reality_table,
    spinc_basis,
    vector_adjoint_residual,
)
from spinc.clifford import build_rep
from spinc.exact import ExactScalar
from spinc.lowdim import signature_case

seeds = st.integers(0, 2**32 - 1)


@lru_cache(maxsize=None)
def generic(p, q):
    rep = build_rep(p, q)
    spec = generic_inner_spec(rep)
    return rep, spec, reality_table(rep, spec, samples=30)


def _letters(table, n):
    return "".join(table[k][0] for k in range(n + 1))


@pytest.mark.parametrize("key,sig", [("reality_generic_1_4", (1, 4)), ("reality_generic_2_2", (2, 2))])
def test_frozen_generic_tables(key, sig):
    rep, spec, table = generic(*sig)
    assert _letters(table, rep.n) == FROZEN[key]


@pytest.mark.parametrize("tag", ["L14", "S32"])
def test_frozen_case_tables(tag):
    c = signature_case(tag)
    assert _letters(c.table, c.n) == FROZEN[f"reality_{tag}"]


@pytest.mark.parametrize("sig", [(0, 3), (1, 3), (2, 2), (0, 4), (1, 4), (3, 2), (2, 3)])
def test_sampled_flags_agree_with_hermiticity(sig):
    rep, spec, table = generic(*sig)
    assert [hermitian_flag_oracle(rep, spec, k) for k in range(rep.n + 1)] == [table[k] for k in range(rep.n + 1)]


@given(st.sampled_from([(1, 3), (2, 2), (0, 4), (3, 2)]), seeds)
def test_vector_adjoint_rule(sig, seed):
    rep, spec, _ = generic(*sig)
    rng = np.random.default_rng(seed)
    u, v = random_spinor(rep.dim, rng), random_spinor(rep.dim, rng)
    for i in range(rep.n):
        assert vector_adjoint_residual(rep, spec, i, u, v).is_zero()


@given(st.sampled_from([(1, 3), (2, 2)]), seeds)
def test_inner_product_hermitian_up_to_sign(sig, seed):
    rep, spec, _ = generic(*sig)
    rng = np.random.default_rng(seed)
    u, v = random_spinor(rep.dim, rng), random_spinor(rep.dim, rng)
    a, b = inner(spec, u, v), inner(spec, v, u).conj()
    assert a == b or a == -b


@given(st.sampled_from([(1, 3), (2, 2), (1, 4)]), seeds, st.integers(0, 3))
def test_alpha_is_phase_invariant(sig, seed, k):
    rep, spec, table = generic(*sig)
    chi = random_spinor(rep.dim, np.random.default_rng(seed))
    ichi = np.array([ExactScalar(0, 1) * c for c in chi], dtype=object)
    for deg in range(rep.n + 1):
        assert alpha_k(rep, spec, table, ichi, ichi, deg) == alpha_k(rep, spec, table, chi, chi, deg)


@given(st.sampled_from([(1, 3), (2, 2), (0, 4), (1, 4)]), seeds)
def test_alpha_p_detects_zero(sig, seed):
    rep, spec, table = generic(*sig)
    chi = random_spinor(rep.dim, np.random.default_rng(seed))
    nonzero = any(not c.is_zero() for c in chi)
    assert alpha_k(rep, spec, table, chi, chi, rep.p).is_zero() != nonzero


@given(st.sampled_from([(1, 3), (2, 2)]), seeds)
def test_equivariance(sig, seed):
    rep, spec, table = generic(*sig)
    chi = random_spinor(rep.dim, np.random.default_rng(seed))
    for X in spinc_basis(rep.n):
        for k in range(rep.n + 1):
            assert equivariance_check(rep, spec, table, k, X, chi).is_zero()


def test_numeric_and_exact_agree():
    rep, spec, table = generic(1, 3)
    chi = random_spinor(rep.dim, np.random.default_rng(3))
    exact_a = alpha_k(rep, spec, table, chi, chi, 2)
    num = alpha_k(rep.numeric(), spec, table, chi.astype(complex), chi.astype(complex), 2)
    assert np.allclose(exact_a.to_dense().astype(complex), num.to_dense())


def test_lorentzian_current_is_causal():
    rep, spec, table = generic(1, 3)
    rng = np.random.default_rng(5)
    for _ in range(20):
        V = dirac_current(rep, spec, table, random_spinor(rep.dim, rng))
        assert causal_character(rep.epsilon, V) in ("timelike", "null")


def test_degree_out_of_range():
    rep, spec, _ = generic(1, 3)
    with pytest.raises(ValueError):
        detect_dkp(rep, spec, 7)


def test_inconsistent_pairing_reported():
    rep = build_rep(1, 3)
    from spinc.bilinear import InnerProductSpec
    from spinc.exact import ExactMatrix

    bad = InnerProductSpec(1, ExactScalar(1), ExactMatrix.identity(rep.dim))
    with pytest.raises(RealityInconsistency):
        detect_dkp(rep, bad, 1, samples=20)


def test_flag_constants():
    assert {REAL, IMAGINARY} == {"Real", "Imaginary"}
