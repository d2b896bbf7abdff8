import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinc.clifford import (
    build_rep,
    half_projectors,
    half_spinor_label_report,
    pseudo_unitary_sample,
    so_generator,
    spinc_lie_action,
    u_delta,
    unitary_lie_lift,
    volume_complex,
    zeta_star,
)
from spinc.exact import ExactMatrix

signatures = st.integers(1, 7).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n)))


@given(signatures)
def test_relations_exact_and_numeric(pn):
    p, n = pn
    rep = build_rep(p, n - p)
    assert rep.relation_residuals() == {}
    # independent float check of e_i e_j + e_j e_i = -2 <e_i, e_j>
    eps = rep.epsilon
    for i, a in enumerate(rep.mats):
        for j, b in enumerate(rep.mats):
            want = -2 * eps[i] * np.eye(rep.dim) if i == j else 0
            assert np.allclose(a @ b + b @ a, want, atol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 5, 7, 9])
def test_volume_is_identity_for_odd_n(n):
    for p in range(n):
        rep = build_rep(p, n - p)
        assert volume_complex(rep) == rep.identity()


@pytest.mark.parametrize("p,q", [(0, 2), (1, 1), (1, 3), (2, 2), (0, 4), (3, 3), (2, 4)])
def test_half_projectors(p, q):
    rep = build_rep(p, q)
    Pp, Pm = half_projectors(rep)
    assert Pp @ Pp == Pp and Pm @ Pm == Pm
    assert (Pp @ Pm).is_zero()
    assert Pp + Pm == rep.identity()
    assert Pp.rank() == Pm.rank() == rep.dim // 2
    assert np.linalg.matrix_rank(Pp.to_numpy()) == rep.dim // 2


def test_generators_anticommute_with_volume_in_even_dimension():
    rep = build_rep(1, 3)
    w = volume_complex(rep)
    for g in rep.generators:
        assert g @ w == -(w @ g)


def test_u_delta_is_unit():
    u = u_delta((1, -1))
    assert sum((x * x.conj() for x in u), u[0] * 0) == 1


@pytest.mark.parametrize("p,q", [(0, 2), (1, 3), (2, 2), (0, 6)])
def test_half_spinor_labels_are_eigenvectors(p, q):
    for deltas, sign, eig in half_spinor_label_report(build_rep(p, q)):
        assert eig in (1, -1) and eig == -sign


def test_invalid_signature():
    with pytest.raises(ValueError):
        build_rep(0, 0)


@given(st.sampled_from([(1, 3), (2, 2), (0, 4)]), st.integers(0, 3), st.integers(0, 3))
def test_spin_lie_action_matches_so_action(sig, i, j):
    """[X, e_k] = zeta_*(X) e_k for X = e_i e_j."""
    if i == j:
        return
    rep = build_rep(*sig)
    X = spinc_lie_action(rep, {(min(i, j), max(i, j)): 1})
    M, _ = zeta_star(rep, {(min(i, j), max(i, j)): 1})
    for k in range(rep.n):
        lhs = X @ rep.generators[k] - rep.generators[k] @ X
        rhs = ExactMatrix.zeros(rep.dim)
        for l in range(rep.n):
            if M[l, k] != 0:
                rhs = rhs + rep.generators[l].scale(M[l, k])
        assert lhs == rhs


def test_so_generator_is_skew_for_the_metric():
    eps = (-1, 1, 1)
    E = so_generator(eps, 0, 1)
    g = np.diag(eps)
    assert np.array_equal(E.T @ g + g @ E, np.zeros((3, 3), dtype=object))


@given(st.integers(0, 2**16))
def test_unitary_lift_is_a_lie_homomorphism(seed):
    rep = build_rep(2, 2)
    rng = np.random.default_rng(seed)
    u = pseudo_unitary_sample(1, 1, rng, exact_mode=True, bound=2)
    v = pseudo_unitary_sample(1, 1, rng, exact_mode=True, bound=2)
    Lu, Lv = unitary_lie_lift(rep, u), unitary_lie_lift(rep, v)
    w = u @ v - v @ u
    assert unitary_lie_lift(rep, w) == Lu @ Lv - Lv @ Lu


def test_pseudo_unitary_sample_preserves_form():
    rng = np.random.default_rng(0)
    K = pseudo_unitary_sample(1, 2, rng)
    Ipq = np.diag([-1, 1, 1])
    assert np.allclose(K.conj().T @ Ipq + Ipq @ K, 0)
