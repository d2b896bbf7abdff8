from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FROZEN, SPINORS, orbit_oracle
from spinc.exact import ExactScalar, exact
from spinc.lowdim import (
    assemble_omega_system,
    classify_spinor,
    closed_form_A,
    killing_identity_residual,
    no_charge_check,
    omega_array,
    orbit_invariants,
    orbit_table_comparison,
    parse_constraint,
    point_data,
    rank_report,
    signature_case,
    solve_connection,
    tata_residual,
    twistor_residuals_exact,
    u_b,
)

seeds = st.integers(0, 2**32 - 1)


def _sym(z: ExactScalar):
    a, b, c, d = z.components()
    return sp.nsimplify(sp.Rational(a.numerator, a.denominator) + sp.I * sp.Rational(b.numerator, b.denominator)
                        + sp.sqrt(2) * (sp.Rational(c.numerator, c.denominator)
                                        + sp.I * sp.Rational(d.numerator, d.denominator)))


@pytest.mark.parametrize("tag,name", sorted(SPINORS))
def test_invariants_match_independent_oracle(tag, name):
    case = signature_case(tag)
    inv = orbit_invariants(case, case.spinors[name])
    ref = orbit_oracle(tag, name)
    assert sp.simplify(_sym(inv.norm) - ref["norm"]) == 0
    assert [sp.simplify(_sym(exact(v)) - r) for v, r in zip(inv.V, ref["V"])] == [0] * 5
    for pair in {*inv.alpha2.coeffs, *ref["alpha2"]}:
        got = _sym(exact(inv.alpha2.coeffs.get(pair, 0)))
        assert sp.simplify(got - ref["alpha2"].get(pair, 0)) == 0
    assert sp.simplify(_sym(inv.action_eigenvalue(case.spinors[name])) - ref["action"]) == 0


def test_comparison_table_covers_all_items():
    rows = orbit_table_comparison()
    assert len(rows) == 20
    mismatched = {(r.case, r.spinor, r.item) for r in rows if not r.match}
    assert mismatched == {("L14", "u1", "V (vector)"), ("S32", "u0", "alpha2"), ("S32", "u1", "norm")}


def test_labels():
    s32 = signature_case("S32")
    assert classify_spinor(s32, s32.spinors["u"]) == "isotropic, V = 0 (type u)"
    assert classify_spinor(s32, s32.spinors["u0"]) == "isotropic, V != 0 (type u0)"
    assert classify_spinor(s32, 3 * u_b(1)).startswith("norm = 9*i")
    with pytest.raises(ValueError):
        classify_spinor(s32, [0, 0, 0, 0])


def test_frozen_ranks():
    listed = rank_report(assemble_omega_system("L14", 1, "listed"))
    corrected = rank_report(assemble_omega_system("L14", 1, "corrected"))
    assert listed.rank == FROZEN["l14_listed_rank"]
    assert corrected.rank == FROZEN["l14_corrected_rank"]
    assert listed.not_implied_by_form_equation == FROZEN["l14_listed_rows_not_implied"]
    assert corrected.not_implied_by_form_equation == ()
    assert not corrected.inconsistent_for_nonzero_f


def test_constraint_parser():
    row = parse_constraint("w01^2 = -w34^0 + f")
    assert sum(1 for v in row if v) == 3


@settings(max_examples=15)
@given(st.sampled_from(["L14", "S32"]), st.sampled_from([0, 1, -1, 2, -2]), seeds)
def test_sampled_connections(tag, f, seed):
    system = assemble_omega_system(tag, f)
    om = omega_array(system.sample(np.random.default_rng(seed), f))
    assert all(v.is_zero() for v in tata_residual(tag, om, f).values())
    assert all(v == 0 for v in killing_identity_residual(tag, om))
    sol = solve_connection(tag, om, system)
    assert sol.unique
    res = twistor_residuals_exact(point_data(tag, om, sol.A_half_omega))
    assert all(ExactScalar.coerce(v).is_zero() for r in res for v in r)
    assert all(a.is_imaginary() for a in sol.A)


@given(seeds)
def test_closed_form_agrees_on_fibre_free_components(seed):
    system = assemble_omega_system("L14", 0)
    om = omega_array(system.sample(np.random.default_rng(seed), 0))
    sol = solve_connection("L14", om, system)
    assert all((a - c).is_zero() for a, c in zip(sol.A[:3], closed_form_A(om)[:3]))


def test_rejects_omega_off_the_constraints():
    om = omega_array([Fraction(1)] * 50)
    with pytest.raises(ValueError):
        solve_connection("L14", om, assemble_omega_system("L14", 0))


@pytest.mark.parametrize("name", ["u0+", "u0-"])
def test_real_spinors_carry_no_charge(name):
    r = no_charge_check("S22", name)
    assert r.A_kernel_dim == 0


def test_unknown_case():
    with pytest.raises(ValueError):
        signature_case("X")
