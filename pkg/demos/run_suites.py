"""Short tour of the library: orbit invariants, a connection solve and a Fefferman sweep.

Run with `python demos/run_suites.py`.
"""
import numpy as np

from spinc.cli import Config, emit_report, run_suite
from spinc.lowdim import (
    assemble_omega_system,
    omega_array,
    orbit_invariants,
    point_data,
    signature_case,
    solve_connection,
    twistor_residuals_exact,
)
from spinc.numgeo import cr_model, fefferman_chart, fefferman_points, residual_sweep


def orbits() -> None:
    for tag in ("L14", "S32"):
        case = signature_case(tag)
        for name, chi in case.spinors.items():
            inv = orbit_invariants(case, chi)
            print(f"{tag} {name}: norm {inv.norm}, V {[str(v) for v in inv.V]}, "
                  f"alpha2 acts by {inv.action_eigenvalue(chi)}")


def connection(seed: int = 1, f: int = 1) -> None:
    system = assemble_omega_system("L14", f)
    om = omega_array(system.sample(np.random.default_rng(seed), f))
    sol = solve_connection("L14", om, system)
    res = twistor_residuals_exact(point_data("L14", om, sol.A_half_omega))
    zero = all(v.is_zero() for r in res for v in r)
    print(f"L14 connection for f={f}: A = {[str(a) for a in sol.A_half_omega]}, twistor residuals zero: {zero}")


def fefferman(points: int = 10) -> None:
    model = cr_model("Heisenberg")
    rep = residual_sweep(fefferman_chart(model), fefferman_points(model, np.random.default_rng(0), points), depth=1)
    print(f"Heisenberg Fefferman space, {points} points: max twistor residual {rep.max('twistor'):.2e}")


if __name__ == "__main__":
    orbits()
    connection()
    fefferman()
    print(emit_report(run_suite("clifford", Config(max_n=6)), "text").splitlines()[-1])
