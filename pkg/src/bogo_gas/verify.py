"""Built-in invariant checks, grouped by module, for ``bogo-gas verify``.

Each check returns a record {name, passed, value, tolerance}.  The checks are
fast identities and closed-form comparisons; the slow scaling studies live in
the test suite.
"""

from __future__ import annotations

import math

import numpy as np

from . import bogoliubov as bg
from . import bound_assembler as ba
from . import condensate as cd
from . import ideal_gas as ig
from . import lattice as lt
from . import scattering as sc


def _rec(name, value, tol, passed=None):
    if passed is None:
        passed = bool(value <= tol)
    return {"name": name, "passed": bool(passed), "value": float(value), "tolerance": float(tol)}


def check_lattice():
    shells = lt.build_shells(lt.TWO_PI * 10)
    f = lambda p: np.exp(-0.01 * p ** 2)
    s = lt.lattice_sum(f, shells).truncated_sum
    b = lt.brute_force_sum(f, 10)
    z = lt.cubic_lattice_zeta(2.0)
    big = lt.build_shells(lt.TWO_PI * 60)
    lo = lt.lattice_sum(lambda p: (p / lt.TWO_PI) ** -4, big, "integral_bound",
                        scale=lt.TWO_PI * 60)
    return [
        _rec("shell_sum_vs_brute_force", abs(s / b - 1), 1e-12),
        _rec("shell_count_r3", abs(int(shells.multiplicity[:3].sum()) - (6 + 12 + 8)), 0),
        _rec("lattice_zeta_bracket", 0.0, 0.0, passed=lo.truncated_sum < z < lo.upper),
    ]


def check_scattering():
    out = []
    sol = sc.solve_zero_energy(sc.PotentialSpec.hard_core(0.5))
    out.append(_rec("hard_core_length", abs(sol.scattering_length - 0.5), 1e-10))
    worst = 0.0
    for R in (0.5, 1.0, 2.0):
        for V0 in (1.0, 10.0, 100.0):
            s = sc.solve_zero_energy(sc.PotentialSpec.square_barrier(R, V0))
            worst = max(worst, abs(s.scattering_length - sc.square_barrier_length(R, V0)))
    out.append(_rec("square_barrier_closed_form", worst, 1e-8))
    s = sc.solve_zero_energy(sc.PotentialSpec.square_barrier(1.0, 10.0))
    e = sc.energy_functional(s, 3.0)
    out.append(_rec("energy_functional", abs(e / sc.energy_f_ell(s.scattering_length, 3.0) - 1), 1e-8))
    return out


def check_ideal_gas():
    st = ig.state_from_kappa(2.0, 1e5)
    gp = ig.grand_potential_identity(st)
    tot = ig.f0_total(st)
    return [
        _rec("mu0_residual", abs(st.residual), 1e-10 * st.n_total),
        _rec("mu0_negative", 0.0, 0.0, passed=st.mu0 < 0),
        _rec("free_energy_split", abs(gp - tot) / abs(tot), 1e-12),
    ]


def check_bogoliubov():
    st = ig.state_from_kappa(2.0, 1e5)
    m = bg.BogoliubovModel.from_state(st, 0.5, 0.3)
    p = m.pb_shells().norm
    _, u, v = bg.tau_uv(p, m)
    eps = bg.dispersion(p, m)
    occ = bg.occupations(p, m)
    corr = bg.correction_sum(m.coupling, m.beta)
    th = bg.thermo_limit_correction(1.0, 1.0, 1.0)
    return [
        _rec("u2_minus_v2", float(np.max(np.abs(u * u - v * v - 1))), 1e-14),
        _rec("dispersion_above_free", 0.0, 0.0, passed=bool(np.all(eps >= p * p))),
        _rec("gamma_above_diag", 0.0, 0.0, passed=bool(np.all(occ.gamma_p >= occ.gamma_diag))),
        _rec("correction_nonpositive", 0.0, 0.0, passed=corr.value <= 0),
        _rec("correction_tail_relative", corr.tail_bound / abs(corr.value), 1e-10),
        _rec("thermo_limit_closed_form", th.rel_diff, 1e-8),
    ]


def check_condensate():
    out = [_rec(f"upsilon_fixed_point_A{A}", abs(cd.upsilon(A / 2, A) - A / 2), 1e-12)
           for A in (1.0, 10.0, 100.0, 1000.0)]
    out.append(_rec("upsilon_zero_A50", abs(cd.upsilon(0.0, 50.0) - 1 / math.sqrt(math.pi)), 1e-10))
    for x in (1.0, 2.0, 5.0, 10.0, 50.0):
        e = cd.erf_asymptotic_check(x)
        out.append(_rec(f"erf_remainder_x{x:g}", e.difference, e.bound))
    grid = np.linspace(-20, 50, 1000)
    ups = np.array([cd.upsilon(e, 100.0) for e in grid])
    out.append(_rec("upsilon_increasing", 0.0, 0.0, passed=bool(np.all(np.diff(ups) > 0))))
    model = cd.solve_mu(1.0, 1.0, 3.0)
    mom = cd.moments(model)
    out.append(_rec("solve_mu_round_trip", abs(mom.m1 / 3.0 - 1), 1e-10))
    ident = mom.log_z + model.beta * (model.h * mom.m2 - model.mu * mom.m1)
    out.append(_rec("entropy_identity", abs(ident / mom.entropy_cl - 1), 1e-10))
    return out


def check_bound():
    r0 = ba.theorem_bound(1e4, 2.0, 0.0)
    st = ig.state_from_kappa(2.0, 1e4)
    r = ba.theorem_bound(1e4, 2.0, 0.01)
    t = r.terms
    assembled = (t["f0_plus"] + t["density_density"]
                 + min(t["condensate_branch_interacting"], t["condensate_branch_ideal"])
                 + t["bog_correction"])
    lower = "interacting" if t["condensate_branch_interacting"] < t["condensate_branch_ideal"] else "ideal"
    return [
        _rec("free_gas_total", abs(r0.total - ig.f0_total(st)), 0.0),
        _rec("assembly_exact", abs(assembled - r.total), 0.0),
        _rec("branch_consistent", 0.0, 0.0, passed=lower == r.selected_branch),
    ]


SUITES = {
    "lattice": check_lattice,
    "scattering": check_scattering,
    "ideal_gas": check_ideal_gas,
    "bogoliubov": check_bogoliubov,
    "condensate": check_condensate,
    "bound": check_bound,
}


def run_suite(name: str = "all") -> list[dict]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        for rec in SUITES[n]():
            rec = {"suite": n, **rec}
            out.append(rec)
    return out
