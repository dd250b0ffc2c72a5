import math

import pytest

from bogo_gas import bogoliubov as bg
from bogo_gas import bound_assembler as ba
from bogo_gas import condensate as cd
from bogo_gas import ideal_gas as ig
from bogo_gas.scattering import PotentialSpec

A_SC = 0.01


def test_free_gas_total_is_exact():
    r = ba.theorem_bound(1e4, 2.0, 0.0)
    st = ig.state_from_kappa(2.0, 1e4)
    assert r.total == ig.f0_total(st)
    assert r.terms["condensate_branch_ideal"] == ig.f0_bec(st)
    assert r.selected_branch == "ideal"
    # the classical condensate at a = 0 sits above the quantum one by O(1/beta)
    gap = r.terms["condensate_branch_interacting"] - ig.f0_bec(st)
    assert 0 < gap * st.beta < 1
    assert r.terms["bog_correction"] == 0.0
    assert r.terms["density_density"] == 0.0


def test_branch_selection_examples():
    assert ba.theorem_bound(1e5, 2.0, A_SC).selected_branch == "interacting"
    assert ba.theorem_bound(1e5, 0.5, A_SC).selected_branch == "ideal"


def test_report_is_pure_aggregation():
    r = ba.theorem_bound(1e5, 2.0, A_SC)
    st = ig.state_from_kappa(2.0, 1e5)
    a_n = A_SC / 1e5
    t = r.terms
    assert t["f0_plus"] == ig.f0_plus(st)
    assert t["f_bec"] == cd.f_bec(st.beta, st.n0, a_n)
    assert t["condensate_branch_ideal"] == ig.f0_bec(st)
    assert t["bog_correction"] == bg.correction_sum(16 * math.pi * a_n * st.n0, st.beta).value
    assert t["density_density"] == 8 * math.pi * a_n * 1e5 ** 2
    assert r.total == t["f0_plus"] + t["density_density"] + min(
        t["condensate_branch_interacting"], t["condensate_branch_ideal"]) + t["bog_correction"]
    assert r.error_scale == 1e5 ** (11 / 18)
    assert r.inputs["ell"] == 1e5 ** (-11 / 18)
    assert r.inputs["delta_bog"] == 1 / 18


def test_potential_input_matches_length():
    r1 = ba.theorem_bound(1e4, 2.0, PotentialSpec.hard_core(A_SC))
    r2 = ba.theorem_bound(1e4, 2.0, A_SC)
    assert r1.total == r2.total


def test_preconditions():
    with pytest.raises(ValueError):
        ba.theorem_bound(5, 2.0, A_SC)
    with pytest.raises(ValueError):
        ba.theorem_bound(1e4, 0.0, A_SC)
    with pytest.raises(ValueError):
        ba.theorem_bound(1e4, 2.0, -1.0)
    with pytest.raises(ValueError):
        ba.corollary_condensed(1e4, 1.0, A_SC)
    with pytest.raises(ValueError):
        ba.corollary_noncondensed(1e4, 1.0, A_SC)


def test_solver_failures_name_the_term():
    with pytest.raises(ba.AssemblyError) as info:
        ba.theorem_bound(1e4, 2.0, 1e300)
    assert info.value.term


@pytest.mark.parametrize("n", [1e4, 1e5, 1e6])
def test_total_nondecreasing_in_a(n):
    for kappa in (0.5, 1.0, 2.0):
        tot = [ba.theorem_bound(n, kappa, a).total for a in (0.0, 1e-3, 3e-3, 0.01, 0.03, 0.1)]
        assert all(x <= y for x, y in zip(tot, tot[1:]))


def test_corollary_condensed_vs_theorem():
    diffs = []
    for n in (1e4, 1e5, 1e6):
        th = ba.theorem_bound(n, 2.0, A_SC)
        co = ba.corollary_condensed(n, 2.0, A_SC)
        st = ig.state_from_kappa(2.0, n)
        a_n = A_SC / n
        rem = abs(cd.f_bec(st.beta, st.n0, a_n) - cd.condensed_expansion(st.beta, st.n0, a_n))
        d = abs(co.total - th.total)
        assert d <= rem * (1 + 1e-9) + 1e-9 * abs(th.total)
        diffs.append(d)
    # required: the difference decays in N
    assert diffs[0] > diffs[1] > diffs[2]


def test_condensed_interaction_positive():
    for n in (1e4, 1e6):
        assert ba.corollary_condensed(n, 2.0, A_SC).terms["interaction"] > 0


def test_condensed_term_ordering():
    r = ba.corollary_condensed(1e6, 2.0, A_SC)
    t = r.terms
    assert abs(t["f0_plus"]) > 8 * math.pi * A_SC * 1e6 > abs(t["log_term"])


def test_noncondensed_free_gas():
    st = ig.state_from_kappa(0.5, 1e4)
    assert ba.corollary_noncondensed(1e4, 0.5, 0.0).total == ig.f0_total(st)
    r = ba.corollary_noncondensed(1e4, 0.5, 0.3)
    assert r.terms["density_density"] == pytest.approx(8 * math.pi * 0.3 * 1e4, rel=1e-15)


def test_noncondensed_vs_theorem():
    scaled = []
    for n in (1e4, 1e5, 1e6):
        th = ba.theorem_bound(n, 0.5, A_SC)
        co = ba.corollary_noncondensed(n, 0.5, A_SC)
        diff = th.total - co.total
        # ideal branch selected: the difference is exactly the Bogoliubov correction
        assert diff == pytest.approx(th.terms["bog_correction"], rel=1e-9, abs=1e-9 * abs(co.total))
        budget = abs(th.terms["condensate_branch_ideal"]) + abs(th.terms["bog_correction"])
        assert abs(diff) <= budget
        scaled.append(budget * n ** (-2 / 3))
    assert max(scaled) < 2 * min(scaled)


def test_branch_gap_examples():
    g = ba.branch_gap_check(1e6, 0.95, A_SC)
    assert g.ok and g.mu0 < 0
    gaps, n0s = [], []
    for kappa in (0.5, 0.6, 0.7, 0.8, 0.9, 0.95):
        g = ba.branch_gap_check(1e6, kappa, A_SC)
        assert g.mu0 < 0 and g.ok
        gaps.append(g.gap)
        n0s.append(g.n0)
    assert all(x < y for x, y in zip(n0s, n0s[1:]))
    assert all(x > y for x, y in zip(gaps, gaps[1:]))


def test_branch_gap_regime_violation():
    with pytest.raises(ValueError):
        ba.branch_gap_check(1e6, 2.0, A_SC)


def test_kappa_one_reports_both_branches():
    r = ba.theorem_bound(1e5, 1.0, A_SC)
    t = r.terms
    assert math.isfinite(t["condensate_branch_interacting"]) and math.isfinite(t["condensate_branch_ideal"])
