import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bogo_gas import lattice as lt


def test_r3_small_values():
    table = lt.build_shells(lt.TWO_PI * math.sqrt(9))
    got = dict(zip(table.m.tolist(), table.multiplicity.tolist()))
    # r3(m) for m = 1..9 by counting
    assert got == {1: 6, 2: 12, 3: 8, 4: 6, 5: 24, 6: 24, 8: 12, 9: 30}


def test_r3_matches_direct_count():
    table = lt.build_shells(lt.TWO_PI * 12)
    k = np.arange(-12, 13)
    n2 = (k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2).ravel()
    counts = np.bincount(n2[(n2 > 0) & (n2 <= 144)], minlength=145)
    assert np.array_equal(counts[table.m], table.multiplicity)
    assert table.n_points == int(counts.sum())


@pytest.mark.parametrize("f", [
    lambda p: np.exp(-0.02 * p ** 2),
    lambda p: 1.0 / (p ** 2 + 1.0),
    lambda p: np.log1p(1.0 / p),
])
def test_shell_sum_matches_brute_force(f):
    s = lt.lattice_sum(f, lt.build_shells(lt.TWO_PI * 10)).truncated_sum
    b = lt.brute_force_sum(f, 10)
    assert abs(s / b - 1) < 1e-12


def test_empty_lattice_rejected():
    with pytest.raises(lt.LatticeError):
        lt.build_shells(3.0)


def test_radius_cap():
    with pytest.raises(lt.LatticeError):
        lt.build_shells(lt.TWO_PI * (lt.MAX_INT_RADIUS + 1))


def test_nonfinite_summand_rejected():
    with pytest.raises(lt.LatticeError):
        lt.lattice_sum(lambda p: np.where(p > 20, np.inf, 1.0), lt.build_shells(lt.TWO_PI * 5))


def test_divergent_tail_detected():
    with pytest.raises(lt.DivergenceError):
        lt.sum_integral_upper_bound(lambda p: 1.0 / p ** 3, 10.0)


def test_restrict_consistent():
    t = lt.build_shells(lt.TWO_PI * 10)
    r = t.restrict(lt.TWO_PI * 3)
    assert r.m.max() == 9 and np.all(r.norm <= lt.TWO_PI * 3 * (1 + 1e-14))


def test_cubic_lattice_zeta_value():
    # theta-function evaluation at 30 digits, frozen
    assert lt.cubic_lattice_zeta(2.0) == pytest.approx(16.532315959761668, rel=1e-15)


def test_cubic_lattice_zeta_bracketed_by_shells():
    est = lt.lattice_sum(lambda p: (p / lt.TWO_PI) ** -4, lt.build_shells(lt.TWO_PI * 200),
                         "integral_bound", scale=lt.TWO_PI * 200)
    z = lt.cubic_lattice_zeta(2.0)
    assert est.truncated_sum < z < est.upper


def test_cubic_lattice_zeta_large_s():
    # for large s the sum is dominated by the 6 nearest neighbours and 12 next
    s = 8.0
    direct = lt.lattice_sum(lambda p: (p / lt.TWO_PI) ** (-2 * s), lt.build_shells(lt.TWO_PI * 40)).truncated_sum
    assert lt.cubic_lattice_zeta(s) == pytest.approx(direct, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(b=st.floats(0.001, 0.5), lam_n=st.integers(2, 15))
def test_tail_bound_brackets_full_sum(b, lam_n):
    f = lambda p: np.exp(-b * p)
    lo = lt.lattice_sum(f, lt.build_shells(lt.TWO_PI * lam_n), "integral_bound")
    full = lt.auto_lattice_sum(f, atol=1e-14, p_start=lt.TWO_PI * 60).upper
    assert lo.truncated_sum <= full * (1 + 1e-12)
    assert full <= lo.upper * (1 + 1e-12)


def test_auto_sum_converges():
    est = lt.auto_lattice_sum(lambda p: np.exp(-0.1 * p ** 2), atol=1e-13)
    # sum over Z^3 minus origin of exp(-0.4 pi^2 |n|^2) = theta^3 - 1
    import mpmath as mp
    ref = float(mp.jtheta(3, 0, mp.exp(-0.4 * mp.pi ** 2)) ** 3 - 1)
    assert est.truncated_sum == pytest.approx(ref, rel=1e-13)
