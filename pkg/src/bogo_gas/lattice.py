"""Momentum lattice 2*pi*Z^3 of the unit torus, grouped into norm shells.

A shell is the set of lattice points with the same |n|^2 = m; the momentum
norm is |p|^2 = 4 pi^2 m.  Radial lattice sums are evaluated shell by shell,
and the part beyond the truncation radius is bounded with the sum/integral
comparison for nonnegative decreasing summands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi

# Largest integer radius |n| for which shell tables are built.
MAX_INT_RADIUS = 1000


class LatticeError(ValueError):
    """Raised for invalid lattice inputs (empty lattice, non-finite summands)."""


class DivergenceError(ArithmeticError):
    """Raised when a comparison integral does not converge."""


@dataclass(frozen=True)
class ShellTable:
    """Norm shells of 2*pi*Z^3 minus the origin, up to ``p_max``."""

    m: np.ndarray            # integer |n|^2, strictly increasing
    multiplicity: np.ndarray  # number of n in Z^3 with |n|^2 = m
    p_max: float

    @property
    def norm_sq(self) -> np.ndarray:
        return (TWO_PI ** 2) * self.m

    @property
    def norm(self) -> np.ndarray:
        return TWO_PI * np.sqrt(self.m)

    @property
    def n_points(self) -> int:
        return int(self.multiplicity.sum())

    def __len__(self):
        return len(self.m)

    def restrict(self, p_cut: float) -> "ShellTable":
        """Sub-table of shells with |p| <= p_cut."""
        keep = self.norm <= p_cut * (1 + 1e-14)
        return ShellTable(self.m[keep], self.multiplicity[keep], min(p_cut, self.p_max))


def _max_m(p_max: float) -> int:
    # tolerate p_max given as 2*pi*sqrt(m) in floating point
    return int(math.floor((p_max / TWO_PI) ** 2 * (1 + 1e-12) + 1e-9))


@lru_cache(maxsize=32)
def _r3_counts(max_m: int) -> np.ndarray:
    """r3[m] = #{n in Z^3 : |n|^2 = m} for 0 <= m <= max_m (exact integers)."""
    R = math.isqrt(max_m)
    k = np.arange(-R, R + 1, dtype=np.int64)
    sq = k * k
    # two-square counts from the full (i, j) grid, then one shifted add per third coordinate
    ij = (sq[:, None] + sq[None, :]).ravel()
    r2 = np.bincount(ij[ij <= max_m], minlength=max_m + 1).astype(np.int64)
    r3 = np.zeros(max_m + 1, dtype=np.int64)
    for s in sq:
        r3[s:] += r2[: max_m + 1 - s]
    r3.flags.writeable = False
    return r3


@lru_cache(maxsize=32)
def _shells_for_m(max_m: int) -> ShellTable:
    r3 = _r3_counts(max_m)
    m = np.nonzero(r3)[0]
    m = m[m > 0]
    mult = r3[m]
    m.flags.writeable = False
    mult.flags.writeable = False
    return ShellTable(m, mult, TWO_PI * math.sqrt(max_m))


def build_shells(p_max: float) -> ShellTable:
    """All shells of 2*pi*Z^3 \\ {0} with 0 < |p| <= p_max.

    Tables are cached by the integer bound floor((p_max/2pi)^2), so repeated
    calls with nearby radii share storage.
    """
    if not np.isfinite(p_max) or p_max < TWO_PI * (1 - 1e-12):
        raise LatticeError(f"p_max={p_max!r} is below 2*pi: the lattice would be empty")
    max_m = _max_m(p_max)
    if math.isqrt(max_m) > MAX_INT_RADIUS:
        raise LatticeError(
            f"p_max={p_max:.6g} exceeds the supported radius 2*pi*{MAX_INT_RADIUS}")
    table = _shells_for_m(max_m)
    return ShellTable(table.m, table.multiplicity, float(p_max))


def brute_force_sum(f: Callable, n_max: int, p_max: float | None = None) -> float:
    """Direct sum of f(|p|) over every integer triple 0 < |n| <= n_max (no shells).

    Independent of the shell machinery; used as an oracle.
    """
    k = np.arange(-n_max, n_max + 1)
    nx, ny, nz = np.meshgrid(k, k, k, indexing="ij")
    n2 = (nx * nx + ny * ny + nz * nz).ravel()
    n2 = n2[n2 > 0]
    if p_max is not None:
        n2 = n2[TWO_PI * np.sqrt(n2) <= p_max * (1 + 1e-14)]
    else:
        n2 = n2[n2 <= n_max * n_max]
    vals = np.asarray(f(TWO_PI * np.sqrt(n2.astype(float))), dtype=float)
    return math.fsum(vals)


@dataclass(frozen=True)
class TailEstimate:
    truncated_sum: float
    tail_bound: float
    lam: float
    heuristic: bool = False

    @property
    def upper(self) -> float:
        return self.truncated_sum + self.tail_bound

    @property
    def interval(self) -> tuple[float, float]:
        if self.heuristic:
            return (self.truncated_sum - self.tail_bound, self.truncated_sum + self.tail_bound)
        return (self.truncated_sum, self.truncated_sum + self.tail_bound)


def _shell_values(f: Callable, shells: ShellTable) -> np.ndarray:
    vals = np.asarray(f(shells.norm), dtype=float)
    if vals.shape != shells.m.shape:
        vals = np.broadcast_to(vals, shells.m.shape)
    if not np.all(np.isfinite(vals)):
        bad = shells.norm[~np.isfinite(vals)][0]
        raise LatticeError(f"summand is not finite at |p|={bad:.6g}")
    return vals


def lattice_sum(f: Callable, shells: ShellTable, tail_policy: str = "none",
                scale: float | None = None) -> TailEstimate:
    """Sum multiplicity * f(|p|) over the shells, with an optional tail bound.

    ``f`` takes an array of momentum norms.  With ``tail_policy="integral_bound"``
    f must be nonnegative and nonincreasing beyond p_max; the returned
    ``tail_bound`` then bounds the omitted part of the infinite sum.
    """
    vals = _shell_values(f, shells)
    # fixed summation order: result does not depend on threading or call history
    total = math.fsum(vals * shells.multiplicity)
    if tail_policy == "none":
        return TailEstimate(total, 0.0, shells.p_max)
    if tail_policy != "integral_bound":
        raise ValueError(f"unknown tail_policy {tail_policy!r}")
    tail = sum_integral_upper_bound(f, shells.p_max, scale=scale)
    return TailEstimate(total, tail, shells.p_max)


def sum_integral_upper_bound(f: Callable, lam: float, scale: float | None = None,
                             rtol: float = 1e-12) -> float:
    """(2pi)^-3 * integral over |p| >= [lam - 2pi*sqrt(3)]_+ of f(|p|)(1 + 2pi/|p| + 6pi/|p|^2) dp.

    For f nonnegative and decreasing this bounds sum_{p != 0, |p| >= lam} f(|p|).
    ``scale`` is the decay length of f (defaults to max(r0, 1)); the radial
    integral is split at a few multiples of it before the infinite piece.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    r0 = max(lam - TWO_PI * math.sqrt(3.0), 0.0)

    def integrand(r):
        fr = float(np.asarray(f(np.array([r])), dtype=float).ravel()[0])
        if fr == 0.0:
            return 0.0
        return fr * (r * r + TWO_PI * r + 6.0 * math.pi)

    if scale is None:
        scale = max(r0, 1.0)
    pts = [r0 + scale * k for k in (0.0, 1.0, 4.0, 16.0, 64.0, 200.0)]
    pieces = []
    for a, b in list(zip(pts[:-1], pts[1:])) + [(pts[-1], np.inf)]:
        out = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=rtol, limit=400, full_output=1)
        val, err = out[0], out[1]
        if len(out) > 3:
            msg = str(out[3])
            if "divergent" in msg:
                raise DivergenceError(f"comparison integral did not converge: {msg}")
            pieces.append((val, err, msg))
        else:
            pieces.append((val, err, None))
    total = math.fsum(v for v, _, _ in pieces)
    # quadpack complains about roundoff on pieces that are negligible; only a
    # large error estimate relative to the whole integral is fatal
    for val, err, msg in pieces:
        if msg is not None and err > 1e-8 * abs(total):
            raise DivergenceError(f"comparison integral did not converge: {msg}")
    if not math.isfinite(total):
        raise DivergenceError("comparison integral is not finite")
    return 4.0 * math.pi * total / TWO_PI ** 3


def auto_lattice_sum(f: Callable, atol: float, p_start: float = 4 * TWO_PI,
                     scale: float | None = None) -> TailEstimate:
    """Grow the truncation radius until the certified tail is below ``atol``.

    Stops once the outermost shell contributes less than 1e-14 of the running
    sum and the integral tail bound is below ``atol``; at the maximal radius
    the tail bound is returned as is.
    """
    p = max(p_start, TWO_PI)
    p_cap = TWO_PI * MAX_INT_RADIUS
    while True:
        shells = build_shells(p)
        est = lattice_sum(f, shells, "integral_bound", scale=scale)
        last = abs(float(np.asarray(f(shells.norm[-1:]))[0]) * shells.multiplicity[-1])
        small_last = last <= 1e-14 * abs(est.truncated_sum) or est.truncated_sum == 0.0
        if (small_last and est.tail_bound <= atol) or p >= p_cap:
            return est
        p = min(p * 1.5, p_cap)


@lru_cache(maxsize=8)
def cubic_lattice_zeta(s: float, dps: int = 30) -> float:
    """Z(s) = sum over n in Z^3 \\ {0} of |n|^(-2s), for s > 3/2.

    Uses the theta-function splitting at t = 1 (Jacobi inversion):
    Z(s) Gamma(s) pi^-s = int_1^inf (t^(s-1) + t^(1/2-s)) (theta(t)^3 - 1) dt
    + 1/(s - 3/2) - 1/s, with theta(t) = sum_k exp(-pi k^2 t).
    """
    import mpmath as mp

    if s <= 1.5:
        raise ValueError("cubic lattice zeta diverges for s <= 3/2")
    with mp.workdps(dps):
        S = mp.mpf(s)

        def theta3m1(t):
            return mp.jtheta(3, 0, mp.exp(-mp.pi * t)) ** 3 - 1

        body = mp.quad(lambda t: (t ** (S - 1) + t ** (mp.mpf(1) / 2 - S)) * theta3m1(t),
                       [1, 2, 8, mp.inf])
        val = mp.pi ** S / mp.gamma(S) * (body + 1 / (S - mp.mpf(3) / 2) - 1 / S)
        return float(val)
