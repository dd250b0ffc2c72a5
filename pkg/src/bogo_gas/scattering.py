"""Zero-energy s-wave scattering for radial, compactly supported, nonnegative potentials.

Units: box side 1, hbar = 2m = 1, so the two-body relative problem reads
Delta f = (V/2) f with f -> 1 at infinity.  With u(r) = r f(r) this becomes
u'' = (V/2) u, u(0) = 0, and outside the support u(r) = c (r - a).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate


class ScatteringError(RuntimeError):
    pass


@dataclass(frozen=True)
class PotentialSpec:
    kind: str                    # "hard_core" | "square_barrier" | "tabulated"
    radius: float = 0.0
    height: float = 0.0
    r_grid: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "hard_core":
            if not self.radius > 0:
                raise ValueError("hard core radius must be positive")
        elif self.kind == "square_barrier":
            if not self.radius > 0:
                raise ValueError("barrier radius must be positive")
            if not self.height >= 0 or not math.isfinite(self.height):
                raise ValueError("barrier height must be finite and nonnegative")
        elif self.kind == "tabulated":
            r = np.asarray(self.r_grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
                raise ValueError("tabulated potential needs matching r and V columns (>= 2 rows)")
            if np.any(np.diff(r) <= 0):
                raise ValueError("tabulated r must be strictly increasing")
            if r[0] < 0:
                raise ValueError("tabulated r must be nonnegative")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ValueError("tabulated V must be finite and nonnegative")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def hard_core(cls, radius):
        return cls("hard_core", radius=float(radius))

    @classmethod
    def square_barrier(cls, radius, height):
        return cls("square_barrier", radius=float(radius), height=float(height))

    @classmethod
    def tabulated(cls, r, v):
        return cls("tabulated", r_grid=tuple(map(float, r)), values=tuple(map(float, v)))

    @property
    def support_radius(self) -> float:
        if self.kind == "tabulated":
            v = np.asarray(self.values)
            nz = np.nonzero(v)[0]
            r = np.asarray(self.r_grid)
            if len(nz) == 0:
                return float(r[-1])
            # linear interpolation: V vanishes after the node following the last nonzero value
            return float(r[min(nz[-1] + 1, len(r) - 1)])
        return self.radius

    def scaled(self, n: float) -> "PotentialSpec":
        """The Gross-Pitaevskii scaled potential V_N(x) = N^2 V(N x)."""
        if self.kind == "hard_core":
            return PotentialSpec.hard_core(self.radius / n)
        if self.kind == "square_barrier":
            return PotentialSpec.square_barrier(self.radius / n, self.height * n * n)
        r = np.asarray(self.r_grid) / n
        return PotentialSpec.tabulated(r, np.asarray(self.values) * n * n)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "hard_core":
            return np.where(r <= self.radius, np.inf, 0.0)
        if self.kind == "square_barrier":
            return np.where(r <= self.radius, self.height, 0.0)
        grid = np.asarray(self.r_grid)
        return np.interp(r, grid, np.asarray(self.values), left=self.values[0], right=0.0)


def read_tabulated(path) -> PotentialSpec:
    """Two whitespace-separated columns (r, V); '#' starts a comment."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    r, v = zip(*rows)
    spec = PotentialSpec.tabulated(r, v)
    if spec.r_grid[0] > 0:
        raise ValueError(f"{path}: tabulated grid must start at r = 0 to cover [0, R_support]")
    return spec


@dataclass(frozen=True)
class ScatteringSolution:
    scattering_length: float
    support_radius: float
    r: np.ndarray          # geometric grid on (0, R_support]
    u: np.ndarray          # u(r) = r f(r), normalised so that f -> 1
    potential: PotentialSpec = field(repr=False)
    _u_eval: Callable = field(repr=False, default=None)
    _du_eval: Callable = field(repr=False, default=None)

    @property
    def f_values(self) -> np.ndarray:
        return self.u / self.r

    def f(self, r):
        """Scattering solution f(r), with f(r) = 1 - a/r outside the support."""
        r = np.asarray(r, dtype=float)
        a = self.scattering_length
        out = np.where(r > 0, 1.0 - a / np.where(r > 0, r, 1.0), 0.0)
        inside = r < self.support_radius
        if self.potential.kind == "hard_core":
            return np.clip(out, 0.0, None)
        if np.any(inside):
            ri = r[inside]
            out = np.array(out, dtype=float)
            out[inside] = np.where(ri > 0, self._u_eval(ri) / np.where(ri > 0, ri, 1.0),
                                   self._du_eval(np.zeros_like(ri)))
        return out

    def df(self, r):
        """Radial derivative f'(r)."""
        r = np.asarray(r, dtype=float)
        a = self.scattering_length
        out = a / (r * r)
        if self.potential.kind == "hard_core":
            return np.where(r > a, out, 0.0)
        inside = r < self.support_radius
        if np.any(inside):
            ri = r[inside]
            out = np.array(out, dtype=float)
            out[inside] = (self._du_eval(ri) * ri - self._u_eval(ri)) / (ri * ri)
        return out


def _segment_nodes(V: PotentialSpec) -> np.ndarray:
    R = V.support_radius
    if V.kind == "tabulated":
        nodes = np.asarray(V.r_grid)
        nodes = nodes[nodes < R]
        return np.unique(np.concatenate([[0.0], nodes, [R]]))
    return np.array([0.0, R])


def solve_zero_energy(V: PotentialSpec, n_grid: int = 2048) -> ScatteringSolution:
    """Solve u'' = (V/2) u from u(0)=0, u'(0)=1 and read off the scattering length."""
    R = V.support_radius
    grid = np.geomspace(R * 1e-6, R, n_grid)
    if V.kind == "hard_core":
        a = V.radius
        # f vanishes on the core and equals 1 - a/r at r = R = a
        return ScatteringSolution(a, R, grid, np.clip(grid - a, 0.0, None), V)

    nodes = _segment_nodes(V)
    if V.kind == "square_barrier":
        def rhs(r, s):
            return (s[1], 0.5 * V.height * s[0])
    else:
        rg, vg = np.asarray(V.r_grid), np.asarray(V.values)

        def rhs(r, s):
            return (s[1], 0.5 * np.interp(r, rg, vg, right=0.0) * s[0])

    # u grows like exp(sqrt(V/2) r); split so each piece grows by at most e^20 and
    # renormalise between pieces (the equation is linear), keeping the log scale
    pieces = []   # (lo, dense solution, log of the factor that maps it to the global normalisation)
    y = np.array([0.0, 1.0])
    log_scale = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        for lo, hi in zip(nodes[:-1], nodes[1:]):
            vmax = V.height if V.kind == "square_barrier" else float(np.max(
                np.interp(np.concatenate([[lo, hi], rg[(rg > lo) & (rg < hi)]]), rg, vg)))
            k = math.sqrt(max(vmax, 0.0) / 2.0)
            n_sub = max(1, int(math.ceil(k * (hi - lo) / 20.0)))
            edges = np.linspace(lo, hi, n_sub + 1)
            for a_, b_ in zip(edges[:-1], edges[1:]):
                sol = integrate.solve_ivp(rhs, (a_, b_), y, method="DOP853", rtol=1e-12,
                                          atol=1e-14 * np.max(np.abs(y)), dense_output=True)
                if not sol.success or not np.all(np.isfinite(sol.y)):
                    raise ScatteringError(f"radial integration failed on [{a_}, {b_}]: {sol.message}")
                pieces.append((a_, sol.sol, log_scale))
                y = sol.y[:, -1]
                norm = float(np.max(np.abs(y)))
                y = y / norm
                log_scale += math.log(norm)

    u_R, du_R = y
    # exterior: u = c (r - a); evaluate the affine form at R and 1.5 R
    c = du_R
    if not c > 0:
        raise ScatteringError("non-positive exterior slope; potential must be nonnegative")
    a = R - u_R / c
    r2 = 1.5 * R
    a2 = r2 - (u_R + c * (r2 - R)) / c
    if abs(a - a2) > 1e-12 * max(R, abs(a)):
        raise ScatteringError(f"exterior affine fit inconsistent: {a} vs {a2}")

    los = np.array([p[0] for p in pieces])

    def _eval(r, comp):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        idx = np.clip(np.searchsorted(los, r, side="right") - 1, 0, len(pieces) - 1)
        for k in np.unique(idx):
            sel = idx == k
            _, dense, ls = pieces[k]
            out[sel] = dense(r[sel])[comp] * math.exp(ls - log_scale)
        return out / c

    u_grid = _eval(grid, 0)
    return ScatteringSolution(float(a), R, grid, u_grid, V,
                              lambda r: _eval(r, 0), lambda r: _eval(r, 1))


def square_barrier_length(radius: float, height: float) -> float:
    """Closed-form scattering length R - tanh(kR)/k, k = sqrt(V0/2)."""
    if height == 0:
        return 0.0
    k = math.sqrt(height / 2.0)
    return radius - math.tanh(k * radius) / k


def scattering_length_scaled(a: float, n: float) -> float:
    if n < 1:
        raise ValueError("N must be >= 1")
    return a / n


def _check_ell(sol: ScatteringSolution, ell: float):
    if ell < 2.0 * sol.support_radius * (1 - 1e-14):
        raise ValueError(f"ell={ell} must be at least twice the support radius {sol.support_radius}")


def f_ell(sol: ScatteringSolution, ell: float) -> Callable:
    """Truncated profile: f(r)/f(ell) for r < ell, 1 beyond."""
    _check_ell(sol, ell)
    f_at_ell = 1.0 - sol.scattering_length / ell

    def profile(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < ell, sol.f(np.minimum(r, ell)) / f_at_ell, 1.0)

    return profile


def energy_f_ell(a_n: float, ell: float) -> float:
    """E_ell[f_ell] = 4 pi a_N / (1 - a_N/ell)."""
    if ell <= a_n:
        raise ValueError("ell must exceed the scattering length")
    return 4.0 * math.pi * a_n / (1.0 - a_n / ell)


def _radial_quad(fun, sol: ScatteringSolution, ell: float) -> float:
    pts = [0.0]
    if sol.potential.kind == "hard_core":
        pts.append(sol.scattering_length)
    else:
        pts.extend(n for n in _segment_nodes(sol.potential)[1:] if n < ell)
    pts.append(ell)
    pts = sorted(set(pts))
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lambda r: float(fun(np.array([r]))[0]), lo, hi,
                                epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return 4.0 * math.pi * total


def energy_functional(sol: ScatteringSolution, ell: float, phi=None, dphi=None) -> float:
    """int_{B_ell} |grad phi|^2 + (1/2) V |phi|^2 by radial quadrature (default phi = f_ell)."""
    _check_ell(sol, ell)
    fl = 1.0 - sol.scattering_length / ell
    if phi is None:
        def phi(r):
            return sol.f(r) / fl

        def dphi(r):
            return sol.df(r) / fl
    V = sol.potential
    if V.kind == "hard_core":
        # phi must vanish on the core; only the kinetic part remains
        a = sol.scattering_length

        def integrand(r):
            return np.where(r > a, dphi(r) ** 2, 0.0) * r * r
    else:
        def integrand(r):
            return (dphi(r) ** 2 + 0.5 * V(r) * phi(r) ** 2) * r * r
    return _radial_quad(integrand, sol, ell)


@dataclass(frozen=True)
class ULIntegrals:
    int_u: float
    int_u2: float
    int_grad_f: float
    bound_u: float
    bound_u2: float
    bound_grad_f: float

    @property
    def within_bounds(self) -> bool:
        tol = 1e-10
        return (self.int_u <= self.bound_u * (1 + tol) and self.int_u2 <= self.bound_u2 * (1 + tol)
                and self.int_grad_f <= self.bound_grad_f * (1 + tol))


def u_ell_integrals(sol: ScatteringSolution, ell: float) -> ULIntegrals:
    """Integrals of u_ell = 1 - f_ell, u_ell^2 and |grad f_ell| over R^3.

    The bounds come from the pointwise estimate 0 <= u_ell <= 1 on r < a and
    u_ell <= 2a/r on [a, ell), and the gradient bound 8 pi a ell.
    """
    _check_ell(sol, ell)
    fl = 1.0 - sol.scattering_length / ell
    a = sol.scattering_length

    def u(r):
        return 1.0 - sol.f(r) / fl

    iu = _radial_quad(lambda r: u(r) * r * r, sol, ell)
    iu2 = _radial_quad(lambda r: u(r) ** 2 * r * r, sol, ell)
    ig = _radial_quad(lambda r: np.abs(sol.df(r)) / fl * r * r, sol, ell)
    bu = 4.0 * math.pi * (a ** 3 / 3.0 + a * (ell ** 2 - a ** 2))
    bu2 = 4.0 * math.pi * (a ** 3 / 3.0 + 4.0 * a * a * (ell - a))
    bg = 8.0 * math.pi * a * ell
    return ULIntegrals(iu, iu2, ig, bu, bu2, bg)
