"""Bogoliubov spectrum, thermal occupations and the Bogoliubov free-energy correction.

The pairing acts only on the low-momentum set P_B = {p != 0 : |p| <= N^delta_bog};
outside it the dispersion is the free one, |p|^2 - mu0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .ideal_gas import IdealGasState, cutoff_momentum
from .lattice import (TWO_PI, TailEstimate, build_shells, cubic_lattice_zeta,
                      lattice_sum, sum_integral_upper_bound)

DELTA_BOG = 1.0 / 18.0


@dataclass(frozen=True)
class BogoliubovModel:
    a_n: float
    n0: float
    mu0: float
    beta: float
    n_total: float
    delta_bog: float = DELTA_BOG

    def __post_init__(self):
        if self.a_n < 0 or self.n0 < 0:
            raise ValueError("a_N and N0 must be nonnegative")
        if not self.mu0 < 0:
            raise ValueError("mu0 must be negative")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @classmethod
    def from_state(cls, state: IdealGasState, a: float, delta_bog: float = DELTA_BOG):
        """Model for scattering length ``a`` of the unscaled potential (a_N = a/N)."""
        return cls(a / state.n_total, state.n0, state.mu0, state.beta, state.n_total, delta_bog)

    @property
    def coupling(self) -> float:
        """16 pi a_N N0."""
        return 16.0 * math.pi * self.a_n * self.n0

    @property
    def p_cut(self) -> float:
        return self.n_total ** self.delta_bog

    def in_pb(self, p):
        p = np.asarray(p, dtype=float)
        return (p > 0) & (p <= self.p_cut * (1 + 1e-14))

    def pb_shells(self):
        """Shells of P_B (possibly empty: |p| >= 2 pi on the lattice)."""
        if self.p_cut < TWO_PI:
            return None
        return build_shells(self.p_cut)


@dataclass(frozen=True)
class OccupationPair:
    gamma_p: np.ndarray
    alpha_p: np.ndarray
    gamma_diag: np.ndarray


def _pb_coupling(p, model):
    return np.where(model.in_pb(p), model.coupling, 0.0)


def tau_uv(p, model: BogoliubovModel):
    """tau_p, u_p = cosh tau_p, v_p = sinh tau_p (v_p <= 0)."""
    p = np.asarray(p, dtype=float)
    omega = p * p - model.mu0
    tau = -0.25 * np.log1p(_pb_coupling(p, model) / omega)
    return tau, np.cosh(tau), np.sinh(tau)


def dispersion(p, model: BogoliubovModel):
    p = np.asarray(p, dtype=float)
    omega = p * p - model.mu0
    c = _pb_coupling(p, model)
    return np.where(c > 0, np.sqrt(omega) * np.sqrt(omega + c), omega)


def _bracket(omega, c):
    # omega + c/2 - sqrt(omega (omega + c)), written without cancellation
    return 0.25 * c * c / (omega + 0.5 * c + np.sqrt(omega * (omega + c)))


def e0_ground(model: BogoliubovModel) -> float:
    """Ground state energy -1/2 sum_{P_B} [|p|^2 - mu0 + 8 pi a_N N0 - eps(p)]."""
    shells = model.pb_shells()
    if shells is None or model.coupling == 0:
        return 0.0
    omega = shells.norm_sq - model.mu0
    return -0.5 * math.fsum(shells.multiplicity * _bracket(omega, model.coupling))


def occupations(p, model: BogoliubovModel) -> OccupationPair:
    """gamma_p = (1 + 2 v^2) g + v^2 and |alpha_p| = |u v| (2 g + 1), g = 1/(e^{beta eps} - 1)."""
    _, u, v = tau_uv(p, model)
    with np.errstate(over="ignore"):
        g = 1.0 / np.expm1(model.beta * dispersion(p, model))
    gamma = (1.0 + 2.0 * v * v) * g + v * v
    alpha = np.abs(u * v) * (2.0 * g + 1.0)
    return OccupationPair(gamma, alpha, g)


def x_minus_log1p(x):
    """x - log(1 + x) for x >= 0, Taylor series near 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-2
    xs = x[small]
    acc = np.zeros_like(xs)
    for k in range(11, 1, -1):
        acc = acc * xs + (1.0 if k % 2 == 0 else -1.0) / k
    out[small] = acc * xs * xs
    xl = x[~small]
    out[~small] = xl - np.log1p(xl)
    return out


def _quartic_remainder(x):
    # x - log(1 + x) - x^2/2 + x^3/3 = sum_{k>=4} (-1)^k x^k / k, in [0, x^4/4] and increasing
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.2
    xs = x[small]
    acc = np.zeros_like(xs)
    for k in range(30, 3, -1):
        acc = acc * xs + (1.0 if k % 2 == 0 else -1.0) / k
    out[small] = acc * xs ** 4
    xl = x[~small]
    out[~small] = xl - np.log1p(xl) - 0.5 * xl * xl + xl ** 3 / 3.0
    return out


@dataclass(frozen=True)
class CorrectionSum:
    value: float         # -(1/2beta) sum [x - log(1+x)], x = c/|p|^2
    tail_bound: float    # |value - true| <= tail_bound
    n_max: int


def correction_sum(c: float, beta: float, restrict: float | None = None) -> CorrectionSum:
    """-(1/2 beta) sum over p != 0 (optionally |p| <= restrict) of [c/p^2 - log(1 + c/p^2)].

    The full lattice sum is split as (c^2/2) sum |p|^-4 - (c^3/3) sum |p|^-6 plus
    a nonnegative remainder that decays like |p|^-8.  The power sums are cubic
    lattice zeta values; the remainder is summed over shells with a certified tail.
    """
    if c == 0:
        return CorrectionSum(0.0, 0.0, 0)
    if restrict is not None:
        if restrict < TWO_PI:
            return CorrectionSum(0.0, 0.0, 0)
        shells = build_shells(restrict)
        s = lattice_sum(lambda p: x_minus_log1p(c / p ** 2), shells).truncated_sum
        return CorrectionSum(-s / (2 * beta), 0.0, math.isqrt(int(shells.m[-1])))

    # the quadratic and cubic parts are lattice zeta values; the rest decays like |p|^-8
    n_max = int(min(max(math.ceil((c * c * 1e13) ** 0.2 / TWO_PI), 32), 1000))
    shells = build_shells(TWO_PI * n_max)
    rem = lattice_sum(lambda p: _quartic_remainder(c / p ** 2), shells).truncated_sum
    zeta_part = (0.5 * c ** 2 * cubic_lattice_zeta(2.0) / TWO_PI ** 4
                 - c ** 3 * cubic_lattice_zeta(3.0) / (3.0 * TWO_PI ** 6))
    # omitted remainder <= sum of c^4/(4|p|^8) beyond the cut, bounded by the
    # sum/integral comparison in closed form
    r0 = shells.p_max - TWO_PI * math.sqrt(3.0)
    tail = (4 * math.pi / TWO_PI ** 3) * (c ** 4 / 4.0) * (
        1 / (5 * r0 ** 5) + TWO_PI / (6 * r0 ** 6) + 6 * math.pi / (7 * r0 ** 7))
    total = zeta_part + rem
    return CorrectionSum(-total / (2 * beta), tail / (2 * beta), n_max)


def bog_correction(model: BogoliubovModel) -> float:
    """Bogoliubov correction to the free energy of the thermal cloud (always <= 0)."""
    return correction_sum(model.coupling, model.beta).value


def bog_free_energy_direct(model: BogoliubovModel, p_max: float | None = None):
    """(1/beta) sum over p != 0 of log(1 - e^{-beta eps(p)}), as (value, tail bound)."""
    b = model.beta
    if p_max is None:
        p_max = max(cutoff_momentum(b, model.mu0), model.p_cut)
    shells = build_shells(p_max)

    def f(p):
        with np.errstate(over="ignore"):
            return -np.log1p(-np.exp(-b * dispersion(p, model)))
    est = lattice_sum(f, shells, "integral_bound", scale=1.0 / math.sqrt(b))
    return -est.truncated_sum / b, est.tail_bound / b


@dataclass(frozen=True)
class ExpansionReport:
    lhs: float
    rhs: float
    residual: float          # lhs - rhs
    budget_shape: float      # (N0/N)^2 (N^d + 1/(beta N^d) + 1/(beta^2 N0))
    residual_full_sum: float  # residual when the correction runs over all of Lambda*_+
    pb_size: int


def bog_expansion_check(model: BogoliubovModel, kappa: float | None = None) -> ExpansionReport:
    """Compare the P_B Bogoliubov log-sum with its second-order expansion.

    rhs = (1/beta) sum_{P_B} log(1 - e^{-beta omega}) + 8 pi a_N N0 sum_{P_B} 1/(e^{beta omega} - 1)
          + correction restricted to P_B,   omega = |p|^2 - mu0.
    The residual with the correction summed over every nonzero momentum is
    reported as well.
    """
    if kappa is not None and kappa <= 1:
        raise ValueError("expansion check needs kappa > 1 (macroscopic condensate)")
    b, mu0, n, d = model.beta, model.mu0, model.n_total, model.delta_bog
    shape = (model.n0 / n) ** 2 * (n ** d + 1.0 / (b * n ** d) + 1.0 / (b * b * model.n0))
    full = correction_sum(model.coupling, b).value
    shells = model.pb_shells()
    if shells is None:
        return ExpansionReport(0.0, 0.0, 0.0, shape, -full, 0)
    eps = dispersion(shells.norm, model)
    omega = shells.norm_sq - mu0
    mult = shells.multiplicity
    lhs = math.fsum(mult * np.log1p(-np.exp(-b * eps))) / b
    ideal = math.fsum(mult * np.log1p(-np.exp(-b * omega))) / b
    hartree = 0.5 * model.coupling * math.fsum(mult / np.expm1(b * omega))
    corr_pb = correction_sum(model.coupling, b, restrict=model.p_cut).value
    # the ideal-gas part cancels exactly between both sides; keep it out of the subtraction
    resid = (math.fsum(mult * (np.log1p(-np.exp(-b * eps)) - np.log1p(-np.exp(-b * omega)))) / b
             - hartree - corr_pb)
    rhs = ideal + hartree + corr_pb
    return ExpansionReport(lhs, rhs, resid, shape, resid + corr_pb - full, shells.n_points)


def gamma_diag_sum(model: BogoliubovModel) -> float:
    """sum over p != 0 of 1/(e^{beta eps(p)} - 1)."""
    b = model.beta
    shells = build_shells(max(cutoff_momentum(b, model.mu0), model.p_cut))
    with np.errstate(over="ignore"):
        g = 1.0 / np.expm1(b * dispersion(shells.norm, model))
    return math.fsum(shells.multiplicity * g)


@dataclass(frozen=True)
class ThermoLimit:
    closed_form: float
    numerical: float

    @property
    def rel_diff(self) -> float:
        if self.closed_form == 0:
            return abs(self.numerical)
        return abs(self.numerical / self.closed_form - 1.0)


def _one_minus_q2_log(q):
    # 1 - q^2 log(1 + 1/q^2); large-q series avoids cancellation
    if q > 8.0:
        y = 1.0 / (q * q)
        acc = 0.0
        for k in range(12, 1, -1):
            acc = acc * y + (1.0 if k % 2 == 0 else -1.0) / k
        return acc * y
    if q == 0.0:
        return 1.0
    return 1.0 - q * q * math.log1p(1.0 / (q * q))


def thermo_limit_correction(beta: float, a: float, rho0: float, rtol: float = 1e-8) -> ThermoLimit:
    """Thermodynamic-limit Bogoliubov correction per unit volume.

    Closed form -(16 sqrt(pi) / 3 beta) (a rho0)^(3/2) against the radial
    integral -(1/(2 beta (2pi)^3)) int [c/p^2 - log(1 + c/p^2)] dp, c = 16 pi a rho0,
    evaluated with p = sqrt(c) tan(theta).
    """
    if beta <= 0 or a < 0 or rho0 < 0:
        raise ValueError("need beta > 0, a >= 0, rho0 >= 0")
    x = a * rho0
    closed = -16.0 * math.sqrt(math.pi) / (3.0 * beta) * x ** 1.5
    if x == 0:
        return ThermoLimit(0.0, 0.0)
    c = 16.0 * math.pi * x

    def integrand(theta):
        q = math.tan(theta)
        return _one_minus_q2_log(q) * (1.0 + q * q)

    val, err = integrate.quad(integrand, 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-13, limit=200)
    if not err <= 1e-10 * abs(val):
        raise ArithmeticError(f"radial quadrature did not converge (err={err:.3g})")
    numerical = -(4.0 * math.pi * c ** 1.5 * val) / (2.0 * beta * TWO_PI ** 3)
    res = ThermoLimit(closed, numerical)
    if res.rel_diff > rtol:
        raise ArithmeticError(f"closed form and quadrature disagree: {res}")
    return res
