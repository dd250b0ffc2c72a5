"""Ideal Bose gas on the unit torus in the grand-canonical ensemble."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .lattice import TWO_PI, build_shells, lattice_sum, sum_integral_upper_bound

ZETA_3_2 = float(special.zeta(1.5))

# beta (|p|^2 - mu0) beyond which occupation terms are dropped; e^-48 ~ 1e-21
EXP_CUTOFF = 48.0


class SolverError(RuntimeError):
    pass


def beta_c(n: float) -> float:
    """Critical inverse temperature (1/4pi) (N / zeta(3/2))^(-2/3)."""
    if n < 1:
        raise ValueError("N must be >= 1")
    return (n / ZETA_3_2) ** (-2.0 / 3.0) / (4.0 * math.pi)


@dataclass(frozen=True)
class IdealGasState:
    beta: float
    n_total: float
    mu0: float
    n0: float
    beta_c: float
    residual: float = 0.0
    tail_bound: float = 0.0
    p_max: float = 0.0

    @property
    def kappa(self) -> float:
        return self.beta / self.beta_c


def cutoff_momentum(beta: float, mu0: float = 0.0, margin: float = EXP_CUTOFF) -> float:
    """Radius beyond which e^{-beta(p^2 - mu0)} < e^{-margin}."""
    p2 = margin / beta + mu0
    return max(math.sqrt(max(p2, 0.0)), 2 * TWO_PI)


def _occupation(beta, mu0):
    def f(p):
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(beta * (np.asarray(p) ** 2 - mu0))
    return f


def excited_number(beta: float, mu0: float, p_max: float | None = None):
    """sum over p != 0 of 1/(e^{beta(p^2 - mu0)} - 1), with its certified tail."""
    if p_max is None:
        p_max = cutoff_momentum(beta, mu0)
    shells = build_shells(p_max)
    return lattice_sum(_occupation(beta, mu0), shells, "integral_bound",
                       scale=1.0 / math.sqrt(beta))


def _excited_terms(beta, mu0, shells):
    return shells.multiplicity / np.expm1(beta * (shells.norm_sq - mu0))


def solve_mu0(beta: float, n: float) -> IdealGasState:
    """Chemical potential mu0 < 0 such that the lattice occupations add up to N.

    Solved in y = log(-beta mu0), where the left-hand side is smooth and
    monotone; N0 = 1/(e^{-beta mu0} - 1) is obtained with expm1 so that tiny
    |mu0| in the condensed phase keeps full relative accuracy.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if n < 1:
        raise ValueError("N must be >= 1")

    # excited sum is bounded by its mu0 = 0 value, so the lattice radius can be fixed once
    p_max = cutoff_momentum(beta, 0.0)
    shells = build_shells(p_max)

    def total(logy):
        y = math.exp(logy)
        n0 = 1.0 / math.expm1(y)
        mu0 = -y / beta
        occ = _excited_terms(beta, mu0, shells)
        return n0 + math.fsum(occ) - n

    lo = math.log(math.log1p(1.0 / (10.0 * n)))   # N0 = 10 N > N
    hi = math.log(EXP_CUTOFF)
    while total(hi) > 0:
        hi += 1.0
        if hi > 20:
            raise SolverError(f"could not bracket mu0 for beta={beta}, N={n}")
    if total(lo) < 0:
        raise SolverError(f"lower bracket failed for beta={beta}, N={n}")
    logy = optimize.brentq(total, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    y = math.exp(logy)
    mu0 = -y / beta
    n0 = 1.0 / math.expm1(y)
    occ = _excited_terms(beta, mu0, shells)
    resid = n0 + math.fsum(occ) - n
    tail = sum_integral_upper_bound(_occupation(beta, mu0), shells.p_max, scale=1 / math.sqrt(beta))
    return IdealGasState(beta, float(n), mu0, n0, beta_c(n), resid, tail, shells.p_max)


def state_from_kappa(kappa: float, n: float) -> IdealGasState:
    return solve_mu0(kappa * beta_c(n), n)


def _check(state: IdealGasState):
    if not state.mu0 < 0:
        raise ValueError("mu0 must be negative")


def f0_bec(state: IdealGasState) -> float:
    """Condensate free energy (1/beta) log(1 - e^{beta mu0}) + mu0 N0."""
    _check(state)
    b, mu0 = state.beta, state.mu0
    return math.log(-math.expm1(b * mu0)) / b + mu0 * state.n0


def _log_terms(beta, mu0):
    def f(p):
        return -np.log1p(-np.exp(-beta * (np.asarray(p) ** 2 - mu0)))
    return f


def log_sum_plus(beta: float, mu0: float, p_max: float | None = None):
    """(1/beta) sum over p != 0 of log(1 - e^{-beta(p^2 - mu0)}), as (value, tail bound)."""
    if p_max is None:
        p_max = cutoff_momentum(beta, mu0)
    est = lattice_sum(_log_terms(beta, mu0), build_shells(p_max), "integral_bound",
                      scale=1.0 / math.sqrt(beta))
    return -est.truncated_sum / beta, est.tail_bound / beta


def f0_plus(state: IdealGasState) -> float:
    """Free energy of the thermally excited particles of the ideal gas."""
    _check(state)
    val, _ = log_sum_plus(state.beta, state.mu0)
    return val + state.mu0 * (state.n_total - state.n0)


def f0_total(state: IdealGasState) -> float:
    return f0_bec(state) + f0_plus(state)


def grand_potential_identity(state: IdealGasState) -> float:
    """(1/beta) sum over all p (origin included) of log(1 - e^{-beta(p^2 - mu0)}) + mu0 N."""
    _check(state)
    b, mu0 = state.beta, state.mu0
    shells = build_shells(cutoff_momentum(b, mu0))
    terms = shells.multiplicity * np.log1p(-np.exp(-b * (shells.norm_sq - mu0)))
    origin = math.log(-math.expm1(b * mu0))
    return math.fsum(np.concatenate([[origin], terms])) / b + mu0 * state.n_total
