"""Assembly of the free-energy upper bound and its condensed / non-condensed forms.

Every number in a report comes from a call into the other modules; this file
only adds terms together and picks the smaller condensate branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import bogoliubov as bg
from . import condensate as cd
from . import ideal_gas as ig
from .scattering import PotentialSpec, solve_zero_energy

ERROR_EXPONENT = 11.0 / 18.0


class AssemblyError(RuntimeError):
    """A module call failed; ``term`` names the quantity being computed."""

    def __init__(self, term: str, exc: Exception):
        super().__init__(f"{term}: {exc}")
        self.term = term


@dataclass(frozen=True)
class FreeEnergyReport:
    inputs: dict
    terms: dict
    total: float
    selected_branch: str
    error_scale: float
    diagnostics: dict = field(default_factory=dict)
    kind: str = "theorem"


def resolve_scattering_length(a_or_potential) -> float:
    if isinstance(a_or_potential, PotentialSpec):
        return solve_zero_energy(a_or_potential).scattering_length
    a = float(a_or_potential)
    if not a >= 0 or not math.isfinite(a):
        raise ValueError("scattering length must be finite and nonnegative")
    return a


def _call(term, fn, *args):
    try:
        return fn(*args)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        raise AssemblyError(term, exc) from exc


def _state(n, kappa):
    if n < 10:
        raise ValueError("N must be >= 10")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return _call("mu0", ig.state_from_kappa, kappa, n)


def f_bec_any(beta: float, n0: float, a_n: float) -> float:
    """Interacting condensate free energy; a_N = 0 uses the exponential density."""
    if a_n == 0:
        return cd.noncondensed_expansion(beta, n0)
    return cd.f_bec(beta, n0, a_n)


def _inputs(n, kappa, state, a, delta_bog):
    return {
        "N": float(n),
        "kappa": float(kappa),
        "beta": state.beta,
        "a": a,
        "delta_bog": delta_bog,
        "ell": n ** -ERROR_EXPONENT,
    }


def _common_diag(state, corr):
    return {
        "mu0_residual": state.residual,
        "excited_tail_bound": state.tail_bound,
        "bog_correction_tail_bound": corr.tail_bound,
    }


def theorem_bound(n: float, kappa: float, a_or_potential, delta_bog: float = bg.DELTA_BOG) -> FreeEnergyReport:
    """f0_plus + 8 pi a_N N^2 + min{F^BEC - 8 pi a_N N0^2, F0^BEC} + Bogoliubov correction."""
    a = resolve_scattering_length(a_or_potential)
    state = _state(n, kappa)
    a_n = a / n
    f0p = _call("f0_plus", ig.f0_plus, state)
    dd = 8.0 * math.pi * a_n * n * n
    fb = _call("f_bec", f_bec_any, state.beta, state.n0, a_n)
    inter = fb - 8.0 * math.pi * a_n * state.n0 ** 2
    ideal = _call("f0_bec", ig.f0_bec, state)
    corr = _call("bog_correction", bg.correction_sum, 16.0 * math.pi * a_n * state.n0, state.beta)
    branch = "interacting" if inter < ideal else "ideal"
    total = f0p + dd + min(inter, ideal) + corr.value
    terms = {
        "N0": state.n0,
        "mu0": state.mu0,
        "f0_plus": f0p,
        "density_density": dd,
        "f_bec": fb,
        "condensate_branch_interacting": inter,
        "condensate_branch_ideal": ideal,
        "bog_correction": corr.value,
    }
    return FreeEnergyReport(_inputs(n, kappa, state, a, delta_bog), terms, total, branch,
                            n ** ERROR_EXPONENT, _common_diag(state, corr))


def corollary_condensed(n: float, kappa: float, a_or_potential,
                        delta_bog: float = bg.DELTA_BOG) -> FreeEnergyReport:
    """f0_plus + 4 pi a_N (2N^2 - N0^2) + (1/2beta) log(4 beta a_N) + Bogoliubov correction."""
    if not kappa > 1:
        raise ValueError("condensed form needs kappa > 1")
    a = resolve_scattering_length(a_or_potential)
    if not a > 0:
        raise ValueError("condensed form needs a > 0 (log term)")
    state = _state(n, kappa)
    a_n = a / n
    f0p = _call("f0_plus", ig.f0_plus, state)
    inter = 4.0 * math.pi * a_n * (2.0 * n * n - state.n0 ** 2)
    log_term = 0.5 * math.log(4.0 * state.beta * a_n) / state.beta
    corr = _call("bog_correction", bg.correction_sum, 16.0 * math.pi * a_n * state.n0, state.beta)
    terms = {
        "N0": state.n0,
        "mu0": state.mu0,
        "f0_plus": f0p,
        "interaction": inter,
        "log_term": log_term,
        "bog_correction": corr.value,
    }
    return FreeEnergyReport(_inputs(n, kappa, state, a, delta_bog), terms,
                            f0p + inter + log_term + corr.value, "interacting",
                            n ** ERROR_EXPONENT, _common_diag(state, corr), kind="condensed")


def corollary_noncondensed(n: float, kappa: float, a_or_potential,
                           delta_bog: float = bg.DELTA_BOG) -> FreeEnergyReport:
    """F0(beta, N) + 8 pi a_N N^2."""
    if not kappa < 1:
        raise ValueError("non-condensed form needs kappa < 1")
    a = resolve_scattering_length(a_or_potential)
    state = _state(n, kappa)
    f0 = _call("f0_total", ig.f0_total, state)
    dd = 8.0 * math.pi * (a / n) * n * n
    terms = {"N0": state.n0, "mu0": state.mu0, "f0_total": f0, "density_density": dd}
    diag = {"mu0_residual": state.residual, "excited_tail_bound": state.tail_bound}
    return FreeEnergyReport(_inputs(n, kappa, state, a, delta_bog), terms, f0 + dd, "ideal",
                            n ** ERROR_EXPONENT, diag, kind="noncondensed")


@dataclass(frozen=True)
class BranchGap:
    interacting: float   # F^BEC - 8 pi a_N N0^2
    ideal_shifted: float  # F0^BEC - mu0/2
    gap: float           # interacting - ideal_shifted
    budget: float        # c_budget * N^{1/2}
    n0: float
    mu0: float

    @property
    def ok(self) -> bool:
        return self.gap >= -self.budget


def branch_gap_check(n: float, kappa: float, a: float, eps0: float = 0.08,
                     c_budget: float = 1.0) -> BranchGap:
    """Check F^BEC - 8 pi a_N N0^2 >= F0^BEC - mu0/2 up to c_budget * N^{1/2}."""
    if not 0 < eps0 < 1.0 / 12.0:
        raise ValueError("eps0 must lie in (0, 1/12)")
    state = _state(n, kappa)
    if state.n0 > n ** (2.0 / 3.0 + eps0):
        raise ValueError(f"N0 = {state.n0:.6g} exceeds N^(2/3+eps0) = {n ** (2/3 + eps0):.6g}")
    a_n = a / n
    inter = f_bec_any(state.beta, state.n0, a_n) - 8.0 * math.pi * a_n * state.n0 ** 2
    rhs = ig.f0_bec(state) - 0.5 * state.mu0
    return BranchGap(inter, rhs, inter - rhs, c_budget * math.sqrt(n), state.n0, state.mu0)
