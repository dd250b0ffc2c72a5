"""Classical one-mode condensate with quartic self-interaction.

The density on C is proportional to exp(-beta(h|z|^4 - mu|z|^2)), optionally
cut off at |z|^2 <= t_max.  With t = |z|^2 the radial identity
int_C phi(|z|^2) dz = int_0^inf phi(t) dt reduces everything to one dimension,
and the substitution s = sqrt(beta h) t - eta turns the weight into exp(eta^2 - s^2).
All moments then follow from scaled complementary error functions:

    I = e^{eta^2} int_{-eta}^{A-eta} e^{-s^2} ds,  R = 1/(2I),  E = e^{-A(A-2 eta)},
    <s> = R(1 - E),  <s^2> = 1/2 - R(eta + (A - eta) E).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

SQRT_PI = math.sqrt(math.pi)
C_TILDE = 4.0
B_TILDE = 1.5
REGIME_EPS = 0.05

# beyond this |eta| (eta < 0) the mean and variance use the asymptotic series
_FAR_NEGATIVE = 8.0


class CondensateError(ValueError):
    pass


@dataclass(frozen=True)
class CondensateModel:
    beta: float
    h: float
    mu: float
    cutoff_A: float = math.inf

    def __post_init__(self):
        if not self.beta > 0:
            raise CondensateError("beta must be positive")
        if self.h < 0:
            raise CondensateError("h must be nonnegative")
        if self.h == 0 and not (self.mu < 0 and math.isinf(self.cutoff_A)):
            raise CondensateError("h = 0 needs mu < 0 and no cutoff")
        if not self.cutoff_A > 0:
            raise CondensateError("cutoff A must be positive")

    @property
    def eta(self) -> float:
        if self.h == 0:
            return -math.inf
        return self.mu * math.sqrt(self.beta / (4.0 * self.h))

    @property
    def t_max(self) -> float:
        """Upper end of the t = |z|^2 range."""
        if math.isinf(self.cutoff_A):
            return math.inf
        return self.cutoff_A / math.sqrt(self.beta * self.h)


@dataclass(frozen=True)
class CondensateMoments:
    log_z: float
    m1: float
    m2: float
    variance: float
    entropy_cl: float

    @property
    def z_norm(self) -> float:
        return float(np.exp(self.log_z))


def cutoff_for(beta: float, h: float, n: float, c_tilde: float = C_TILDE) -> float:
    """A = c_tilde sqrt(beta h) N, i.e. the cutoff |z|^2 <= c_tilde N."""
    return c_tilde * math.sqrt(beta * h) * n


# ---------------------------------------------------------------- s-moments

@dataclass(frozen=True)
class _SStats:
    log_i: float
    mean_shift: float   # eta + <s>, i.e. sqrt(beta h) <t>
    var_s: float


def _log_e(eta, A):
    return -math.inf if math.isinf(A) else -A * (A - 2.0 * eta)


def _log_i(eta, A):
    if eta > 0:
        hi = 1.0 if math.isinf(A) else special.erf(A - eta)
        return eta * eta + math.log(0.5 * SQRT_PI * (hi + special.erf(eta)))
    if math.isinf(A):
        return math.log(0.5 * SQRT_PI * special.erfcx(-eta))
    # E <= 1 here since eta <= 0 < A/2
    return math.log(0.5 * SQRT_PI * (special.erfcx(-eta)
                                      - math.exp(_log_e(eta, A)) * special.erfcx(A - eta)))


def _far_negative_series(x):
    """q = 1 - sqrt(pi) x erfcx(x) and w = x^2 q - 1/2 from the asymptotic series."""
    u = 0.5 / (x * x)
    q = w = 0.0
    coef = 1.0   # (2k-1)!! u^k
    for k in range(1, 31):
        coef *= (2 * k - 1) * u
        sign = 1.0 if k % 2 == 1 else -1.0
        q += sign * coef
        if k >= 2:
            w += sign * coef / (2.0 * u)
    return q, w


def _s_stats(eta: float, A: float) -> _SStats:
    if not math.isinf(A) and not eta < A:
        raise CondensateError(f"need eta < A (eta={eta}, A={A})")
    log_i = _log_i(eta, A)
    log_e = _log_e(eta, A)
    R = 0.5 * math.exp(-log_i)
    RE = 0.5 * math.exp(log_e - log_i) if log_e > -745 else 0.0
    if eta < -_FAR_NEGATIVE and RE < 1e-17 * R:
        x = -eta
        q, w = _far_negative_series(x)
        P = 1.0 - q
        mean = x * q / P - RE
        var = (q * q - 2.0 * q - 2.0 * w) / (2.0 * P * P)
        if RE:
            var += -(A - eta) * RE + 2.0 * R * RE - RE * RE
        return _SStats(log_i, mean, var)
    ds = R - RE
    mean = eta + ds
    tail = 0.0 if RE == 0.0 else (A - eta) * RE
    var = 0.5 - R * eta - tail - ds * ds
    return _SStats(log_i, mean, var)


def upsilon(eta: float, A: float = math.inf) -> float:
    """Upsilon(eta) = sqrt(beta h) <|z|^2>, evaluated overflow-free."""
    return _s_stats(float(eta), float(A)).mean_shift


def upsilon_inf_reference(eta: float) -> float:
    """eta + e^{-eta^2}/(sqrt(pi) erfc(-eta)), the uncut closed form, written with erfcx."""
    return eta + 1.0 / (SQRT_PI * special.erfcx(-eta))


@dataclass(frozen=True)
class ErfCheck:
    scaled: float
    expansion: float
    bound: float

    @property
    def difference(self) -> float:
        return abs(self.scaled - self.expansion)

    @property
    def ok(self) -> bool:
        return self.difference <= self.bound


def erf_asymptotic_check(x: float) -> ErfCheck:
    """2 e^{x^2} int_x^inf e^{-t^2} dt against 1/x - 1/(2x^3), with remainder bound 3/(4x^5)."""
    if not x > 0:
        raise ValueError("x must be positive")
    return ErfCheck(SQRT_PI * float(special.erfcx(x)), 1.0 / x - 0.5 / x ** 3, 0.75 / x ** 5)


# ---------------------------------------------------------------- moments

def moments(model: CondensateModel) -> CondensateMoments:
    """Partition value, first two moments of t = |z|^2 and the classical entropy."""
    b, h, mu = model.beta, model.h, model.mu
    if h == 0:
        lam = 1.0 / (b * -mu)
        log_z = math.log(lam)
        m1, var = lam, lam * lam
        m2 = var + m1 * m1
        return CondensateMoments(log_z, m1, m2, var, log_z + b * (-mu * m1))
    st = _s_stats(model.eta, model.cutoff_A)
    sbh = math.sqrt(b * h)
    log_z = st.log_i - 0.5 * math.log(b * h)
    m1 = st.mean_shift / sbh
    var = st.var_s / (b * h)
    m2 = var + m1 * m1
    ent = log_z + b * (h * m2 - mu * m1)
    return CondensateMoments(log_z, m1, m2, var, ent)


def moments_quadrature(model: CondensateModel, rtol: float = 1e-13) -> CondensateMoments:
    """Same quantities by adaptive quadrature in s, independent of the erf closed forms."""
    b, h, mu = model.beta, model.h, model.mu
    if h == 0:
        raise CondensateError("quadrature path needs h > 0")
    eta, A = model.eta, model.cutoff_A
    s_lo = -eta
    s_peak = max(s_lo, 0.0)
    s_hi = math.sqrt(s_peak * s_peak + 90.0)
    if not math.isinf(A):
        s_hi = min(s_hi, A - eta)
    if s_peak >= s_hi:
        s_peak = s_lo

    def w(s):
        return math.exp(-(s * s - s_peak * s_peak))

    pts = sorted({s_lo, s_peak, min(s_peak + 1.0, s_hi), s_hi})
    pts = [p for p in pts if s_lo <= p <= s_hi]

    def integral(fn):
        tot = 0.0
        for a, c in zip(pts[:-1], pts[1:]):
            if c > a:
                val, err = integrate.quad(fn, a, c, epsabs=0.0, epsrel=rtol, limit=200)
                tot += val
        return tot

    i0 = integral(w)
    i1 = integral(lambda s: (s + eta) * w(s)) / i0
    i2 = integral(lambda s: (s + eta - i1) ** 2 * w(s)) / i0
    log_i = math.log(i0) + eta * eta - s_peak * s_peak
    log_z = log_i - 0.5 * math.log(b * h)
    m1 = i1 / math.sqrt(b * h)
    var = i2 / (b * h)
    m2 = var + m1 * m1
    return CondensateMoments(log_z, m1, m2, var, log_z + b * (h * m2 - mu * m1))


# ---------------------------------------------------------------- solving for mu

def solve_mu(beta: float, h: float, n0_target: float, cutoff_A: float = math.inf,
             rtol: float = 1e-12) -> CondensateModel:
    """Chemical potential with <|z|^2> = n0_target, found by bracketing in eta."""
    if not h > 0:
        raise CondensateError("solve_mu needs h > 0; use the exponential branch for h = 0")
    if not n0_target > 0:
        raise CondensateError("N0 target must be positive")
    y = math.sqrt(beta * h) * n0_target
    A = float(cutoff_A)
    if not math.isinf(A) and not y < A:
        raise CondensateError(f"N0 target above the cutoff range (sqrt(beta h) N0 = {y:.6g} >= A = {A:.6g})")

    def g(e):
        return upsilon(e, A) - y

    # Upsilon(eta) ~ -1/(2 eta) far left and ~ eta (or A) far right
    lo = min(y - 1.0, -0.5 / y - 1.0)
    hi = y + 1.0
    if not math.isinf(A):
        hi = min(hi, A - 1e-300)
    step = 1.0
    while g(lo) > 0:
        step *= 2.0
        lo -= step
    step = 1.0
    while g(hi) < 0:
        if not math.isinf(A):
            # Upsilon -> A only as eta -> inf; push further out
            hi = hi + step
        else:
            hi += step
        step *= 2.0
        if step > 1e12:
            raise CondensateError("could not bracket eta")
    eta = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    res = abs(g(eta))
    if res > rtol * y:
        raise CondensateError(f"eta solve residual {res:.3g} exceeds tolerance")
    mu = 2.0 * eta * math.sqrt(h / beta)
    return CondensateModel(beta, h, mu, A)


def solve_mu_cutoff(beta: float, h: float, m: float, n: float,
                    c_tilde: float = C_TILDE, b_tilde: float = B_TILDE) -> CondensateModel:
    """Cutoff variant |z|^2 <= c_tilde N, requiring 0 < M < b_tilde N and 1 < b_tilde < c_tilde/2."""
    if not 1.0 < b_tilde < 0.5 * c_tilde:
        raise CondensateError("need 1 < b_tilde < c_tilde/2")
    if not 0 < m < b_tilde * n:
        raise CondensateError(f"M = {m:.6g} outside (0, b_tilde N)")
    return solve_mu(beta, h, m, cutoff_for(beta, h, n, c_tilde))


def zeta_density(model: CondensateModel, t):
    """Normalized cutoff density at t = |z|^2; zero beyond the cutoff."""
    if math.isinf(model.cutoff_A):
        raise CondensateError("zeta_density needs a finite cutoff")
    t = np.asarray(t, dtype=float)
    log_z = moments(model).log_z
    b, h, mu = model.beta, model.h, model.mu
    dens = np.exp(-b * (h * t * t - mu * t) - log_z)
    return np.where((t >= 0) & (t <= model.t_max * (1 + 1e-15)), dens, 0.0)


# ---------------------------------------------------------------- free energy

def f_bec_from_model(model: CondensateModel, n0: float) -> float:
    return -moments(model).log_z / model.beta + model.mu * n0


def f_bec(beta: float, n0: float, a_n: float) -> float:
    """-(1/beta) log int exp(-beta(4 pi a_N |z|^4 - mu |z|^2)) dz + mu N0 at the matching mu."""
    if not a_n > 0 or not n0 > 0:
        raise CondensateError("f_bec needs a_N > 0 and N0 > 0")
    model = solve_mu(beta, 4.0 * math.pi * a_n, n0)
    return f_bec_from_model(model, n0)


def condensed_expansion(beta: float, n0: float, a_n: float) -> float:
    """4 pi a_N N0^2 + (1/2beta) log(4 beta a_N)."""
    return 4.0 * math.pi * a_n * n0 * n0 + 0.5 * math.log(4.0 * beta * a_n) / beta


def noncondensed_expansion(beta: float, n0: float) -> float:
    """-(1/beta) log N0 - 1/beta."""
    return -(math.log(n0) + 1.0) / beta


def condensed_residual_exact(eta: float) -> float:
    """beta (F^BEC - 4 pi a_N N0^2 - (1/2beta) log(4 beta a_N)) for the uncut density at eta.

    Equals log 2 - log erfc(-eta) - R^2 with R = e^{-eta^2}/(sqrt(pi) erfc(-eta));
    used as an independent check on the generic path.
    """
    R = 1.0 / (SQRT_PI * special.erfcx(-eta))
    return math.log(2.0) - math.log(special.erfc(-eta)) - R * R


@dataclass(frozen=True)
class FluctuationCheck:
    log_term: float     # (1/2beta) log(4 beta a_N)
    fluct_term: float   # 4 pi a_N Var - S/beta
    residual: float

    @property
    def relative(self) -> float:
        return self.residual / abs(self.log_term)


def fluctuation_identity_check(beta: float, n0: float, a_n: float) -> FluctuationCheck:
    if not a_n > 0:
        raise CondensateError("fluctuation identity needs a_N > 0")
    h = 4.0 * math.pi * a_n
    mom = moments(solve_mu(beta, h, n0))
    log_term = 0.5 * math.log(4.0 * beta * a_n) / beta
    fl = h * mom.variance - mom.entropy_cl / beta
    return FluctuationCheck(log_term, fl, abs(log_term - fl))


@dataclass(frozen=True)
class Regime:
    label: str
    lower: float   # N^{5/6 - eps}
    upper: float   # N^{5/6 + eps}
    eps: float


def classify_regime(n0: float, n: float, eps: float = REGIME_EPS) -> Regime:
    lo, hi = n ** (5 / 6 - eps), n ** (5 / 6 + eps)
    if n0 >= hi:
        label = "condensed"
    elif n0 <= lo:
        label = "noncondensed"
    else:
        label = "intermediate"
    return Regime(label, lo, hi, eps)
