"""Time-dependent rate functions and the exponent-selection rules.

Power laws coef * t^exponent are the first-class schedule family: products,
derivatives, and integrals stay closed-form, and every admissibility
condition reduces to coefficient/exponent inequalities. A tabulated
schedule exists to exercise the quadrature fallbacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import InvalidRegime, NonPositiveTime


@dataclass(frozen=True)
class PowerLaw:
    """Schedule value(t) = coef * t^exponent on t > 0."""

    coef: float
    exponent: float

    def __post_init__(self):
        if self.coef <= 0:
            raise ValueError("schedule coefficient must be positive")

    def value(self, t: float) -> float:
        if t <= 0:
            raise NonPositiveTime(f"schedule evaluated at t = {t}")
        return self.coef * t**self.exponent

    __call__ = value

    def derivative(self, t: float) -> float:
        if t <= 0:
            raise NonPositiveTime(f"schedule derivative at t = {t}")
        return self.coef * self.exponent * t ** (self.exponent - 1.0)

    def integral(self, t0: float, t: float) -> float:
        """Closed-form integral of the schedule over [t0, t]."""
        if t0 <= 0 or t <= 0:
            raise NonPositiveTime("integral endpoints must be positive")
        if self.exponent == -1.0:
            return self.coef * math.log(t / t0)
        p = self.exponent + 1.0
        return self.coef * (t**p - t0**p) / p

    def __mul__(self, other: "PowerLaw") -> "PowerLaw":
        return PowerLaw(self.coef * other.coef, self.exponent + other.exponent)

    def __truediv__(self, other: "PowerLaw") -> "PowerLaw":
        return PowerLaw(self.coef / other.coef, self.exponent - other.exponent)

    def squared(self) -> "PowerLaw":
        return PowerLaw(self.coef**2, 2.0 * self.exponent)

    @property
    def is_constant(self) -> bool:
        return self.exponent == 0.0


CONSTANT_ONE = PowerLaw(1.0, 0.0)


@dataclass(frozen=True)
class TabulatedSchedule:
    """Piecewise-linear schedule on a grid; integrals go through quadrature.

    Mainly a test fixture for the non-closed-form code paths.
    """

    times: np.ndarray
    values: np.ndarray

    def value(self, t: float) -> float:
        if t <= 0:
            raise NonPositiveTime(f"schedule evaluated at t = {t}")
        return float(np.interp(t, self.times, self.values))

    __call__ = value

    def derivative(self, t: float, dt: float = 1e-6) -> float:
        return (self.value(t + dt) - self.value(t - dt)) / (2.0 * dt)


@dataclass(frozen=True)
class RateBundle:
    """The rate functions driving one accelerated run: dual learning rate
    eta, energy weight r, inverse sensitivity s, and the implied primal
    averaging rate a = eta / r, anchored at start time t0."""

    eta: PowerLaw
    r: PowerLaw
    s: PowerLaw
    t0: float = 1.0
    a: PowerLaw = field(init=False)

    def __post_init__(self):
        if self.t0 <= 0:
            raise NonPositiveTime("bundle start time must be positive")
        object.__setattr__(self, "a", self.eta / self.r)


def coupled_bundle(alpha_r: float, alpha_s: float, t0: float = 1.0) -> RateBundle:
    """Power-law bundle r = t^alpha_r, s = t^alpha_s with the default
    coupling eta = dr/dt (requires alpha_r > 0)."""
    if alpha_r <= 0:
        raise InvalidRegime("energy-weight exponent must be positive for eta = r'")
    return RateBundle(
        eta=PowerLaw(alpha_r, alpha_r - 1.0),
        r=PowerLaw(1.0, alpha_r),
        s=PowerLaw(1.0, alpha_s),
        t0=t0,
    )


def averaging_weight(a, t0: float, t: float) -> float:
    """Averaging weight w(t) = exp(integral of a over [t0, t]), w(t0) = 1.

    Closed form for power laws, quadrature for anything else exposing value().
    """
    if t < t0:
        raise NonPositiveTime(f"t = {t} precedes t0 = {t0}")
    if isinstance(a, PowerLaw):
        return math.exp(a.integral(t0, t))
    integral, _ = quad(a.value, t0, t, limit=200)
    return math.exp(integral)


@dataclass(frozen=True)
class ConditionReport:
    """One named analytic condition with its verdict."""

    name: str
    passed: bool
    detail: str
    worst_time: float | None = None


@dataclass(frozen=True)
class AdmissibilityReport:
    conditions: tuple[ConditionReport, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> list[str]:
        return [f"{c.name}: {c.detail}" for c in self.conditions if not c.passed]


def check_admissible(bundle: RateBundle, horizon: float) -> AdmissibilityReport:
    """Analytic admissibility of a power-law bundle on [t0, horizon]:
    a = eta / r by construction, s non-decreasing, and eta >= dr/dt."""
    if horizon <= bundle.t0:
        raise NonPositiveTime("horizon must exceed the bundle start time")
    conditions = []

    ratio = bundle.a * bundle.r  # should reproduce eta exactly
    coupling_ok = (
        abs(ratio.coef - bundle.eta.coef) <= 1e-12 * abs(bundle.eta.coef)
        and ratio.exponent == bundle.eta.exponent
    )
    conditions.append(
        ConditionReport(
            "averaging coupling a = eta / r",
            coupling_ok,
            "holds by construction" if coupling_ok else "coefficient mismatch",
        )
    )

    s_ok = bundle.s.exponent >= 0.0
    conditions.append(
        ConditionReport(
            "inverse sensitivity non-decreasing",
            s_ok,
            f"s exponent {bundle.s.exponent:g} "
            + ("(>= 0)" if s_ok else "(< 0: s decreases, noise damping inverted)"),
            worst_time=None if s_ok else bundle.t0,
        )
    )

    # eta(t) >= r'(t) on [t0, horizon]; both sides are power laws, so the
    # ratio eta / r' is monotone and only the endpoints need checking.
    rdot_coef = bundle.r.coef * bundle.r.exponent
    if rdot_coef <= 0.0:
        conditions.append(
            ConditionReport(
                "learning rate dominates energy-weight derivative",
                True,
                "r is non-increasing, condition vacuous",
            )
        )
    else:
        rdot = PowerLaw(rdot_coef, bundle.r.exponent - 1.0)
        endpoints = (bundle.t0, horizon)
        margins = [bundle.eta.value(t) - rdot.value(t) for t in endpoints]
        worst = int(np.argmin(margins))
        ok = margins[worst] >= -1e-12 * max(1.0, bundle.eta.value(endpoints[worst]))
        conditions.append(
            ConditionReport(
                "learning rate dominates energy-weight derivative",
                ok,
                f"min(eta - r') = {margins[worst]:.3e} at t = {endpoints[worst]:g}",
                worst_time=None if ok else endpoints[worst],
            )
        )
    return AdmissibilityReport(tuple(conditions))


def optimal_amd_exponents(alpha_sigma: float, alpha_s: float) -> float:
    """Energy-weight exponent balancing the sensitivity and noise terms of
    the expected-gap bound: alpha_r = alpha_s - alpha_sigma + 1/2."""
    if alpha_sigma >= 0.5:
        raise InvalidRegime(
            f"noise growth exponent {alpha_sigma:g} >= 1/2: expected gap cannot decay"
        )
    alpha_r = alpha_s - alpha_sigma + 0.5
    if alpha_r <= 0:
        raise InvalidRegime(f"derived exponent alpha_r = {alpha_r:g} is not positive")
    return alpha_r


@dataclass(frozen=True)
class SensitivityChoice:
    alpha_s: float
    rate_exponent: float


def optimal_smd_exponent(alpha_sigma: float) -> SensitivityChoice:
    """Optimal inverse-sensitivity exponent for the non-accelerated flow,
    alpha_s = max(0, alpha_sigma + 1/2), with the resulting averaged-iterate
    decay exponent max(alpha_sigma - 1/2, -1)."""
    if alpha_sigma >= 0.5:
        raise InvalidRegime(
            f"noise growth exponent {alpha_sigma:g} >= 1/2: expected gap cannot decay"
        )
    return SensitivityChoice(
        alpha_s=max(0.0, alpha_sigma + 0.5),
        rate_exponent=max(alpha_sigma - 0.5, -1.0),
    )


def as_convergence_conditions(
    eta: PowerLaw, sigma_star: PowerLaw, t0: float = 1.0
) -> AdmissibilityReport:
    """Symbolic check of the almost-sure convergence conditions for power
    laws: eta * sigma_star must be o(1 / sqrt(log t)), and the integral of
    eta must dominate b(t) = integral of (eta * sigma_star)^2 as well as
    sqrt(b log log b).

    Verdicts follow from exponent arithmetic alone; the exponent-zero
    product is reported as a failure since a constant is not o(1/sqrt(log)).
    """
    conditions = []
    prod_exp = eta.exponent + sigma_star.exponent
    if prod_exp < 0:
        c1 = ConditionReport(
            "eta * sigma_star vanishes fast enough",
            True,
            f"product exponent {prod_exp:g} < 0, decays polynomially",
        )
    elif prod_exp == 0:
        c1 = ConditionReport(
            "eta * sigma_star vanishes fast enough",
            False,
            "product is constant, not o(1/sqrt(log t))",
        )
    else:
        c1 = ConditionReport(
            "eta * sigma_star vanishes fast enough",
            False,
            f"product exponent {prod_exp:g} > 0, grows",
        )
    conditions.append(c1)

    # growth orders: integral of eta ~ t^(e+1) (log when e = -1, bounded
    # below that); b ~ t^(2*prod+1) with the same conventions.
    eta_growth = eta.exponent + 1.0
    b_growth = 2.0 * prod_exp + 1.0

    def growth_label(g: float) -> str:
        if g > 0:
            return f"~ t^{g:g}"
        if g == 0:
            return "~ log t"
        return "bounded"

    if eta_growth < 0 or (eta_growth == 0 and b_growth >= 0):
        dominated = False
        detail = (
            f"integral of eta {growth_label(eta_growth)} does not dominate "
            f"b {growth_label(b_growth)}"
        )
    elif b_growth < 0:
        dominated = eta_growth >= 0
        detail = (
            f"b bounded; integral of eta {growth_label(eta_growth)} diverges"
            if dominated
            else "both bounded"
        )
    elif b_growth == 0:
        dominated = eta_growth > 0
        detail = f"b ~ log t, dominated by integral of eta {growth_label(eta_growth)}"
    else:
        # envelope grows like t^(b_growth/2) up to iterated logs
        dominated = eta_growth > b_growth
        detail = (
            f"integral of eta ~ t^{eta_growth:g} vs b ~ t^{b_growth:g} "
            f"and envelope ~ t^{b_growth / 2:g}"
        )
        if not dominated:
            detail += " (not dominated)"
    conditions.append(
        ConditionReport("integral of eta dominates noise accumulation", dominated, detail)
    )
    return AdmissibilityReport(tuple(conditions))
