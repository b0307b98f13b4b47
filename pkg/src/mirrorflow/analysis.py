"""Energy diagnostics, executable convergence bounds, ensemble statistics,
log-log rate fitting, the iterated-logarithm noise envelope, and the
shadowing experiment that compares a stochastic path against deterministic
restarts over fixed-length windows.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .dynamics import SystemSpec, Trajectory, energy_value, simulate
from .errors import BoundaryMinimizer, NonPositiveValues
from .maps import MirrorMap
from .noise import NoiseModel, NoiseStream, ZeroNoise
from .objectives import MinimizerCertificate
from .schedules import PowerLaw, RateBundle


@dataclass(frozen=True)
class EnergyContext:
    """Everything the energy needs: geometry, objective with its minimizer
    certificate, and the rate bundle supplying r(t), s(t)."""

    mmap: MirrorMap
    objective: object
    certificate: MinimizerCertificate
    rates: RateBundle

    def __post_init__(self):
        if self.certificate.boundary:
            raise BoundaryMinimizer("energy needs an interior dual anchor")

    def value(self, x: np.ndarray, z: np.ndarray, t: float) -> float:
        gap = self.objective.value(x) - self.certificate.f_star
        return energy_value(self.mmap, self.rates, self.certificate.z_star, gap, z, t)

    def initial_value(self, x0: np.ndarray, z0: np.ndarray) -> float:
        return self.value(np.asarray(x0, float), np.asarray(z0, float), self.rates.t0)


def lyapunov_drift_check(traj: Trajectory, ctx: EnergyContext) -> float:
    """Max excess of the central-difference energy derivative over the drift
    bound gap * (r' - eta) + psi(x*) * s' along a deterministic averaged run.
    The excess is a discretization artifact and shrinks with h."""
    if traj.record_stride != 1:
        raise ValueError("per-step recording required")
    if not traj.has_energy:
        raise BoundaryMinimizer("trajectory carries no energy series")
    rates = ctx.rates
    psi_star_pt = ctx.mmap.psi(ctx.certificate.x_star)
    ts, E = traj.times, traj.energy
    worst = -math.inf
    for i in range(1, len(ts) - 1):
        dldt = (E[i + 1] - E[i - 1]) / (ts[i + 1] - ts[i - 1])
        rhs = traj.gap[i] * (
            rates.r.derivative(ts[i]) - rates.eta.value(ts[i])
        ) + psi_star_pt * rates.s.derivative(ts[i])
        worst = max(worst, dldt - rhs)
    return worst


def deterministic_rate_bound(ctx: EnergyContext, initial_energy: float, t: float) -> float:
    """Gap bound (psi(x*) (s(t) - s(t0)) + L0) / r(t) for admissible
    deterministic runs."""
    rates = ctx.rates
    psi_star_pt = ctx.mmap.psi(ctx.certificate.x_star)
    return (
        psi_star_pt * (rates.s.value(t) - rates.s.value(rates.t0)) + initial_energy
    ) / rates.r.value(t)


def _ito_correction_integral(
    rates: RateBundle, noise: NoiseModel, t: float
) -> float:
    """Integral over [t0, t] of eta^2 sigma_star^2 / s; closed form when the
    volatility bound is a power law, quadrature otherwise."""
    try:
        sig = noise.sigma_star_power()
    except ValueError:
        integrand = lambda tau: (
            rates.eta.value(tau) ** 2 * noise.sigma_star_sq(tau) / rates.s.value(tau)
        )
        val, _ = quad(integrand, rates.t0, t, limit=200)
        return val
    composite = rates.eta.squared() * sig.squared() / rates.s
    return composite.integral(rates.t0, t)


def expected_value_bound(
    ctx: EnergyContext, noise: NoiseModel, initial_energy: float, t: float
) -> float:
    """Bound on the expected gap: deterministic part plus the accumulated
    second-order noise correction (n L_conj / 2) * integral(eta^2 sigma*^2 / s),
    all divided by r(t)."""
    if noise.is_zero:
        return deterministic_rate_bound(ctx, initial_energy, t)
    rates = ctx.rates
    n = ctx.mmap.dim
    lip = ctx.mmap.lipschitz_grad_conjugate
    psi_star_pt = ctx.mmap.psi(ctx.certificate.x_star)
    correction = 0.5 * n * lip * _ito_correction_integral(rates, noise, t)
    return (
        initial_energy
        + psi_star_pt * (rates.s.value(t) - rates.s.value(rates.t0))
        + correction
    ) / rates.r.value(t)


def smd_averaged_bound(
    ctx: EnergyContext, noise: NoiseModel, z0: np.ndarray, t: float
) -> float:
    """Expected-gap bound for the averaged iterate of the non-accelerated
    flow: (s(t0) D(z0/s(t0), z*) + psi(x*) s(t) + (n L/2) int sigma*^2/s) / (t - t0)."""
    rates = ctx.rates
    t0 = rates.t0
    if t <= t0:
        raise ValueError("bound defined for t > t0")
    s0 = rates.s.value(t0)
    l_md0 = s0 * ctx.mmap.bregman_div_star(
        np.asarray(z0, float) / s0, ctx.certificate.z_star
    )
    psi_star_pt = ctx.mmap.psi(ctx.certificate.x_star)
    n = ctx.mmap.dim
    lip = ctx.mmap.lipschitz_grad_conjugate
    if noise.is_zero:
        correction = 0.0
    else:
        try:
            sig = noise.sigma_star_power()
            correction = (sig.squared() / rates.s).integral(t0, t)
        except ValueError:
            correction, _ = quad(
                lambda tau: noise.sigma_star_sq(tau) / rates.s.value(tau), t0, t, limit=200
            )
    return (l_md0 + psi_star_pt * rates.s.value(t) + 0.5 * n * lip * correction) / (t - t0)


# ---------------------------------------------------------------------------
# Accumulated noise strength and its almost-sure envelope
# ---------------------------------------------------------------------------

_E = math.e


def envelope(b: float) -> float:
    """Iterated-logarithm envelope sqrt(max(b, e) * log log max(b, e^2)),
    guarded so it is defined for every b >= 0; zero noise maps to zero."""
    if b == 0.0:
        return 0.0
    return math.sqrt(max(b, _E) * math.log(math.log(max(b, _E**2))))


def b_and_envelope(
    eta: PowerLaw, sigma_star: PowerLaw | None, t0: float, t: float
) -> tuple[float, float]:
    """Accumulated squared noise b(t) = integral of (eta sigma_star)^2 over
    [t0, t] and its envelope; a None volatility means no noise."""
    if sigma_star is None:
        return 0.0, 0.0
    b = (eta.squared() * sigma_star.squared()).integral(t0, t)
    return b, envelope(b)


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass
class EnsembleStats:
    """Per-time mean/spread summaries over seeded trajectories. Standard
    deviations are None for single-trajectory ensembles; energy columns are
    None when the runs carry no energy series."""

    times: np.ndarray
    mean_gap: np.ndarray
    std_gap: np.ndarray | None
    stderr_gap: np.ndarray | None
    mean_energy: np.ndarray | None
    std_energy: np.ndarray | None
    count: int

    def nearest_index(self, t: float) -> int:
        return int(np.abs(self.times - t).argmin())


def ensemble(
    spec: SystemSpec,
    certificate: MinimizerCertificate,
    t_end: float,
    h: float,
    record_stride: int,
    count: int,
    base_seed: int,
    workers: int = 1,
) -> tuple[EnsembleStats, list[Trajectory]]:
    """Simulate `count` trajectories with streams derived from
    (base_seed, index) and aggregate per-time statistics.

    The result is a pure function of the arguments: worker parallelism only
    reorders execution, never the per-index streams or the aggregation.
    """
    if count < 1:
        raise ValueError("ensemble needs at least one trajectory")

    def run(index: int) -> Trajectory:
        return simulate(
            spec,
            certificate,
            t_end,
            h,
            record_stride=record_stride,
            stream=NoiseStream(base_seed, index),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(run, range(count)))
    else:
        trajectories = [run(i) for i in range(count)]

    gaps = np.array([tr.gap for tr in trajectories])
    stats = EnsembleStats(
        times=trajectories[0].times.copy(),
        mean_gap=gaps.mean(axis=0),
        std_gap=gaps.std(axis=0, ddof=1) if count >= 2 else None,
        stderr_gap=gaps.std(axis=0, ddof=1) / math.sqrt(count) if count >= 2 else None,
        mean_energy=None,
        std_energy=None,
        count=count,
    )
    if trajectories[0].has_energy:
        energies = np.array([tr.energy for tr in trajectories])
        stats.mean_energy = energies.mean(axis=0)
        if count >= 2:
            stats.std_energy = energies.std(axis=0, ddof=1)
    return stats, trajectories


def ensemble_to_csv(
    stats: EnsembleStats,
    path,
    gap_bound=None,
    eta: PowerLaw | None = None,
    sigma_star: PowerLaw | None = None,
    t0: float | None = None,
) -> None:
    """Write `t, mean_gap, std_gap, stderr_gap, mean_energy, std_energy,
    gap_bound, b, envelope`; unavailable columns stay empty."""
    header = [
        "t",
        "mean_gap",
        "std_gap",
        "stderr_gap",
        "mean_energy",
        "std_energy",
        "gap_bound",
        "b",
        "envelope",
    ]

    def cell(arr, i):
        return "" if arr is None else repr(float(arr[i]))

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i, t in enumerate(stats.times):
            row = [repr(float(t))]
            row.append(repr(float(stats.mean_gap[i])))
            row.append(cell(stats.std_gap, i))
            row.append(cell(stats.stderr_gap, i))
            row.append(cell(stats.mean_energy, i))
            row.append(cell(stats.std_energy, i))
            row.append("" if gap_bound is None else repr(float(gap_bound(float(t)))))
            if eta is not None and t0 is not None and float(t) > t0:
                b, env = b_and_envelope(eta, sigma_star, t0, float(t))
                row += [repr(b), repr(env)]
            else:
                row += ["", ""]
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(series) against log(t) on a window."""

    window: tuple[float, float]
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    n_points: int


def fit_rate_exponent(
    times: np.ndarray,
    series: np.ndarray,
    window: tuple[float, float],
    n_points: int = 30,
) -> RateFit:
    """Fit the decay exponent of a positive series on geometrically spaced
    sample times inside `window` (snapped to the recorded grid)."""
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    times = np.asarray(times, float)
    series = np.asarray(series, float)
    targets = np.geomspace(t_lo, t_hi, n_points)
    idx = np.unique([int(np.abs(times - t).argmin()) for t in targets])
    if len(idx) < 10:
        raise ValueError("fewer than 10 distinct grid points inside the window")
    y = series[idx]
    if np.any(y <= 0.0):
        raise NonPositiveValues("series must be positive inside the fit window")
    lx = np.log(times[idx])
    ly = np.log(y)
    design = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - design @ coef
    dof = len(idx) - 2
    var_slope = (
        float(resid @ resid) / dof / float(((lx - lx.mean()) ** 2).sum())
        if dof > 0
        else 0.0
    )
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(
        window=(float(t_lo), float(t_hi)),
        slope=slope,
        intercept=intercept,
        stderr=math.sqrt(var_slope),
        r_squared=r2,
        n_points=len(idx),
    )


def default_fit_window(t_end: float) -> tuple[float, float]:
    return (t_end / 10.0, t_end)


# ---------------------------------------------------------------------------
# Martingale envelope and pathwise checks
# ---------------------------------------------------------------------------


def martingale_envelope_check(
    trajectories: list[Trajectory], diameter: float, c: float
) -> float:
    """Fraction of trajectories whose final accumulated Ito integral stays
    inside c * diameter * envelope(b(t_end))."""
    within = 0
    for tr in trajectories:
        if tr.martingale is None:
            raise ValueError("trajectory carries no martingale series")
        threshold = c * diameter * envelope(float(tr.b[-1]))
        if abs(float(tr.martingale[-1])) <= threshold:
            within += 1
    return within / len(trajectories)


def covariation_check(
    spec: SystemSpec,
    certificate: MinimizerCertificate,
    steps: int,
    h: float,
    stream: NoiseStream,
):
    """Empirical covariance of the raw dual increments against the
    theoretical eta^2 Sigma h over `steps` steps.

    Raw increments are accumulated before the stabilizing dual projection
    (the projection removes the mean component and would otherwise distort
    the covariance without affecting the primal path). Requires a constant
    learning rate and a time-constant scalar/diagonal model so the target is
    a single matrix.

    Returns (max relative diagonal error, max absolute off-diagonal,
    off-diagonal band 4 * eta^2 sigma0^2 h / sqrt(steps), target matrix).
    """
    rates = spec.rates
    if spec.kind in ("amd", "samd"):
        if not rates.eta.is_constant:
            raise ValueError("constant learning rate required")
        eta0 = rates.eta.coef
    else:
        eta0 = 1.0
    noise = spec.noise
    x = np.array(spec.x0, float)
    z = np.array(spec.z0, float)
    mmap, objective = spec.mmap, spec.objective
    n = mmap.dim
    t0 = rates.t0
    d0 = noise.diag(x, t0)
    if not np.isscalar(d0):
        raise ValueError("scalar noise required for a constant target")
    if not noise.is_zero and abs(noise.diag(x, t0 + 1.0) - d0) > 1e-12 * abs(d0):
        raise ValueError("time-constant noise required for a constant target")
    target = (eta0**2) * (float(d0) ** 2) * h * np.eye(n)

    increments = np.empty((steps, n))
    sqrt_h = math.sqrt(h)
    for k in range(steps):
        t = t0 + k * h
        g = objective.gradient(x)
        if noise.is_zero:
            delta = -(eta0 * h) * g
        else:
            dW = stream.standard_normals(n) * sqrt_h
            delta = -eta0 * (h * g + noise.diag(x, t) * dW)
        increments[k] = delta
        if spec.kind in ("amd", "samd"):
            mirror = mmap.grad_psi_star(z / rates.s.value(t))
            z = mmap.dual_projection(z + delta)
            x = x + (rates.a.value(t) * h) * (mirror - x)
        else:
            z = mmap.dual_projection(z + delta)
            x = mmap.grad_psi_star(z / rates.s.value(t + h))

    empirical = np.cov(increments.T, ddof=1)
    if noise.is_zero:
        diag_err = float(np.abs(np.diag(empirical)).max())
        off = empirical - np.diag(np.diag(empirical))
        return diag_err, float(np.abs(off).max()), 0.0, target
    diag_err = float(
        np.abs(np.diag(empirical) - np.diag(target)).max() / np.diag(target).max()
    )
    off = empirical - np.diag(np.diag(empirical))
    band = 4.0 * (eta0**2) * (float(d0) ** 2) * h / math.sqrt(steps)
    return diag_err, float(np.abs(off).max()), band, target


# ---------------------------------------------------------------------------
# Deterministic-restart shadowing (the almost-sure convergence illustration)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RestartWindow:
    t_start: float
    sup_distance: float
    energies: np.ndarray
    times: np.ndarray


@dataclass(frozen=True)
class AptReport:
    """Outcome of comparing a stochastic path's energy against deterministic
    restarts over consecutive windows of length t_window after t2."""

    t2: float
    epsilon: float
    t_window: float
    windows: tuple[RestartWindow, ...]
    times: np.ndarray
    stochastic_energy: np.ndarray

    @property
    def max_distance(self) -> float:
        return max(w.sup_distance for w in self.windows)

    @property
    def passed(self) -> bool:
        return self.max_distance < self.epsilon / 3.0


def detect_t2(
    traj: Trajectory, epsilon: float, t_min: float
) -> float | None:
    """First recorded time at or after t_min where the energy has entered
    the epsilon/3 sublevel set; None if it never does."""
    if not traj.has_energy:
        raise BoundaryMinimizer("energy series required")
    mask = (traj.times >= t_min) & (traj.energy <= epsilon / 3.0)
    if not mask.any():
        return None
    return float(traj.times[np.argmax(mask)])


def apt_experiment(
    traj: Trajectory,
    t2: float,
    t_window: float,
    epsilon: float,
    n_windows: int | None = None,
) -> AptReport:
    """For each window [t2 + k T, t2 + (k+1) T], integrate the deterministic
    flow from the stochastic state at the window start and record the sup
    distance between the two energy series on the recorded grid.

    The trajectory must carry an energy series, and t2 must lie on its
    recorded grid with windows that are whole multiples of the record step.
    """
    if not traj.has_energy:
        raise BoundaryMinimizer("energy series required")
    spec = traj.spec
    det_kind = {"samd": "amd", "smd": "md"}.get(spec.kind, spec.kind)
    times = traj.times
    i2 = traj.nearest_index(t2)
    if abs(times[i2] - t2) > 1e-9:
        raise ValueError("t2 must lie on the recorded grid")
    rec_dt = float(times[1] - times[0])
    per_window = round(t_window / rec_dt)
    if abs(per_window * rec_dt - t_window) > 1e-6:
        raise ValueError("window length must be a multiple of the record step")
    available = int((len(times) - 1 - i2) // per_window)
    k_max = available if n_windows is None else min(n_windows, available)
    if k_max < 1:
        raise ValueError("trajectory too short for a single window past t2")

    windows = []
    for k in range(k_max):
        i_start = i2 + k * per_window
        t_start = float(times[i_start])
        restart_rates = replace(spec.rates, t0=t_start)
        restart_spec = SystemSpec(
            kind=det_kind,
            mmap=spec.mmap,
            objective=spec.objective,
            rates=restart_rates,
            noise=ZeroNoise(spec.mmap.dim),
            x0=traj.x[i_start],
            z0=traj.z[i_start],
        )
        det = simulate(
            restart_spec,
            traj.certificate,
            t_end=t_start + t_window,
            h=traj.h,
            record_stride=traj.record_stride,
            enforce_admissible=False,
        )
        sto_slice = traj.energy[i_start : i_start + len(det.times)]
        distance = float(np.abs(sto_slice - det.energy).max())
        windows.append(
            RestartWindow(
                t_start=t_start,
                sup_distance=distance,
                energies=det.energy,
                times=det.times,
            )
        )
    return AptReport(
        t2=float(times[i2]),
        epsilon=epsilon,
        t_window=t_window,
        windows=tuple(windows),
        times=times,
        stochastic_energy=traj.energy,
    )
