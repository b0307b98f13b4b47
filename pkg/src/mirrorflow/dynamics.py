"""Time-stepping integrators for the mirror descent flows.

Five systems share one explicit scheme (Euler for the drift, Euler-Maruyama
for the noise, both state updates evaluated at the left endpoint):

- ``md``:    z' = -grad f(x),            x = grad_psi_star(z / s(t))
- ``smd``:   dZ = -[grad f dt + sigma dB], X = grad_psi_star(Z / s(t))
- ``amd``:   z' = -eta grad f(x),        x' = a (grad_psi_star(z / s) - x)
- ``samd``:  dZ = -eta [grad f dt + sigma dB], dX = a (grad_psi_star(Z/s) - X) dt
- ``nesterov``: x'' = -grad f(x) - x' (beta + 1) / t, unconstrained

Alongside the states, a run records the optimality gap, the energy
r(t) * gap + s(t) * D(z / s, z*), the accumulated noise strength
b(t) = integral of (eta * sigma_star)^2, and the running Ito integral of
<V, dB> with V = -eta sigma^T (mirror - x*), using the same Gaussian
increments as the dual update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFinite, StepTooLarge, StrideTooCoarse
from .maps import EuclideanMap, MirrorMap
from .noise import NoiseModel, NoiseStream
from .objectives import MinimizerCertificate, Objective
from .schedules import CONSTANT_ONE, PowerLaw, RateBundle, averaging_weight, check_admissible

DETERMINISTIC_KINDS = ("md", "amd", "nesterov")
STOCHASTIC_KINDS = ("smd", "samd")
SYSTEM_KINDS = DETERMINISTIC_KINDS + STOCHASTIC_KINDS
#: primal averaging must be a convex combination: a(t0) * h <= this
AVERAGING_STEP_LIMIT = 0.5


@dataclass(frozen=True)
class SystemSpec:
    """One dynamics configuration: system kind, geometry, objective, rates,
    noise model, and the initial primal/dual pair."""

    kind: str
    mmap: MirrorMap
    objective: Objective
    rates: RateBundle
    noise: NoiseModel
    x0: np.ndarray
    z0: np.ndarray
    beta: float | None = None  # nesterov friction parameter

    def __post_init__(self):
        if self.kind not in SYSTEM_KINDS:
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.kind in DETERMINISTIC_KINDS and not self.noise.is_zero:
            raise ValueError(f"system {self.kind!r} requires the zero noise model")
        if self.kind == "nesterov":
            if not isinstance(self.mmap, EuclideanMap):
                raise ValueError("the second-order oscillator requires the euclidean map")
            if self.beta is None or self.beta < 2.0:
                raise ValueError("oscillator friction beta must be >= 2")
        self.mmap.require_feasible(np.asarray(self.x0, dtype=float))

    @property
    def is_stochastic(self) -> bool:
        return self.kind in STOCHASTIC_KINDS and not self.noise.is_zero


def nesterov_bundle(beta: float, t0: float = 1.0) -> RateBundle:
    """Rates r = t^2 / beta^2, eta = t / beta, a = beta / t under which the
    averaged flow on the euclidean map reduces to the damped oscillator."""
    return RateBundle(
        eta=PowerLaw(1.0 / beta, 1.0),
        r=PowerLaw(1.0 / beta**2, 2.0),
        s=CONSTANT_ONE,
        t0=t0,
    )


def md_bundle(alpha_s: float = 0.0, t0: float = 1.0) -> RateBundle:
    """Rates for the non-accelerated flows: unit learning rate and energy
    weight, inverse sensitivity s = t^alpha_s."""
    return RateBundle(eta=CONSTANT_ONE, r=CONSTANT_ONE, s=PowerLaw(1.0, alpha_s), t0=t0)


def energy_value(
    mmap: MirrorMap,
    rates: RateBundle,
    z_star: np.ndarray,
    gap: float,
    z: np.ndarray,
    t: float,
) -> float:
    """Energy r(t) * gap + s(t) * D_conjugate(z / s(t), z_star)."""
    s_t = rates.s.value(t)
    return rates.r.value(t) * gap + s_t * mmap.bregman_div_star(z / s_t, z_star)


# ---------------------------------------------------------------------------
# Single steps. Each advances the state from time t to t + h using only
# time-t quantities on the right-hand side. The ensemble loops in simulate()
# inline the same expressions; tests pin the two paths to bitwise equality.
# ---------------------------------------------------------------------------


def step_md(x, z, t: float, h: float, spec: SystemSpec):
    g = spec.objective.gradient(x)
    z_new = spec.mmap.dual_projection(z - h * g)
    x_new = spec.mmap.grad_psi_star(z_new / spec.rates.s.value(t + h))
    return x_new, z_new


def step_smd(x, z, t: float, h: float, spec: SystemSpec, dW):
    g = spec.objective.gradient(x)
    if dW is None or spec.noise.is_zero:
        z_new = spec.mmap.dual_projection(z - h * g)
    else:
        z_new = spec.mmap.dual_projection(z - (h * g + spec.noise.diag(x, t) * dW))
    x_new = spec.mmap.grad_psi_star(z_new / spec.rates.s.value(t + h))
    return x_new, z_new


def step_amd(x, z, t: float, h: float, spec: SystemSpec):
    mirror = spec.mmap.grad_psi_star(z / spec.rates.s.value(t))
    g = spec.objective.gradient(x)
    z_new = spec.mmap.dual_projection(z - (spec.rates.eta.value(t) * h) * g)
    x_new = x + (spec.rates.a.value(t) * h) * (mirror - x)
    return x_new, z_new


def step_samd(x, z, t: float, h: float, spec: SystemSpec, dW):
    mirror = spec.mmap.grad_psi_star(z / spec.rates.s.value(t))
    g = spec.objective.gradient(x)
    if dW is None or spec.noise.is_zero:
        z_new = spec.mmap.dual_projection(z - (spec.rates.eta.value(t) * h) * g)
    else:
        z_new = spec.mmap.dual_projection(
            z - spec.rates.eta.value(t) * (h * g + spec.noise.diag(x, t) * dW)
        )
    x_new = x + (spec.rates.a.value(t) * h) * (mirror - x)
    return x_new, z_new


def step_nesterov(x, v, t: float, h: float, beta: float, objective: Objective):
    g = objective.gradient(x)
    x_new = x + h * v
    v_new = v + h * (-g - v * ((beta + 1.0) / t))
    return x_new, v_new


@dataclass
class Trajectory:
    """Recorded run: strictly increasing times with state snapshots and the
    in-step accumulators. ``z`` holds the velocity for oscillator runs.
    Energy and martingale series are None when no interior dual anchor
    exists (gap-only recording)."""

    times: np.ndarray
    x: np.ndarray
    z: np.ndarray
    gap: np.ndarray
    energy: np.ndarray | None
    b: np.ndarray
    martingale: np.ndarray | None
    h: float
    record_stride: int
    spec: SystemSpec = field(repr=False)
    certificate: MinimizerCertificate = field(repr=False)

    @property
    def has_energy(self) -> bool:
        return self.energy is not None

    @property
    def n_recorded(self) -> int:
        return len(self.times)

    def nearest_index(self, t: float) -> int:
        return int(np.abs(self.times - t).argmin())

    def to_csv(self, path) -> None:
        """Write `t, x_1..x_n, z_1..z_n, gap, energy, b, martingale`; the
        energy/martingale cells stay empty when those series are absent."""
        n = self.x.shape[1]
        header = (
            ["t"]
            + [f"x_{i + 1}" for i in range(n)]
            + [f"z_{i + 1}" for i in range(n)]
            + ["gap", "energy", "b", "martingale"]
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for i, t in enumerate(self.times):
                cells = [repr(float(t))]
                cells += [repr(float(v)) for v in self.x[i]]
                cells += [repr(float(v)) for v in self.z[i]]
                cells.append(repr(float(self.gap[i])))
                cells.append("" if self.energy is None else repr(float(self.energy[i])))
                cells.append(repr(float(self.b[i])))
                cells.append(
                    "" if self.martingale is None else repr(float(self.martingale[i]))
                )
                fh.write(",".join(cells) + "\n")


def step_count(t0: float, t_end: float, h: float) -> tuple[int, bool]:
    """Steps covering [t0, t_end] and whether the span is an exact multiple
    of h (within 1e-9 relative); inexact spans clip the final step."""
    span = (t_end - t0) / h
    n = round(span)
    if n >= 1 and abs(span - n) < 1e-9 * max(1.0, span):
        return int(n), True
    return max(math.ceil(span), 1), False


def simulate(
    spec: SystemSpec,
    certificate: MinimizerCertificate,
    t_end: float,
    h: float,
    record_stride: int = 1,
    stream: NoiseStream | None = None,
    enforce_admissible: bool = True,
) -> Trajectory:
    """Integrate one trajectory of the configured system on [t0, t_end].

    Parameters
    ----------
    spec : the system; its rate bundle supplies the start time t0.
    certificate : minimizer anchor; supplies f* for gaps and, when interior,
        z* for the energy and the noise-projection integrand.
    t_end, h : horizon and step size (final step clipped onto t_end).
    record_stride : record every this-many steps (plus the final state).
    stream : per-trajectory Gaussian increment source; required for
        stochastic runs with a non-zero noise model.
    enforce_admissible : validate the averaged systems' rate conditions on
        [t0, t_end] before running (disable for diagnostic runs only).

    Returns
    -------
    Trajectory. Deterministic given (spec, certificate, stream seed, h).
    """
    rates = spec.rates
    t0 = rates.t0
    if t_end <= t0:
        raise ValueError("t_end must exceed the bundle start time")
    if h <= 0 or h > t_end - t0:
        raise ValueError("need 0 < h <= t_end - t0")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")

    noisy = spec.is_stochastic
    if noisy and stream is None:
        raise ValueError("stochastic runs need a NoiseStream")
    if spec.kind in ("amd", "samd"):
        if rates.a.value(t0) * h > AVERAGING_STEP_LIMIT + 1e-12:
            raise StepTooLarge(
                f"a(t0) * h = {rates.a.value(t0) * h:.3g} exceeds "
                f"{AVERAGING_STEP_LIMIT}; primal update is no longer a convex combination"
            )
        if enforce_admissible:
            report = check_admissible(rates, horizon=t_end)
            if not report.passed:
                raise ValueError(
                    "rate bundle not admissible: " + "; ".join(report.failures())
                )

    mmap = spec.mmap
    objective = spec.objective
    noise = spec.noise
    n = mmap.dim
    f_star = certificate.f_star
    track_energy = spec.kind != "nesterov" and not certificate.boundary
    z_star = certificate.z_star if track_energy else None
    x_star = certificate.x_star

    n_steps, exact_span = step_count(t0, t_end, h)
    rec_rows = list(range(0, n_steps, record_stride)) + [n_steps]
    m = len(rec_rows)
    times = np.empty(m)
    xs = np.empty((m, n))
    zs = np.empty((m, n))
    gaps = np.empty(m)
    energies = np.empty(m) if track_energy else None
    bs = np.empty(m)
    marts = np.empty(m) if track_energy else None

    x = np.array(spec.x0, dtype=float)
    if spec.kind == "nesterov":
        # velocity consistent with the averaged form: v0 = a(t0) (z0 - x0)
        z = rates.a.value(t0) * (np.asarray(spec.z0, dtype=float) - x)
    else:
        z = np.array(spec.z0, dtype=float)

    mart = 0.0
    b_acc = 0.0
    sqrt_h = math.sqrt(h)
    ri = 0
    for k in range(n_steps + 1):
        if k < n_steps or exact_span:
            t = t0 + k * h
        else:
            t = t_end
        if ri < m and k == rec_rows[ri]:
            times[ri] = t
            xs[ri] = x
            zs[ri] = z
            gap = objective.value(x) - f_star
            gaps[ri] = gap
            if track_energy:
                energies[ri] = energy_value(mmap, rates, z_star, gap, z, t)
                marts[ri] = mart
            bs[ri] = b_acc
            ri += 1
        if k == n_steps:
            break
        if exact_span or k < n_steps - 1:
            hk, sq_hk = h, sqrt_h
        else:
            hk = t_end - t  # clipped final step of an inexact span
            sq_hk = math.sqrt(hk)

        if spec.kind == "nesterov":
            x, z = step_nesterov(x, z, t, hk, spec.beta, objective)
        elif spec.kind in ("md", "smd"):
            dW = stream.standard_normals(n) * sq_hk if noisy else None
            if noisy:
                d = noise.diag(x, t)
                if track_energy:
                    mart += float((-(d * (x - x_star))) @ dW)
                b_acc += noise.sigma_star_sq(t) * hk
                g = objective.gradient(x)
                z = mmap.dual_projection(z - (hk * g + d * dW))
            else:
                g = objective.gradient(x)
                z = mmap.dual_projection(z - hk * g)
            x = mmap.grad_psi_star(z / rates.s.value(t + hk))
        else:  # amd / samd
            s_t = rates.s.value(t)
            mirror = mmap.grad_psi_star(z / s_t)
            g = objective.gradient(x)
            eta_t = rates.eta.value(t)
            if noisy:
                dW = stream.standard_normals(n) * sq_hk
                d = noise.diag(x, t)
                if track_energy:
                    mart += float((-eta_t * (d * (mirror - x_star))) @ dW)
                b_acc += eta_t * eta_t * noise.sigma_star_sq(t) * hk
                z = mmap.dual_projection(z - eta_t * (hk * g + d * dW))
            else:
                z = mmap.dual_projection(z - (eta_t * hk) * g)
            x = x + (rates.a.value(t) * hk) * (mirror - x)

        if not math.isfinite(float(x.sum()) + float(z.sum())):
            raise NonFinite(f"state became non-finite at step {k} (t = {t:g})")

    return Trajectory(
        times=times,
        x=xs,
        z=zs,
        gap=gaps,
        energy=energies,
        b=bs,
        martingale=marts,
        h=h,
        record_stride=record_stride,
        spec=spec,
        certificate=certificate,
    )


def averaged_iterate(traj: Trajectory) -> np.ndarray:
    """Running time-average of the primal trajectory on the recorded grid,
    by cumulative trapezoid; the first entry is the initial state."""
    if traj.n_recorded < 2:
        raise ValueError("need at least two recorded times")
    ts = traj.times
    dt = np.diff(ts)[:, None]
    chunks = 0.5 * dt * (traj.x[1:] + traj.x[:-1])
    integral = np.vstack([np.zeros(traj.x.shape[1]), np.cumsum(chunks, axis=0)])
    out = np.empty_like(traj.x)
    out[0] = traj.x[0]
    out[1:] = integral[1:] / (ts[1:, None] - ts[0])
    return out


def primal_average_residual(traj: Trajectory) -> float:
    """Consistency of the averaged primal recursion with its integral form:
    the max-norm distance between the recorded X(t) and
    (x0 w(t0) + integral of w' * mirror) / w(t), quadrature on the recorded
    mirror points. Needs per-step recording; shrinks at first order in h."""
    if traj.record_stride != 1:
        raise StrideTooCoarse("per-step recording (stride 1) required")
    if traj.spec.kind not in ("amd", "samd"):
        raise ValueError("only averaged systems have the integral form")
    rates = traj.spec.rates
    mmap = traj.spec.mmap
    ts = traj.times
    mirrors = np.array(
        [mmap.grad_psi_star(traj.z[i] / rates.s.value(ts[i])) for i in range(len(ts))]
    )
    w = np.array([averaging_weight(rates.a, rates.t0, t) for t in ts])
    wdot = np.array([rates.a.value(t) for t in ts]) * w
    integrand = wdot[:, None] * mirrors
    dt = np.diff(ts)[:, None]
    integral = np.vstack(
        [np.zeros(mirrors.shape[1]), np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]), axis=0)]
    )
    reconstructed = (traj.x[0] + integral) / w[:, None]
    return float(np.abs(traj.x - reconstructed).max())
