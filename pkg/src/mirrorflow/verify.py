"""Named verification suites: each check runs one pinned experiment at its
stated tolerance and reports pass/fail with the measured numbers.

The checks double as the repository's acceptance gate (tests call the same
functions), and `mirrorflow verify` exposes them on the command line. An
expensive ensemble shared by two checks is computed once per Verifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import presets
from .analysis import (
    EnergyContext,
    apt_experiment,
    covariation_check,
    detect_t2,
    deterministic_rate_bound,
    ensemble,
    expected_value_bound,
    fit_rate_exponent,
    martingale_envelope_check,
)
from .dynamics import (
    SystemSpec,
    averaged_iterate,
    md_bundle,
    nesterov_bundle,
    primal_average_residual,
    simulate,
)
from .maps import EntropicSimplexMap, EuclideanMap
from .noise import NoiseStream, ZeroNoise, make_noise
from .objectives import MinimizerCertificate, Rank1Quadratic
from .schedules import CONSTANT_ONE, PowerLaw, RateBundle, coupled_bundle

CHECK_NAMES = (
    "mirror-algebra",
    "gradients",
    "deterministic-rate",
    "nesterov",
    "primal-averaging",
    "covariation",
    "expected-rate",
    "averaged-smd",
    "martingale-envelope",
    "apt",
    "determinism",
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        nums = " ".join(f"{k}={v:.6g}" for k, v in self.measured.items())
        tail = f" ({self.detail})" if self.detail else ""
        return f"{status} {self.name}: {nums}{tail}"


class Verifier:
    """Runs named checks; caches the shared stochastic-rate ensemble."""

    def __init__(self, base_seed: int = presets.DEFAULT_BASE_SEED, workers: int = 1):
        self.base_seed = int(base_seed)
        self.workers = int(workers)
        self._rate_ensemble = None

    # -- criterion experiments ------------------------------------------------

    def check_mirror_algebra(self) -> CheckResult:
        """Conjugate-pair identities on 1000 random duals per map and
        dimension: Fenchel residual, the divergence identity, the conjugate
        gradient's Lipschitz bound, shift invariance, and non-negativity."""
        rng = np.random.default_rng(self.base_seed)
        worst = {"fenchel": 0.0, "bregman": 0.0, "lipschitz": 0.0, "shift": 0.0}
        min_div = math.inf
        for dim in (2, 5, 50):
            for mmap in (EntropicSimplexMap(dim), EuclideanMap(dim)):
                zs = rng.normal(scale=3.0, size=(1000, dim))
                for i, z in enumerate(zs):
                    x = mmap.grad_psi_star(z)
                    worst["fenchel"] = max(
                        worst["fenchel"],
                        abs(mmap.psi(x) + mmap.psi_star(z) - float(x @ z)),
                    )
                    if i:
                        z2 = zs[i - 1]
                        lhs = mmap.psi(mmap.grad_psi_star(z)) - mmap.psi(
                            mmap.grad_psi_star(z2)
                        )
                        rhs = mmap.bregman_div_star(z2, z) - float(
                            (mmap.grad_psi_star(z2) - mmap.grad_psi_star(z)) @ z2
                        )
                        worst["bregman"] = max(worst["bregman"], abs(lhs - rhs))
                        div = mmap.bregman_div_star(z, z2)
                        min_div = min(min_div, div)
                        excess = mmap.primal_norm(
                            mmap.grad_psi_star(z) - mmap.grad_psi_star(z2)
                        ) - mmap.lipschitz_grad_conjugate * mmap.dual_norm(z - z2)
                        worst["lipschitz"] = max(worst["lipschitz"], excess)
                if isinstance(mmap, EntropicSimplexMap):
                    ones = np.ones(dim)
                    for z in zs[:100]:
                        base = mmap.grad_psi_star(z)
                        for alpha in rng.uniform(-1e3, 1e3, size=5):
                            worst["shift"] = max(
                                worst["shift"],
                                float(
                                    np.abs(mmap.grad_psi_star(z + alpha * ones) - base).max()
                                ),
                            )
        passed = all(v < 1e-9 for v in worst.values()) and min_div >= -1e-12
        measured = {f"max_{k}": v for k, v in worst.items()}
        measured["min_divergence"] = min_div
        return CheckResult("mirror-algebra", passed, measured, "tolerance 1e-9")

    def check_gradients(self) -> CheckResult:
        """Central finite differences against analytic gradients, 1000
        points per objective, relative error below 1e-6 at step 1e-5."""
        rng = np.random.default_rng(self.base_seed + 1)
        step = 1e-5
        worst = 0.0
        for objective in (
            presets.default_sum_exp(),
            presets.face_sum_exp(),
            presets.default_rank1(),
        ):
            pts = rng.dirichlet(np.ones(objective.dim), size=1000)
            for x in pts:
                g = objective.gradient(x)
                scale = max(1.0, float(np.abs(g).max()))
                for j in range(objective.dim):
                    e = np.zeros(objective.dim)
                    e[j] = step
                    fd = (objective.value(x + e) - objective.value(x - e)) / (2 * step)
                    worst = max(worst, abs(fd - g[j]) / scale)
        return CheckResult(
            "gradients", worst < 1e-6, {"max_rel_error": worst}, "tolerance 1e-6"
        )

    def check_deterministic_rate(self) -> CheckResult:
        """Deterministic averaged run with r = t^2, eta = 2t, constant s on
        [1, 100] at h = 1e-3: the gap must stay below 1.05x its bound."""
        rates = coupled_bundle(alpha_r=2.0, alpha_s=0.0)
        spec, cert = presets.default_spec("amd", rates=rates)
        ctx = EnergyContext(spec.mmap, spec.objective, cert, rates)
        l0 = ctx.initial_value(spec.x0, spec.z0)
        traj = simulate(spec, cert, t_end=100.0, h=1e-3, record_stride=10)
        bounds = np.array(
            [deterministic_rate_bound(ctx, l0, t) for t in traj.times]
        )
        ratios = traj.gap[1:] / bounds[1:]
        worst = float(ratios.max())
        return CheckResult(
            "deterministic-rate",
            bool(worst <= 1.05),
            {"worst_gap_over_bound": worst, "initial_energy": l0},
            "gap <= 1.05 * bound at every recorded time",
        )

    def check_nesterov(self) -> CheckResult:
        """Averaged euclidean flow versus the damped oscillator on a planar
        quadratic, beta = 2: trajectories agree to O(h) and the sup distance
        halves when h does (ratio within [1.6, 2.4])."""
        beta = 2.0
        mmap = EuclideanMap(2)
        objective = Rank1Quadratic(np.array([1.0, 0.6]))
        cert = MinimizerCertificate(
            x_star=np.zeros(2), f_star=0.0, z_star=np.zeros(2),
            boundary=False, residual=0.0, method="analytic",
        )
        x0 = np.array([1.0, -0.5])
        distances = {}
        for h in (1e-3, 5e-4):
            amd = SystemSpec(
                kind="amd", mmap=mmap, objective=objective,
                rates=nesterov_bundle(beta), noise=ZeroNoise(2), x0=x0, z0=x0.copy(),
            )
            ode = SystemSpec(
                kind="nesterov", mmap=mmap, objective=objective,
                rates=nesterov_bundle(beta), noise=ZeroNoise(2), x0=x0, z0=x0.copy(),
                beta=beta,
            )
            ta = simulate(amd, cert, t_end=10.0, h=h, record_stride=10)
            tn = simulate(ode, cert, t_end=10.0, h=h, record_stride=10)
            distances[h] = float(np.abs(ta.x - tn.x).max())
        ratio = distances[1e-3] / distances[5e-4]
        passed = 1.6 <= ratio <= 2.4 and distances[1e-3] < 10.0 * 1e-3
        return CheckResult(
            "nesterov",
            bool(passed),
            {"dist_h1em3": distances[1e-3], "dist_h5em4": distances[5e-4], "ratio": ratio},
            "halving ratio in [1.6, 2.4]",
        )

    def check_primal_averaging(self) -> CheckResult:
        """Recursion-versus-integral-form residual of the default
        deterministic averaged run is O(h): it halves with the step."""
        rates = RateBundle(eta=CONSTANT_ONE, r=PowerLaw(1.0, 1.0), s=PowerLaw(1.0, 0.5))
        residuals = {}
        for h in (1e-3, 5e-4):
            spec, cert = presets.default_spec("amd", rates=rates)
            traj = simulate(spec, cert, t_end=10.0, h=h)
            residuals[h] = primal_average_residual(traj)
        ratio = residuals[1e-3] / residuals[5e-4]
        passed = 1.6 <= ratio <= 2.4
        return CheckResult(
            "primal-averaging",
            bool(passed),
            {"residual_h1em3": residuals[1e-3], "residual_h5em4": residuals[5e-4],
             "ratio": ratio},
            "halving ratio in [1.6, 2.4]",
        )

    def check_covariation(self) -> CheckResult:
        """Raw dual-increment covariance over 10^4 steps against
        eta^2 sigma0^2 h I: diagonal within 10 percent, off-diagonals inside
        the 4-sigma sampling band."""
        spec, cert = presets.default_spec(
            "samd", rates=coupled_bundle(1.0, 0.5), sigma0=0.1
        )
        diag_err, off_max, band, _ = covariation_check(
            spec, cert, steps=10_000, h=1e-4, stream=NoiseStream(self.base_seed, 0)
        )
        passed = diag_err < 0.10 and off_max < band
        return CheckResult(
            "covariation",
            bool(passed),
            {"diag_rel_error": diag_err, "offdiag_max": off_max, "offdiag_band": band},
            "diagonal within 10%, off-diagonals within the CLT band",
        )

    # -- shared stochastic-rate ensemble --------------------------------------

    def rate_ensemble(self):
        if self._rate_ensemble is None:
            spec, cert = presets.default_spec(
                "samd", rates=coupled_bundle(1.0, 0.5), sigma0=0.1
            )
            stats, trajs = ensemble(
                spec, cert, t_end=200.0, h=1e-2, record_stride=10,
                count=presets.DEFAULT_ENSEMBLE_COUNT, base_seed=self.base_seed,
                workers=self.workers,
            )
            ctx = EnergyContext(spec.mmap, spec.objective, cert, spec.rates)
            self._rate_ensemble = (spec, cert, ctx, stats, trajs)
        return self._rate_ensemble

    def check_expected_rate(self) -> CheckResult:
        """100-trajectory averaged stochastic run with constant volatility
        0.1 and the balanced exponents (alpha_s = 1/2, alpha_r = 1): the
        fitted decay exponent of the mean gap lies in [-0.65, -0.35] (the
        predicted value is -1/2) and the mean gap respects the expected-gap
        bound within two standard errors at t = 10, 50, 100."""
        spec, cert, ctx, stats, _ = self.rate_ensemble()
        fit = fit_rate_exponent(stats.times, stats.mean_gap, (20.0, 200.0))
        l0 = ctx.initial_value(spec.x0, spec.z0)
        bound_ok = True
        bound_margins = {}
        for t_probe in (10.0, 50.0, 100.0):
            i = stats.nearest_index(t_probe)
            bound = expected_value_bound(ctx, spec.noise, l0, float(stats.times[i]))
            limit = bound + 2.0 * float(stats.stderr_gap[i])
            bound_margins[f"margin_t{int(t_probe)}"] = limit - float(stats.mean_gap[i])
            if stats.mean_gap[i] > limit:
                bound_ok = False
        passed = (-0.65 <= fit.slope <= -0.35) and bound_ok
        measured = {"slope": fit.slope, "slope_stderr": fit.stderr, **bound_margins}
        return CheckResult(
            "expected-rate",
            bool(passed),
            measured,
            "slope within [-0.65, -0.35]; mean gap within bound + 2 stderr",
        )

    def check_averaged_smd(self) -> CheckResult:
        """100 non-accelerated stochastic runs on the face-minimizer
        instance with alpha_s = 1/2: the fitted decay exponent of the mean
        averaged-iterate gap lies in [-0.65, -0.35]."""
        objective = presets.face_sum_exp()
        spec, cert = presets.default_spec(
            "smd", rates=md_bundle(alpha_s=0.5), sigma0=0.1, objective=objective
        )
        _, trajs = ensemble(
            spec, cert, t_end=200.0, h=1e-2, record_stride=10,
            count=presets.DEFAULT_ENSEMBLE_COUNT, base_seed=self.base_seed,
            workers=self.workers,
        )
        gaps = []
        for tr in trajs:
            avg = averaged_iterate(tr)
            gaps.append([spec.objective.value(p) - cert.f_star for p in avg])
        mean_gap = np.asarray(gaps).mean(axis=0)
        fit = fit_rate_exponent(trajs[0].times, mean_gap, (20.0, 200.0))
        passed = -0.65 <= fit.slope <= -0.35
        return CheckResult(
            "averaged-smd",
            bool(passed),
            {"slope": fit.slope, "slope_stderr": fit.stderr},
            "slope within [-0.65, -0.35]",
        )

    def check_martingale_envelope(self) -> CheckResult:
        """On the shared stochastic-rate ensemble, at least 90 percent of
        trajectories keep their accumulated Ito integral inside three
        diameters of the iterated-logarithm envelope."""
        _, _, _, _, trajs = self.rate_ensemble()
        fraction = martingale_envelope_check(trajs, diameter=2.0, c=3.0)
        return CheckResult(
            "martingale-envelope",
            bool(fraction >= 0.90),
            {"fraction_within": fraction, "b_final": float(trajs[0].b[-1])},
            "fraction >= 0.90",
        )

    def check_apt(self, epsilon: float = 2.4e-3, t_window: float = 20.0) -> CheckResult:
        """Seeded shadowing regression: under the persistent-noise
        configuration (unit energy weight and sensitivity, a = eta =
        t^(-1/2)), once the energy has entered the epsilon/3 sublevel set,
        deterministic restarts started at consecutive window boundaries stay
        within epsilon/3 of the stochastic energy."""
        spec, cert = presets.persistent_noise_spec(sigma0=0.05)
        traj = simulate(
            spec, cert, t_end=290.0, h=1e-2, record_stride=10,
            stream=NoiseStream(self.base_seed, 0),
        )
        t2 = detect_t2(traj, epsilon, t_min=50.0)
        if t2 is None:
            return CheckResult(
                "apt", False, {}, "energy never entered the epsilon/3 sublevel set"
            )
        report = apt_experiment(traj, t2, t_window=t_window, epsilon=epsilon)
        return CheckResult(
            "apt",
            bool(report.passed),
            {
                "t2": report.t2,
                "windows": float(len(report.windows)),
                "max_distance": report.max_distance,
                "threshold": epsilon / 3.0,
            },
            "every restart distance below epsilon / 3",
        )

    def check_determinism(self) -> CheckResult:
        """Bitwise degeneracy and reproducibility: zero-noise stochastic
        integrators reproduce their deterministic counterparts exactly, and
        identical seeds reproduce identical trajectories."""
        rates = coupled_bundle(1.0, 0.5)
        amd, cert = presets.default_spec("amd", rates=rates)
        samd_zero = SystemSpec(
            kind="samd", mmap=amd.mmap, objective=amd.objective, rates=amd.rates,
            noise=make_noise("scalar", 0.0, 0.0, 3), x0=amd.x0, z0=amd.z0,
        )
        ta = simulate(amd, cert, t_end=5.0, h=1e-2, record_stride=10)
        ts = simulate(samd_zero, cert, t_end=5.0, h=1e-2, record_stride=10,
                      stream=NoiseStream(self.base_seed, 0))
        samd_amd_equal = bool(
            np.array_equal(ta.x, ts.x) and np.array_equal(ta.z, ts.z)
        )

        md, cert_md = presets.default_spec("md", rates=md_bundle(0.5))
        smd_zero = SystemSpec(
            kind="smd", mmap=md.mmap, objective=md.objective, rates=md.rates,
            noise=make_noise("scalar", 0.0, 0.0, 3), x0=md.x0, z0=md.z0,
        )
        tm = simulate(md, cert_md, t_end=5.0, h=1e-2)
        tsm = simulate(smd_zero, cert_md, t_end=5.0, h=1e-2,
                       stream=NoiseStream(self.base_seed, 0))
        smd_md_equal = bool(np.array_equal(tm.x, tsm.x) and np.array_equal(tm.z, tsm.z))

        noisy, cert_n = presets.default_spec("samd", rates=rates, sigma0=0.1)
        runs = [
            ensemble(noisy, cert_n, t_end=3.0, h=1e-2, record_stride=10,
                     count=3, base_seed=self.base_seed)[1]
            for _ in range(2)
        ]
        repeat_equal = all(
            np.array_equal(a.x, b.x) and np.array_equal(a.z, b.z)
            and np.array_equal(a.martingale, b.martingale)
            for a, b in zip(*runs)
        )
        passed = samd_amd_equal and smd_md_equal and repeat_equal
        return CheckResult(
            "determinism",
            bool(passed),
            {
                "samd_equals_amd": float(samd_amd_equal),
                "smd_equals_md": float(smd_md_equal),
                "repeat_bitwise": float(repeat_equal),
            },
            "all comparisons bitwise",
        )

    # -- dispatch --------------------------------------------------------------

    def run(self, names=None) -> list[CheckResult]:
        table = {
            "mirror-algebra": self.check_mirror_algebra,
            "gradients": self.check_gradients,
            "deterministic-rate": self.check_deterministic_rate,
            "nesterov": self.check_nesterov,
            "primal-averaging": self.check_primal_averaging,
            "covariation": self.check_covariation,
            "expected-rate": self.check_expected_rate,
            "averaged-smd": self.check_averaged_smd,
            "martingale-envelope": self.check_martingale_envelope,
            "apt": self.check_apt,
            "determinism": self.check_determinism,
        }
        names = list(CHECK_NAMES) if not names else list(names)
        unknown = [n for n in names if n not in table]
        if unknown:
            raise ValueError(f"unknown checks: {unknown}; choose from {CHECK_NAMES}")
        return [table[n]() for n in names]
