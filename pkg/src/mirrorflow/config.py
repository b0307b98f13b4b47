"""Scenario configuration: a flat key = value text format (dotted keys give
structure), validation with actionable messages, and builders that turn a
configuration into runnable system specs.

All randomness flows from the single `seed` entry; manifests written next to
run outputs record everything needed to reproduce a run bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace

from .dynamics import SystemSpec, md_bundle, nesterov_bundle
from .errors import ParseError, ValidationError
from .maps import make_map
from .noise import ZeroNoise, make_noise
from .objectives import MinimizerCertificate, make_objective, solve_minimizer
from .presets import (
    DEFAULT_BASE_SEED,
    certificate_for,
    default_rank1,
    default_start,
    default_sum_exp,
    face_sum_exp,
)
from .schedules import PowerLaw, RateBundle, coupled_bundle, optimal_amd_exponents

VERSION = "0.1.0"

SYSTEM_CHOICES = ("md", "smd", "amd", "samd", "nesterov")
OBJECTIVE_CHOICES = ("sum-exp", "rank1-quadratic")
OBJECTIVE_SOURCES = ("default", "face", "inline")
MIRROR_CHOICES = ("entropic-simplex", "euclidean")
NOISE_CHOICES = ("zero", "scalar", "diagonal", "state-scaled")


@dataclass
class ScenarioConfig:
    """Typed view of one scenario file; see `emit` for the canonical keys."""

    system_kind: str = "samd"
    objective_kind: str = "sum-exp"
    objective_source: str = "default"
    objective_dim: int = 3
    objective_c: list[list[float]] | None = None
    mirror_kind: str = "entropic-simplex"
    alpha_r: float | str = "auto"
    alpha_s: float = 0.5
    eta_mode: str = "coupled"
    eta_coef: float = 1.0
    eta_exponent: float = 0.0
    r_coef: float = 1.0
    beta: float = 2.0
    noise_kind: str = "scalar"
    sigma0: float = 0.1
    alpha_sigma: float = 0.0
    t0: float = 1.0
    t_end: float = 200.0
    h: float = 0.01
    record_stride: int = 10
    count: int = 100
    seed: int = DEFAULT_BASE_SEED
    threads: int = 1
    out: str = "outputs"
    sweep_alpha_sigma: list[float] = field(default_factory=lambda: [0.2, 0.0])
    sweep_alpha_s: list[float] = field(default_factory=lambda: [0.5])
    sweep_alpha_r: list[str] = field(default_factory=lambda: ["auto-0.2", "auto", "auto+0.2"])

    def resolved_alpha_r(self) -> float:
        if self.alpha_r == "auto":
            return optimal_amd_exponents(self.alpha_sigma, self.alpha_s)
        return float(self.alpha_r)


_KEY_MAP = {
    "system.kind": "system_kind",
    "objective.kind": "objective_kind",
    "objective.source": "objective_source",
    "objective.dim": "objective_dim",
    "objective.c": "objective_c",
    "mirror.kind": "mirror_kind",
    "rates.alpha_r": "alpha_r",
    "rates.alpha_s": "alpha_s",
    "rates.eta": "eta_mode",
    "rates.eta_coef": "eta_coef",
    "rates.eta_exponent": "eta_exponent",
    "rates.r_coef": "r_coef",
    "rates.beta": "beta",
    "noise.kind": "noise_kind",
    "noise.sigma0": "sigma0",
    "noise.alpha_sigma": "alpha_sigma",
    "run.t0": "t0",
    "run.t_end": "t_end",
    "run.h": "h",
    "run.record_stride": "record_stride",
    "ensemble.count": "count",
    "seed": "seed",
    "threads": "threads",
    "out": "out",
    "sweep.alpha_sigma": "sweep_alpha_sigma",
    "sweep.alpha_s": "sweep_alpha_s",
    "sweep.alpha_r": "sweep_alpha_r",
}
_FIELD_TO_KEY = {v: k for k, v in _KEY_MAP.items()}

_INT_FIELDS = {"objective_dim", "record_stride", "count", "seed", "threads"}
_FLOAT_FIELDS = {
    "alpha_s", "eta_coef", "eta_exponent", "r_coef", "beta",
    "sigma0", "alpha_sigma", "t0", "t_end", "h",
}
_FLOAT_LIST_FIELDS = {"sweep_alpha_sigma", "sweep_alpha_s"}


def _parse_matrix(text: str) -> list[list[float]]:
    rows = [r.strip() for r in text.split(";") if r.strip()]
    return [[float(v) for v in r.split()] for r in rows]


def _emit_matrix(rows: list[list[float]]) -> str:
    return " ; ".join(" ".join(repr(float(v)) for v in row) for row in rows)


def parse_config(source) -> ScenarioConfig:
    """Parse a scenario file (path or string). Raises ParseError with the
    offending line, then ValidationError listing every violated constraint."""
    if hasattr(source, "read_text"):
        text = source.read_text()
    elif isinstance(source, str) and "\n" not in source and "=" not in source:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source

    cfg = ScenarioConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_MAP:
            raise ParseError(f"unknown key {key!r}", lineno)
        name = _KEY_MAP[key]
        try:
            if name == "objective_c":
                setattr(cfg, name, _parse_matrix(value))
            elif name == "alpha_r":
                setattr(cfg, name, value if value == "auto" else float(value))
            elif name in _INT_FIELDS:
                setattr(cfg, name, int(value))
            elif name in _FLOAT_FIELDS:
                setattr(cfg, name, float(value))
            elif name in _FLOAT_LIST_FIELDS:
                setattr(cfg, name, [float(v) for v in value.split()])
            elif name == "sweep_alpha_r":
                setattr(cfg, name, value.split())
            else:
                setattr(cfg, name, value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key}: {exc}", lineno) from None
    violations = validate(cfg)
    if violations:
        raise ValidationError(violations)
    return cfg


def emit_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; parse(emit(cfg)) == cfg."""
    lines = []
    for f in fields(cfg):
        key = _FIELD_TO_KEY[f.name]
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if f.name == "objective_c":
            lines.append(f"{key} = {_emit_matrix(value)}")
        elif f.name in _FLOAT_LIST_FIELDS:
            lines.append(f"{key} = {' '.join(repr(float(v)) for v in value)}")
        elif f.name == "sweep_alpha_r":
            lines.append(f"{key} = {' '.join(value)}")
        elif f.name in _FLOAT_FIELDS or (f.name == "alpha_r" and value != "auto"):
            lines.append(f"{key} = {repr(float(value))}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def validate(cfg: ScenarioConfig) -> list[str]:
    """All constraint violations, each naming the broken condition."""
    bad = []
    if cfg.system_kind not in SYSTEM_CHOICES:
        bad.append(f"system.kind must be one of {SYSTEM_CHOICES}, got {cfg.system_kind!r}")
    if cfg.objective_kind not in OBJECTIVE_CHOICES:
        bad.append(f"objective.kind must be one of {OBJECTIVE_CHOICES}")
    if cfg.objective_source not in OBJECTIVE_SOURCES:
        bad.append(f"objective.source must be one of {OBJECTIVE_SOURCES}")
    if cfg.objective_source == "inline" and not cfg.objective_c:
        bad.append("objective.source = inline requires objective.c")
    if cfg.objective_c is not None:
        widths = {len(r) for r in cfg.objective_c}
        if len(widths) != 1:
            bad.append("objective.c rows must share one width")
        elif widths.pop() != cfg.objective_dim:
            bad.append("objective.c width must equal objective.dim")
    if cfg.mirror_kind not in MIRROR_CHOICES:
        bad.append(f"mirror.kind must be one of {MIRROR_CHOICES}")
    if cfg.noise_kind not in NOISE_CHOICES:
        bad.append(f"noise.kind must be one of {NOISE_CHOICES}")
    if cfg.sigma0 < 0:
        bad.append("noise.sigma0 must be non-negative")
    if cfg.alpha_s < 0:
        bad.append(
            "rates.alpha_s must be >= 0: the inverse sensitivity s(t) has to be "
            "non-decreasing for the noise damping to work"
        )
    if not 0 < cfg.t0 < cfg.t_end:
        bad.append("need 0 < run.t0 < run.t_end")
    if cfg.h <= 0 or cfg.h > cfg.t_end - cfg.t0:
        bad.append("need 0 < run.h <= t_end - t0")
    if cfg.record_stride < 1:
        bad.append("run.record_stride must be >= 1")
    if cfg.count < 1:
        bad.append("ensemble.count must be >= 1")
    if cfg.threads < 1:
        bad.append("threads must be >= 1")
    if cfg.system_kind in ("amd", "samd"):
        if cfg.alpha_r == "auto" and cfg.alpha_sigma >= 0.5:
            bad.append(
                "rates.alpha_r = auto requires noise.alpha_sigma < 1/2 "
                "(the optimal-exponent rule alpha_r = alpha_s - alpha_sigma + 1/2)"
            )
        else:
            try:
                alpha_r = cfg.resolved_alpha_r()
                if alpha_r <= 0:
                    bad.append("rates.alpha_r must be positive")
                else:
                    a0 = _eta_schedule(cfg, alpha_r).value(cfg.t0) / (
                        cfg.r_coef * cfg.t0**alpha_r
                    )
                    if a0 * cfg.h > 0.5 + 1e-12:
                        bad.append(
                            f"a(t0) * h = {a0 * cfg.h:.3g} exceeds 1/2: shrink run.h "
                            "so the primal averaging step stays a convex combination"
                        )
                    if cfg.eta_mode == "explicit":
                        eta = _eta_schedule(cfg, alpha_r)
                        for t in (cfg.t0, cfg.t_end):
                            rdot = cfg.r_coef * alpha_r * t ** (alpha_r - 1.0)
                            if eta.value(t) < rdot - 1e-12:
                                bad.append(
                                    "learning rate must dominate the energy-weight "
                                    f"derivative: eta({t:g}) = {eta.value(t):.4g} < "
                                    f"r'({t:g}) = {rdot:.4g}"
                                )
                                break
            except Exception as exc:  # InvalidRegime and friends
                bad.append(str(exc))
    if cfg.system_kind == "nesterov":
        if cfg.mirror_kind != "euclidean":
            bad.append("system.kind = nesterov requires mirror.kind = euclidean")
        if cfg.beta < 2.0:
            bad.append("rates.beta must be >= 2")
    if cfg.system_kind in ("md", "amd", "nesterov") and cfg.noise_kind != "zero":
        if cfg.sigma0 != 0.0:
            bad.append(
                f"system.kind = {cfg.system_kind} is deterministic; set noise.kind "
                "= zero or noise.sigma0 = 0"
            )
    return bad


def _eta_schedule(cfg: ScenarioConfig, alpha_r: float) -> PowerLaw:
    if cfg.eta_mode == "coupled":
        return PowerLaw(cfg.r_coef * alpha_r, alpha_r - 1.0)
    return PowerLaw(cfg.eta_coef, cfg.eta_exponent)


def build_rates(cfg: ScenarioConfig) -> RateBundle:
    if cfg.system_kind in ("md", "smd"):
        return md_bundle(alpha_s=cfg.alpha_s, t0=cfg.t0)
    if cfg.system_kind == "nesterov":
        return nesterov_bundle(cfg.beta, t0=cfg.t0)
    alpha_r = cfg.resolved_alpha_r()
    if cfg.eta_mode == "coupled" and cfg.r_coef == 1.0:
        return coupled_bundle(alpha_r, cfg.alpha_s, t0=cfg.t0)
    return RateBundle(
        eta=_eta_schedule(cfg, alpha_r),
        r=PowerLaw(cfg.r_coef, alpha_r),
        s=PowerLaw(1.0, cfg.alpha_s),
        t0=cfg.t0,
    )


def build_objective(cfg: ScenarioConfig):
    if cfg.objective_source == "inline":
        return make_objective(cfg.objective_kind, cfg.objective_c)
    if cfg.objective_kind == "rank1-quadratic":
        return default_rank1()
    return face_sum_exp() if cfg.objective_source == "face" else default_sum_exp()


def build_spec(cfg: ScenarioConfig) -> tuple[SystemSpec, MinimizerCertificate]:
    """Materialize the configured system and its minimizer certificate."""
    mmap = make_map(cfg.mirror_kind, cfg.objective_dim)
    objective = build_objective(cfg)
    if objective.dim != mmap.dim:
        raise ValidationError(["objective.dim must match the mirror map dimension"])
    if cfg.objective_source == "inline":
        certificate = solve_minimizer(objective, mmap, tol=1e-10)
    else:
        certificate = certificate_for(objective, mmap)
    rates = build_rates(cfg)
    if cfg.system_kind in ("smd", "samd") and cfg.noise_kind != "zero":
        noise = make_noise(cfg.noise_kind, cfg.sigma0, cfg.alpha_sigma, mmap.dim)
    else:
        noise = ZeroNoise(mmap.dim)
    x0, z0 = default_start(mmap)
    spec = SystemSpec(
        kind=cfg.system_kind,
        mmap=mmap,
        objective=objective,
        rates=rates,
        noise=noise,
        x0=x0,
        z0=z0,
        beta=cfg.beta if cfg.system_kind == "nesterov" else None,
    )
    return spec, certificate


def with_overrides(cfg: ScenarioConfig, **kwargs) -> ScenarioConfig:
    return replace(cfg, **kwargs)


def config_digest(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode()).hexdigest()


def write_manifest(path, cfg: ScenarioConfig, command: str, extra: dict | None = None) -> None:
    """Flat key = value manifest sufficient to reproduce the run."""
    lines = [
        f"tool_version = {VERSION}",
        f"command = {command}",
        f"config_sha256 = {config_digest(cfg)}",
        f"base_seed = {cfg.seed}",
        f"trajectory_seeds = {' '.join(f'{cfg.seed}:{i}' for i in range(cfg.count))}",
        f"h = {cfg.h!r}",
        f"t0 = {cfg.t0!r}",
        f"t_end = {cfg.t_end!r}",
        f"record_stride = {cfg.record_stride}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
