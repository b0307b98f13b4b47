#!/usr/bin/env python3
"""The averaged euclidean flow is a damped oscillator in disguise.

With the identity mirror map, energy weight r = t^2 / beta^2, learning rate
eta = t / beta, and averaging rate a = beta / t, the averaged system's
primal variable obeys x'' = -grad f(x) - x' (beta + 1) / t. This script
integrates both formulations of the same flow on a planar quadratic,
overlays the oscillating coordinate, and shows the sup distance between
them shrinking at first order as the step is refined. It also checks the
t^(-2) decay of the gap implied by the admissible rates.

Writes demos/output/nesterov_oscillator/.
"""

import pathlib

import numpy as np

from mirrorflow.analysis import fit_rate_exponent
from mirrorflow.dynamics import SystemSpec, nesterov_bundle, simulate
from mirrorflow.maps import EuclideanMap
from mirrorflow.noise import ZeroNoise
from mirrorflow.objectives import MinimizerCertificate, Rank1Quadratic
from mirrorflow.svg import line_chart

OUT = pathlib.Path(__file__).parent / "output" / "nesterov_oscillator"
BETA = 2.0
T_END = 40.0


def build(kind, h):
    mmap = EuclideanMap(2)
    objective = Rank1Quadratic(np.array([1.0, 0.6]))
    cert = MinimizerCertificate(
        x_star=np.zeros(2), f_star=0.0, z_star=np.zeros(2),
        boundary=False, residual=0.0, method="analytic",
    )
    x0 = np.array([1.0, -0.5])
    spec = SystemSpec(
        kind=kind, mmap=mmap, objective=objective, rates=nesterov_bundle(BETA),
        noise=ZeroNoise(2), x0=x0, z0=x0.copy(),
        beta=BETA if kind == "nesterov" else None,
    )
    return simulate(spec, cert, t_end=T_END, h=h, record_stride=10)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    averaged = build("amd", 1e-3)
    oscillator = build("nesterov", 1e-3)
    line_chart(
        OUT / "oscillation.svg",
        [("averaged flow, x_1", averaged.times, averaged.x[:, 0]),
         ("oscillator, x_1", oscillator.times, oscillator.x[:, 0])],
        title="same flow, two formulations", ylabel="x_1",
        logx=False, logy=False,
    )

    print("sup distance between the two formulations:")
    for h in (4e-3, 2e-3, 1e-3):
        d = float(np.abs(build("amd", h).x - build("nesterov", h).x).max())
        print(f"  h = {h:.0e}: {d:.3e}")

    # the raw gap oscillates through near-zeros; fit its decay envelope
    envelope = np.maximum.accumulate(averaged.gap[::-1])[::-1]
    fit = fit_rate_exponent(averaged.times, envelope, (4.0, T_END))
    print(
        f"gap-envelope decay exponent over [4, {T_END:g}]: {fit.slope:+.2f} "
        "(the admissible rates guarantee -2 or faster)"
    )
    line_chart(
        OUT / "gap.svg",
        [("gap", averaged.times, averaged.gap)],
        title="quadratic-rate decay with oscillations", ylabel="gap",
    )
    print(f"wrote {OUT}/")


if __name__ == "__main__":
    main()
