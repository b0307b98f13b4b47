"""Acceptance gate: every top-level requirement runs here at its stated
tolerance, one test per criterion, printing one PASS/FAIL line each.

The expensive stochastic-rate ensemble is computed once and shared by the
two criteria that use it. Run with `pytest tests/test_acceptance.py -v -s`
to watch the lines stream.
"""

import pytest

from mirrorflow.presets import DEFAULT_BASE_SEED
from mirrorflow.verify import Verifier


@pytest.fixture(scope="module")
def verifier():
    return Verifier(base_seed=DEFAULT_BASE_SEED)


def _report(result):
    print(result.line())
    assert result.passed, result.line()


def test_criterion_01_mirror_map_algebra(verifier):
    # Fenchel/divergence identities, conjugate-gradient Lipschitz bound,
    # shift invariance: 1000 random duals per map, n in {2, 5, 50}, < 1e-9
    _report(verifier.check_mirror_algebra())


def test_criterion_02_gradient_correctness(verifier):
    # central differences vs analytic gradients, 1000 points per objective
    _report(verifier.check_gradients())


def test_criterion_03_deterministic_rate(verifier):
    # r = t^2, eta = 2t, a = 2/t, constant s, h = 1e-3 on [1, 100]:
    # gap <= 1.05 * bound at every recorded time
    _report(verifier.check_deterministic_rate())


def test_criterion_04_oscillator_equivalence(verifier):
    # planar quadratic, beta = 2, t in [1, 10]: averaged euclidean flow and
    # the second-order oscillator agree to O(h), halving ratio in [1.6, 2.4]
    _report(verifier.check_nesterov())


def test_criterion_05_primal_averaging_identity(verifier):
    # recursion-vs-integral-form residual is O(h) with halving in [1.6, 2.4]
    _report(verifier.check_primal_averaging())


def test_criterion_06_dual_increment_covariation(verifier):
    # constant eta = 1, sigma0 = 0.1, 1e4 steps: increment covariance within
    # 10% on the diagonal, off-diagonals inside 4-sigma CLT bands
    _report(verifier.check_covariation())


def test_criterion_07_expected_rate(verifier):
    # sigma0 = 0.1 constant, alpha_s = 0.5, alpha_r = 1, 100 trajectories,
    # h = 1e-2, t in [1, 200]: fitted mean-gap slope in [-0.65, -0.35]
    # (predicted -0.5) and mean gap <= bound + 2 stderr at t in {10, 50, 100}
    _report(verifier.check_expected_rate())


def test_criterion_08_averaged_iterate_rate(verifier):
    # non-accelerated stochastic runs, alpha_s = max(0, alpha_sigma + 1/2):
    # fitted slope of the mean averaged-iterate gap in [-0.65, -0.35]
    _report(verifier.check_averaged_smd())


def test_criterion_09_martingale_envelope(verifier):
    # on criterion 7's ensemble: >= 90% of paths keep the accumulated Ito
    # integral within 3 * diameter * envelope(b(t_end)), diameter = 2
    _report(verifier.check_martingale_envelope())


def test_criterion_10_deterministic_restart_shadowing(verifier):
    # epsilon = 2.4e-3, windows of 20, fixed seed: after the detected entry
    # time every restart stays within epsilon/3 of the stochastic energy
    _report(verifier.check_apt())


def test_criterion_11_degeneracy_and_determinism(verifier):
    # zero noise makes stochastic and deterministic integrators bitwise
    # identical; repeated seeded runs are bitwise identical
    _report(verifier.check_determinism())
