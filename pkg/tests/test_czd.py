import numpy as np
import pytest

import flaglp
from flaglp import analyze, cz_decompose, interpolation_experiment, neumann_inverse, support_violations
from flaglp.czd import hardy_type_norm
from flaglp.errors import DomainError
from flaglp.squarefuncs import g_flag_discrete

from conftest import random_function


@pytest.fixture(scope="module")
def cz_setup():
    grid = flaglp.make_grid(1, 1, 6)
    bank = flaglp.build_filter_bank(grid, N=3)
    fs, _ = flaglp.gen_corpus(grid, 2, 5, bank=bank, N=3,
                              kinds=("band-limited", "indicator"))
    return grid, bank, fs


def peak_level(f, bank):
    g, _ = neumann_inverse(f, bank, tol=1e-8)
    return float(np.max(g_flag_discrete(analyze(g, bank)).values.real))


def test_additivity(cz_setup):
    grid, bank, fs = cz_setup
    for f in fs:
        alpha = 0.25 * peak_level(f, bank)
        g, b, report = cz_decompose(f, bank, alpha)
        residual = np.linalg.norm(g.values + b.values - f.values)
        assert residual / np.linalg.norm(f.values) <= 1e-9


def test_support_invariant(cz_setup):
    grid, bank, fs = cz_setup
    for f in fs:
        alpha = 0.25 * peak_level(f, bank)
        _, _, report = cz_decompose(f, bank, alpha)
        assert support_violations(report, bank) == 0


def test_degenerate_high_threshold(cz_setup):
    grid, bank, fs = cz_setup
    f = fs[0]
    alpha = 2.0 * peak_level(f, bank)
    g, b, report = cz_decompose(f, bank, alpha)
    assert np.max(np.abs(b.values)) == 0.0
    assert report.level_set_measures == ()


def test_alpha_monotonicity(cz_setup):
    # raising the threshold can only move rectangles toward the good class
    grid, bank, fs = cz_setup
    f = fs[0]
    peak = peak_level(f, bank)
    _, _, low = cz_decompose(f, bank, 0.2 * peak)
    _, _, high = cz_decompose(f, bank, 0.4 * peak)
    for key in low.rect_classes:
        assert np.all(high.rect_classes[key] <= low.rect_classes[key])


def test_level_set_measures_decrease(cz_setup):
    grid, bank, fs = cz_setup
    f = fs[1]
    _, _, report = cz_decompose(f, bank, 0.1 * peak_level(f, bank))
    meas = report.level_set_measures
    assert all(meas[i] >= meas[i + 1] for i in range(len(meas) - 1))


def test_exponent_validation(cz_setup):
    grid, bank, fs = cz_setup
    with pytest.raises(DomainError):
        cz_decompose(fs[0], bank, 0.1, p=0.5, p1=2.0, p2=0.7)
    with pytest.raises(DomainError):
        cz_decompose(fs[0], bank, -1.0)


def test_hardy_type_norm_bridges_regimes(cz_setup):
    grid, bank, fs = cz_setup
    f = fs[0]
    # p <= 1 goes through the discrete square function, p > 1 through L^p
    assert hardy_type_norm(f, bank, 0.9) > 0
    assert hardy_type_norm(f, bank, 2.0) == pytest.approx(
        flaglp.lp_norm(f, 2.0), rel=1e-12)


def test_interpolation_identity_and_zero(cz_setup):
    grid, bank, fs = cz_setup
    identity = lambda f: f
    zero = lambda f: flaglp.SampledFunction(grid, np.zeros(grid.shape))
    report = interpolation_experiment(identity, bank, 2.0, 0.7,
                                      [0.8, 0.9, 1.0], fs)
    assert all(np.isfinite(v) for v in report["ratios"].values())
    assert report["no_blowup"]
    report0 = interpolation_experiment(zero, bank, 2.0, 0.7,
                                       [0.8, 0.9, 1.0], fs)
    assert all(v == 0.0 for v in report0["ratios"].values())
