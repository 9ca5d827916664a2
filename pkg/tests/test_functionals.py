import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from scipy import integrate

from deltalab.density import ExponentialDensity, dilate, histogram_from_bins
from deltalab.errors import NegativeArgumentError, UndefinedConditionalError
from deltalab.functionals import (
    conditional_ratio,
    convolution_tail,
    critical_points,
    delta_at,
    delta_monte_carlo,
    delta_profile,
    delta_quadrature,
    delta_values,
    golden_section_max,
    min_sum_decomposition,
)
from deltalab.sharpness import sharp_family, spike_interval, SharpFamilyParams
from deltalab.suite import random_histogram

from strategies import histograms

UNIFORM = histogram_from_bins([0, 1], [1])
EXP1 = ExponentialDensity(1.0)


def exp_delta_oracle(rate, z):
    """delta for Exp(rate) straight from the double integral, no library code."""
    inner = lambda x: rate * math.exp(-rate * x) * math.exp(-rate * (2 * z - x))
    return integrate.quad(inner, 0, z, epsabs=1e-15, epsrel=1e-13)[0]


def uniform_delta_oracle(z):
    # integral over [0, z] of 1 - (2z - x), valid while 2z <= 1
    assert z <= 0.5
    return z - 1.5 * z * z


def dblquad_sum_tail(d, t):
    """P(X + Y >= t) by quadrature over each pair of bins.

    The y-length of the clipped bin is written out directly; the x-integral
    is done by adaptive quadrature with the kinks at t - e_j supplied.
    """
    total = 0.0
    e, h = d.edges, d.heights
    for i in range(d.n_bins):
        for j in range(d.n_bins):
            if h[i] == 0 or h[j] == 0:
                continue
            length = lambda x: e[j + 1] - max(e[j], min(e[j + 1], t - x))
            kinks = [p for p in (t - e[j], t - e[j + 1]) if e[i] < p < e[i + 1]]
            val, _ = integrate.quad(length, e[i], e[i + 1], points=kinks or None, epsabs=1e-14)
            total += h[i] * h[j] * val
    return total


def test_oracles_agree_with_frozen_values():
    assert exp_delta_oracle(1.0, 1.0) == pytest.approx(0.1353352832366127, abs=1e-13)
    assert uniform_delta_oracle(1 / 3) == pytest.approx(1 / 6, abs=1e-15)


@pytest.mark.parametrize("d", [UNIFORM, EXP1, sharp_family(6)])
def test_delta_at_zero(d):
    assert delta_at(d, 0.0) == 0.0


def test_delta_exponential_closed_form():
    assert delta_at(EXP1, 1.0) == pytest.approx(math.exp(-2), abs=1e-15)
    assert abs(delta_at(EXP1, 1.0) - exp_delta_oracle(1.0, 1.0)) <= 1e-10
    for rate in (0.5, 2.0, 5.0):
        for z in (0.01, 0.3, 2.0):
            assert abs(delta_at(ExponentialDensity(rate), z) - exp_delta_oracle(rate, z)) <= 1e-10


def test_delta_uniform():
    assert delta_at(UNIFORM, 1 / 3) == pytest.approx(1 / 6, abs=1e-15)
    for z in np.linspace(0, 0.5, 11):
        assert delta_at(UNIFORM, z) == pytest.approx(uniform_delta_oracle(z), abs=1e-15)


def test_delta_uniform_monte_carlo():
    est, se = delta_monte_carlo(UNIFORM, 1 / 3, n_samples=200_000, seed=11)
    assert abs(est - 1 / 6) <= 4 * se


def test_negative_z_rejected():
    for fn in (delta_at, min_sum_decomposition, conditional_ratio, delta_quadrature):
        with pytest.raises(NegativeArgumentError):
            fn(UNIFORM, -0.1)


def test_min_sum_decomposition_examples():
    dec = min_sum_decomposition(EXP1, 1.0)
    e2 = math.exp(-2)
    assert dec.p_mixed == pytest.approx(2 * e2, rel=1e-14)
    assert dec.p_both_large == pytest.approx(e2, rel=1e-14)
    assert dec.p_sum == pytest.approx(3 * e2, rel=1e-14)
    # Erlang(2) tail at 2z: e^{-2 lambda z} (1 + 2 lambda z)
    assert dec.p_sum == pytest.approx(math.exp(-2) * (1 + 2), rel=1e-14)

    assert tuple(min_sum_decomposition(UNIFORM, 0.0)) == (0.0, 1.0, 1.0)
    assert tuple(min_sum_decomposition(EXP1, 0.0)) == (0.0, 1.0, 1.0)

    dec = min_sum_decomposition(UNIFORM, 0.5)
    assert dec.p_both_large == 0.25
    assert dec.p_sum >= 0.25


def test_conditional_ratio_examples():
    assert conditional_ratio(EXP1, 1.0) == pytest.approx(2 / 3, rel=1e-14)
    assert conditional_ratio(UNIFORM, 0.0) == 0.0
    assert 0 < conditional_ratio(UNIFORM, 0.75) <= 1
    for z in (1.0, 1.5):
        with pytest.raises(UndefinedConditionalError):
            conditional_ratio(UNIFORM, z)


def test_exact_routes_agree(small_histograms):
    rng = np.random.default_rng(5)
    for _, d in small_histograms:
        zs = rng.uniform(0, d.edges[-1], 25)
        cells = np.array([delta_at(d, z) for z in zs])
        np.testing.assert_allclose(delta_values(d, zs), cells, rtol=0, atol=1e-13)
        quad = np.array([delta_quadrature(d, z) for z in zs[:6]])
        np.testing.assert_allclose(cells[:6], quad, rtol=0, atol=1e-11)


def test_delta_values_quadrature_method():
    z = np.array([0.1, 0.5, 2.0])
    np.testing.assert_allclose(delta_values(EXP1, z, method="quadrature"), delta_values(EXP1, z), atol=1e-14)
    with pytest.raises(ValueError):
        delta_values(EXP1, z, method="fft")


def test_delta_bounded_by_F_times_sf(small_suite):
    rng = np.random.default_rng(1)
    pairs = [(small_suite[i % len(small_suite)][1], None) for i in range(1000)]
    for d, _ in pairs:
        z = float(d.quantile(rng.uniform(0, 1)))
        F = float(d.cdf(z))
        val = delta_at(d, z)
        assert 0 <= val <= F * (1 - F) + 1e-12 <= 0.25 + 1e-12


def test_lipschitz_on_grid(small_suite):
    for _, d in small_suite:
        prof = delta_profile(d, grid_points=512)
        dz = np.diff(prof.z_grid)
        dv = np.abs(np.diff(prof.delta_values))
        assert np.all(dv <= 2 * d.sup_norm() * dz + 1e-12)


def test_p_sum_matches_convolution_tail(small_suite):
    rng = np.random.default_rng(2)
    for _, d in small_suite:
        top = d.edges[-1] if hasattr(d, "edges") else float(d.quantile(0.999))
        for z in rng.uniform(0, top, 10):
            assert abs(min_sum_decomposition(d, z).p_sum - convolution_tail(d, 2 * z)) <= 1e-8


def test_convolution_tail_against_dblquad():
    rng = np.random.default_rng(9)
    for _ in range(3):
        d = random_histogram(rng, max_bins=4)
        for t in rng.uniform(0, 2 * d.edges[-1], 4):
            assert abs(convolution_tail(d, t) - dblquad_sum_tail(d, t)) <= 1e-9


def test_p_sum_at_least_quarter_below_median(small_suite):
    for _, d in small_suite:
        for z in np.linspace(0, d.median(), 33):
            assert min_sum_decomposition(d, z).p_sum >= 0.25 - 1e-12


def test_profile_uniform():
    prof = delta_profile(UNIFORM, 0.5)
    assert prof.sup_value == pytest.approx(1 / 6, abs=1e-12)
    assert abs(prof.arg_sup - 1 / 3) <= 1e-8
    assert prof.range_end == 0.5


def test_profile_exponential_interior_max():
    prof = delta_profile(EXP1, math.log(2))
    # z e^{-2z} peaks at z = 1/2 < ln 2
    assert prof.sup_value == pytest.approx(math.exp(-1) / 2, abs=1e-12)
    assert prof.arg_sup == pytest.approx(0.5, abs=1e-6)
    assert prof.sup_value == pytest.approx(0.18394, abs=1e-5)


def test_profile_defaults_to_median():
    prof = delta_profile(EXP1)
    assert prof.range_end == pytest.approx(math.log(2))
    assert prof.range_label == "median"


def test_profile_sharp_family_bound():
    d = sharp_family(8)
    prof = delta_profile(d)
    assert prof.sup_value <= 2 / 8 + 1 / 16 + 1e-9


def test_profile_tie_break_smallest_z():
    # delta is flat on the gap after the first spike; the smallest maximizer is the spike's right edge
    d = sharp_family(8)
    prof = delta_profile(d)
    assert prof.arg_sup == spike_interval(SharpFamilyParams(8), 1)[1]


def test_profile_never_below_dense_brute_force(small_histograms):
    for _, d in small_histograms[:8]:
        prof = delta_profile(d, grid_points=256)
        z = np.linspace(0, d.median(), 200_001)
        assert prof.sup_value >= delta_values(d, z).max() - 1e-15


def test_profile_rejects_bad_arguments():
    with pytest.raises(ValueError):
        delta_profile(UNIFORM, 0.5, grid_points=10)
    with pytest.raises(NegativeArgumentError):
        delta_profile(UNIFORM, 0.0)


def test_profile_values_in_range(small_suite):
    for _, d in small_suite:
        prof = delta_profile(d, grid_points=256)
        assert np.all(prof.delta_values >= 0)
        assert np.all(prof.delta_values <= 0.25 + 1e-12)
        assert prof.sup_value >= prof.delta_values.max()
        assert np.all(np.diff(prof.z_grid) > 0)


@pytest.mark.parametrize("lam", [0.1, 1.0, 7.3])
def test_profile_dilation_invariance(small_suite, lam):
    for _, d in small_suite:
        a = delta_profile(d).sup_value
        g = dilate(d, lam)
        b = delta_profile(g, g.median()).sup_value
        assert abs(a - b) <= 1e-9


def test_critical_points_include_edges_and_midpoints():
    d = histogram_from_bins([0.2, 0.6, 1.4], [1.25, 0.625])
    pts = critical_points(d, 10)
    for v in (0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 1.0, 1.4):
        assert np.any(np.isclose(pts, v, atol=1e-15))
    assert critical_points(EXP1, 1.0).size == 0


def test_golden_section_max_vectorized():
    a = np.array([0.0, 1.0])
    b = np.array([1.0, 3.0])
    centers = np.array([0.3, 2.5])
    x, f = golden_section_max(lambda t: -((t - np.where(t < 1, 0.3, 2.5)) ** 2), a, b, 1e-10)
    np.testing.assert_allclose(x, centers, atol=1e-8)


def test_monte_carlo_examples():
    est, se = delta_monte_carlo(EXP1, 1.0, n_samples=1_000_000, seed=3)
    assert abs(est - math.exp(-2)) <= 4 * se
    assert delta_monte_carlo(UNIFORM, 0.0, seed=1) == (0.0, 0.0)
    est, se = delta_monte_carlo(UNIFORM, 1 / 3, n_samples=1_000_000, seed=4)
    assert abs(est - 1 / 6) <= 4 * se


def test_monte_carlo_deterministic_and_chunk_free():
    a = delta_monte_carlo(UNIFORM, 0.3, n_samples=50_000, seed=8)
    b = delta_monte_carlo(UNIFORM, 0.3, n_samples=50_000, seed=8, chunk=7_777)
    assert a == b
    with pytest.raises(ValueError):
        delta_monte_carlo(UNIFORM, 0.3, n_samples=100)


def test_monte_carlo_consistency(small_suite):
    for _, d in small_suite[:10]:
        for z in np.linspace(0, d.median(), 5):
            est, se = delta_monte_carlo(d, float(z), n_samples=100_000, seed=21)
            assert abs(delta_at(d, float(z)) - est) <= 4 * se + 1e-12


def test_profile_exports():
    prof = delta_profile(UNIFORM, 0.5, grid_points=64)
    lines = prof.to_csv().splitlines()
    assert lines[0] == "z,delta"
    assert len(lines) == len(prof.z_grid) + 1
    z, v = lines[17].split(",")
    assert float(z) == prof.z_grid[16] and float(v) == prof.delta_values[16]
    doc = json.loads(prof.to_json())
    schema = json.loads(resources.files("deltalab").joinpath("schemas/delta_profile.schema.json").read_text())
    jsonschema.validate(doc, schema)
    assert set(doc) == {"z_grid", "delta_values", "sup_value", "arg_sup", "range_end"}


@settings(max_examples=40, deadline=None)
@given(histograms())
def test_delta_properties(d):
    z = np.linspace(0, d.edges[-1], 97)
    v = delta_values(d, z)
    F = d.cdf(z)
    assert np.all(v <= F * (1 - F) + 1e-12)
    for zz in z[::12]:
        assert abs(min_sum_decomposition(d, zz).p_sum - convolution_tail(d, 2 * zz)) <= 1e-8
