from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adsbfuel.errors import SpanExceedsTM
from adsbfuel.spectral import (
    NormalizedSeries,
    SpectralFeature,
    featurize,
    fourier_closed_form,
    fourier_quadrature,
    normalize_time,
    reconstruct,
)
from adsbfuel.synth import PhaseProfile, generate_track
from adsbfuel.trajectory import FlightTrack, eval_profile

from conftest import META


def random_series(rng, k: int, full: bool = False) -> NormalizedSeries:
    end = math.pi if full else rng.uniform(0.05, math.pi)
    inner = np.sort(rng.uniform(0.0, end, k - 2)) if k > 2 else np.empty(0)
    t = np.unique(np.r_[0.0, inner, end])
    return NormalizedSeries(t, rng.normal(0.0, 100.0, len(t)))


def test_normalize_time_endpoints():
    ts = normalize_time([100.0, 150.0, 100.0 + 3600.0], 3600.0)
    assert ts[0] == 0.0
    assert ts[-1] == math.pi


def test_normalize_time_too_long():
    with pytest.raises(SpanExceedsTM):
        normalize_time([0.0, 7200.0], 3600.0)


def test_series_validation():
    with pytest.raises(ValueError):
        NormalizedSeries([0.1, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        NormalizedSeries([0.0, 4.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        NormalizedSeries([0.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_constant_full_span():
    s = NormalizedSeries(np.linspace(0, math.pi, 17), np.full(17, 3.5))
    c = fourier_closed_form(s, 20)
    assert c[0] == pytest.approx(7.0, abs=1e-13)
    np.testing.assert_allclose(c[1:], 0.0, atol=1e-13)
    assert fourier_quadrature(s, 0).tolist() == pytest.approx([7.0], abs=1e-12)


def test_two_point_trapezoid():
    c = fourier_closed_form(NormalizedSeries([0.0, math.pi], [1.0, 3.0]), 3)
    assert c[0] == pytest.approx(4.0, abs=1e-14)


def test_linear_ramp_against_exact_integral():
    # f = t on [0, pi]: alpha_n = (2/pi)((-1)^n - 1)/n^2
    s = NormalizedSeries(np.linspace(0, math.pi, 7), np.linspace(0, math.pi, 7))
    n = np.arange(1, 11)
    exact = (2 / math.pi) * (np.cos(n * math.pi) - 1) / n**2
    np.testing.assert_allclose(fourier_closed_form(s, 10)[1:], exact, atol=1e-14)
    np.testing.assert_allclose(fourier_quadrature(s, 10)[1:], exact, atol=1e-13)


def test_shape_of_output():
    s = NormalizedSeries([0.0, 1.0], [1.0, 1.0])
    assert fourier_quadrature(s, 0).shape == (1,)
    assert fourier_closed_form(s, 7).shape == (8,)


def test_random_50_point_series_matches_quadrature(rng):
    s = random_series(rng, 50)
    np.testing.assert_allclose(fourier_closed_form(s, 40), fourier_quadrature(s, 40), rtol=0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 120), st.integers(0, 100), st.integers(0, 2**32 - 1))
def test_oracle_equivalence(k, N, seed):
    s = random_series(np.random.default_rng(seed), k)
    np.testing.assert_allclose(fourier_closed_form(s, N), fourier_quadrature(s, N), rtol=0, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_linearity(k, a, b, seed):
    rng = np.random.default_rng(seed)
    s = random_series(rng, k)
    g = rng.normal(0, 50, len(s.tstar))
    cf = fourier_closed_form(s, 30)
    cg = fourier_closed_form(NormalizedSeries(s.tstar, g), 30)
    cab = fourier_closed_form(NormalizedSeries(s.tstar, a * s.values + b * g), 30)
    scale = max(1.0, np.abs(cf).max(), np.abs(cg).max()) * (abs(a) + abs(b) + 1)
    np.testing.assert_allclose(cab, a * cf + b * cg, rtol=0, atol=1e-12 * scale)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 80), st.integers(0, 2**32 - 1))
def test_parseval_bound(k, seed):
    s = random_series(np.random.default_rng(seed), k)
    c = fourier_closed_form(s, 60)
    # on [0, pi]: integral of the truncated series squared vs the function squared
    trunc = math.pi / 2 * (c[0] ** 2 / 2 + np.sum(c[1:] ** 2))
    t, f = s.tstar, s.values
    dt = np.diff(t)
    exact = np.sum(dt * (f[:-1] ** 2 + f[:-1] * f[1:] + f[1:] ** 2) / 3.0)
    assert trunc <= exact + 1e-6 * max(1.0, exact)


def test_decay_bound_by_parts(rng):
    # integrating by parts: |alpha_n| <= (2/pi) (|f(t_k)| + total variation) / n
    n = np.arange(1, 201)
    for _ in range(20):
        s = random_series(rng, int(rng.integers(2, 200)))
        c = np.abs(fourier_closed_form(s, 200))[1:]
        bound = (2 / math.pi) * (abs(s.values[-1]) + np.abs(np.diff(s.values)).sum()) / n
        assert np.all(c <= bound * (1 + 1e-12) + 1e-12)


def test_decay_fitted_on_low_modes(rng):
    # few knots and a dominant jump at the end of the support
    n = np.arange(1, 201)
    for _ in range(20):
        t = np.r_[0.0, np.sort(rng.uniform(0, 2.5, 3)), rng.uniform(2.6, 3.0)]
        f = rng.normal(1000.0, 30.0, 5)
        c = np.abs(fourier_closed_form(NormalizedSeries(t, f), 200))[1:]
        C = np.max(c[:10] * n[:10])
        assert np.all(c <= C / n * 1.5)


def test_reconstruct_constant_and_origin():
    assert reconstruct([4.0, 0.0, 0.0], 1.3) == pytest.approx(2.0)
    c = np.array([2.0, 0.5, -0.25, 0.1])
    assert reconstruct(c, 0.0) == pytest.approx(1.0 + 0.5 - 0.25 + 0.1)


def _climb_track():
    p = PhaseProfile(cruise_alt=9000.0, cruise_duration=1800.0, alt_noise=(0, 0, 0), speed_noise=(0, 0, 0))
    return generate_track(p, META)


def test_reconstruction_error_decreases_with_radius():
    tr = _climb_track()
    T_M = 10800.0
    dense = np.linspace(0.0, tr.duration, 4000)
    ref = eval_profile(tr, dense)[0]
    errs = []
    for N in (10, 25, 50, 100):
        feat = featurize(tr, N, N, T_M)
        rec = reconstruct(feat.alpha, dense * math.pi / T_M)
        errs.append(np.sqrt(np.trapezoid((rec - ref) ** 2, dense) / np.trapezoid(ref**2, dense)))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.01


def test_featurize_constant_track():
    t = np.linspace(0.0, 3600.0, 37)
    tr = FlightTrack(t, 0 * t, 0 * t, np.full_like(t, 9000.0), np.full_like(t, 230.0), meta=META)
    f = featurize(tr, 5, 5, 3600.0)
    np.testing.assert_allclose(f.alpha, [18000.0, 0, 0, 0, 0, 0], atol=1e-8)
    np.testing.assert_allclose(f.beta, [460.0, 0, 0, 0, 0, 0], atol=1e-10)
    assert f.t0 == 3600.0 and f.radii == (5, 5)


def test_featurize_translation_invariant(track):
    moved = FlightTrack(track.t + 12345.0, track.lat, track.lon, track.alt, track.gs, meta=track.meta)
    a, b = featurize(track, 20, 10), featurize(moved, 20, 10)
    np.testing.assert_array_equal(a.alpha, b.alpha)
    np.testing.assert_array_equal(a.beta, b.beta)
    assert a.radii == (20, 10)


def test_featurize_span_and_radius_checks(track):
    with pytest.raises(SpanExceedsTM):
        featurize(track, 5, 5, T_M=10.0)
    with pytest.raises(ValueError):
        featurize(track, 201, 5)


def test_feature_dict_round_trip(track):
    f = featurize(track, 7, 9)
    g = SpectralFeature.from_dict(f.to_dict())
    np.testing.assert_array_equal(f.alpha, g.alpha)
    np.testing.assert_array_equal(f.beta, g.beta)
    assert (g.t0, g.T_M) == (f.t0, f.T_M)
