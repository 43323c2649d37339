"""Grid, transforms, norms, projections and dealiased products."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dnlslab.spectral import (BandSelector, Spectrum, TorusField, analyze, band_select,
                              bessel_apply, derivative, dyadic_blocks, frequencies, grid,
                              lp_norm, multiply_dealiased, random_hs, sobolev_norm, synthesize)

from conftest import random_spectrum

SQ2PI = np.sqrt(2 * np.pi)


def mode(N, k, amp=SQ2PI):
    return Spectrum.from_modes(N, {k: amp})


def direct_convolution(factors, conj):
    """O(N^k) reference for the truncated product spectrum."""
    N = factors[0].N
    terms = []
    for f, c in zip(factors, conj):
        # conj(f) has coefficient conj(f^(-xi)) at xi
        terms.append({(-x if c else x): (np.conj(v) if c else v)
                      for x, v in zip(f.freqs, f.coeffs)})
    acc = terms[0]
    for nxt in terms[1:]:
        out = {}
        for xa, ca in acc.items():
            for xb, cb in nxt.items():
                out[xa + xb] = out.get(xa + xb, 0) + ca * cb
        acc = out
    res = np.array([acc.get(x, 0) for x in frequencies(N)])
    return res * (2 * np.pi) ** (-(len(factors) - 1) / 2)


class TestTypes:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            TorusField(np.zeros(12))

    def test_rejects_small_grid(self):
        with pytest.raises(ValueError):
            Spectrum(np.zeros(4))

    def test_rejects_nonfinite(self):
        c = np.zeros(8, dtype=complex)
        c[3] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            Spectrum(c)

    def test_immutable(self):
        s = Spectrum.zeros(8)
        with pytest.raises(ValueError):
            s.coeffs[0] = 1.0

    def test_indexing_by_frequency(self):
        s = mode(16, -3, 2.0)
        assert s[-3] == 2.0 and s[3] == 0
        with pytest.raises(IndexError):
            s[8]

    def test_arithmetic(self):
        a, b = mode(8, 1, 1.0), mode(8, 2, 2.0)
        assert (a + b)[2] == 2.0
        assert (2 * a - a)[1] == 1.0
        with pytest.raises(ValueError):
            a + mode(16, 1)


class TestAnalyze:
    def test_constant(self):
        s = analyze(TorusField(np.ones(16)))
        assert s[0] == pytest.approx(SQ2PI, rel=1e-14)
        assert np.abs(np.delete(s.coeffs, 8)).max() < 1e-14

    def test_single_mode(self):
        s = analyze(TorusField.from_function(lambda x: np.exp(1j * x), 16))
        assert s[1] == pytest.approx(SQ2PI, rel=1e-14)
        assert np.abs(np.delete(s.coeffs, 9)).max() < 1e-14

    def test_zero(self):
        assert analyze(TorusField.zeros(8)).norm() == 0

    def test_synthesize_mode(self):
        f = synthesize(mode(16, 1))
        np.testing.assert_allclose(f.samples, np.exp(1j * grid(16)), atol=1e-14)

    def test_synthesize_zero(self):
        assert np.all(synthesize(Spectrum.zeros(8)).samples == 0)

    @pytest.mark.parametrize("N", [8, 32, 256])
    def test_round_trip(self, rng, N):
        s = random_spectrum(rng, N)
        np.testing.assert_allclose(analyze(synthesize(s)).coeffs, s.coeffs, atol=1e-12)

    def test_parseval_many_fields(self, rng):
        worst = 0.0
        for _ in range(1000):
            f = TorusField(rng.standard_normal(32) + 1j * rng.standard_normal(32))
            quad = 2 * np.pi / 32 * np.sum(np.abs(f.samples) ** 2)
            worst = max(worst, abs(analyze(f).norm() ** 2 - quad) / quad)
        assert worst < 1e-12


class TestNorms:
    def test_sobolev_single_mode(self):
        assert sobolev_norm(mode(16, 1), 1) == pytest.approx(2 * np.sqrt(np.pi), rel=1e-14)
        assert sobolev_norm(mode(16, 1), 0.5) == pytest.approx(SQ2PI * 2 ** 0.25, rel=1e-14)

    def test_sobolev_zero_is_l2(self, rng):
        s = random_spectrum(rng, 32, 3.0)
        assert sobolev_norm(s, 0) == pytest.approx(3.0, rel=1e-14)

    def test_negative_exponent(self):
        assert sobolev_norm(mode(8, 1, 1.0), -1) == pytest.approx(0.5 ** 0.5)

    def test_lp_unimodular(self):
        f = TorusField.from_function(lambda x: np.exp(1j * x), 16)
        assert lp_norm(f, 4) == pytest.approx((2 * np.pi) ** 0.25, rel=1e-14)
        assert lp_norm(f, np.inf) == pytest.approx(1.0)

    def test_lp_zero(self):
        assert lp_norm(TorusField.zeros(8), 3) == 0

    def test_lp_cross_term(self):
        f = TorusField.from_function(lambda x: 1 + np.exp(1j * x), 16)
        assert lp_norm(f, 2) == pytest.approx(np.sqrt(4 * np.pi), rel=1e-14)

    def test_lp_rejects_small_p(self):
        with pytest.raises(ValueError):
            lp_norm(TorusField.zeros(8), 0.5)


class TestMultipliers:
    def test_bessel_identity(self, rng):
        s = random_spectrum(rng, 16)
        np.testing.assert_array_equal(bessel_apply(s, 0).coeffs, s.coeffs)

    def test_bessel_mode(self):
        assert bessel_apply(mode(8, 1, 1.0), 2)[1] == pytest.approx(2.0)

    def test_bessel_inverse(self, rng):
        s = random_spectrum(rng, 64)
        np.testing.assert_allclose(bessel_apply(bessel_apply(s, 1.3), -1.3).coeffs,
                                   s.coeffs, atol=1e-12)

    def test_derivative_constant(self):
        assert derivative(mode(8, 0), 1).norm() == 0

    def test_derivative_modes(self):
        assert derivative(mode(8, 1, 1.0), 1)[1] == pytest.approx(1j)
        assert derivative(mode(8, 2, 1.0), 2)[2] == pytest.approx(-4.0)

    def test_derivative_order(self):
        with pytest.raises(ValueError):
            derivative(mode(8, 1), 0)


class TestBands:
    def test_dyadic_keeps_mode(self):
        s = mode(16, 3)
        np.testing.assert_array_equal(band_select(s, BandSelector.dyadic(2)).coeffs, s.coeffs)

    def test_low_drops_mode(self):
        assert band_select(mode(16, 3), BandSelector.low(2)).norm() == 0

    def test_dyadic_zero_is_mean(self, rng):
        s = random_spectrum(rng, 16)
        out = band_select(s, BandSelector.dyadic(0))
        assert np.count_nonzero(out.coeffs) == 1 and out[0] == s[0]

    def test_dyadic_partition(self, rng):
        s = random_spectrum(rng, 64)
        parts = [band_select(s, BandSelector.dyadic(k)).coeffs for k in range(dyadic_blocks(64))]
        np.testing.assert_array_equal(np.sum(parts, axis=0), s.coeffs)
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                assert np.vdot(parts[i], parts[j]) == 0

    def test_low_high_split(self, rng):
        s = random_spectrum(rng, 32)
        lo, hi = band_select(s, BandSelector.low(5)), band_select(s, BandSelector.high(5))
        np.testing.assert_array_equal((lo + hi).coeffs, s.coeffs)

    def test_invalid_kind(self):
        with pytest.raises(ValueError):
            BandSelector("middle", 1)


class TestProducts:
    def test_mode_squared(self):
        out = multiply_dealiased([mode(16, 1), mode(16, 1)])
        # (1/sqrt(2 pi)) * sqrt(2 pi)^2 at xi = 2
        assert out[2] == pytest.approx(SQ2PI, rel=1e-14)

    def test_modulus_is_real(self, rng):
        s = random_spectrum(rng, 32)
        c = multiply_dealiased([s, s], [False, True]).coeffs
        # the unpaired Nyquist mode -N/2 is the only obstruction to realness
        inner = c[1:]
        np.testing.assert_allclose(inner, np.conj(inner[::-1]), atol=1e-14)

    def test_zero_factor(self, rng):
        s = random_spectrum(rng, 16)
        assert multiply_dealiased([s, Spectrum.zeros(16), s]).norm() == 0

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="grid size"):
            multiply_dealiased([mode(8, 1), mode(16, 1)])

    def test_arity_limits(self):
        with pytest.raises(ValueError):
            multiply_dealiased([mode(8, 1)])

    def test_pairs_against_direct_convolution(self, rng):
        for _ in range(20):
            a, b = random_spectrum(rng, 32), random_spectrum(rng, 32)
            for conj in ([False, False], [False, True], [True, True]):
                ref = direct_convolution([a, b], conj)
                np.testing.assert_allclose(multiply_dealiased([a, b], conj).coeffs, ref,
                                           atol=1e-11)

    @pytest.mark.parametrize("conj", [[False, True, False], [True, False, True, False, False]])
    def test_higher_arity(self, rng, conj):
        fs = [random_spectrum(rng, 8) for _ in conj]
        np.testing.assert_allclose(multiply_dealiased(fs, conj).coeffs,
                                   direct_convolution(fs, conj), atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, (4, 16), elements=st.floats(-1, 1)))
    def test_cubic_property(self, data):
        a = Spectrum(data[0] + 1j * data[1])
        b = Spectrum(data[2] + 1j * data[3])
        np.testing.assert_allclose(multiply_dealiased([a, b, a], [False, True, False]).coeffs,
                                   direct_convolution([a, b, a], [False, True, False]),
                                   atol=1e-11)


class TestRandomData:
    def test_deterministic(self):
        a, b = random_hs(7, 0.75, 64, 0.1), random_hs(7, 0.75, 64, 0.1)
        assert a.coeffs.tobytes() == b.coeffs.tobytes()

    def test_amplitude_law(self):
        s = random_hs(1, 0.5, 32, 0.2)
        np.testing.assert_allclose(np.abs(s.coeffs), (1 + s.freqs ** 2.0) ** (-(0.5 + 0.5 + 0.2) / 2))

    def test_refinement_keeps_low_modes(self):
        a, b = random_hs(3, 1.0, 32, 0.1), random_hs(3, 1.0, 64, 0.1)
        np.testing.assert_array_equal(a.coeffs[1:], b.coeffs[17:48])

    @pytest.mark.parametrize("s, margin", [(0.75, 0.5), (1.0, 0.25)])
    def test_grid_stable_norm(self, s, margin):
        vals = [sobolev_norm(random_hs(0, s, N, margin), s) for N in (64, 128)]
        assert abs(vals[1] - vals[0]) / vals[0] < 0.05

    def test_norm_above_borderline_diverges(self):
        s, m = 0.75, 0.1
        vals = [sobolev_norm(random_hs(0, s, N, m), s + m + 1) for N in (32, 64, 128, 256)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] / vals[0] > 4

    def test_margin_positive(self):
        with pytest.raises(ValueError):
            random_hs(0, 1.0, 16, 0.0)
