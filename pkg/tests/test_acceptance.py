"""
Acceptance suite.

Each test measures one acceptance criterion, records a single PASS/FAIL line
(collected in the terminal summary under "acceptance criteria"), then asserts.
"""
import time
from pathlib import Path

import numpy as np
import pytest

from dnlslab.diagnostics import (DEFAULT_SUITE, GrowthParams, growth_series, growth_verdict,
                                 inequality_trial, smoothing_experiment)
from dnlslab.evolution import StepperConfig, evolve
from dnlslab.gauge import GaugeState, compute_mu, gauge_chain, l4_fourth
from dnlslab.spectral import Spectrum, analyze, smooth_data, sobolev_norm, synthesize
from dnlslab.terms import (C3, C5, L4_COEFF, eval_term, gauge_rhs, nr_deriv_direct,
                           quintic_direct, quintic_union)

import golden_cases as gc
from conftest import random_spectrum, record_acceptance

GOLDEN = Path(__file__).parent / "golden"
RULE = gc.RULE


def test_c01_plane_wave_exactness():
    errors, times = [], []
    for A, k in gc.PLANE_WAVES:
        t0 = time.perf_counter()
        end = gc.plane_wave_final(A, k)
        times.append(time.perf_counter() - t0)
        exact = gc.plane_wave(A, k).coeffs * np.exp(1j * (A * A * k - k * k) * 1.0)
        errors.append(np.linalg.norm(end.coeffs - exact) / np.linalg.norm(exact))
    ok = max(errors) < 1e-8 and max(times) < 10
    record_acceptance(1, "plane-wave exactness", ok,
                      "rel L2 errors " + ", ".join(f"{e:.1e}" for e in errors)
                      + f" (tol 1e-8); max runtime {max(times):.2f}s (limit 10s)")
    assert ok


def test_c02_conservation():
    worst = np.zeros(3)
    for seed in (3, 11, 23):
        traj = evolve(smooth_data(seed, 64), StepperConfig(dt=1e-3, T=1.0, store_every=10))
        m = np.array([mon.as_tuple() for mon in traj.monitors])
        worst = np.maximum(worst, np.abs(m - m[0]).max(axis=0) / np.abs(m[0]))
    ok = worst[0] < 1e-10 and worst[1] < 1e-8 and worst[2] < 1e-8
    record_acceptance(2, "conservation", ok,
                      f"relative drift mass {worst[0]:.1e} (tol 1e-10), momentum "
                      f"{worst[1]:.1e}, energy {worst[2]:.1e} (tol 1e-8); N=64, 3 seeds")
    assert ok


def _physical(z, fn, degree):
    from dnlslab.spectral import from_physical, padded_size, to_physical
    M = padded_size(z.N, degree)
    f = to_physical(z, M)
    fx = to_physical(Spectrum(z.coeffs * 1j * z.freqs), M)
    return from_physical(fn(f, fx), z.N)


@pytest.fixture(scope="module")
def oracle_clock():
    return {"t": 0.0}


def test_c03_resonance_algebra(oracle_clock):
    rng = np.random.default_rng(303)
    worst = np.zeros(3)
    t0 = time.perf_counter()
    for _ in range(50):
        z = random_spectrum(rng, 16, rng.uniform(0.2, 2.0))
        c, xi = z.coeffs, z.freqs
        S = np.sum(xi * np.abs(c) ** 2)
        full = _physical(z, lambda f, fx: -f * f * np.conj(fx), 3)
        lhs = nr_deriv_direct(z) + 2j * C3 * S * c - 1j * C3 * xi * np.abs(c) ** 2 * c
        worst[0] = max(worst[0], np.abs(lhs - full).max())
        quint = _physical(z, lambda f, fx: 0.5j * np.abs(f) ** 4 * f, 5)
        worst[1] = max(worst[1], np.abs(quintic_direct(z) + 0.5j * C5 * quintic_union(z)
                                        - quint).max())
        s3 = eval_term("N21_STAR3", z, 0.0, RULE).coeffs
        split = (eval_term("E1", z, 0.0, RULE).coeffs + eval_term("E2", z, 0.0, RULE).coeffs
                 + 1j * L4_COEFF * l4_fourth(z) * c)
        worst[2] = max(worst[2], np.abs(split - s3).max())
    oracle_clock["t"] += time.perf_counter() - t0
    ok = bool(np.all(worst < 1e-11))
    record_acceptance(3, "resonance algebra", ok,
                      f"max errors cancellation {worst[0]:.1e}, quintic {worst[1]:.1e}, "
                      f"E-split {worst[2]:.1e} (tol 1e-11; 50 spectra, N=16)")
    assert ok


def test_c04_fast_oracle_equivalence(oracle_clock):
    rng = np.random.default_rng(404)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        z = random_spectrum(rng, 16, rng.uniform(0.2, 2.0))
        mu = rng.uniform(0.0, 1.0)
        d = gauge_rhs(z, mu, RULE, "fast").coeffs - gauge_rhs(z, mu, RULE, "oracle").coeffs
        worst = max(worst, np.abs(d).max())
    oracle_clock["t"] += time.perf_counter() - t0
    total = oracle_clock["t"]
    ok = worst < 1e-11 and total < 300
    record_acceptance(4, "fast/oracle RHS", ok,
                      f"max |fast - oracle| {worst:.1e} (tol 1e-11; 100 spectra, N=16); "
                      f"oracle suite {total:.1f}s (limit 300s)")
    assert ok


def test_c05_duhamel_identity():
    t0 = time.perf_counter()
    _, res = gc.duhamel_series(5e-4, 0.5)
    coarse = [gc.duhamel_series(dt, 0.5)[1].max() for dt in (8e-3, 4e-3, 2e-3)]
    rates = np.log2(np.array(coarse[:-1]) / np.array(coarse[1:]))
    elapsed = time.perf_counter() - t0
    ok = res.max() < 1e-6 and bool(np.all(rates >= 2))
    record_acceptance(5, "Duhamel identity", ok,
                      f"max residual {res.max():.1e} at dt=5e-4 (tol 1e-6); observed orders "
                      + ", ".join(f"{r:.2f}" for r in rates) + f" (need >= 2); {elapsed:.1f}s")
    assert ok


def test_c06_gauge_consistency():
    worst = 0.0
    for seed in (1, 2, 3):
        u0 = smooth_data(seed, 64)
        mu = compute_mu(u0)
        z0 = analyze(gauge_chain(synthesize(u0), GaugeState.initial(mu)))
        cfg = dict(dt=1e-3, T=1.0, store_every=50)
        u = evolve(u0, StepperConfig(**cfg))
        z = evolve(z0, StepperConfig(equation="gauge", **cfg), mu)
        assert np.allclose(u.times, z.times)
        worst = max(worst, max(sobolev_norm(z.physical(i) - u.spectra[i], 1.0)
                               for i in range(len(u))))
    ok = worst < 1e-6
    record_acceptance(6, "gauge consistency", ok,
                      f"max H^1 distance {worst:.1e} (tol 1e-6; N=64, t<=1, 3 seeds)")
    assert ok


def test_c07_smoothing_signature():
    t0 = time.perf_counter()
    res = smoothing_experiment()
    elapsed = time.perf_counter() - t0
    ok = res["passed"] and elapsed < 1800
    record_acceptance(7, "smoothing signature", ok,
                      f"data slope {res['data_slope']:.3f}, residual slope "
                      f"{res['residual_slope']:.3f}, separation {res['separation']:.3f} "
                      f"(need >= {res['threshold']:.2f}); {elapsed:.1f}s")
    assert ok


def test_c08_falsification_suite():
    t0 = time.perf_counter()
    verdicts = []
    for name, params in DEFAULT_SUITE:
        rep = inequality_trial(name, params, trials=200)
        label = name + ("" if not params else "(" + ",".join(f"{k}={v:g}" for k, v in
                                                             sorted(params.items())) + ")")
        verdicts.append((label, rep["verdict"], max(rep["growth"])))
    elapsed = time.perf_counter() - t0
    bad = [v for v in verdicts if v[1] == "FALSIFIED"]
    ok = not bad
    worst = max(verdicts, key=lambda v: v[2])
    record_acceptance(8, "falsification suite", ok,
                      f"{len(verdicts) - len(bad)}/{len(verdicts)} estimates NOT_FALSIFIED at "
                      f"200 trials; largest per-doubling max-ratio growth {worst[2]:.2f} "
                      f"({worst[0]}); {elapsed:.1f}s")
    assert ok, bad


def test_c09_growth_sanity():
    traj = evolve(smooth_data(7, 64), StepperConfig(dt=1e-3, T=20.0, store_every=100))
    series = growth_series(traj, GrowthParams(s=2.0, epsilon=0.01))
    verdict = growth_verdict(series)
    norms = series[:, 1]
    ok = verdict["bounded"]
    record_acceptance(9, "growth sanity", ok,
                      f"H^2 norm in [{norms.min():.3f}, {norms.max():.3f}] over t in [0,20]; "
                      f"max envelope ratio {verdict['max_ratio']:.3f}; bounded={ok}")
    assert ok


def _numeric(text):
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")][1:]
    return np.array([[float(v) for v in ln.split(",")] for ln in rows])


def test_c10_determinism_and_golden():
    first, second = gc.build(), gc.build()
    identical = all(first[k].encode() == second[k].encode() for k in first)
    mismatched, byte_equal = [], 0
    for name, text in first.items():
        committed = (GOLDEN / name).read_text()
        byte_equal += committed == text
        new, old = _numeric(text), _numeric(committed)
        scale = max(np.abs(old).max(), 1.0)
        atol = 1e-10 if name.startswith("c5_") else 1e-12 * scale
        if new.shape != old.shape or not np.allclose(new, old, rtol=1e-10, atol=atol):
            mismatched.append(name)
    ok = identical and not mismatched
    record_acceptance(10, "determinism and golden files", ok,
                      f"repeat runs byte-identical={identical}; {len(first) - len(mismatched)}"
                      f"/{len(first)} golden CSVs match ({byte_equal} byte-for-byte)")
    assert ok, mismatched
