"""
Experiments built on the solvers: nonlinear smoothing, Sobolev growth, the
low/high frequency split, and an empirical harness that tries to break the
linear and multilinear estimates used in the well-posedness theory.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .evolution import StepperConfig, Trajectory, evolve, linear_propagate
from .gauge import gauge_map, compute_mu
from .spacetime import SpacetimeField, mixed_lp_norm, spacetime_norm, windowed_free
from .spectral import (BandSelector, Spectrum, band_select, japanese, multiply_dealiased,
                       random_hs, sobolev_norm, synthesize, analyze)
from .terms import ComparisonRule, normal_form


# ---------------------------------------------------------------------------
# smoothing

@dataclass(frozen=True)
class SmoothingParams:
    """Data regularity ``s``, gain ``a`` and margin ``epsilon``.

    Requires 0 < a < min(s - 1/2 - epsilon, 1/2 - epsilon).
    """

    s: float
    a: float
    epsilon: float = 0.01

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        bound = min(self.s - 0.5 - self.epsilon, 0.5 - self.epsilon)
        if not 0 < self.a < bound:
            raise ValueError(f"need 0 < a < {bound:.4g} for s={self.s}, epsilon={self.epsilon}")

    @property
    def sigma(self) -> float:
        return min(self.s, 1.0)


def smoothing_series(traj: Trajectory, z0: Spectrum, params: SmoothingParams) -> np.ndarray:
    """Rows (t, ||z(t) - e^{it d^2} z0||_{H^{s+a}}, ||z0||_{H^s})."""
    if traj.equation != "gauge":
        raise ValueError("smoothing_series needs a gauge trajectory")
    data = sobolev_norm(z0, params.s)
    rows = [(t, sobolev_norm(z - linear_propagate(z0, t), params.s + params.a), data)
            for t, z in zip(traj.times, traj.spectra)]
    return np.array(rows, dtype=float).reshape(-1, 3)


def single_mode_frequency(k: int, coeff: complex, mu: float) -> float:
    """omega with z_hat(k, t) = z_hat(k, 0) exp(i (omega - k^2) t) for single-mode data."""
    rho = abs(coeff) ** 2 / (2 * np.pi)
    return (-k * rho + 0.5 * rho ** 2 - mu * rho
            - (12 * np.pi ** 3 - 1) / (8 * np.pi ** 3) * rho ** 2 + 2 * mu ** 2)


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def smoothing_experiment(Ns=(32, 64, 128), s: float = 0.75, a: float = 0.2,
                         margin: float = 0.01, T: float = 0.5, seed: int = 0,
                         amplitude: float = 0.25, dt: float = 1e-3,
                         epsilon: float = 0.01) -> dict:
    """Grid-refinement experiment for the smoothing residual.

    The same random data (identical low modes at every N) is evolved under
    the gauged flow.  Returns per-N norms at time T and the log-log slopes of
    the residual and of the data in H^{s+a}; their difference is the
    separation.
    """
    params = SmoothingParams(s, a, epsilon)
    res, dat = [], []
    for N in Ns:
        z0 = random_hs(seed, s, N, margin) * amplitude
        traj = evolve(z0, StepperConfig(dt=dt, T=T, store_every=max(1, int(round(T / dt))),
                                        equation="gauge"))
        series = smoothing_series(traj, z0, params)
        res.append(series[-1, 1])
        dat.append(sobolev_norm(z0, s + a))
    sr, sd = loglog_slope(Ns, res), loglog_slope(Ns, dat)
    return {"N": list(Ns), "residual": res, "data_norm": dat,
            "residual_slope": sr, "data_slope": sd, "separation": sd - sr,
            "threshold": a / 2, "passed": bool(sd - sr >= a / 2)}


# ---------------------------------------------------------------------------
# growth

@dataclass(frozen=True)
class GrowthParams:
    s: float = 2.0
    epsilon: float = 0.01
    T_block: float = 1.0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if not self.T_block > 0:
            raise ValueError("T_block must be positive")

    @property
    def exponent(self) -> float:
        return 2 * (self.s - 1) + self.epsilon


def growth_series(traj: Trajectory, params: GrowthParams) -> np.ndarray:
    """Rows (t, ||u(t)||_{H^s}, ||u0||_{H^s} <t>^{2(s-1)+eps})."""
    norms = np.array([sobolev_norm(traj.physical(i), params.s) for i in range(len(traj))])
    t = np.asarray(traj.times)
    env = norms[0] * japanese(t) ** params.exponent if norms.size else norms
    return np.column_stack([t, norms, env]) if norms.size else np.zeros((0, 3))


def growth_verdict(series: np.ndarray, unit: float = 1.0, runs: int = 3) -> dict:
    """Bounded unless the envelope ratio doubles on ``runs`` successive unit intervals."""
    t, n, env = series.T
    ratio = np.divide(n, env, out=np.zeros_like(n), where=env > 0)
    blocks = np.floor(t / unit + 1e-9).astype(int)
    maxima = [float(ratio[blocks == b].max()) for b in np.unique(blocks)]
    streak, worst = 0, 0
    for prev, cur in zip(maxima, maxima[1:]):
        streak = streak + 1 if cur >= 2 * prev and prev > 0 else 0
        worst = max(worst, streak)
    return {"block_maxima": maxima, "max_ratio": max(maxima) if maxima else 0.0,
            "bounded": worst < runs}


def freq_split_series(traj: Trajectory, s: float, T_block: float = 1.0) -> np.ndarray:
    """Rows (n, ||Q_{<=n^2} z||_{H^s}, ||Q_{>n^2} z||_{H^s}) at t = n T_block."""
    if not T_block > 0:
        raise ValueError("T_block must be positive")
    times = np.asarray(traj.times)
    rows = []
    n = 1
    while n * T_block <= times[-1] * (1 + 1e-12):
        i = int(np.argmin(np.abs(times - n * T_block)))
        if abs(times[i] - n * T_block) > 1e-9 * max(1.0, n * T_block):
            raise ValueError(f"no stored time at t={n * T_block}")
        z = traj.spectra[i]
        rows.append((n, sobolev_norm(band_select(z, BandSelector.low(n * n)), s),
                     sobolev_norm(band_select(z, BandSelector.high(n * n)), s)))
        n += 1
    return np.array(rows, dtype=float).reshape(-1, 3)


# ---------------------------------------------------------------------------
# falsification harness

def _random_spectrum(rng: np.random.Generator, N: int, s_lo: float = 0.0,
                     s_hi: float = 1.5) -> Spectrum:
    kind = rng.integers(3)
    if kind == 0:
        z = random_hs(int(rng.integers(2 ** 31)), rng.uniform(s_lo, s_hi), N,
                      rng.uniform(0.01, 0.5))
    elif kind == 1:
        c = np.zeros(N, dtype=complex)
        idx = rng.choice(N, size=int(rng.integers(1, 5)), replace=False)
        c[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
        z = Spectrum(c)
    else:
        xi = np.arange(-(N // 2), N // 2)
        w = rng.uniform(1.0, N / 2)
        z = Spectrum((rng.standard_normal(N) + 1j * rng.standard_normal(N))
                     * np.exp(-0.5 * (xi / w) ** 2))
    return z * np.exp(rng.uniform(np.log(0.05), np.log(2.0)))


def _random_field(rng: np.random.Generator, N: int, T: float = 1.0, Nt: int = 64) -> SpacetimeField:
    if rng.integers(2) == 0:
        return windowed_free(_random_spectrum(rng, N), T, Nt)
    xi = np.arange(-(N // 2), N // 2)
    sigma = 2 * np.pi * np.fft.fftfreq(Nt, d=4 * T / Nt)
    G = ((rng.standard_normal((N, Nt)) + 1j * rng.standard_normal((N, Nt)))
         * japanese(xi)[:, None] ** (-rng.uniform(0.5, 1.5))
         * japanese(sigma)[None, :] ** (-rng.uniform(0.5, 1.5)))
    return SpacetimeField.from_modulation(np.fft.ifft(G, axis=1), T)


def _pad_band(z: Spectrum, M: int) -> Spectrum:
    c = np.zeros(M, dtype=complex)
    c[M // 2 - z.N // 2: M // 2 + z.N // 2] = z.coeffs
    return Spectrum(c)


@dataclass(frozen=True)
class Estimate:
    """An inequality LHS <= C * RHS with a sampler producing (lhs, rhs) pairs."""

    name: str
    description: str
    sample: Callable[[np.random.Generator, int, dict], tuple]
    defaults: dict = field(default_factory=dict)
    grids: tuple = (16, 32, 64, 128)


def _strichartz_l4(rng, N, p):
    f = _random_field(rng, N)
    return mixed_lp_norm(f, 4, 4), spacetime_norm(f, "X", 0.0, 3 / 8 + p["delta"])


def _strichartz_l6(rng, N, p):
    f = _random_field(rng, N)
    return mixed_lp_norm(f, 6, 6), spacetime_norm(f, "X", p["delta"], 0.5 + p["delta"])


def _mixed_lp(rng, N, p):
    f = _random_field(rng, N)
    P, Q = p["p"], p["q"]
    return mixed_lp_norm(f, P, Q), spacetime_norm(f, "X", 0.5 - 1 / Q, 0.5 - 1 / P)


def _nf_gain(rng, N, p):
    z = _random_spectrum(rng, N, 0.55, 1.5)
    nf = Spectrum(normal_form(z, z, z, ComparisonRule(p["lam"])))
    return (sobolev_norm(nf, p["s"] + p["a"]),
            sobolev_norm(z, 0.5 + p["delta"]) ** 2 * sobolev_norm(z, p["s"]))


def _free_window(rng, N, p):
    z = _random_spectrum(rng, N)
    return spacetime_norm(windowed_free(z, p["T"], 64), "Z", p["s"]), sobolev_norm(z, p["s"])


def _y_by_x(rng, N, p):
    f = _random_field(rng, N)
    return spacetime_norm(f, "Y", p["s"], p["b1"]), spacetime_norm(f, "X", p["s"], p["b2"])


def _product(rng, N, p):
    f, g = _random_spectrum(rng, N), _random_spectrum(rng, N)
    fg = multiply_dealiased([_pad_band(f, 2 * N), _pad_band(g, 2 * N)])
    return sobolev_norm(fg, p["s"]), sobolev_norm(f, p["s1"]) * sobolev_norm(g, p["s2"])


def _gauge_inverse(rng, N, p):
    z = _random_spectrum(rng, N)
    zf = synthesize(z)
    u = analyze(gauge_map(zf, compute_mu(zf), "inverse"))
    return (sobolev_norm(u, p["s"]),
            (1 + sobolev_norm(z, 0.25) ** 2) * sobolev_norm(z, p["s"]))


SPACETIME_GRIDS = (8, 16, 32, 64)

ESTIMATES: dict[str, Estimate] = {e.name: e for e in [
    Estimate("strichartz_l4", "L^4_{t,x} <= C X^{0,3/8+delta}", _strichartz_l4,
             {"delta": 0.01}, SPACETIME_GRIDS),
    Estimate("strichartz_l6", "L^6_{t,x} <= C X^{delta,1/2+delta}", _strichartz_l6,
             {"delta": 0.01}, SPACETIME_GRIDS),
    Estimate("mixed_lp", "L^p_t L^q_x <= C X^{1/2-1/q,1/2-1/p}", _mixed_lp,
             {"p": 4.0, "q": 4.0}, SPACETIME_GRIDS),
    Estimate("nf_gain", "||NF(z)||_{H^{s+a}} <= C ||z||_{H^{1/2+delta}}^2 ||z||_{H^s}", _nf_gain,
             {"s": 0.75, "a": 0.2, "delta": 0.01, "lam": 4.0}),
    Estimate("free_window_z", "||eta_T e^{it d^2} z0||_{Z^s} <= C ||z0||_{H^s}", _free_window,
             {"s": 0.5, "T": 1.0}, SPACETIME_GRIDS),
    Estimate("y_by_x", "Y^{s,b1} <= C X^{s,b2}, b2 > b1 + 1/2", _y_by_x,
             {"s": 0.0, "b1": 0.0, "b2": 0.51}, SPACETIME_GRIDS),
    Estimate("product_hs", "||fg||_{H^s} <= C ||f||_{H^{s1}} ||g||_{H^{s2}}", _product,
             {"s": 0.0, "s1": 0.51, "s2": 0.51}),
    Estimate("gauge_inverse_hs", "||u||_{H^s} <= C (1 + ||z||_{H^{1/4}}^2) ||z||_{H^s}",
             _gauge_inverse, {"s": 1.0}),
]}


def _validate_params(name: str, p: dict) -> None:
    if name == "product_hs":
        s, s1, s2 = p["s"], p["s1"], p["s2"]
        if not (s1 >= s and s2 >= s and s >= 0 and s1 + s2 > s + 0.5):
            raise ValueError("product_hs needs s1, s2 >= s >= 0 and s1 + s2 > s + 1/2")
    if name == "y_by_x" and not p["b2"] > p["b1"] + 0.5:
        raise ValueError("y_by_x needs b2 > b1 + 1/2")
    if name == "mixed_lp" and not (p["p"] >= 2 and p["q"] >= 2):
        raise ValueError("mixed_lp needs p, q >= 2")


def falsification_verdict(maxima, factor: float = 2.0, doublings: int = 3) -> str:
    """FALSIFIED when the maximum ratio grows by more than ``factor`` at each
    of ``doublings`` successive grid doublings."""
    m = np.asarray(maxima, dtype=float)
    grow = m[1:] > factor * m[:-1]
    run = 0
    for g in grow:
        run = run + 1 if g else 0
        if run >= doublings:
            return "FALSIFIED"
    return "NOT_FALSIFIED"


def inequality_trial(kind: str, sampler: dict | None = None, trials: int = 200,
                     seed: int = 0, grids=None) -> dict:
    """Sample ratios LHS / RHS of an estimate on successively doubled grids.

    ``sampler`` overrides the estimate's default parameters.  Returns a JSON
    serializable report with per-grid maxima and medians, the per-trial
    ratios and the verdict.
    """
    if kind not in ESTIMATES:
        raise ValueError(f"unknown estimate {kind!r}; choose from {sorted(ESTIMATES)}")
    if trials < 30:
        raise ValueError("at least 30 trials are required")
    est = ESTIMATES[kind]
    params = dict(est.defaults)
    for k, v in (sampler or {}).items():
        if k not in params:
            raise ValueError(f"unknown parameter {k!r} for estimate {kind!r}")
        params[k] = float(v)
    _validate_params(kind, params)
    grids = tuple(grids or est.grids)
    table = []
    for N in grids:
        rng = np.random.default_rng([seed, N, sorted(ESTIMATES).index(kind)])
        ratios = []
        for _ in range(trials):
            lhs, rhs = est.sample(rng, N, params)
            ratios.append(0.0 if lhs == 0 else lhs / rhs)
        r = np.array(ratios)
        table.append({"N": N, "max": float(r.max()), "median": float(np.median(r)),
                      "ratios": [float(x) for x in r]})
    maxima = [row["max"] for row in table]
    return {"estimate": kind, "description": est.description, "params": params,
            "trials": trials, "seed": seed, "grids": list(grids), "table": table,
            "max_ratio": max(maxima), "median_ratio": float(np.median(
                np.concatenate([row["ratios"] for row in table]))),
            "growth": [b / a if a > 0 else float("inf") for a, b in zip(maxima, maxima[1:])],
            "verdict": falsification_verdict(maxima)}


DEFAULT_SUITE = (
    ("strichartz_l4", {}), ("strichartz_l6", {}),
    ("mixed_lp", {"p": 4.0, "q": 4.0}), ("mixed_lp", {"p": 6.0, "q": 6.0}),
    ("nf_gain", {}), ("free_window_z", {}), ("y_by_x", {}), ("product_hs", {}),
    ("gauge_inverse_hs", {"s": 0.0}), ("gauge_inverse_hs", {"s": 0.5}),
    ("gauge_inverse_hs", {"s": 1.0}), ("gauge_inverse_hs", {"s": 2.0}),
)
