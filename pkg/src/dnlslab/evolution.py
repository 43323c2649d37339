"""Integrating-factor RK4 time stepping for the original and the gauged flow."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conserved import ConservedTriple, conserved
from .gauge import GaugeState, accumulate_g, gauge_chain
from .spectral import Spectrum, from_physical, padded_size, to_physical
from .terms import ComparisonRule, gauge_rhs, gauge_rhs_fast

log = logging.getLogger(__name__)

MASS_DRIFT_RATE = 1e-9


class NumericalAbort(RuntimeError):
    """Raised when the solution stops being finite."""

    def __init__(self, t_last: float, message: str = ""):
        self.t_last = t_last
        super().__init__(message or f"non-finite state after t={t_last!r}")


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping parameters.

    The number of steps is ``ceil(T / dt)`` and the step actually used is
    ``T / nsteps`` (never larger than ``dt``).  When the mass drifts faster
    than ``1e-9`` per unit time the run is repeated with half the step, at
    most ``max_halvings`` times.
    """

    dt: float = 1e-3
    T: float = 1.0
    store_every: int = 1
    equation: str = "dnls"
    rule: ComparisonRule = field(default_factory=ComparisonRule)
    rhs_mode: str = "fast"
    scheme: str = "ifrk4"
    max_halvings: int = 3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T >= 0:
            raise ValueError("T must be non-negative")
        if self.T > 0 and self.dt > self.T:
            raise ValueError("dt must not exceed T")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")
        if self.equation not in ("dnls", "gauge"):
            raise ValueError(f"equation must be 'dnls' or 'gauge', got {self.equation!r}")
        if self.rhs_mode not in ("fast", "oracle"):
            raise ValueError(f"rhs_mode must be 'fast' or 'oracle', got {self.rhs_mode!r}")
        if self.scheme != "ifrk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")

    @property
    def nsteps(self) -> int:
        if self.T == 0:
            return 0
        return int(np.ceil(self.T / self.dt - 1e-9))

    @property
    def step(self) -> float:
        return self.T / self.nsteps if self.nsteps else 0.0


@dataclass(frozen=True)
class Trajectory:
    """Stored snapshots of a run.  For gauge runs ``spectra`` hold z and the
    monitors are those of the reconstructed u."""

    times: np.ndarray
    spectra: tuple
    monitors: tuple
    gauge_states: tuple = ()
    equation: str = "dnls"
    dt: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size and (t[0] != 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("times must start at 0 and increase strictly")
        if len({s.N for s in self.spectra}) > 1:
            raise ValueError("all spectra must share the grid size")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @property
    def N(self) -> int:
        return self.spectra[0].N

    def __len__(self) -> int:
        return self.times.size

    def at(self, i: int) -> Spectrum:
        return self.spectra[i]

    def physical(self, i: int) -> Spectrum:
        """u at stored index ``i`` (reconstructed through the gauge for gauge runs)."""
        if self.equation == "dnls":
            return self.spectra[i]
        from .spectral import analyze
        return analyze(gauge_chain(self.spectra[i], self.gauge_states[i], "z_to_u"))


def linear_propagate(spec: Spectrum, t: float) -> Spectrum:
    """Free evolution: multiply the coefficient at xi by exp(-i xi^2 t)."""
    return Spectrum(spec.coeffs * np.exp(-1j * spec.freqs.astype(float) ** 2 * t))


def dnls_rhs(u: Spectrum) -> Spectrum:
    """Spectrum of (|u|^2 u)_x."""
    M = padded_size(u.N, 3)
    f = to_physical(u, M)
    cub = from_physical(np.abs(f) ** 2 * f, u.N)
    return Spectrum(1j * u.freqs * cub)


def _rhs_fn(cfg: StepperConfig, mu: float) -> Callable[[np.ndarray], np.ndarray]:
    if cfg.equation == "dnls":
        return lambda c: dnls_rhs(Spectrum(c)).coeffs
    if cfg.rhs_mode == "fast":
        return lambda c: gauge_rhs_fast(Spectrum(c), mu)
    return lambda c: gauge_rhs(Spectrum(c), mu, cfg.rule, "oracle").coeffs


def ifrk4_step(u: np.ndarray, h: float, xi2: np.ndarray, F) -> np.ndarray:
    """One Lawson step for u' = -i xi^2 u + F(u)."""
    E = np.exp(-0.5j * xi2 * h)
    E2 = E * E
    k1 = F(u)
    k2 = F(E * (u + 0.5 * h * k1))
    k3 = F(E * u + 0.5 * h * k2)
    k4 = F(E2 * u + h * E * k3)
    return E2 * u + (h / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)


def _monitor(spec: Spectrum, cfg: StepperConfig, gs: GaugeState | None) -> ConservedTriple:
    if cfg.equation == "dnls":
        return conserved(spec)
    return conserved(gauge_chain(spec, gs, "z_to_u"))


def _run(init: Spectrum, cfg: StepperConfig, mu: float) -> Trajectory:
    xi2 = init.freqs.astype(float) ** 2
    F = _rhs_fn(cfg, mu)
    h = cfg.step
    gs = GaugeState.initial(mu, init) if cfg.equation == "gauge" else None
    c = init.coeffs.copy()
    times, spectra, monitors, states = [0.0], [init], [_monitor(init, cfg, gs)], [gs]
    t = 0.0
    for n in range(1, cfg.nsteps + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                new = ifrk4_step(c, h, xi2, F)
        except ValueError as exc:
            # a stage left the finite range and was rejected by Spectrum
            raise NumericalAbort(t) from exc
        if not np.all(np.isfinite(new)):
            raise NumericalAbort(t)
        spec = Spectrum(new)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                if gs is not None:
                    gs = accumulate_g(gs, spec, h)
                mon = (_monitor(spec, cfg, gs)
                       if n % cfg.store_every == 0 or n == cfg.nsteps else None)
        except ValueError as exc:
            # finite coefficients whose functionals overflow
            raise NumericalAbort(t, f"non-finite monitors after t={t!r}") from exc
        c = new
        t = n * h
        if mon is not None:
            times.append(t)
            spectra.append(spec)
            monitors.append(mon)
            states.append(gs)
    return Trajectory(np.array(times), tuple(spectra), tuple(monitors),
                      tuple(states) if gs is not None else (), cfg.equation, h)


def evolve(init: Spectrum, cfg: StepperConfig, mu: float | None = None) -> Trajectory:
    """Integrate from ``init`` up to ``cfg.T``.

    For ``equation='gauge'`` the initial datum is z0 and ``mu`` defaults to
    its mass over 2 pi.

    Raises
    ------
    NumericalAbort
        If the state becomes non-finite; ``t_last`` is the last good time.
    """
    if mu is None:
        mu = float(np.sum(np.abs(init.coeffs) ** 2) / (2 * np.pi))
    for attempt in range(cfg.max_halvings + 1):
        traj = _run(init, cfg, mu)
        if len(traj) < 2:
            return traj
        m = np.array([mon.mass for mon in traj.monitors])
        rate = np.max(np.abs(m - m[0])) / traj.times[-1]
        if rate <= MASS_DRIFT_RATE * max(1.0, m[0]) or attempt == cfg.max_halvings:
            return traj
        log.info("mass drift rate %.3e, halving dt to %.3e", rate, cfg.dt / 2)
        cfg = StepperConfig(cfg.dt / 2, cfg.T, cfg.store_every * 2, cfg.equation, cfg.rule,
                            cfg.rhs_mode, cfg.scheme, cfg.max_halvings)
    return traj
