"""
Periodic gauge chain u -> v -> w -> z and its inverse.

    v = exp(-i I(u)) u              I' = |u|^2 - mu, mean-zero
    w(x, t) = v(x - 2 mu t, t)
    z = exp(-i g(t)) w

with mu = mass / 2 pi and

    g(t) = (8 pi^3 - 1) / (16 pi^4) * int_0^t ||w||_{L^4}^4 dt' - mu^2 t.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .conserved import mass
from .spectral import (Spectrum, TorusField, analyze, padded_size, synthesize,
                       to_physical)

G_COEFF = (8.0 * np.pi ** 3 - 1.0) / (16.0 * np.pi ** 4)
MU_TOLERANCE = 1e-8


def l4_fourth(spec: Spectrum) -> float:
    """Exact ||f||_{L^4}^4 for a band-limited f (quadrature on a padded grid)."""
    M = padded_size(spec.N, 4)
    f = to_physical(spec, M)
    return float(2.0 * np.pi / M * np.sum(np.abs(f) ** 4))


@dataclass(frozen=True)
class GaugeState:
    """Running gauge parameters along a trajectory.

    ``l4_last`` keeps the most recent integrand value so that the trapezoid
    rule can be advanced one step at a time.
    """

    mu: float
    g_accum: float = 0.0
    t: float = 0.0
    l4_integral: float = 0.0
    l4_last: float | None = None

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError("mu must be non-negative")

    @classmethod
    def initial(cls, mu: float, w0=None) -> "GaugeState":
        last = None
        if w0 is not None:
            last = l4_fourth(_spec(w0))
        return cls(mu=float(mu), l4_last=last)


def _spec(f) -> Spectrum:
    return f if isinstance(f, Spectrum) else analyze(f)


def _field(f) -> TorusField:
    return f if isinstance(f, TorusField) else synthesize(f)


def compute_mu(u0) -> float:
    """mu = ||u0||_{L^2}^2 / (2 pi)."""
    return mass(u0) / (2.0 * np.pi)


def mean_zero_primitive(u: TorusField, mu: float) -> TorusField:
    """Real mean-zero primitive of |u|^2 - mu.

    Raises
    ------
    ValueError
        If |u|^2 - mu has non-zero mean, in which case no periodic primitive
        exists.
    """
    dens = np.abs(u.samples) ** 2 - mu
    if abs(dens.mean()) > MU_TOLERANCE * max(1.0, abs(mu)):
        raise ValueError(
            f"mu={mu!r} inconsistent with the field mass (mean of |u|^2 - mu is {dens.mean():.3e})")
    N = u.N
    m = np.fft.fft(dens)
    k = np.fft.fftfreq(N, 1.0 / N)
    out = np.zeros(N, dtype=complex)
    nz = k != 0
    out[nz] = m[nz] / (1j * k[nz])
    out[N // 2] = 0.0  # Nyquist mode has no real primitive
    return TorusField(np.fft.ifft(out).real)


def gauge_map(u: TorusField, mu: float, direction: str = "forward") -> TorusField:
    """Forward: exp(-i I(u)) u.  Inverse: exp(+i I(v)) v.

    Since the factor is unimodular, |u| = |v| pointwise and I can be computed
    from either side, which makes the inverse exact.
    """
    prim = mean_zero_primitive(u, mu).samples.real
    if direction == "forward":
        sign = -1.0
    elif direction == "inverse":
        sign = 1.0
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return TorusField(np.exp(sign * 1j * prim) * u.samples)


def galilean_shift(spec: Spectrum, mu: float, t: float, direction: int = 1) -> Spectrum:
    """Multiply the coefficient at xi by exp(-2 i xi mu t * direction).

    ``direction=+1`` maps v to w = v(x - 2 mu t); ``-1`` undoes it.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    return Spectrum(spec.coeffs * np.exp(-2j * direction * spec.freqs * mu * t))


def psi_functional(v, mu: float) -> float:
    """(1/2 pi) int [2 Im(conj(v_x) v) - |v|^4 / 2] dx + mu^2."""
    spec = _spec(v)
    M = padded_size(spec.N, 4)
    f = to_physical(spec, M)
    fx = to_physical(Spectrum(spec.coeffs * 1j * spec.freqs), M)
    dens = 2.0 * np.imag(np.conj(fx) * f) - 0.5 * np.abs(f) ** 4
    return float(np.sum(dens) / M + mu ** 2)


def g_rate(l4: float, mu: float) -> float:
    """dg/dt given ||w||_{L^4}^4."""
    return G_COEFF * l4 - mu ** 2


def accumulate_g(state: GaugeState, w_next, dt: float) -> GaugeState:
    """Advance g by one trapezoid step of length ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    new = l4_fourth(_spec(w_next))
    last = new if state.l4_last is None else state.l4_last
    integral = state.l4_integral + 0.5 * dt * (last + new)
    t = state.t + dt
    return replace(state, t=t, l4_integral=integral, l4_last=new,
                   g_accum=G_COEFF * integral - state.mu ** 2 * t)


def gauge_chain(u, state: GaugeState, direction: str = "u_to_z") -> TorusField:
    """Compose the gauge, the Galilean shift and the phase at ``state.t``.

    ``u_to_z`` maps u to z = exp(-i g) tau 𝒢(u); ``z_to_u`` inverts it.  The
    primitive is built from the mass of the field itself, so round-off drift
    of the mass along a computed trajectory does not break periodicity.
    """
    mu, t, g = state.mu, state.t, state.g_accum
    if direction == "u_to_z":
        uf = _field(u)
        v = gauge_map(uf, compute_mu(uf), "forward")
        w = galilean_shift(analyze(v), mu, t, +1)
        return synthesize(w * np.exp(-1j * g))
    if direction == "z_to_u":
        w = _spec(u) * np.exp(1j * g)
        v = synthesize(galilean_shift(w, mu, t, -1))
        return gauge_map(v, compute_mu(v), "inverse")
    raise ValueError(f"direction must be 'u_to_z' or 'z_to_u', got {direction!r}")
