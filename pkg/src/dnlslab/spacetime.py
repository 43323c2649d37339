"""
Discrete Bourgain-type norms of time-windowed trajectories.

A :class:`SpacetimeField` stores spatial Fourier coefficients at the uniform
times ``t_m = -2T + 4T m / Nt``.  The temporal transform uses the same
normalized convention as in space,

    f~(xi, tau) = (2 pi)^(-1/2) int exp(-i t tau) f(xi, t) dt,

evaluated on the dual grid tau = 2 pi k / (4T).  Before transforming, each
row is demodulated by exp(i xi^2 t), so the transform is taken directly in
the variable sigma = tau + xi^2 that the weights depend on; this keeps the
free-evolution paraboloid on the grid for every retained xi.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .spectral import Spectrum, japanese
from .evolution import Trajectory


def bump(t) -> np.ndarray:
    """Smooth profile: 1 on [-1, 1], exp(1 - 1/(1 - (|t| - 1)^2)) on 1 < |t| < 2, 0 beyond."""
    a = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(a)
    out[a <= 1] = 1.0
    mid = (a > 1) & (a < 2)
    s = a[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


@dataclass(frozen=True)
class WindowFn:
    """eta_T(t) = eta(t / T)."""

    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")

    def __call__(self, t) -> np.ndarray:
        return bump(np.asarray(t, dtype=float) / self.T)


def time_grid(T: float, Nt: int) -> np.ndarray:
    return -2.0 * T + 4.0 * T * np.arange(Nt) / Nt


@dataclass(frozen=True, eq=False)
class SpacetimeField:
    """Coefficients ``values[xi_index, m]`` on the window grid of [-2T, 2T)."""

    values: np.ndarray
    T: float

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.ndim != 2:
            raise ValueError("values must be a 2-D array (xi, t)")
        Nt = v.shape[1]
        if Nt < 4 or Nt & (Nt - 1):
            raise ValueError("Nt must be a power of two >= 4")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def Nx(self) -> int:
        return self.values.shape[0]

    @property
    def Nt(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return time_grid(self.T, self.Nt)

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(-(self.Nx // 2), self.Nx // 2)

    @property
    def dt(self) -> float:
        return 4.0 * self.T / self.Nt

    @classmethod
    def zeros(cls, Nx: int, Nt: int, T: float) -> "SpacetimeField":
        return cls(np.zeros((Nx, Nt), dtype=complex), T)

    @classmethod
    def from_modulation(cls, h: np.ndarray, T: float, window: bool = True) -> "SpacetimeField":
        """Field exp(-i xi^2 t) h(xi, t), optionally multiplied by eta_T."""
        h = np.asarray(h, dtype=complex)
        Nx, Nt = h.shape
        t = time_grid(T, Nt)
        xi = np.arange(-(Nx // 2), Nx // 2)
        vals = np.exp(-1j * np.outer(xi.astype(float) ** 2, t)) * h
        if window:
            vals = vals * WindowFn(T)(t)[None, :]
        return cls(vals, T)


def windowed_free(z0: Spectrum, T: float, Nt: int) -> SpacetimeField:
    """eta_T(t) exp(i t d_x^2) z0 on the window grid."""
    h = np.repeat(z0.coeffs[:, None], Nt, axis=1)
    return SpacetimeField.from_modulation(h, T)


def window_extend(traj: Trajectory, T: float, Nt: int) -> SpacetimeField:
    """Window a trajectory into a compactly supported spacetime field.

    Negative times use the free backward evolution of the initial state.
    Stored times are interpolated with cubic splines in the interaction
    variable exp(i xi^2 t) z(xi, t); past the last stored time the free
    forward evolution of the final state is used.

    Raises
    ------
    ValueError
        If the trajectory stops before ``T``.
    """
    times = np.asarray(traj.times)
    if times.size == 0 or times[-1] < T * (1 - 1e-12):
        raise ValueError(f"trajectory ends before T={T}")
    N = traj.N
    xi2 = np.arange(-(N // 2), N // 2).astype(float) ** 2
    y = np.array([np.exp(1j * xi2 * t) * s.coeffs for t, s in zip(times, traj.spectra)])
    t = time_grid(T, Nt)
    h = np.empty((N, Nt), dtype=complex)
    neg = t < 0
    h[:, neg] = y[0][:, None]
    late = t > times[-1]
    h[:, late] = y[-1][:, None]
    inside = ~neg & ~late
    if np.any(inside):
        if times.size >= 2:
            sr = CubicSpline(times, y.real, axis=0)
            si = CubicSpline(times, y.imag, axis=0)
            h[:, inside] = (sr(t[inside]) + 1j * si(t[inside])).T
        else:
            h[:, inside] = y[0][:, None]
    return SpacetimeField.from_modulation(h, T)


def _demodulated_transform(f: SpacetimeField):
    """Returns (sigma grid, g~(xi, sigma), dsigma) with sigma = tau + xi^2."""
    t = f.times
    xi2 = f.freqs.astype(float) ** 2
    g = f.values * np.exp(1j * np.outer(xi2, t))
    Nt = f.Nt
    # transform of samples g(t_m), t_m = t_0 + m dt: phase exp(-i sigma t_0)
    sigma = 2.0 * np.pi * np.fft.fftfreq(Nt, d=f.dt)
    G = np.fft.fft(g, axis=1) * f.dt / np.sqrt(2.0 * np.pi)
    G *= np.exp(-1j * sigma * t[0])[None, :]
    return sigma, G, 2.0 * np.pi / (4.0 * f.T)


def spacetime_norm(f: SpacetimeField, kind: str, s: float, b: float = 0.5) -> float:
    """Discrete X^{s,b}, Y^{s,b} or Z^s norm.

    X: l^2_xi L^2_tau of <xi>^s <tau + xi^2>^b f~.
    Y: l^2_xi L^1_tau of the same weight.
    Z: X^{s,1/2} + Y^{s,0} (``b`` ignored).
    """
    kind = kind.upper()
    if kind == "Z":
        return spacetime_norm(f, "X", s, 0.5) + spacetime_norm(f, "Y", s, 0.0)
    sigma, G, ds = _demodulated_transform(f)
    w = japanese(f.freqs)[:, None] ** s * japanese(sigma)[None, :] ** b * np.abs(G)
    if kind == "X":
        return float(np.sqrt(np.sum(w ** 2) * ds))
    if kind == "Y":
        return float(np.sqrt(np.sum((np.sum(w, axis=1) * ds) ** 2)))
    raise ValueError(f"kind must be X, Y or Z, got {kind!r}")


def refined(f: SpacetimeField, Nt_fine: int) -> SpacetimeField:
    """Resample on a finer time grid by trigonometric interpolation of the
    demodulated rows, then modulate back."""
    if Nt_fine <= f.Nt:
        return f
    if Nt_fine & (Nt_fine - 1):
        raise ValueError("Nt_fine must be a power of two")
    g = f.values * np.exp(1j * np.outer(f.freqs.astype(float) ** 2, f.times))
    G = np.fft.fftshift(np.fft.fft(g, axis=1), axes=1)
    pad = np.zeros((f.Nx, Nt_fine), dtype=complex)
    lo = Nt_fine // 2 - f.Nt // 2
    pad[:, lo:lo + f.Nt] = G
    gf = np.fft.ifft(np.fft.ifftshift(pad, axes=1), axis=1) * (Nt_fine / f.Nt)
    t = time_grid(f.T, Nt_fine)
    return SpacetimeField(gf * np.exp(-1j * np.outer(f.freqs.astype(float) ** 2, t)), f.T)


def resolving_nt(f: SpacetimeField, p: float) -> int:
    """Time samples needed to integrate |f|^p without temporal aliasing."""
    k = (p if np.isfinite(p) else 8.0) / 2.0
    omega = k * ((f.Nx / 2) ** 2 + np.pi / f.dt)
    need = 4.0 * f.T * omega / np.pi
    return max(f.Nt, 1 << int(np.ceil(np.log2(need))))


def mixed_lp_norm(f: SpacetimeField, p: float, q: float, pad: int = 4,
                  refine: bool = True) -> float:
    """(int_t (int_x |f|^q dx)^(p/q) dt)^(1/p) by the trapezoid rule.

    The spatial integral uses ``pad`` times the spatial resolution.  With
    ``refine`` the time grid is first refined (see :func:`resolving_nt`) so
    that the free oscillation exp(-i xi^2 t) is resolved.
    """
    for e in (p, q):
        if not e >= 1:
            raise ValueError("exponents must lie in [1, inf]")
    if refine:
        f = refined(f, resolving_nt(f, max(p, q)))
    Nx, Nt = f.values.shape
    M = pad * Nx
    full = np.zeros((M, Nt), dtype=complex)
    full[M // 2 - Nx // 2: M // 2 + Nx // 2] = f.values
    u = np.fft.ifft(np.fft.ifftshift(full, axes=0), axis=0) * (M / np.sqrt(2 * np.pi))
    a = np.abs(u)
    if np.isinf(q):
        inner = a.max(axis=0)
    else:
        inner = (2.0 * np.pi / M * np.sum(a ** q, axis=0)) ** (1.0 / q)
    if np.isinf(p):
        return float(inner.max())
    return float((f.dt * np.sum(inner ** p)) ** (1.0 / p))
