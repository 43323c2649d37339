"""
Torus grid, Fourier analysis/synthesis and spectral multipliers.

Coefficients follow the symmetric convention

    f_hat(xi) = (2 pi)^(-1/2) * int_T exp(-i xi x) f(x) dx,
    f(x)      = (2 pi)^(-1/2) * sum_xi exp(i xi x) f_hat(xi),

so a discrete ``Spectrum`` approximates ``f_hat`` directly.  Coefficients are
stored in ascending frequency order, xi = -N/2, ..., N/2 - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

SQRT_2PI = np.sqrt(2.0 * np.pi)


def _check_grid_size(N: int) -> int:
    N = int(N)
    if N < 8 or N & (N - 1):
        raise ValueError(f"grid size must be a power of two >= 8, got {N}")
    return N


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def grid(N: int) -> np.ndarray:
    """Sample points x_j = 2 pi j / N."""
    return 2.0 * np.pi * np.arange(N) / N


def frequencies(N: int) -> np.ndarray:
    """Integer frequencies -N/2, ..., N/2 - 1 in storage order."""
    return np.arange(-(N // 2), N // 2)


def japanese(xi) -> np.ndarray:
    """<xi> = (1 + xi^2)^(1/2)."""
    return np.sqrt(1.0 + np.asarray(xi, dtype=float) ** 2)


@dataclass(frozen=True, eq=False)
class TorusField:
    """Complex samples of a 2 pi-periodic function at x_j = 2 pi j / N."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        _check_grid_size(s.size)
        if not np.all(np.isfinite(s)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "samples", _frozen(s))

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        return grid(self.N)

    @classmethod
    def from_function(cls, f, N: int) -> "TorusField":
        return cls(f(grid(N)))

    @classmethod
    def zeros(cls, N: int) -> "TorusField":
        return cls(np.zeros(N, dtype=complex))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients on the band {-N/2, ..., N/2 - 1}.

    Supports the obvious linear-space arithmetic (``+``, ``-``, scalar ``*``).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 1:
            raise ValueError("coeffs must be one-dimensional")
        _check_grid_size(c.size)
        if not np.all(np.isfinite(c)):
            raise ValueError("spectrum contains non-finite values")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def freqs(self) -> np.ndarray:
        return frequencies(self.N)

    def __getitem__(self, xi: int) -> complex:
        """Coefficient at integer frequency ``xi``."""
        i = int(xi) + self.N // 2
        if not 0 <= i < self.N:
            raise IndexError(f"frequency {xi} outside band of N={self.N}")
        return complex(self.coeffs[i])

    @classmethod
    def zeros(cls, N: int) -> "Spectrum":
        return cls(np.zeros(N, dtype=complex))

    @classmethod
    def from_modes(cls, N: int, modes: dict) -> "Spectrum":
        """Build a spectrum from ``{xi: coefficient}``."""
        c = np.zeros(N, dtype=complex)
        for xi, val in modes.items():
            i = int(xi) + N // 2
            if not 0 <= i < N:
                raise IndexError(f"frequency {xi} outside band of N={N}")
            c[i] = val
        return cls(c)

    def _other(self, other):
        if isinstance(other, Spectrum):
            if other.N != self.N:
                raise ValueError(f"grid mismatch: {self.N} vs {other.N}")
            return other.coeffs
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else Spectrum(self.coeffs + o)

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else Spectrum(self.coeffs - o)

    def __neg__(self):
        return Spectrum(-self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, Spectrum):
            return NotImplemented
        return Spectrum(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def norm(self) -> float:
        """l^2 norm of the coefficients (= L^2 norm of the function)."""
        return float(np.linalg.norm(self.coeffs))


def analyze(field: TorusField) -> Spectrum:
    """Discrete realization of the normalized Fourier transform."""
    N = field.N
    c = np.fft.fftshift(np.fft.fft(field.samples)) * (SQRT_2PI / N)
    return Spectrum(c)


def synthesize(spec: Spectrum) -> TorusField:
    """Inverse of :func:`analyze`: samples of (2 pi)^(-1/2) sum exp(i xi x) f_hat."""
    N = spec.N
    return TorusField(np.fft.ifft(np.fft.ifftshift(spec.coeffs)) * (N / SQRT_2PI))


def sobolev_norm(spec: Spectrum, s: float) -> float:
    """H^s norm (sum <xi>^(2s) |f_hat|^2)^(1/2); any real s."""
    w = japanese(spec.freqs) ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(spec.coeffs) ** 2)))


def lp_norm(field: TorusField, p: float) -> float:
    """Trapezoidal approximation of (int_T |f|^p dx)^(1/p); ``p=np.inf`` allowed."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(field.samples)
    if np.isinf(p):
        return float(a.max())
    h = 2.0 * np.pi / field.N
    return float((h * np.sum(a ** p)) ** (1.0 / p))


def bessel_apply(spec: Spectrum, s: float) -> Spectrum:
    """Bessel potential J^s: multiply coefficients by <xi>^s."""
    return Spectrum(spec.coeffs * japanese(spec.freqs) ** s)


@dataclass(frozen=True)
class BandSelector:
    """Frequency band: ``dyadic`` (Littlewood-Paley block k), ``low`` (|xi| <= n0)
    or ``high`` (|xi| > n0)."""

    kind: str
    value: int

    def __post_init__(self):
        if self.kind not in ("dyadic", "low", "high"):
            raise ValueError(f"unknown band kind {self.kind!r}")
        if self.value < 0:
            raise ValueError("band parameter must be non-negative")

    @classmethod
    def dyadic(cls, k: int) -> "BandSelector":
        return cls("dyadic", int(k))

    @classmethod
    def low(cls, n0: int) -> "BandSelector":
        return cls("low", int(n0))

    @classmethod
    def high(cls, n0: int) -> "BandSelector":
        return cls("high", int(n0))

    def mask(self, xi: np.ndarray) -> np.ndarray:
        a = np.abs(xi)
        if self.kind == "low":
            return a <= self.value
        if self.kind == "high":
            return a > self.value
        if self.value == 0:
            return a == 0
        return (a >= 2 ** (self.value - 1)) & (a < 2 ** self.value)


def band_select(spec: Spectrum, sel: BandSelector) -> Spectrum:
    return Spectrum(np.where(sel.mask(spec.freqs), spec.coeffs, 0.0))


def dyadic_blocks(N: int) -> int:
    """Number of dyadic blocks needed to cover the band of size N."""
    return int(np.log2(N)) + 1


def derivative(spec: Spectrum, order: int = 1) -> Spectrum:
    if order < 1:
        raise ValueError("order must be a positive integer")
    return Spectrum(spec.coeffs * (1j * spec.freqs) ** order)


def padded_size(N: int, count: int) -> int:
    """Smallest power of two M >= (count + 1) N / 2: alias-free for ``count`` factors."""
    need = -(-(count + 1) * N // 2)
    return 1 << int(np.ceil(np.log2(need)))


def _pad(c: np.ndarray, M: int) -> np.ndarray:
    N = c.size
    out = np.zeros(M, dtype=complex)
    out[M // 2 - N // 2: M // 2 + N // 2] = c
    return out


def _truncate(c: np.ndarray, N: int) -> np.ndarray:
    M = c.size
    return c[M // 2 - N // 2: M // 2 + N // 2]


def to_physical(spec: Spectrum, M: int) -> np.ndarray:
    """Samples of the band-limited function on a finer grid of M points."""
    return np.fft.ifft(np.fft.ifftshift(_pad(spec.coeffs, M))) * (M / SQRT_2PI)


def from_physical(samples: np.ndarray, N: int) -> np.ndarray:
    """Coefficients of ``samples`` (length M) truncated to the band of size N."""
    M = samples.size
    c = np.fft.fftshift(np.fft.fft(samples)) * (SQRT_2PI / M)
    return _truncate(c, N)


def multiply_dealiased(factors: Sequence[Spectrum],
                       conjugate: Sequence[bool] | None = None) -> Spectrum:
    """Band-truncated spectrum of the pointwise product of ``factors``.

    Factors flagged in ``conjugate`` enter as complex conjugates.  The product
    is formed on a zero-padded grid large enough that nothing aliases into the
    retained band, so the result equals the direct convolution
    ``(2 pi)^(-(k-1)/2) sum f1_hat ... fk_hat`` restricted to the band.
    """
    k = len(factors)
    if not 2 <= k <= 7:
        raise ValueError("between 2 and 7 factors are supported")
    if conjugate is None:
        conjugate = [False] * k
    if len(conjugate) != k:
        raise ValueError("one conjugation flag per factor required")
    N = factors[0].N
    if any(f.N != N for f in factors):
        raise ValueError("all factors must share the grid size")
    M = padded_size(N, k)
    prod = np.ones(M, dtype=complex)
    for f, cj in zip(factors, conjugate):
        v = to_physical(f, M)
        prod *= np.conj(v) if cj else v
    return Spectrum(from_physical(prod, N))


def random_hs(seed: int, s: float, N: int, decay_margin: float) -> Spectrum:
    """Random-phase spectrum with |f_hat(xi)| = <xi>^(-s - 1/2 - decay_margin).

    Phases are drawn per frequency from ``numpy.random.default_rng(seed)`` in the
    order 0, 1, -1, 2, -2, ... so that refining the grid keeps the existing
    modes unchanged.
    """
    N = _check_grid_size(N)
    if decay_margin <= 0:
        raise ValueError("decay_margin must be positive")
    rng = np.random.default_rng(seed)
    xi = frequencies(N)
    order = np.argsort(np.abs(xi) * 2 - (xi > 0), kind="stable")
    phases = np.empty(N)
    phases[order] = rng.uniform(0.0, 2.0 * np.pi, size=N)
    amp = japanese(xi) ** (-s - 0.5 - decay_margin)
    return Spectrum(amp * np.exp(1j * phases))


def scale_to_l2(spec: Spectrum, l2: float) -> Spectrum:
    """Rescale so that the L^2 norm equals ``l2`` (zero stays zero)."""
    n = spec.norm()
    return spec if n == 0 else spec * (l2 / n)


def small_data(seed: int, N: int, s: float = 1.0, decay_margin: float = 0.5,
               l2: float = 0.4) -> Spectrum:
    """Random H^s data rescaled to small mass; ``l2 < 1/2`` by default."""
    return scale_to_l2(random_hs(seed, s, N, decay_margin), l2)


def smooth_data(seed: int, N: int, l2: float = 0.4, width: float = 3.0) -> Spectrum:
    """Random data with Gaussian spectral decay exp(-(xi/width)^2 / 2).

    Band-limited to round-off at moderate N, so Galerkin truncation error is
    negligible.
    """
    N = _check_grid_size(N)
    rng = np.random.default_rng(seed)
    xi = frequencies(N)
    c = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) * np.exp(-0.5 * (xi / width) ** 2)
    return scale_to_l2(Spectrum(c), l2)
