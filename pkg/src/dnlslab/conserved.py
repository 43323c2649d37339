"""Mass, momentum and energy of the derivative NLS flow."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (Spectrum, TorusField, analyze, padded_size, to_physical)


@dataclass(frozen=True)
class ConservedTriple:
    mass: float
    momentum: float
    energy: float

    def __post_init__(self):
        if not all(np.isfinite([self.mass, self.momentum, self.energy])):
            raise ValueError("conserved quantities must be finite")
        if self.mass < 0:
            raise ValueError("mass must be non-negative")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mass, self.momentum, self.energy)


def _as_spectrum(u) -> Spectrum:
    if isinstance(u, Spectrum):
        return u
    if isinstance(u, TorusField):
        return analyze(u)
    raise TypeError(f"expected TorusField or Spectrum, got {type(u).__name__}")


def _fine(spec: Spectrum, degree: int):
    # Trapezoid on a grid fine enough that a degree-`degree` polynomial in
    # u, u_x and their conjugates integrates exactly.
    M = padded_size(spec.N, degree)
    u = to_physical(spec, M)
    ux = to_physical(Spectrum(spec.coeffs * 1j * spec.freqs), M)
    return u, ux, 2.0 * np.pi / M


def mass(u) -> float:
    """int |u|^2 dx.  Accepts a ``TorusField`` or a ``Spectrum``."""
    c = _as_spectrum(u).coeffs
    return float(np.sum(np.abs(c) ** 2))


def momentum(u) -> float:
    """int [Im(u conj(u_x)) + |u|^4 / 2] dx."""
    f, fx, h = _fine(_as_spectrum(u), 4)
    dens = np.imag(f * np.conj(fx)) + 0.5 * np.abs(f) ** 4
    return float(h * np.sum(dens))


def energy(u) -> float:
    """int [|u_x|^2 + (3/2)|u|^2 Im(u conj(u_x)) + |u|^6 / 2] dx."""
    f, fx, h = _fine(_as_spectrum(u), 6)
    a2 = np.abs(f) ** 2
    dens = np.abs(fx) ** 2 + 1.5 * a2 * np.imag(f * np.conj(fx)) + 0.5 * a2 ** 3
    return float(h * np.sum(dens))


def conserved(u) -> ConservedTriple:
    return ConservedTriple(mass(u), momentum(u), energy(u))


def spectral_momentum(spec: Spectrum) -> float:
    """sum_xi xi |f_hat(xi)|^2, which equals -int Im(conj(f_x) f) dx."""
    return float(np.sum(spec.freqs * np.abs(spec.coeffs) ** 2))
