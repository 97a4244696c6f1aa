"""Sobolev norms, Gevrey norms, and the conserved quadratic energy.

All norms are computed from Fourier coefficients via Parseval with the bracket
weight <xi> = 1 + |xi| (not sqrt(1 + xi^2); the two are equivalent but the
constants differ, and every frozen value here assumes this bracket).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NormOverflowError
from .params import CoefficientSet
from .spectral import Spectrum, SpectralGrid, symbol_on_grid

#: Largest allowed exponent 2*sigma*<xi_max>; keeps exp() well inside double range.
MAX_GEVREY_EXPONENT = 650.0


@dataclass(frozen=True)
class GevreyIndex:
    """The pair (sigma, s) selecting an exponentially weighted Sobolev topology."""

    sigma: float
    s: float

    def __post_init__(self):
        if not (self.sigma >= 0.0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a finite nonnegative real, got {self.sigma}")
        if not np.isfinite(self.s):
            raise ValueError(f"s must be finite, got {self.s}")


def bracket(xi):
    """The weight <xi> = 1 + |xi|."""
    return 1.0 + np.abs(xi)


def gevrey_weights(grid: SpectralGrid, sigma: float, s: float) -> np.ndarray:
    """Squared weights <xi>^{2s} exp(2*sigma*<xi>) on the grid, overflow-guarded."""
    br = bracket(grid.wavenumbers)
    exponent = 2.0 * sigma * float(np.max(br))
    if exponent > MAX_GEVREY_EXPONENT:
        raise NormOverflowError(
            f"2*sigma*<xi_max> = {exponent:.1f} exceeds {MAX_GEVREY_EXPONENT}; "
            "sigma is too large for this grid"
        )
    return br ** (2.0 * s) * np.exp(2.0 * sigma * br)


def sobolev_norm(u: Spectrum, s: float) -> float:
    """H^s norm; reduces to the L^2 norm at s = 0."""
    w = bracket(u.grid.wavenumbers) ** (2.0 * s)
    total = np.sum(w * (u.coeffs.real**2 + u.coeffs.imag**2))
    return float(np.sqrt(2.0 * u.grid.half_length * total))


def gevrey_norm(u: Spectrum, g: GevreyIndex) -> float:
    """G^{sigma,s} norm; equals sobolev_norm(u, s) when sigma = 0."""
    w = gevrey_weights(u.grid, g.sigma, g.s)
    total = np.sum(w * (u.coeffs.real**2 + u.coeffs.imag**2))
    return float(np.sqrt(2.0 * u.grid.half_length * total))


def energy(u: Spectrum, coeffs: CoefficientSet) -> float:
    """The conserved functional: integral of eta^2 + gamma1*eta_x^2 + delta1*eta_xx^2.

    Spectrally this is 2L * sum_k (1 + gamma1*xi^2 + delta1*xi^4)|c_k|^2; the
    weight is exactly the polynomial varphi.
    """
    w = symbol_on_grid(u.grid, coeffs, "varphi")
    total = np.sum(w * (u.coeffs.real**2 + u.coeffs.imag**2))
    return float(2.0 * u.grid.half_length * total)


def h2_polynomial_sq(u: Spectrum) -> float:
    """Squared H^2 norm with the polynomial weight 1 + xi^2 + xi^4.

    This is the weight for which the energy comparison with constants
    min/max{gamma1, delta1} is exact; the bracket-weight version carries an
    extra fixed equivalence factor.
    """
    xi2 = u.grid.wavenumbers**2
    w = 1.0 + xi2 + xi2 * xi2
    total = np.sum(w * (u.coeffs.real**2 + u.coeffs.imag**2))
    return float(2.0 * u.grid.half_length * total)
