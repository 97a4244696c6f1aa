"""Periodic spectral toolbox: grid, transforms, multiplier symbols, dealiased products.

Conventions.  Fields live on the uniform grid x_j = -L + 2L*j/n of [-L, L).
A spectrum holds the Fourier-series coefficients c_k of

    f(x) = sum_k c_k exp(i*pi*k*x/L),      k = -n/2 .. n/2-1,

stored in FFT layout (k = 0..n/2-1, -n/2..-1) so wavenumber arrays align with
numpy's fft output.  With this normalization Parseval reads

    integral |f|^2 dx = 2L * sum_k |c_k|^2.

The collocation offset x_0 = -L is absorbed by the alternating phase (-1)^k
when converting between FFT output and series coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import GridMismatchError, NonFiniteError, SymmetryError
from .params import CoefficientSet

SYMBOL_KINDS = ("varphi", "phi", "psi", "tau", "omega", "kappa")


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid on [-L, L) with a power-of-two number of modes."""

    n_modes: int
    half_length: float

    def __post_init__(self):
        n = self.n_modes
        if n < 4 or (n & (n - 1)) != 0:
            raise ValueError(f"n_modes must be a power of two >= 4, got {n}")
        if not (self.half_length > 0.0 and np.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive and finite, got {self.half_length}")

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in FFT layout: 0..n/2-1, -n/2..-1."""
        n = self.n_modes
        m = np.concatenate([np.arange(0, n // 2), np.arange(-(n // 2), 0)])
        m.setflags(write=False)
        return m

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """xi_k = pi*k/L in FFT layout."""
        xi = np.pi * self.modes / self.half_length
        xi.setflags(write=False)
        return xi

    @cached_property
    def x(self) -> np.ndarray:
        """Collocation points -L + 2L*j/n."""
        pts = -self.half_length + 2.0 * self.half_length * np.arange(self.n_modes) / self.n_modes
        pts.setflags(write=False)
        return pts

    @cached_property
    def phase(self) -> np.ndarray:
        """(-1)^k, the shift between FFT coefficients and series coefficients."""
        ph = np.where(self.modes % 2 == 0, 1.0, -1.0)
        ph.setflags(write=False)
        return ph

    @property
    def nyquist(self) -> int:
        """Index of the unpaired mode k = -n/2."""
        return self.n_modes // 2


@dataclass(frozen=True)
class RealField:
    """Real samples of a field at the grid's collocation points."""

    grid: SpectralGrid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.shape != (self.grid.n_modes,):
            raise ValueError(f"expected {self.grid.n_modes} samples, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("field samples contain NaN or Inf")
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class Spectrum:
    """Fourier-series coefficients of a field, in FFT layout."""

    grid: SpectralGrid
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex)
        if arr.shape != (self.grid.n_modes,):
            raise ValueError(f"expected {self.grid.n_modes} coefficients, got shape {arr.shape}")
        object.__setattr__(self, "coeffs", arr)

    def hermitian_defect(self) -> float:
        """Relative deviation from c_{-k} = conj(c_k); ~0 for spectra of real fields."""
        c = self.coeffs
        n = self.grid.n_modes
        mirrored = np.conj(c[(-np.arange(n)) % n])
        scale = float(np.max(np.abs(c)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(c - mirrored))) / scale


def _same_grid(*objs) -> SpectralGrid:
    grid = objs[0].grid
    for o in objs[1:]:
        if o.grid != grid:
            raise GridMismatchError(f"grids differ: {o.grid} vs {grid}")
    return grid


def transform_forward(f: RealField) -> Spectrum:
    """Series coefficients of a real field; round trip with transform_inverse."""
    grid = f.grid
    c = grid.phase * np.fft.fft(f.samples) / grid.n_modes
    return Spectrum(grid, c)


def transform_inverse(s: Spectrum) -> RealField:
    """Synthesize samples; raises SymmetryError when the field is not real."""
    grid = s.grid
    w = grid.n_modes * np.fft.ifft(grid.phase * s.coeffs)
    scale = float(np.max(np.abs(w.real)))
    imag = float(np.max(np.abs(w.imag)))
    if imag > 1e-10 * (scale + np.finfo(float).tiny):
        raise SymmetryError(
            f"inverse transform has relative imaginary residual {imag / (scale + 1e-300):.3e}"
        )
    return RealField(grid, w.real)


def evaluate_symbol(kind: str, xi, coeffs: CoefficientSet):
    """Evaluate a multiplier symbol at wavenumber(s) xi.

    varphi(xi) = 1 + gamma1*xi^2 + delta1*xi^4         (positive when gamma1, delta1 > 0)
    phi(xi)    = xi*(1 - gamma2*xi^2 + delta2*xi^4)/varphi(xi)
    psi(xi)    = xi/varphi(xi)
    tau(xi)    = (3*xi - 4*gamma*xi^3)/(4*varphi(xi))
    omega(xi)  = |xi|/(1 + xi^2)
    kappa(xi)  = (1 - gamma2*xi^2 + delta2*xi^4)/varphi(xi)   so phi = xi*kappa
    """
    scalar = np.isscalar(xi)
    xi = np.asarray(xi, dtype=float)
    xi2 = xi * xi
    varphi = 1.0 + coeffs.gamma1 * xi2 + coeffs.delta1 * xi2 * xi2
    if kind == "varphi":
        out = varphi
    elif kind == "phi":
        out = xi * (1.0 - coeffs.gamma2 * xi2 + coeffs.delta2 * xi2 * xi2) / varphi
    elif kind == "psi":
        out = xi / varphi
    elif kind == "tau":
        out = (3.0 * xi - 4.0 * coeffs.gamma * xi2 * xi) / (4.0 * varphi)
    elif kind == "omega":
        out = np.abs(xi) / (1.0 + xi2)
    elif kind == "kappa":
        out = (1.0 - coeffs.gamma2 * xi2 + coeffs.delta2 * xi2 * xi2) / varphi
    else:
        raise ValueError(f"unknown symbol kind {kind!r}; expected one of {SYMBOL_KINDS}")
    return float(out) if scalar else out


@lru_cache(maxsize=None)
def symbol_on_grid(grid: SpectralGrid, coeffs: CoefficientSet, kind: str) -> np.ndarray:
    """Symbol sampled at the grid wavenumbers (cached, read-only)."""
    arr = evaluate_symbol(kind, grid.wavenumbers, coeffs)
    arr.setflags(write=False)
    return arr


def apply_multiplier(kind: str, s: Spectrum, coeffs: CoefficientSet) -> Spectrum:
    """Coefficient-wise product with a symbol; the unpaired Nyquist mode is zeroed.

    The even real symbols (varphi, omega, kappa) preserve Hermitian symmetry;
    the odd ones (phi, psi, tau) send it to anti-Hermitian symmetry, which the
    evolution equations always repair with an explicit factor of +-i.
    """
    grid = s.grid
    c = s.coeffs * symbol_on_grid(grid, coeffs, kind)
    c[grid.nyquist] = 0.0
    return Spectrum(grid, c)


def spatial_derivative(s: Spectrum) -> Spectrum:
    """d/dx in Fourier space; the unpaired Nyquist mode is zeroed to keep realness."""
    grid = s.grid
    c = s.coeffs * (1j * grid.wavenumbers)
    c[grid.nyquist] = 0.0
    return Spectrum(grid, c)


@lru_cache(maxsize=64)
def _padded_grid(grid: SpectralGrid) -> SpectralGrid:
    return SpectralGrid(2 * grid.n_modes, grid.half_length)


def _pad_coeffs(c: np.ndarray, n: int) -> np.ndarray:
    """Embed length-n coefficients into the length-2n layout.

    The unpaired mode -n/2 is split evenly onto +-n/2 (its real-field reading),
    so Hermitian inputs stay Hermitian on the padded grid.
    """
    m = 2 * n
    half = n // 2
    out = np.zeros(m, dtype=complex)
    out[:half] = c[:half]
    out[m - half + 1 :] = c[half + 1 :]
    ny = c[half]
    out[m - half] = 0.5 * ny
    out[half] = 0.5 * np.conj(ny)
    return out


def _truncate_coeffs(full: np.ndarray, n: int) -> np.ndarray:
    """Keep modes |k| < n/2 of a length-2n layout; the coarse Nyquist is zeroed."""
    m = 2 * n
    half = n // 2
    out = np.zeros(n, dtype=complex)
    out[:half] = full[:half]
    out[half + 1 :] = full[m - half + 1 :]
    return out


def _padded_samples(spec: Spectrum) -> np.ndarray:
    grid = spec.grid
    pg = _padded_grid(grid)
    padded = _pad_coeffs(spec.coeffs, grid.n_modes)
    return pg.n_modes * np.fft.ifft(pg.phase * padded)


def dealiased_product(factors) -> Spectrum:
    """Spectrum of the pointwise product of 2 or 3 fields, computed alias-free.

    Each factor is synthesized on a grid zero-padded to 2n points, multiplied
    there, transformed back and truncated to |k| < n/2.  The factor-2 padding
    removes aliasing in the retained band for quadratic and cubic products, so
    the result equals the exact coefficient convolution whenever the true
    product is resolvable there.
    """
    factors = list(factors)
    if len(factors) not in (2, 3):
        raise ValueError(f"dealiased_product takes 2 or 3 factors, got {len(factors)}")
    grid = _same_grid(*factors)
    pg = _padded_grid(grid)
    prod = _padded_samples(factors[0]) * _padded_samples(factors[1])
    for extra in factors[2:]:
        prod = prod * _padded_samples(extra)
    full = pg.phase * np.fft.fft(prod) / pg.n_modes
    return Spectrum(grid, _truncate_coeffs(full, grid.n_modes))


def spectrum_csv_rows(s: Spectrum):
    """Rows (k, xi_k, Re c_k, Im c_k, |c_k|) in increasing-k order."""
    order = np.argsort(s.grid.modes)
    for i in order:
        c = s.coeffs[i]
        yield (
            int(s.grid.modes[i]),
            float(s.grid.wavenumbers[i]),
            float(c.real),
            float(c.imag),
            float(abs(c)),
        )
