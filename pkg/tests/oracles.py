"""Independent reference computations the tests freeze expected values against.

Everything here deliberately avoids the package's FFT/padding code paths:
products are brute-force coefficient convolutions, norms are physical-space
quadrature sums.
"""

import numpy as np


def convolve_project(grid, *coeff_arrays):
    """Exact product spectrum by direct convolution, projected onto the grid band.

    Takes FFT-layout coefficient arrays, convolves them as Fourier series, and
    keeps modes |k| < n/2 (the coarse Nyquist is zeroed, matching the
    dealiased-product contract).
    """
    n = grid.n_modes
    p = len(coeff_arrays)
    centered = [np.fft.fftshift(np.asarray(c)) for c in coeff_arrays]
    acc = centered[0]
    for c in centered[1:]:
        acc = np.convolve(acc, c)
    # acc index j corresponds to mode j - p*n/2
    offset = p * (n // 2)
    out = np.zeros(n, dtype=complex)
    for k in range(-(n // 2) + 1, n // 2):
        out[k % n] = acc[k + offset]
    return out


def l2_quadrature(grid, samples):
    """L^2 norm by the periodic rectangle rule (exact for band-limited fields)."""
    quad = 2.0 * grid.half_length / grid.n_modes
    return float(np.sqrt(quad * np.sum(np.asarray(samples) ** 2)))


def inner_quadrature(grid, f, g):
    quad = 2.0 * grid.half_length / grid.n_modes
    return float(quad * np.sum(np.asarray(f) * np.asarray(g)))


def richardson_order(err_coarse, err_fine):
    """Observed convergence order from two successive error levels."""
    return float(np.log2(err_coarse / err_fine))
