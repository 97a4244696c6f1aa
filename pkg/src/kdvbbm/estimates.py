"""Randomized probing of the multilinear inequalities behind the local theory.

Empirical constants are reported, never asserted against specific values: the
assertable content is boundedness (ratio maxima stable under grid refinement)
for the in-range estimates, exact universal inequalities (interpolation,
splitting at r = 1, antisymmetry cancellation), and the unbounded-growth
signature of the bilinear estimate below s = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import cos_mode
from .norms import GevreyIndex, bracket, gevrey_norm, gevrey_weights, sobolev_norm
from .params import DEFAULT_COEFFICIENTS, CoefficientSet
from .spectral import (
    SpectralGrid,
    Spectrum,
    apply_multiplier,
    dealiased_product,
    spatial_derivative,
    symbol_on_grid,
    transform_inverse,
)

PROFILES = ("band_limited", "exponential_decay", "polynomial_decay")

#: lemma id -> (number of factors, lower validity bound on s, symbol, differentiate factors)
MULTILINEAR = {
    "bilinear_omega": (2, 0.0, "omega", False),
    "bilinear_tau": (2, 0.0, "tau", False),
    "trilinear_psi": (3, 1.0 / 6.0, "psi", False),
    "derivsq_psi": (2, 1.0, "psi", True),
}


@dataclass(frozen=True)
class TrialReport:
    lemma_id: str
    n_trials: int
    ratio_max: float
    ratio_mean: float
    seed: int
    config: dict

    def csv_row(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "s": self.config.get("s"),
            "sigma": self.config.get("sigma"),
            "n_modes": self.config.get("n_modes"),
            "n_trials": self.n_trials,
            "ratio_max": self.ratio_max,
            "ratio_mean": self.ratio_mean,
            "seed": self.seed,
        }


def random_field(
    grid: SpectralGrid,
    profile: str,
    seed,
    *,
    cutoff: int | None = None,
    rate: float | None = None,
    power: float | None = None,
    amplitude: float = 1.0,
    jitter: float = 0.2,
) -> Spectrum:
    """Hermitian-symmetric random spectrum, deterministic given the seed.

    band_limited:        iid complex Gaussian modes up to cutoff (default n/8), zero above.
    exponential_decay:   |c_k| = e^{-rate |xi_k|} with lognormal jitter, uniform phases.
    polynomial_decay:    |c_k| = <xi_k>^(-power) with the same jitter and phases.
    """
    rng = np.random.default_rng(seed)
    n = grid.n_modes
    half = n // 2
    xi_pos = np.pi * np.arange(1, half) / grid.half_length
    if profile == "band_limited":
        cut = half // 4 if cutoff is None else cutoff
        re = rng.standard_normal(half - 1)
        im = rng.standard_normal(half - 1)
        pos = (re + 1j * im) / math.sqrt(2.0)
        pos[np.arange(1, half) > cut] = 0.0
        c0 = complex(rng.standard_normal())
    elif profile == "exponential_decay":
        if rate is None:
            raise ValueError("exponential_decay profile requires rate")
        mags = np.exp(-rate * xi_pos + jitter * rng.standard_normal(half - 1))
        phases = rng.uniform(0.0, 2.0 * np.pi, half - 1)
        pos = mags * np.exp(1j * phases)
        c0 = complex(math.exp(jitter * rng.standard_normal()))
    elif profile == "polynomial_decay":
        if power is None:
            raise ValueError("polynomial_decay profile requires power")
        mags = bracket(xi_pos) ** (-power) * np.exp(jitter * rng.standard_normal(half - 1))
        phases = rng.uniform(0.0, 2.0 * np.pi, half - 1)
        pos = mags * np.exp(1j * phases)
        c0 = complex(math.exp(jitter * rng.standard_normal()))
    else:
        raise ValueError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    c = np.zeros(n, dtype=complex)
    c[1:half] = pos
    c[half + 1 :] = np.conj(pos[::-1])
    c[0] = c0.real
    c[half] = 0.0
    return Spectrum(grid, amplitude * c)


def multilinear_ratio(
    lemma_id: str,
    fields,
    g: GevreyIndex,
    coeffs: CoefficientSet,
    strict: bool = True,
) -> float:
    """Left-side Gevrey norm of the estimate divided by the right-side product.

    bilinear_omega:  |omega(dx)(u v)|_G   / (|u|_G |v|_G)        valid s >= 0
    bilinear_tau:    |tau(dx)(u v)|_G     / (|u|_G |v|_G)        valid s >= 0
    trilinear_psi:   |psi(dx)(u v w)|_G   / (|u|_G |v|_G |w|_G)  valid s >= 1/6
    derivsq_psi:     |psi(dx)(u_x v_x)|_G / (|u|_G |v|_G)        valid s >= 1

    In strict mode an s below the validity bound raises ValueError; non-strict
    mode permits the below-range failure demonstration.
    """
    if lemma_id not in MULTILINEAR:
        raise ValueError(f"unknown lemma_id {lemma_id!r}; expected one of {tuple(MULTILINEAR)}")
    arity, s_min, kind, differentiate = MULTILINEAR[lemma_id]
    fields = list(fields)
    if len(fields) != arity:
        raise ValueError(f"{lemma_id} takes {arity} fields, got {len(fields)}")
    if strict and g.s < s_min - 1e-12:
        raise ValueError(f"{lemma_id} requires s >= {s_min}, got s = {g.s}")
    operands = [spatial_derivative(f) for f in fields] if differentiate else fields
    weighted = apply_multiplier(kind, dealiased_product(operands), coeffs)
    numerator = gevrey_norm(weighted, g)
    denominator = 1.0
    for f in fields:
        denominator *= gevrey_norm(f, g)
    if denominator == 0.0:
        raise ValueError("estimate ratio requires nonzero fields")
    return numerator / denominator


def interpolation_check(u: Spectrum, s1: float, s2: float, theta: float, sigma: float) -> float:
    """LHS/RHS of the Gevrey interpolation inequality; always <= 1 + O(eps).

    With s = theta*s1 + (1-theta)*s2 the norm at s is bounded by the product
    of the norms at s1 and s2 raised to theta and 1-theta (Hoelder on the
    coefficient measure), with no constant.
    """
    if s1 > s2:
        raise ValueError(f"need s1 <= s2, got {s1} > {s2}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    s = theta * s1 + (1.0 - theta) * s2
    lhs = gevrey_norm(u, GevreyIndex(sigma, s))
    n1 = gevrey_norm(u, GevreyIndex(sigma, s1))
    n2 = gevrey_norm(u, GevreyIndex(sigma, s2))
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("interpolation check requires a nonzero field")
    return lhs / (n1**theta * n2 ** (1.0 - theta))


@dataclass(frozen=True)
class SplittingCheck:
    """One evaluation of |J^{s,sigma}u| <= c1 |J^s u| + c2 sigma^r |J^{s+r,sigma}u|."""

    lhs: float
    sobolev_part: float
    shifted_part: float  # sigma^r * |J^{s+r,sigma} u|
    holds_unit: bool  # with c1 = c2 = 1 (guaranteed at r = 1)
    c2_at_unit_c1: float  # smallest c2 making it hold with c1 = 1
    c1_grid: tuple
    c2_of_c1: tuple

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "sobolev_part": self.sobolev_part,
            "shifted_part": self.shifted_part,
            "holds_unit": self.holds_unit,
            "c2_at_unit_c1": self.c2_at_unit_c1,
        }


def splitting_check(u: Spectrum, s: float, r: float, sigma: float, c1_grid=None) -> SplittingCheck:
    """Probe the norm splitting for one field.

    At r = 1 the inequality holds with c1 = c2 = 1 (pointwise e^x <= 1 + x e^x
    plus Minkowski); for other r the report carries the smallest empirical c2
    for each c1 on a grid.
    """
    if r < 0 or sigma < 0:
        raise ValueError("r and sigma must be nonnegative")
    lhs = gevrey_norm(u, GevreyIndex(sigma, s))
    sob = sobolev_norm(u, s)
    shifted = sigma**r * gevrey_norm(u, GevreyIndex(sigma, s + r))
    slack = 1e-12 * (sob + shifted) + 1e-300
    holds_unit = lhs <= sob + shifted + slack
    if c1_grid is None:
        c1_grid = tuple(np.linspace(0.0, 2.0, 21))
    c2s = []
    for c1 in c1_grid:
        deficit = lhs - c1 * sob
        if deficit <= 0.0:
            c2s.append(0.0)
        elif shifted > 0.0:
            c2s.append(deficit / shifted)
        else:
            c2s.append(math.inf)
    c2_unit = max(0.0, lhs - sob) / shifted if shifted > 0.0 else (0.0 if lhs <= sob + slack else math.inf)
    return SplittingCheck(
        lhs=lhs,
        sobolev_part=sob,
        shifted_part=shifted,
        holds_unit=holds_unit,
        c2_at_unit_c1=c2_unit,
        c1_grid=tuple(float(v) for v in c1_grid),
        c2_of_c1=tuple(float(v) for v in c2s),
    )


def antisymmetry_check(v: Spectrum, coeffs: CoefficientSet) -> float:
    """Normalized residual of the cancellation (v, phi(dx)-rotation of v) = 0.

    phi is odd and real, so the real inner product of a real field with the
    inverse transform of i*phi(xi) v-hat vanishes; the residual is pure
    rounding and must sit far below 1e-12.
    """
    grid = v.grid
    phi = symbol_on_grid(grid, coeffs, "phi")
    rotated = Spectrum(grid, 1j * phi * v.coeffs)
    v_phys = transform_inverse(v).samples
    w_phys = transform_inverse(rotated).samples
    quad = 2.0 * grid.half_length / grid.n_modes
    inner = quad * float(np.dot(v_phys, w_phys))
    norm_sq = quad * float(np.dot(v_phys, v_phys))
    return abs(inner) / (norm_sq + np.finfo(float).tiny)


@dataclass(frozen=True)
class FailureDemo:
    """Growth record of the bilinear ratio below the s >= 0 validity range."""

    s: float
    rows: tuple  # (mode k, n_modes, ratio)
    monotone: bool
    growth_exponent: float  # slope of log ratio against log k


def failure_demo_bilinear(
    s_negative: float,
    ks=(8, 16, 32, 64),
    half_length: float = math.pi,
    coeffs: CoefficientSet = DEFAULT_COEFFICIENTS,
) -> FailureDemo:
    """Adversarial pairs showing the bilinear estimate degrade for s < 0.

    u and v are single cosine modes at k and k-1, whose product puts mass at
    the lowest nonzero wavenumber where the bracket weight is largest for
    negative s while the inputs' norms shrink like <xi_k>^s.  The ratio then
    grows without bound in k (sigma = 0; a positive sigma would mask the
    effect by exponentially penalizing the inputs).
    """
    if s_negative >= 0:
        raise ValueError(f"failure demo requires s < 0, got {s_negative}")
    g = GevreyIndex(0.0, s_negative)
    rows = []
    for k in ks:
        if k < 2:
            raise ValueError("modes must satisfy k >= 2")
        n = max(64, 2 ** math.ceil(math.log2(4 * k)))
        grid = SpectralGrid(n, half_length)
        u = cos_mode(grid, k, 1.0)
        v = cos_mode(grid, k - 1, 1.0)
        ratio = multilinear_ratio("bilinear_omega", (u, v), g, coeffs, strict=False)
        rows.append((k, n, ratio))
    ratios = np.array([r for (_, _, r) in rows])
    monotone = bool(np.all(np.diff(ratios) > 0.0))
    slope = float(np.polyfit(np.log([k for (k, _, _) in rows]), np.log(ratios), 1)[0])
    return FailureDemo(s=s_negative, rows=tuple(rows), monotone=monotone, growth_exponent=slope)


def _trial_value(lemma_id, grid, g, coeffs, child_seed, profile, profile_kw, combo):
    if lemma_id in MULTILINEAR:
        arity = MULTILINEAR[lemma_id][0]
        kids = child_seed.spawn(arity)
        fields = [random_field(grid, profile, kid, **profile_kw) for kid in kids]
        return multilinear_ratio(lemma_id, fields, g, coeffs)
    u = random_field(grid, profile, child_seed, **profile_kw)
    if lemma_id == "interpolation":
        s1, s2, theta = combo
        return interpolation_check(u, s1, s2, theta, g.sigma)
    if lemma_id == "splitting_r1":
        chk = splitting_check(u, g.s, 1.0, g.sigma)
        rhs = chk.sobolev_part + chk.shifted_part
        return chk.lhs / rhs if rhs > 0.0 else 0.0
    if lemma_id == "antisymmetry":
        return antisymmetry_check(u, coeffs)
    raise ValueError(f"unknown lemma_id {lemma_id!r}")


def run_trials(
    lemma_id: str,
    grid: SpectralGrid,
    g: GevreyIndex,
    coeffs: CoefficientSet,
    n_trials: int = 1000,
    seed: int = 0,
    profile: str = "band_limited",
    combo: tuple | None = None,
    **profile_kw,
) -> TrialReport:
    """Run a seeded campaign and reduce to max/mean of the per-trial statistic.

    Per-trial seeds are spawned from one SeedSequence, so the report is
    reproducible bit-for-bit and independent of any execution order; the max
    is an exact comparison reduction.
    """
    children = np.random.SeedSequence(seed).spawn(n_trials)
    values = [
        _trial_value(lemma_id, grid, g, coeffs, children[i], profile, profile_kw, combo)
        for i in range(n_trials)
    ]
    config = {
        "n_modes": grid.n_modes,
        "half_length": grid.half_length,
        "sigma": g.sigma,
        "s": g.s,
        "profile": profile,
    }
    if combo is not None:
        config["combo"] = tuple(combo)
    if profile_kw:
        config.update(profile_kw)
    return TrialReport(
        lemma_id=lemma_id,
        n_trials=n_trials,
        ratio_max=max(values),
        ratio_mean=float(sum(values) / n_trials),
        seed=seed,
        config=config,
    )


def existence_constant(
    grid: SpectralGrid,
    g: GevreyIndex,
    coeffs: CoefficientSet,
    n_trials: int = 200,
    seed: int = 2024,
    profile: str = "band_limited",
) -> float:
    """Empirical surrogate for the nonlinear-estimate constant C_s.

    The largest observed ratio across the three nonlinear estimates feeding
    the contraction argument (quadratic, cubic, derivative-square) at the
    given (sigma, s) and grid.  Requires s >= 1.
    """
    if g.s < 1.0:
        raise ValueError(f"existence constant requires s >= 1, got s = {g.s}")
    worst = 0.0
    for lemma_id in ("bilinear_tau", "trilinear_psi", "derivsq_psi"):
        rep = run_trials(lemma_id, grid, g, coeffs, n_trials=n_trials, seed=seed, profile=profile)
        worst = max(worst, rep.ratio_max)
    return worst
