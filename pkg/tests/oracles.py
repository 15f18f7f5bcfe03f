"""Independent reference computations used by the test suite.

Nothing here imports the estimators under test; these are deliberately
slow, brute-force answers (dense quadrature, closed forms, exhaustive
grids) that the fast Monte Carlo code must agree with.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import simpson
from scipy.special import erfc


def mixture_mi_quadrature(
    points: np.ndarray,
    noise_variance: float,
    grid_size: int = 1201,
    tail_sigmas: float = 10.0,
) -> float:
    """Mutual information of Y = x + N, x uniform over `points`, in bits.

    N is circular complex Gaussian with total variance `noise_variance`.
    I = h(Y) - log2(pi e nu); h(Y) falls to 2-D Simpson quadrature of the
    equal-weight Gaussian mixture. grid_size must be odd so the interval
    count is even.
    """
    if grid_size % 2 == 0:
        raise ValueError("grid_size must be odd for Simpson quadrature")
    nu = float(noise_variance)
    pts = np.asarray(points, dtype=np.complex128)
    extent = float(np.max(np.abs(pts))) + tail_sigmas * math.sqrt(nu / 2.0)
    axis = np.linspace(-extent, extent, grid_size)
    re, im = np.meshgrid(axis, axis, indexing="ij")
    y = re + 1j * im
    density = np.zeros_like(re)
    for p in pts:
        density += np.exp(-np.abs(y - p) ** 2 / nu)
    density /= math.pi * nu * pts.size
    integrand = np.where(density > 0.0, density * np.log2(density, where=density > 0.0), 0.0)
    h_y = -simpson(simpson(integrand, x=axis, axis=1), x=axis)
    return h_y - math.log2(math.pi * math.e * nu)


def qpsk_success_rate(snr: float) -> float:
    """Exact symbol success rate of unit-energy QPSK at linear SNR.

    Per-axis error is Q(sqrt(SNR)) for Gray QPSK on an AWGN channel with
    total noise variance sigma^2 split evenly between quadratures; success
    needs both axes right.
    """
    q = 0.5 * erfc(math.sqrt(snr) / math.sqrt(2.0))
    return (1.0 - q) ** 2


def two_point_amplitude_designs(grid_points: int) -> np.ndarray:
    """All unit-energy nonnegative 2-point amplitude designs on a grid.

    Returns an array of shape (grid_points, 2): rows (a1, a2) =
    sqrt(2) (sin t, cos t) for t evenly spaced in [0, pi/2]. Every row has
    mean square energy exactly 1 up to float rounding.
    """
    t = np.linspace(0.0, math.pi / 2.0, grid_points)
    return math.sqrt(2.0) * np.stack([np.sin(t), np.cos(t)], axis=1)


def harvested_power_se(
    gains_sq: np.ndarray,
    coeff_linear: float,
    coeff_quartic: float,
) -> float:
    """Standard error of the plug-in harvested-power estimate.

    The estimator is coeff_linear * mean(g) + coeff_quartic * mean(g^2)
    with g = |h|^2; its variance follows from the sample covariance of
    (g, g^2) divided by the sample count.
    """
    g = np.asarray(gains_sq, dtype=np.float64)
    n = g.size
    cov = np.cov(np.stack([g, g * g]), ddof=1)
    var = (
        coeff_linear**2 * cov[0, 0]
        + coeff_quartic**2 * cov[1, 1]
        + 2.0 * coeff_linear * coeff_quartic * cov[0, 1]
    ) / n
    return math.sqrt(max(var, 0.0))
