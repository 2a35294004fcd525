"""Fourier diagnostics linking simulations to the dispersion analysis.

Fields on the shifted grid are expanded in the cosine basis cos(k pi x),
which is exactly orthogonal under the midpoint rule on that grid.  The
coefficients of the angle-derivative field (minus its mean) are the
quantities whose growth the dispersion polynomials predict; ``fit_rate``
extracts exponential rates from their time series.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import Grid


class RateFitError(RuntimeError):
    """The requested mode series does not support a clean exponential fit."""


def cosine_coeffs(values: np.ndarray, grid: Grid, n_modes: int) -> np.ndarray:
    """Coefficients a_1..a_K of the field against cos(k pi x).

    Uses the midpoint rule a_k = 2 dx sum_j f(y_j) cos(k pi y_j), which is
    exact orthogonality on the shifted grid for k up to the grid limit.  The
    mean is removed first (it belongs to the k = 0 term).  Asking for more
    than m/2 modes triggers an aliasing warning.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_cells,):
        raise ValueError(
            f"field must live on the shifted grid ({grid.n_cells},), "
            f"got {values.shape}"
        )
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if n_modes > grid.m / 2:
        warnings.warn(
            f"extracting {n_modes} modes on a grid with m={grid.m} risks "
            "aliasing",
            stacklevel=2,
        )
    centered = values - values.mean()
    ks = np.arange(1, n_modes + 1)
    basis = np.cos(np.outer(ks, np.pi * grid.shifted))
    return 2.0 * grid.dx * basis @ centered


def ck_from_ak_2d(a_k: float, sigma: float, k: int) -> float:
    """Growth-density coefficient slaved to a shape coefficient (planar)."""
    if k < 1:
        raise ValueError(f"mode number must be >= 1, got {k}")
    return a_k / (np.pi * (1.0 + sigma * k**2))


@dataclass
class ModeSeries:
    """Time series of cosine coefficients a_k(t), k = 1..K."""

    times: np.ndarray
    coeffs: np.ndarray  # shape (n_times, K)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if self.coeffs.shape[0] != self.times.size:
            raise ValueError("times and coefficient rows must match")

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[1]

    def amplitude(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.n_modes:
            raise ValueError(f"mode {k} outside tracked range 1..{self.n_modes}")
        return self.coeffs[:, k - 1]

    def energy(self, k_from: int = 1) -> np.ndarray:
        """Sum of squared coefficients from mode k_from upward."""
        return np.sum(self.coeffs[:, k_from - 1 :] ** 2, axis=1)

    def to_csv(self, path_or_buffer) -> None:
        header = "t," + ",".join(f"a_{k}" for k in range(1, self.n_modes + 1))

        def _write(fh):
            fh.write(header + "\n")
            for t, row in zip(self.times, self.coeffs):
                fh.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")

        if hasattr(path_or_buffer, "write"):
            _write(path_or_buffer)
        else:
            with open(path_or_buffer, "w", encoding="ascii") as fh:
                _write(fh)


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponential rate of one mode amplitude."""

    mode: int
    rate: float
    r_squared: float
    t_start: float
    t_stop: float
    n_points: int

    def __float__(self) -> float:
        return self.rate


def fit_rate(
    series: ModeSeries,
    k: int,
    window: tuple[float, float] | None = None,
    linear_threshold: float = 1e-2,
    relaxation_guard: float = 0.02,
    sigma: float | None = None,
    min_r2: float = 0.99,
    floor: float = 1e-13,
) -> RateFit:
    """Slope of log|a_k(t)| over a window inside the linear regime.

    Without an explicit window, the fit starts after a short relaxation
    allowance (a fixed fraction of the diffusion time 1/sigma when sigma is
    given) and stops where any tracked mode exceeds the linear-regime
    threshold.  Sign changes of a_k inside the window mean the mode is not
    on a clean exponential and are reported as errors, as are fits with
    R^2 below ``min_r2``.
    """
    a = series.amplitude(k)
    t = series.times

    if window is None:
        max_amp = np.max(np.abs(series.coeffs), axis=1)
        over = np.nonzero(max_amp > linear_threshold)[0]
        i_stop = int(over[0]) if over.size else t.size
        t_start = relaxation_guard / sigma if sigma else 0.0
        t_start = min(t_start, 0.25 * t[min(i_stop, t.size) - 1])
        i_start = int(np.searchsorted(t, t_start))
    else:
        i_start = int(np.searchsorted(t, window[0]))
        i_stop = int(np.searchsorted(t, window[1], side="right"))

    sel = slice(i_start, i_stop)
    a_win, t_win = a[sel], t[sel]
    usable = np.abs(a_win) > floor
    a_win, t_win = a_win[usable], t_win[usable]
    if t_win.size < 3:
        raise RateFitError(
            f"mode {k}: only {t_win.size} usable samples in the fit window"
        )
    if np.any(a_win[:-1] * a_win[1:] < 0):
        raise RateFitError(
            f"mode {k}: amplitude changes sign inside the fit window "
            "(oscillatory behaviour; no real rate)"
        )

    logs = np.log(np.abs(a_win))
    slope, intercept = np.polyfit(t_win, logs, 1)
    pred = slope * t_win + intercept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if r2 < min_r2:
        raise RateFitError(
            f"mode {k}: fit quality R^2={r2:.4f} below {min_r2} "
            f"(window [{t_win[0]:.3g}, {t_win[-1]:.3g}])"
        )
    return RateFit(k, float(slope), float(r2), float(t_win[0]),
                   float(t_win[-1]), int(t_win.size))
