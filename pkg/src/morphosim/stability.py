"""Closed-form linear stability of the radially symmetric shape.

The sign of a quartic dispersion polynomial N(k) decides growth or decay of
the cosine modes of the angle-derivative field around the circle (2D) or
sphere (3D).  This module evaluates the polynomial and its nested-radical
roots, the necessary conditions for instability, parameter-region scans,
and an independent oracle that rebuilds the modal rates from the banded
mode-coupling matrices by triangular solves.

Two rate notions are exposed deliberately:

* ``lambda_k`` - the assembled dispersion value ``prefactor*N(k)/D(k)``,
  the quantity the root formulas, necessary conditions and the matrix
  oracle are built around;
* ``mode_rate`` - the growth rate cosine mode k actually exhibits in the
  simulated dynamics.  In 2D the two coincide.  In 3D the banded coupling
  relations are offset by one index (row k of the coupling matrices acts on
  modes k-1 and k+1) and carry a factor one half, so the rate of mode k is
  ``(1/2)*N(k+1)/D(k+1)``.  The offset is invisible at the level of the
  stability region because N(2) = -(1+nu)(1+2*sigma) < 0 identically, but
  it matters for quantitative rate comparisons; see the finite-difference
  Jacobian checks in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.linalg import solve_triangular

_KMIN = {2: 1, 3: 2}


@dataclass(frozen=True)
class StabilityPolynomial:
    """Dispersion polynomial N(k) with its positive denominator D(k)."""

    dim: int
    sigma: float
    d: float
    nu: float | None
    coeffs: tuple  # (n0, n1, n2, n3, n4), ascending powers of k

    @property
    def kmin(self) -> int:
        return _KMIN[self.dim]

    def N(self, k):
        k = np.asarray(k, dtype=float)
        n0, n1, n2, n3, n4 = self.coeffs
        return n0 + k * (n1 + k * (n2 + k * (n3 + k * n4)))

    def D(self, k):
        k = np.asarray(k, dtype=float)
        if self.dim == 2:
            return np.pi * (1.0 + self.sigma * k**2)
        return np.pi * (self.sigma * k**2 - self.sigma * k + 1.0)

    def rate(self, k, prefactor: float = 1.0):
        """Assembled dispersion value prefactor*N(k)/D(k)."""
        return prefactor * self.N(k) / self.D(k)

    def roots_formula(self) -> np.ndarray:
        """The four nested-radical roots (complex dtype, any branch real)."""
        if self.dim == 2:
            return roots_2d(self.sigma, self.d)
        return roots_3d(self.sigma, self.d, self.nu)

    def roots_companion(self) -> np.ndarray:
        """Roots via the companion-matrix eigenvalues of N."""
        return np.roots(self.coeffs[::-1])

    def max_real_root(self) -> float:
        roots = self.roots_companion()
        real = roots[np.abs(roots.imag) < 1e-9].real
        return float(real.max()) if real.size else -np.inf

    def unstable_modes(self) -> list[int]:
        """Integers k >= kmin with N(k) > 0 (empty when stable)."""
        top = self.max_real_root()
        if not np.isfinite(top) or top < self.kmin:
            return []
        ks = np.arange(self.kmin, int(np.ceil(top)) + 2)
        return [int(k) for k in ks if self.N(k) > 0.0]

    def is_unstable(self) -> bool:
        return bool(self.unstable_modes())


def dispersion_2d(sigma: float, d: float) -> StabilityPolynomial:
    """Planar dispersion polynomial (1-d) + (sigma-2+d)k^2 - 2 sigma k^4."""
    _check_sigma(sigma)
    return StabilityPolynomial(
        2, float(sigma), float(d), None,
        (1.0 - d, 0.0, sigma - 2.0 + d, 0.0, -2.0 * sigma),
    )


def dispersion_3d(sigma: float, d: float, nu: float) -> StabilityPolynomial:
    """Axisymmetric dispersion polynomial, quartic in the mode number."""
    _check_sigma(sigma)
    _check_nu(nu)
    n0 = (1.0 - nu) * (1.0 - 2.0 * d)
    n1 = -(1.0 - nu) * (sigma + d) + 1.0
    n2 = -nu * sigma - 1.0 + (1.0 - nu) * d
    n3 = 2.0 * sigma
    n4 = -sigma
    return StabilityPolynomial(3, float(sigma), float(d), float(nu),
                               (n0, n1, n2, n3, n4))


def dispersion(dim: int, sigma: float, d: float,
               nu: float | None = None) -> StabilityPolynomial:
    if dim == 2:
        return dispersion_2d(sigma, d)
    if dim == 3:
        if nu is None:
            raise ValueError("the 3D dispersion polynomial needs nu")
        return dispersion_3d(sigma, d, nu)
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def _check_sigma(sigma: float) -> None:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")


def _check_nu(nu: float) -> None:
    if not 0.0 < nu < 1.0:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")


# -- root formulas ---------------------------------------------------------


def g_values_2d(sigma: float, d: float) -> tuple[float, float]:
    G1 = 1.0 + (d - 2.0) / sigma
    G2 = 1.0 + 2.0 * (2.0 - 3.0 * d) / sigma + (d - 2.0) ** 2 / sigma**2
    return G1, G2


def g_values_3d(sigma: float, d: float, nu: float) -> tuple[float, float]:
    g = (1.0 - nu) * d - 1.0
    G1 = 3.0 - 2.0 * nu + 2.0 * g / sigma
    G2 = (1.0 - nu) ** 2 - 2.0 * (1.0 - nu) * ((3.0 + nu) * d - 1.0) / sigma \
        + g**2 / sigma**2
    return G1, G2


def roots_2d(sigma: float, d: float) -> np.ndarray:
    """Quartic roots +-(1/2)sqrt(G1 +- sqrt(G2)), complex branches allowed."""
    G1, G2 = g_values_2d(sigma, d)
    s = np.sqrt(complex(G2))
    inner = [np.sqrt(complex(G1 + s)), np.sqrt(complex(G1 - s))]
    return np.array([0.5 * inner[0], -0.5 * inner[0],
                     0.5 * inner[1], -0.5 * inner[1]])


def roots_3d(sigma: float, d: float, nu: float) -> np.ndarray:
    """Quartic roots 1/2 +- (1/2)sqrt(G1 +- 2 sqrt(G2))."""
    G1, G2 = g_values_3d(sigma, d, nu)
    s = np.sqrt(complex(G2))
    inner = [np.sqrt(complex(G1 + 2.0 * s)), np.sqrt(complex(G1 - 2.0 * s))]
    return np.array([0.5 + 0.5 * inner[0], 0.5 - 0.5 * inner[0],
                     0.5 + 0.5 * inner[1], 0.5 - 0.5 * inner[1]])


def root_agreement(poly: StabilityPolynomial) -> float:
    """Best-matching distance between formula roots and companion roots."""
    formula = poly.roots_formula()
    companion = poly.roots_companion()
    best = np.inf
    for perm in permutations(range(4)):
        dist = max(abs(formula[i] - companion[p]) for i, p in enumerate(perm))
        best = min(best, dist)
    return float(best)


def elimination_identity_residual(dim: int, sigma: float, d: float,
                                  nu: float | None = None) -> float:
    """Residual of the d-independent identity eliminating the G2 branch.

    2D: G2 - (4 - G1)^2 = -8(1 + 1/sigma);
    3D: 4 G2 - (9 - G1)^2 = -16(1 + nu)(2 + 1/sigma).
    """
    if dim == 2:
        G1, G2 = g_values_2d(sigma, d)
        return float(G2 - (4.0 - G1) ** 2 + 8.0 * (1.0 + 1.0 / sigma))
    G1, G2 = g_values_3d(sigma, d, nu)
    return float(4.0 * G2 - (9.0 - G1) ** 2
                 + 16.0 * (1.0 + nu) * (2.0 + 1.0 / sigma))


def necessary_condition(dim: int, sigma: float,
                        nu: float | None = None) -> float:
    """Smallest coupling exponent d compatible with instability.

    Instability needs the largest root above the smallest admissible mode,
    which forces G1 >= 4 (2D) or G1 >= 9 (3D) because the alternative branch
    is ruled out by a d-independent sign identity (checked here numerically
    at a few exponents).
    """
    _check_sigma(sigma)
    if dim == 2:
        bound = 2.0 + 3.0 * sigma
    elif dim == 3:
        if nu is None:
            raise ValueError("the 3D necessary condition needs nu")
        _check_nu(nu)
        bound = (1.0 + (3.0 + nu) * sigma) / (1.0 - nu)
    else:
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    for d_probe in (0.5, 2.0, bound, 3.0 * bound + 1.0):
        res = elimination_identity_residual(dim, sigma, d_probe, nu)
        if abs(res) > 1e-9 * max(1.0, 1.0 / sigma**2):
            raise AssertionError(
                f"elimination identity violated at d={d_probe}: residual {res:.3e}"
            )
    return float(bound)


# -- modal rates -----------------------------------------------------------


def lambda_k(sigma: float, d: float, nu: float | None, k,
             prefactor: float = 1.0, dim: int = 3):
    """Assembled dispersion value prefactor*N(k)/D(k) (see module docstring)."""
    poly = dispersion(dim, sigma, d, nu)
    return poly.rate(k, prefactor)


def mode_rate(sigma: float, d: float, nu: float | None, k,
              prefactor: float = 1.0, dim: int = 3):
    """Growth rate of cosine mode k of the simulated wall dynamics.

    2D: N(k)/D(k) for k >= 1.  3D: (1/2)N(k+1)/D(k+1) for k >= 2; the
    coupling matrices act on mode pairs (k-1, k+1) at row k, which offsets
    the assembled polynomial by one index and a factor one half relative to
    the mode it governs.  Mode k = 1 in 3D is outside the analysis (it
    breaks the radial closure constraint at first order).
    """
    poly = dispersion(dim, sigma, d, nu)
    if dim == 2:
        return poly.rate(k, prefactor)
    k = np.asarray(k)
    if np.any(k < 2):
        raise ValueError("3D mode rates are defined for modes k >= 2")
    return 0.5 * poly.rate(np.asarray(k, dtype=float) + 1.0, prefactor)


def unstable_mode_rates(dim: int, sigma: float, d: float,
                        nu: float | None = None,
                        prefactor: float = 1.0) -> dict[int, float]:
    """Modes with positive simulated rate, mapped to their rates."""
    poly = dispersion(dim, sigma, d, nu)
    shift = 1 if dim == 3 else 0
    return {
        k - shift: float(mode_rate(sigma, d, nu, k - shift, prefactor, dim))
        for k in poly.unstable_modes()
        if k - shift >= _KMIN[dim]
    }


# -- matrix oracle ---------------------------------------------------------


def coupling_polynomials(nu: float, sigma: float) -> dict:
    """Row polynomials of the banded mode-coupling matrices."""
    return {
        "p1": lambda k: np.pi * (2.0 + k),
        "p2": lambda k: np.pi * (2.0 - k),
        "q1": lambda k: -k**3 - k**2 + (3.0 - nu) * k + 2.0 * (1.0 - nu),
        "q2": lambda k: k**3 - k**2 - (3.0 - nu) * k + 2.0 * (1.0 - nu),
        "r": lambda k: np.pi * (1.0 - nu) * k * (k**2 - 4.0),
        "s1": lambda k: np.pi * (k - sigma * k**2 + sigma * k**3),
        "s2": lambda k: -np.pi * (k + sigma * k**2 + sigma * k**3),
        "t1": lambda k: k + 1.0,
        "t2": lambda k: -(k - 1.0),
    }


def _banded_upper(diag_poly, off_poly, ks: np.ndarray) -> np.ndarray:
    n = ks.size
    M = np.zeros((n, n))
    M[np.arange(n), np.arange(n)] = diag_poly(ks)
    M[np.arange(n - 2), np.arange(2, n)] = off_poly(ks[:-2])
    return M


def matrix_oracle_3d(sigma: float, d: float, nu: float, K: int) -> np.ndarray:
    """Diagonal of the truncated coupling-matrix product, by triangular solves.

    Builds the five banded upper-triangular matrices over rows k = 2..K and
    forms M1^{-1} M2 + d * M1^{-1} M3 N1^{-1} N2.  Its diagonal reproduces
    N(k)/D(k) exactly (truncation cannot touch the diagonal of a triangular
    product), which is the independent route to the assembled dispersion
    values.
    """
    if K < 4:
        raise ValueError(f"truncation K must be at least 4, got {K}")
    _check_sigma(sigma)
    _check_nu(nu)
    ks = np.arange(2, K + 1, dtype=float)
    P = coupling_polynomials(nu, sigma)
    M1 = _banded_upper(P["p1"], P["p2"], ks)
    M2 = _banded_upper(P["q1"], P["q2"], ks)
    M3 = _banded_upper(P["r"], lambda k: -P["r"](k), ks)
    N1 = _banded_upper(P["s1"], P["s2"], ks)
    N2 = _banded_upper(P["t1"], P["t2"], ks)

    C = solve_triangular(N1, N2, lower=False)
    M = solve_triangular(M1, M2 + d * (M3 @ C), lower=False)
    return np.diag(M).copy()


# -- region scans ----------------------------------------------------------


@dataclass
class RegionScan:
    """Stability classification over a (d, sigma) parameter rectangle."""

    dim: int
    nu: float | None
    d_values: np.ndarray
    sigma_values: np.ndarray
    stable: np.ndarray  # (n_d, n_sigma) bool
    smallest_unstable_k: np.ndarray  # (n_d, n_sigma) int, 0 where stable
    boundary: list = field(default_factory=list)  # (d, sigma) integer criterion
    gap_curve: list = field(default_factory=list)  # (d, sigma) root-gap == 1
    monotone_boundary: bool = True

    def necessary_d(self, sigma):
        return np.asarray([
            necessary_condition(self.dim, s, self.nu) for s in np.atleast_1d(sigma)
        ])

    def to_csv(self, path_or_buffer) -> None:
        def _write(fh):
            fh.write("d,sigma,stable,smallest_unstable_k\n")
            for i, d in enumerate(self.d_values):
                for j, s in enumerate(self.sigma_values):
                    fh.write(
                        f"{d:.17g},{s:.17g},{int(self.stable[i, j])},"
                        f"{int(self.smallest_unstable_k[i, j])}\n"
                    )

        _dispatch_write(path_or_buffer, _write)

    def boundary_to_csv(self, path_or_buffer) -> None:
        def _write(fh):
            fh.write("curve,d,sigma\n")
            for d, s in self.boundary:
                fh.write(f"integer_mode,{d:.17g},{s:.17g}\n")
            for d, s in self.gap_curve:
                fh.write(f"root_gap_one,{d:.17g},{s:.17g}\n")
            for d in self.d_values:
                s = _invert_necessary(self.dim, float(d), self.nu)
                if s is not None:
                    fh.write(f"necessary_condition,{d:.17g},{s:.17g}\n")

        _dispatch_write(path_or_buffer, _write)


def _dispatch_write(path_or_buffer, writer) -> None:
    if hasattr(path_or_buffer, "write"):
        writer(path_or_buffer)
    else:
        with open(path_or_buffer, "w", encoding="ascii") as fh:
            writer(fh)


def _invert_necessary(dim: int, d: float, nu: float | None) -> float | None:
    """sigma at which the necessary condition is sharp for a given d."""
    if dim == 2:
        s = (d - 2.0) / 3.0
    else:
        s = ((1.0 - nu) * d - 1.0) / (3.0 + nu)
    return s if s > 0 else None


def _root_gap(dim: int, sigma: float, d: float, nu: float | None) -> float:
    """Gap between the two greatest real roots of N; -inf when not real."""
    poly = dispersion(dim, sigma, d, nu)
    roots = poly.roots_formula()
    real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    if real.size < 2:
        return -np.inf
    return float(real[-1] - real[-2])


def _bisect_sigma(flag, lo: float, hi: float, iters: int = 60) -> float:
    """Bisect on a boolean predicate that is True at lo and False at hi."""
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        if flag(mid):
            lo = mid
        else:
            hi = mid
    return float(np.sqrt(lo * hi))


def region_scan(
    dim: int,
    nu: float | None,
    d_range: tuple[float, float],
    sigma_range: tuple[float, float],
    resolution: int | tuple[int, int] = 100,
) -> RegionScan:
    """Classify stability on a (d, sigma) grid and trace boundary curves.

    A cell is unstable when some integer mode at or above the smallest
    admissible one has a positive dispersion value.  Two boundary loci are
    emitted: the integer-mode criterion (what simulations obey) and the
    locus where the gap between the two greatest real roots equals one
    (which guarantees an integer inside the positive interval); they differ
    and both are reported.
    """
    if isinstance(resolution, int):
        n_d = n_s = resolution
    else:
        n_d, n_s = resolution
    d_values = np.linspace(d_range[0], d_range[1], n_d)
    sigma_values = np.linspace(sigma_range[0], sigma_range[1], n_s)
    if sigma_values[0] <= 0:
        raise ValueError("sigma range must be positive")

    stable = np.ones((n_d, n_s), dtype=bool)
    smallest = np.zeros((n_d, n_s), dtype=int)
    for i, d in enumerate(d_values):
        for j, s in enumerate(sigma_values):
            modes = dispersion(dim, s, d, nu).unstable_modes()
            if modes:
                stable[i, j] = False
                smallest[i, j] = modes[0]

    monotone = True
    for i in range(n_d):
        col = stable[i]
        # Unstable below, stable above in sigma; flag (non-fatally) otherwise.
        if np.any(~col[1:] & col[:-1]):
            monotone = False

    boundary = []
    gap_curve = []
    lo, hi = float(sigma_values[0]), float(sigma_values[-1])
    for d in d_values:
        def unstable_at(s, d=d):
            return dispersion(dim, s, d, nu).is_unstable()

        if unstable_at(lo) and not unstable_at(hi):
            boundary.append((float(d), _bisect_sigma(unstable_at, lo, hi)))

        def gap_above_one(s, d=d):
            return _root_gap(dim, s, d, nu) >= 1.0

        if gap_above_one(lo) and not gap_above_one(hi):
            gap_curve.append((float(d), _bisect_sigma(gap_above_one, lo, hi)))

    return RegionScan(dim, nu, d_values, sigma_values, stable, smallest,
                      boundary, gap_curve, monotone)
