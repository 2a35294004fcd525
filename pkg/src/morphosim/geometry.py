"""Axisymmetric wall geometry via the normal-angle field.

The cell wall is a surface of revolution.  Its generatrix curve on the unit
parameter interval is stored through the derivative of the normal angle,
``dphi = d(phi)/dx``, as a piecewise-constant field on a shifted (cell-center)
grid; ``phi`` itself is the piecewise-linear reconstruction on the regular
grid with ``phi(0) = 0``.  A closed profile has ``phi(1) = pi`` and a
vanishing radial closure defect ``|int_0^1 cos(phi) dx|``.

All integrals of ``cos(phi)`` and ``sin(phi)`` are computed from the exact
antiderivative of the piecewise-linear angle, which keeps pole quantities
finite without any regularisation.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEFAULT_CLOSURE_TOL = 1e-6

# Below this angle increment across a cell the exact antiderivative formula
# is replaced by the midpoint value to avoid 0/0.
_SMALL_INCREMENT = 1e-9


class InvalidProfileError(ValueError):
    """A wall profile violates positivity or closure requirements."""


@dataclass(frozen=True)
class Grid:
    """Regular grid on [0, 1] with m interior nodes and m+1 cells.

    Nodes sit at ``x_i = i*dx`` for ``i = 0..m+1`` and cell centers at
    ``y_j = (j + 1/2)*dx`` for ``j = 0..m`` with ``dx = 1/(m+1)``.
    """

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"grid needs at least one interior node, got m={self.m}")

    @property
    def dx(self) -> float:
        return 1.0 / (self.m + 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m + 2)

    @cached_property
    def shifted(self) -> np.ndarray:
        return (np.arange(self.m + 1) + 0.5) * self.dx

    @property
    def n_cells(self) -> int:
        return self.m + 1


def _int_cos(phi0: np.ndarray, w: np.ndarray, h) -> np.ndarray:
    """Exact integral of cos(phi0 + w*s) over s in [0, h]."""
    wh = w * h
    small = np.abs(wh) < _SMALL_INCREMENT
    denom = np.where(small, 1.0, w)
    exact = (np.sin(phi0 + wh) - np.sin(phi0)) / denom
    return np.where(small, h * np.cos(phi0 + 0.5 * wh), exact)


def _int_sin(phi0: np.ndarray, w: np.ndarray, h) -> np.ndarray:
    """Exact integral of sin(phi0 + w*s) over s in [0, h]."""
    wh = w * h
    small = np.abs(wh) < _SMALL_INCREMENT
    denom = np.where(small, 1.0, w)
    exact = (np.cos(phi0) - np.cos(phi0 + wh)) / denom
    return np.where(small, h * np.sin(phi0 + 0.5 * wh), exact)


@dataclass(frozen=True)
class WallProfile:
    """Discrete generatrix state: angle derivative, length and time.

    ``dphi`` holds d(phi)/dx on the shifted grid (radians per unit x), ``L``
    is the generatrix length and ``t`` the simulation time.  Instances are
    treated as immutable; derived arrays are cached on first use.
    """

    grid: Grid
    dphi: np.ndarray
    L: float = np.pi
    t: float = 0.0

    def __post_init__(self):
        dphi = np.asarray(self.dphi, dtype=float)
        if dphi.shape != (self.grid.n_cells,):
            raise ValueError(
                f"dphi must have one value per cell ({self.grid.n_cells}), "
                f"got shape {dphi.shape}"
            )
        if not self.L > 0:
            raise ValueError(f"generatrix length must be positive, got {self.L}")
        object.__setattr__(self, "dphi", dphi)

    # -- constructors -------------------------------------------------

    @classmethod
    def sphere(cls, m: int, L: float = np.pi, t: float = 0.0) -> "WallProfile":
        """Exact radial profile: constant dphi = pi (sphere of radius L/pi)."""
        grid = Grid(m)
        return cls(grid, np.full(grid.n_cells, np.pi), L, t)

    @classmethod
    def from_modes(
        cls,
        m: int,
        amplitudes: dict[int, float],
        L: float = np.pi,
        t: float = 0.0,
    ) -> "WallProfile":
        """Sphere perturbed by cosine modes: dphi = pi + sum_k a_k cos(k pi y)."""
        grid = Grid(m)
        w = np.full(grid.n_cells, np.pi)
        for k, amp in amplitudes.items():
            if k < 1:
                raise ValueError(f"mode numbers must be >= 1, got {k}")
            w += amp * np.cos(k * np.pi * grid.shifted)
        return cls(grid, w, L, t)

    # -- derived fields ------------------------------------------------

    @cached_property
    def phi_nodes(self) -> np.ndarray:
        """Angle at the regular nodes, phi(0) = 0 by construction."""
        phi = np.empty(self.grid.m + 2)
        phi[0] = 0.0
        np.cumsum(self.dphi * self.grid.dx, out=phi[1:])
        return phi

    @cached_property
    def phi_shifted(self) -> np.ndarray:
        """Angle at cell centers (exact for the piecewise-linear angle)."""
        return self.phi_nodes[:-1] + 0.5 * self.grid.dx * self.dphi

    @cached_property
    def icos_nodes(self) -> np.ndarray:
        """Running integral of cos(phi) at the nodes (exact per cell)."""
        cells = _int_cos(self.phi_nodes[:-1], self.dphi, self.grid.dx)
        out = np.empty(self.grid.m + 2)
        out[0] = 0.0
        np.cumsum(cells, out=out[1:])
        return out

    @cached_property
    def icos_shifted(self) -> np.ndarray:
        """Running integral of cos(phi) at cell centers."""
        half = _int_cos(self.phi_nodes[:-1], self.dphi, 0.5 * self.grid.dx)
        return self.icos_nodes[:-1] + half

    @cached_property
    def isin_nodes(self) -> np.ndarray:
        """Running integral of sin(phi) at the nodes (the axial coordinate z/L)."""
        cells = _int_sin(self.phi_nodes[:-1], self.dphi, self.grid.dx)
        out = np.empty(self.grid.m + 2)
        out[0] = 0.0
        np.cumsum(cells, out=out[1:])
        return out

    @cached_property
    def isin_shifted(self) -> np.ndarray:
        half = _int_sin(self.phi_nodes[:-1], self.dphi, 0.5 * self.grid.dx)
        return self.isin_nodes[:-1] + half

    # -- diagnostics ----------------------------------------------------

    @property
    def closure_defect(self) -> float:
        """|int_0^1 cos(phi) dx|: how far the second pole misses the axis."""
        return abs(float(self.icos_nodes[-1]))

    @property
    def angle_defect(self) -> float:
        """|phi(1) - pi|: defect in the total turning of the normal."""
        return abs(float(self.phi_nodes[-1]) - np.pi)

    @property
    def parametrized(self) -> bool:
        """True when dphi > 0 everywhere (profile is a graph over the angle)."""
        return bool(np.all(self.dphi > 0.0))

    def check_valid(self, closure_tol: float = DEFAULT_CLOSURE_TOL) -> None:
        """Raise InvalidProfileError on positivity or closure violations."""
        if not self.parametrized:
            raise InvalidProfileError(
                f"dphi must be positive everywhere (min {self.dphi.min():.3e}); "
                "the profile lost its angular parametrization"
            )
        if self.angle_defect > closure_tol:
            raise InvalidProfileError(
                f"phi(1) deviates from pi by {self.angle_defect:.3e} "
                f"(tolerance {closure_tol:.1e})"
            )
        if self.closure_defect > closure_tol:
            raise InvalidProfileError(
                f"radial closure defect {self.closure_defect:.3e} exceeds "
                f"tolerance {closure_tol:.1e}"
            )

    def with_dphi(self, dphi: np.ndarray, L: float | None = None,
                  t: float | None = None) -> "WallProfile":
        """Copy with replaced fields (grid is shared)."""
        return WallProfile(
            self.grid,
            dphi,
            self.L if L is None else L,
            self.t if t is None else t,
        )


# -- operations ----------------------------------------------------------


def icos(profile: WallProfile, x: float | None = None):
    """Integral of cos(phi) from 0 to each node, or to an arbitrary x.

    Uses the exact antiderivative of cos of the piecewise-linear angle, so
    consecutive values differ by the exact cell integral (no quadrature
    drift).
    """
    if x is None:
        return profile.icos_nodes.copy()
    return _partial_icos(profile, float(x))


def _cell_index(grid: Grid, x: float) -> int:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return min(int(x / grid.dx), grid.m)


def _partial_icos(profile: WallProfile, x: float) -> float:
    j = _cell_index(profile.grid, x)
    x_left = profile.grid.nodes[j]
    head = profile.icos_nodes[j]
    tail = _int_cos(profile.phi_nodes[j], profile.dphi[j], x - x_left)
    return float(head + tail)


def phi_at(profile: WallProfile, x: float) -> float:
    """Angle at an arbitrary x in [0, 1] (exact piecewise-linear value)."""
    j = _cell_index(profile.grid, x)
    return float(profile.phi_nodes[j] + profile.dphi[j] * (x - profile.grid.nodes[j]))


def icosin(profile: WallProfile, x: float | None = None):
    """Ratio Icos(x)/sin(phi(x)), with the pole limit 1/dphi at x = 0, 1.

    With ``x`` given, returns the scalar value there; otherwise returns the
    array over all nodes.  A vanishing sin(phi) away from the poles means the
    angle left (0, pi) and is reported as an invalid profile.
    """
    if x is not None:
        x = float(x)
        if x == 0.0:
            return 1.0 / float(profile.dphi[0])
        if x == 1.0:
            return 1.0 / float(profile.dphi[-1])
        phi = phi_at(profile, x)
        if not 0.0 < phi < np.pi:
            raise InvalidProfileError(
                f"sin(phi) vanishes near interior point x={x} (phi={phi:.6f})"
            )
        return float(_partial_icos(profile, x) / np.sin(phi))

    phi_int = profile.phi_nodes[1:-1]
    if np.any(phi_int <= 0.0) or np.any(phi_int >= np.pi):
        raise InvalidProfileError(
            "angle leaves (0, pi) at an interior node; sin(phi) vanishes there"
        )
    out = np.empty(profile.grid.m + 2)
    out[0] = 1.0 / profile.dphi[0]
    out[-1] = 1.0 / profile.dphi[-1]
    out[1:-1] = profile.icos_nodes[1:-1] / np.sin(phi_int)
    return out


def icosin_shifted(profile: WallProfile) -> np.ndarray:
    """Icos/sin(phi) at cell centers (never at a pole, so no limits needed)."""
    s = np.sin(profile.phi_shifted)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = profile.icos_shifted / s
    if not np.all(np.isfinite(out)):
        raise InvalidProfileError("sin(phi) vanishes at a cell center")
    return out


def dphi_nodes(profile: WallProfile) -> np.ndarray:
    """dphi averaged onto the nodes; one-sided copies at the poles."""
    w = profile.dphi
    out = np.empty(profile.grid.m + 2)
    out[0] = w[0]
    out[-1] = w[-1]
    out[1:-1] = 0.5 * (w[:-1] + w[1:])
    return out


def curvatures(profile: WallProfile) -> tuple[np.ndarray, np.ndarray]:
    """Principal curvatures (meridional, circumferential) at the nodes.

    kappa_s = dphi/L and kappa_theta = sin(phi)/(L*Icos); at the poles
    kappa_theta tends to kappa_s, which is used directly.
    """
    w_bar = dphi_nodes(profile)
    kappa_s = w_bar / profile.L
    kappa_theta = np.empty_like(kappa_s)
    kappa_theta[0] = kappa_s[0]
    kappa_theta[-1] = kappa_s[-1]
    kappa_theta[1:-1] = np.sin(profile.phi_nodes[1:-1]) / (
        profile.L * profile.icos_nodes[1:-1]
    )
    return kappa_s, kappa_theta


def curvatures_shifted(profile: WallProfile) -> tuple[np.ndarray, np.ndarray]:
    """Principal curvatures at the cell centers."""
    kappa_s = profile.dphi / profile.L
    kappa_theta = np.sin(profile.phi_shifted) / (profile.L * profile.icos_shifted)
    return kappa_s, kappa_theta


def gaussian_curvature_integral(profile: WallProfile) -> float:
    """Total curvature of the closed surface, int K dA.

    The area element cancels the circumferential curvature exactly, so the
    integral reduces to 2*pi*int dphi*sin(phi) dx, which integrates exactly
    to 2*pi*(cos(phi(0)) - cos(phi(1))); equal to 4*pi on closed profiles.
    """
    return float(2.0 * np.pi * (1.0 - np.cos(profile.phi_nodes[-1])))


@dataclass
class SurfaceMesh:
    """Revolved generatrix: profile rings plus a triangulated surface."""

    rings: np.ndarray  # (n_rings, 2) of (r, z)
    azimuthal_res: int
    vertices: np.ndarray  # (n_vertices, 3)
    faces: np.ndarray  # (n_faces, 3), zero-based vertex indices
    generatrix_arclength: float
    closure_defect: float
    warnings: list[str] = field(default_factory=list)

    def to_obj(self, path_or_buffer) -> None:
        """Write the mesh as ASCII Wavefront OBJ (v/f records)."""

        def _write(fh):
            fh.write("# surface of revolution generated by morphosim\n")
            for v in self.vertices:
                fh.write(f"v {v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
            for f in self.faces:
                fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")

        if hasattr(path_or_buffer, "write"):
            _write(path_or_buffer)
        else:
            with open(path_or_buffer, "w", encoding="ascii") as fh:
                _write(fh)

    def to_obj_string(self) -> str:
        buf = io.StringIO()
        self.to_obj(buf)
        return buf.getvalue()


def reconstruct(
    profile: WallProfile,
    azimuthal_res: int = 64,
    closure_tol: float = DEFAULT_CLOSURE_TOL,
) -> SurfaceMesh:
    """Rebuild the revolved surface from the angle field.

    The generatrix is r(x) = L*Icos(x), z(x) = L*Isin(x); by construction its
    parametrization speed is L everywhere, so the generatrix arclength equals
    L exactly.  Poles collapse to single vertices; a closure defect above
    tolerance is recorded as a warning rather than an error.
    """
    if azimuthal_res < 3:
        raise ValueError(f"azimuthal_res must be >= 3, got {azimuthal_res}")

    L = profile.L
    r = L * profile.icos_nodes
    z = L * profile.isin_nodes
    rings = np.column_stack([r, z])

    warnings = []
    defect = profile.closure_defect
    if defect > closure_tol:
        warnings.append(
            f"closure defect {defect:.3e} exceeds tolerance {closure_tol:.1e}; "
            "the far pole was collapsed onto the axis"
        )

    n_rings = rings.shape[0]
    theta = 2.0 * np.pi * np.arange(azimuthal_res) / azimuthal_res
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    # Vertex layout: north pole, interior rings (row-major), south pole.
    n_interior = n_rings - 2
    vertices = np.empty((2 + n_interior * azimuthal_res, 3))
    vertices[0] = (0.0, 0.0, z[0])
    for i in range(1, n_rings - 1):
        base = 1 + (i - 1) * azimuthal_res
        vertices[base : base + azimuthal_res, 0] = r[i] * cos_t
        vertices[base : base + azimuthal_res, 1] = r[i] * sin_t
        vertices[base : base + azimuthal_res, 2] = z[i]
    vertices[-1] = (0.0, 0.0, z[-1])

    faces = []
    south = len(vertices) - 1
    nxt = np.roll(np.arange(azimuthal_res), -1)
    for j in range(azimuthal_res):
        faces.append((0, 1 + j, 1 + nxt[j]))
    for i in range(n_interior - 1):
        base = 1 + i * azimuthal_res
        for j in range(azimuthal_res):
            a = base + j
            b = base + nxt[j]
            c = base + azimuthal_res + nxt[j]
            d = base + azimuthal_res + j
            faces.append((a, b, c))
            faces.append((a, c, d))
    base = 1 + (n_interior - 1) * azimuthal_res
    for j in range(azimuthal_res):
        faces.append((base + j, south, base + nxt[j]))

    return SurfaceMesh(
        rings=rings,
        azimuthal_res=azimuthal_res,
        vertices=vertices,
        faces=np.asarray(faces, dtype=int),
        generatrix_arclength=L * (profile.grid.nodes[-1] - profile.grid.nodes[0]),
        closure_defect=defect,
        warnings=warnings,
    )


def close_profile(profile: WallProfile, tol: float = 1e-13,
                  max_iter: int = 60) -> WallProfile:
    """Adjust the first cosine mode of dphi until the profile closes.

    The k = 1 mode is the only one whose first-order effect on the radial
    closure integral does not vanish, so a Newton iteration on its amplitude
    drives |int cos(phi) dx| to roundoff while leaving the other modes
    untouched.  Raises InvalidProfileError when no closing amplitude is
    found (grossly open profiles).
    """
    g = profile.grid
    mode = np.cos(np.pi * g.shifted)
    dphi = profile.dphi.copy()
    c = 0.0
    for _ in range(max_iter):
        trial = profile.with_dphi(dphi + c * mode)
        defect = float(trial.icos_nodes[-1])
        if abs(defect) <= tol:
            return trial
        # d(defect)/dc = -int sin(phi) * sin(pi x)/pi dx (midpoint rule).
        slope = -float(
            np.sum(np.sin(trial.phi_shifted) * np.sin(np.pi * g.shifted))
            * g.dx / np.pi
        )
        if slope == 0.0:
            break
        c -= defect / slope
    raise InvalidProfileError(
        f"could not close profile: residual defect {defect:.3e} after "
        f"{max_iter} iterations"
    )


def profile_to_csv(profile: WallProfile, path_or_buffer) -> None:
    """Dump the profile on the shifted grid as CSV (x,dphi,phi,r,z)."""
    y = profile.grid.shifted
    rows = np.column_stack([
        y,
        profile.dphi,
        profile.phi_shifted,
        profile.L * profile.icos_shifted,
        profile.L * profile.isin_shifted,
    ])

    def _write(fh):
        fh.write("x,dphi,phi,r,z\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    if hasattr(path_or_buffer, "write"):
        _write(path_or_buffer)
    else:
        with open(path_or_buffer, "w", encoding="ascii") as fh:
            _write(fh)
