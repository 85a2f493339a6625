"""Field containers and the governing-equation residual.

Light-cone convention used throughout the package:

    zeta = (z + t) / 2,   eta = (z - t) / 2
    t = zeta - eta,       z = zeta + eta
    d_zeta = d_t + d_z,   d_eta = d_z - d_t

The field g is real, symmetric, 2x2, with det g = 1 and positive
diagonal (the branch connected to the identity).  The governing
equation is

    (g_{,zeta} g^{-1})_{,eta} + (g_{,eta} g^{-1})_{,zeta} = 0
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularMatrix, TooFewPoints
from .numerics import central_diff


def to_lightcone(t, z):
    """(t, z) -> (zeta, eta)."""
    t = np.asarray(t)
    z = np.asarray(z)
    return (z + t) / 2, (z - t) / 2


def from_lightcone(zeta, eta):
    """(zeta, eta) -> (t, z)."""
    zeta = np.asarray(zeta)
    eta = np.asarray(eta)
    return zeta - eta, zeta + eta


@dataclass(frozen=True)
class LightconePoint:
    zeta: float
    eta: float

    @classmethod
    def from_tz(cls, t, z):
        zeta, eta = to_lightcone(t, z)
        return cls(float(zeta), float(eta))

    @property
    def t(self):
        return self.zeta - self.eta

    @property
    def z(self):
        return self.zeta + self.eta


class Grid:
    """Uniform 2D sample grid.

    Two parameterizations are supported and expose the same derivative
    interface:

    * ``Grid.lab(...)``: axis 0 is t, axis 1 is z (row-major, i_t outer,
      i_z inner).  Light-cone derivatives come from the chain rule.
    * ``Grid.lightcone(...)``: axis 0 is zeta, axis 1 is eta.  Light-cone
      derivatives are direct axis differences; windows that are
      rectangles in (zeta, eta) stay rectangles.

    Both run second-order central differences with NaN boundary margins.
    """

    def __init__(self, axis0, axis1, mode, dtype=np.float64):
        axis0 = np.asarray(axis0, dtype=dtype)
        axis1 = np.asarray(axis1, dtype=dtype)
        if axis0.size < 3 or axis1.size < 3:
            raise TooFewPoints("grids need at least 3 points per axis")
        if mode not in ("lab", "lightcone"):
            raise ValueError(f"unknown grid mode {mode!r}")
        self.mode = mode
        self.dtype = dtype
        self.axis0 = axis0
        self.axis1 = axis1
        self.d0 = dtype(axis0[1] - axis0[0])
        self.d1 = dtype(axis1[1] - axis1[0])
        u = axis0[:, None]
        v = axis1[None, :]
        if mode == "lab":
            self.t = np.broadcast_to(u, self.shape)
            self.z = np.broadcast_to(v, self.shape)
            self.zeta, self.eta = to_lightcone(self.t, self.z)
        else:
            self.zeta = np.broadcast_to(u, self.shape)
            self.eta = np.broadcast_to(v, self.shape)
            self.t, self.z = from_lightcone(self.zeta, self.eta)

    @classmethod
    def lab(cls, t_min, t_max, n_t, z_min, z_max, n_z, dtype=np.float64):
        return cls(
            np.linspace(t_min, t_max, n_t, dtype=dtype),
            np.linspace(z_min, z_max, n_z, dtype=dtype),
            "lab",
            dtype,
        )

    @classmethod
    def lightcone(cls, zeta_min, zeta_max, n_zeta, eta_min, eta_max, n_eta,
                  dtype=np.float64):
        return cls(
            np.linspace(zeta_min, zeta_max, n_zeta, dtype=dtype),
            np.linspace(eta_min, eta_max, n_eta, dtype=dtype),
            "lightcone",
            dtype,
        )

    @property
    def shape(self):
        return (self.axis0.size, self.axis1.size)

    def diff0(self, f):
        return central_diff(f, self.d0, axis=0)

    def diff1(self, f):
        return central_diff(f, self.d1, axis=1)

    def diff_zeta(self, f):
        if self.mode == "lightcone":
            return self.diff0(f)
        return self.diff0(f) + self.diff1(f)

    def diff_eta(self, f):
        if self.mode == "lightcone":
            return self.diff1(f)
        return self.diff1(f) - self.diff0(f)

    def diff_t(self, f):
        if self.mode == "lab":
            return self.diff0(f)
        return (self.diff0(f) - self.diff1(f)) / 2

    def diff_z(self, f):
        if self.mode == "lab":
            return self.diff1(f)
        return (self.diff0(f) + self.diff1(f)) / 2


@dataclass(frozen=True)
class SymUnitMatrix:
    """Symmetric positive-branch matrix with unit determinant at a point."""

    g11: float
    g12: float
    g22: float

    def __post_init__(self):
        if not (self.g11 > 0 and self.g22 > 0):
            raise SingularMatrix("diagonal entries must be positive")

    @property
    def det(self):
        return self.g11 * self.g22 - self.g12 * self.g12

    def as_array(self):
        return np.array([[self.g11, self.g12], [self.g12, self.g22]])


@dataclass(frozen=True)
class HyperboloidPoint:
    """Embedding coordinates: T^2 - X^2 - Y^2 = det g = 1."""

    T: float
    X: float
    Y: float

    @property
    def constraint(self):
        return self.T**2 - self.X**2 - self.Y**2 - 1.0


@dataclass
class FieldGrid:
    """Field samples on a :class:`Grid` (three independent components)."""

    grid: Grid
    g11: np.ndarray = field(repr=False)
    g12: np.ndarray = field(repr=False)
    g22: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("g11", "g12", "g22"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != self.grid.shape:
                raise ValueError(f"{name} shape {arr.shape} != grid {self.grid.shape}")
            setattr(self, name, arr)

    def det(self):
        return self.g11 * self.g22 - self.g12 * self.g12

    def inverse(self):
        """Adjugate inverse; exact for det = 1 fields."""
        return self.g22, -self.g12, self.g11

    def at(self, i, j):
        return SymUnitMatrix(
            float(self.g11[i, j]), float(self.g12[i, j]), float(self.g22[i, j])
        )


def to_hyperboloid(fieldgrid):
    """Map g to the hyperboloid chart (T, X, Y) = ((g11+g22)/2, (g11-g22)/2, g12)."""
    T = (fieldgrid.g11 + fieldgrid.g22) / 2
    X = (fieldgrid.g11 - fieldgrid.g22) / 2
    Y = fieldgrid.g12
    return T, X, Y


def hyperboloid_constraint(fieldgrid):
    """T^2 - X^2 - Y^2 - 1 pointwise (equals det g - 1 algebraically)."""
    T, X, Y = to_hyperboloid(fieldgrid)
    return T**2 - X**2 - Y**2 - 1


def _current_pair(fieldgrid, diff):
    """The 2x2 current M = (diff g) g^{-1} componentwise, adjugate inverse."""
    g11, g12, g22 = fieldgrid.g11, fieldgrid.g12, fieldgrid.g22
    i11, i12, i22 = fieldgrid.inverse()
    d11 = diff(g11)
    d12 = diff(g12)
    d22 = diff(g22)
    m11 = d11 * i11 + d12 * i12
    m12 = d11 * i12 + d12 * i22
    m21 = d12 * i11 + d22 * i12
    m22 = d12 * i12 + d22 * i22
    return m11, m12, m21, m22


def pde_residual(fieldgrid):
    """Pointwise residual of the field equation, max abs over components.

    Residual = (g_{,zeta} g^{-1})_{,eta} + (g_{,eta} g^{-1})_{,zeta},
    all derivatives second-order central; two NaN margin cells.
    """
    det = fieldgrid.det()
    if not np.all(np.isfinite(det)) or np.nanmax(np.abs(det - 1)) > 1e-6:
        raise SingularMatrix("field determinant deviates from 1 beyond 1e-6")
    grid = fieldgrid.grid
    mz = _current_pair(fieldgrid, grid.diff_zeta)
    me = _current_pair(fieldgrid, grid.diff_eta)
    res = None
    for a, b in zip(mz, me):
        comp = np.abs(grid.diff_eta(a) + grid.diff_zeta(b))
        res = comp if res is None else np.maximum(res, comp)
    return res
