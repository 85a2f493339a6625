"""Conserved-density hierarchy of the field equation.

Pipeline: currents A = -g_{,zeta} g^{-1}, B = g_{,eta} g^{-1}; barred
coordinates d(zeta_bar) = sqrt(-det A) d(zeta), d(eta_bar) =
sqrt(-det B) d(eta); scaled currents with det = -1; then the series
coefficients P_n, Q_n of the spectral conservation law and their
windowed integrals.

Barred derivatives are taken by the exact chain rule on the original
uniform grid: d/d(zeta_bar) = (1/s) d/d(zeta) with s = sqrt(-det A)
pointwise.  (Resampling field values onto a uniform barred grid with a
shape-preserving interpolant loses accuracy near extrema, and the P_n
recursion amplifies that noise through nested derivatives; the chain
rule keeps every level second order.)

The recursion multiplies finite-difference roundoff by ~1/h per order,
so hierarchy work should run on long-double fields (build the FieldGrid
with dtype=numpy.longdouble) when orders n >= 2 are differenced on fine
grids.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DegenerateField, SingularMatrix
from .fields import FieldGrid, LightconePoint
from .numerics import MonotoneCubic, cumulative_simpson, simpson

EPS_DEGENERATE = 1e-6
A12_FLOOR = 1e-8


@dataclass
class ABPair:
    """Current matrices on the grid; component arrays indexed [i, j]['11'...]."""

    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    B11: np.ndarray
    B12: np.ndarray
    B21: np.ndarray
    B22: np.ndarray

    def det_a(self):
        return self.A11 * self.A22 - self.A12 * self.A21

    def det_b(self):
        return self.B11 * self.B22 - self.B12 * self.B21

    def trace_a(self):
        return self.A11 + self.A22

    def trace_b(self):
        return self.B11 + self.B22


def compute_ab(fieldgrid):
    """A = -g_{,zeta} g^{-1} and B = g_{,eta} g^{-1} by central differences."""
    det = fieldgrid.det()
    if not np.all(np.isfinite(det)) or np.max(np.abs(det - 1)) > 1e-6:
        raise SingularMatrix("field determinant deviates from 1 beyond 1e-6")
    grid = fieldgrid.grid
    g11, g12, g22 = fieldgrid.g11, fieldgrid.g12, fieldgrid.g22
    i11, i12, i22 = fieldgrid.inverse()

    dz11, dz12, dz22 = grid.diff_zeta(g11), grid.diff_zeta(g12), grid.diff_zeta(g22)
    de11, de12, de22 = grid.diff_eta(g11), grid.diff_eta(g12), grid.diff_eta(g22)

    return ABPair(
        A11=-(dz11 * i11 + dz12 * i12),
        A12=-(dz11 * i12 + dz12 * i22),
        A21=-(dz12 * i11 + dz22 * i12),
        A22=-(dz12 * i12 + dz22 * i22),
        B11=de11 * i11 + de12 * i12,
        B12=de11 * i12 + de12 * i22,
        B21=de12 * i11 + de22 * i12,
        B22=de12 * i12 + de22 * i22,
    )


@dataclass
class BarredMap:
    """Coordinate rescaling and scaled currents.

    ``s`` and ``sb`` are the pointwise stretch factors sqrt(-det A),
    sqrt(-det B); the tabulated monotone-cubic maps are built from their
    cross-axis averages (det A depends on zeta only up to O(h^2); the
    measured cross deviation is kept as a diagnostic).
    """

    grid: object
    ab: ABPair
    s: np.ndarray
    sb: np.ndarray
    zeta_map: MonotoneCubic
    eta_map: MonotoneCubic
    cross_dev_zeta: float
    cross_dev_eta: float
    det_res_a: float = dc_field(init=False)
    det_res_b: float = dc_field(init=False)

    def __post_init__(self):
        ab, s, sb = self.ab, self.s, self.sb
        det_ab = (ab.A11 / s) * (ab.A22 / s) - (ab.A12 / s) * (ab.A21 / s)
        det_bb = (ab.B11 / sb) * (ab.B22 / sb) - (ab.B12 / sb) * (ab.B21 / sb)
        self.det_res_a = float(np.nanmax(np.abs(det_ab + 1)))
        self.det_res_b = float(np.nanmax(np.abs(det_bb + 1)))

    def dzb(self, f):
        """d/d(zeta_bar) by chain rule on the original grid."""
        return self.grid.diff_zeta(f) / self.s

    def deb(self, f):
        """d/d(eta_bar) by chain rule on the original grid."""
        return self.grid.diff_eta(f) / self.sb

    def scaled(self):
        """(Ab11, Ab12, Bb11, Bb12): the scaled-current entries the series uses."""
        ab = self.ab
        return ab.A11 / self.s, ab.A12 / self.s, ab.B11 / self.sb, ab.B12 / self.sb


def barred_map(fieldgrid, ab=None):
    """Build the barred-coordinate maps; degenerate fields are rejected."""
    grid = fieldgrid.grid
    if grid.mode != "lightcone":
        raise ValueError(
            "the hierarchy runs on lightcone-mode grids (rectangular "
            "windows in zeta, eta)"
        )
    if ab is None:
        ab = compute_ab(fieldgrid)
    neg_det_a = -ab.det_a()
    neg_det_b = -ab.det_b()
    if np.nanmin(neg_det_a) < EPS_DEGENERATE**2 or np.nanmin(neg_det_b) < EPS_DEGENERATE**2:
        raise DegenerateField(
            "-det A or -det B falls below the degeneracy floor; the "
            "coordinate rescaling is not invertible on this window"
        )
    s = np.sqrt(neg_det_a)
    sb = np.sqrt(neg_det_b)

    # det A is a zeta-only function on solutions; average over eta
    n0, n1 = grid.shape
    s_line = np.full(n0, np.nan, dtype=s.dtype)
    s_line[1:-1] = np.nanmean(s[1:-1, 1:-1], axis=1)
    sb_line = np.full(n1, np.nan, dtype=sb.dtype)
    sb_line[1:-1] = np.nanmean(sb[1:-1, 1:-1], axis=0)
    dev_z = float(np.nanmax(np.abs(s[1:-1, 1:-1] - s_line[1:-1, None])))
    dev_e = float(np.nanmax(np.abs(sb[1:-1, 1:-1] - sb_line[None, 1:-1])))

    # NaN stencil margins: extend the averaged integrand constantly
    s_fill = s_line.copy()
    s_fill[0], s_fill[-1] = s_line[1], s_line[-2]
    sb_fill = sb_line.copy()
    sb_fill[0], sb_fill[-1] = sb_line[1], sb_line[-2]

    zeta_vals = cumulative_simpson(s_fill.astype(float), float(grid.d0))
    eta_vals = cumulative_simpson(sb_fill.astype(float), float(grid.d1))
    zeta_map = MonotoneCubic(np.asarray(grid.axis0, dtype=float), zeta_vals)
    eta_map = MonotoneCubic(np.asarray(grid.axis1, dtype=float), eta_vals)
    return BarredMap(
        grid=grid,
        ab=ab,
        s=s,
        sb=sb,
        zeta_map=zeta_map,
        eta_map=eta_map,
        cross_dev_zeta=dev_z,
        cross_dev_eta=dev_e,
    )


@dataclass
class ConservedHierarchy:
    """Series coefficients P_{-1}..P_{n_max} and Q_0..Q_{n_max}."""

    n_max: int
    P: dict
    Q: dict
    r: np.ndarray
    a: np.ndarray

    def conservation_residual(self, bmap, n):
        """Pointwise residual of d P_n / d(eta_bar) = d Q_n / d(zeta_bar)."""
        return bmap.deb(self.P[n]) - bmap.dzb(self.Q[n])


def _check_offdiag(ab12_scaled):
    if np.nanmin(np.abs(ab12_scaled)) < A12_FLOOR:
        raise DegenerateField(
            "scaled off-diagonal entry |A12| dips below 1e-8: the series "
            "denominators degenerate (diagonal-field case)"
        )


def p_series(fieldgrid, bmap, n_max):
    """P_{-1} = 1, P_0 = (r + a)/2, then the quadratic recursion

        P_{n+1} = [r P_n - dP_n/d(zeta_bar) - sum_k P_k P_{n-k}] / 2

    with r = (d Ab12 / d zeta_bar)/Ab12 and a = Ab12 d(Ab11/Ab12)/d(zeta_bar).
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    ab11, ab12, _, _ = bmap.scaled()
    _check_offdiag(ab12)
    r = bmap.dzb(ab12) / ab12
    a = ab12 * bmap.dzb(ab11 / ab12)
    P = {-1: np.ones_like(ab12), 0: (r + a) / 2}
    for n in range(n_max):
        conv = sum(P[k] * P[n - k] for k in range(n + 1))
        P[n + 1] = (r * P[n] - bmap.dzb(P[n]) - conv) / 2
    return ConservedHierarchy(n_max=n_max, P=P, Q={}, r=r, a=a)


def q_series(fieldgrid, bmap, hierarchy):
    """Q_n from the scaled currents and lower P's (empty sum at n = 0)."""
    ab11, ab12, bb11, bb12 = bmap.scaled()
    _check_offdiag(ab12)
    base = bb11 - (ab11 - 1) * bb12 / ab12
    ratio = bb12 / ab12
    for n in range(hierarchy.n_max + 1):
        acc = 0
        for k in range(n):
            acc = acc + (-0.5) ** k * hierarchy.P[n - 1 - k]
        hierarchy.Q[n] = ((-0.5) ** n * base + ratio * acc) / 2
    return hierarchy


@dataclass(frozen=True)
class PQPoint:
    """Truncated series values at one grid point and spectral parameter."""

    P: float
    Q: float
    Q_from_P: float
    lam: float

    @property
    def q_consistency(self):
        return abs(self.Q - self.Q_from_P)


def _nearest_index(grid, point):
    i = int(np.argmin(np.abs(np.asarray(grid.axis0, dtype=float) - point.zeta)))
    j = int(np.argmin(np.abs(np.asarray(grid.axis1, dtype=float) - point.eta)))
    return i, j


def pq_eval(fieldgrid, bmap, point, lam, n_max, hierarchy=None):
    """Sum the truncated Laurent/Taylor series for P and Q at a point.

    Q is evaluated twice: from its own series and from the linear
    relation Q = (Bb11 - Ab11 Bb12/Ab12)/(lam+1)
                 + (lam-1)/(lam+1) (Bb12/Ab12) P,
    giving a truncation-consistency diagnostic.
    """
    if not 0 < abs(lam - 1) < 1:
        raise ValueError("series truncation needs 0 < |lam - 1| < 1")
    if hierarchy is None:
        hierarchy = q_series(fieldgrid, bmap, p_series(fieldgrid, bmap, n_max))
    if isinstance(point, tuple):
        point = LightconePoint(*point)
    i, j = _nearest_index(bmap.grid, point)
    eps = lam - 1
    p_val = 1 / eps
    for n in range(n_max + 1):
        p_val = p_val + hierarchy.P[n][i, j] * eps**n
    q_val = sum(hierarchy.Q[n][i, j] * eps**n for n in range(n_max + 1))
    ab11, ab12, bb11, bb12 = bmap.scaled()
    q_lin = (bb11[i, j] - ab11[i, j] * bb12[i, j] / ab12[i, j]) / (lam + 1) + (
        lam - 1
    ) / (lam + 1) * (bb12[i, j] / ab12[i, j]) * p_val
    return PQPoint(P=float(p_val), Q=float(q_val), Q_from_P=float(q_lin), lam=lam)


def riccati_residual(fieldgrid, bmap, lam, n_max, hierarchy=None):
    """Residual of the spectral Riccati equation

        dP/d(zeta_bar) = [a + 1/(lam-1)]/(lam-1) + r P - P^2

    for the series truncated at order n_max.  The terms cancel exactly
    through (lam-1)^(n_max - 1); the remainder is O((lam-1)^n_max) at
    fixed grid spacing.
    """
    if hierarchy is None:
        hierarchy = p_series(fieldgrid, bmap, n_max)
    eps = lam - 1
    if not 0 < abs(eps) < 1:
        raise ValueError("series truncation needs 0 < |lam - 1| < 1")
    ptr = 1 / eps + sum(hierarchy.P[n] * eps**n for n in range(n_max + 1))
    return bmap.dzb(ptr) - (hierarchy.a + 1 / eps) / eps - hierarchy.r * ptr + ptr**2


@dataclass
class IntegralReport:
    """Windowed integrals of motion and their flux balance.

    I[n] is the Simpson quadrature of P_n over the zeta window per eta
    slice (d zeta_bar = s d zeta); flux_residual[n] is
    |dI_n/d(eta_bar) - (Q_n(b) - Q_n(a))| per interior eta slice.
    explicit[k] holds the directly-quadratured closed integrands
    (k = 0, 1, 2) whose difference from I[k] is boundary-term sized
    (reported, not asserted)."""

    rows: tuple
    zeta_window: tuple
    zeta_bar_window: tuple
    I: dict
    dI_deta_bar: dict
    flux: dict
    flux_residual: dict
    explicit: dict
    explicit_dev: dict


def integrals(fieldgrid, bmap, hierarchy, frac=0.1):
    """Windowed flux-balance report for every computed order.

    The zeta window is a fixed interior fraction of the grid (at least
    the stencil margin for the deepest order, odd row count for
    Simpson); the identity dI_n/d(eta_bar) = Q_n(b) - Q_n(a) is exact
    for the continuum law, so its discrete residual converges at the
    stencil order on solution fields.
    """
    grid = bmap.grid
    n0, n1 = grid.shape
    margin = max(hierarchy.n_max + 2, 4, int(round(frac * (n0 - 1))))
    i0, i1 = margin, n0 - 1 - margin
    if (i1 - i0) % 2 == 1:
        i1 -= 1
    if i1 - i0 < 2:
        raise ValueError("window too small for the requested orders")
    rows = slice(i0, i1 + 1)
    dz = float(grid.d0)
    s_win = bmap.s[rows, :]
    sb_bar = np.full(n1, np.nan, dtype=bmap.sb.dtype)
    sb_bar[1:-1] = np.nanmean(bmap.sb[rows, 1:-1], axis=0)

    za = float(bmap.zeta_map(float(grid.axis0[i0])))
    zb = float(bmap.zeta_map(float(grid.axis0[i1])))

    report = IntegralReport(
        rows=(i0, i1),
        zeta_window=(float(grid.axis0[i0]), float(grid.axis0[i1])),
        zeta_bar_window=(za, zb),
        I={},
        dI_deta_bar={},
        flux={},
        flux_residual={},
        explicit={},
        explicit_dev={},
    )

    for n in sorted(hierarchy.P):
        integrand = hierarchy.P[n][rows, :] * s_win
        I_n = simpson(integrand, dz, axis=0)
        report.I[n] = I_n
        dI = np.full(n1, np.nan, dtype=I_n.dtype)
        dI[1:-1] = (I_n[2:] - I_n[:-2]) / (2 * float(grid.d1))
        dI_bar = dI / sb_bar
        report.dI_deta_bar[n] = dI_bar
        if n in hierarchy.Q:
            flux = hierarchy.Q[n][i1, :] - hierarchy.Q[n][i0, :]
            report.flux[n] = flux
            report.flux_residual[n] = np.abs(dI_bar - flux)

    # closed-form quadratures of the first three integrands (diagnostic:
    # they differ from the recursion path by finite-window boundary terms)
    ab11, ab12, _, _ = bmap.scaled()
    r, a = hierarchy.r, hierarchy.a
    d_ab12 = bmap.dzb(ab12)
    q = a / ab12
    explicit_integrands = {
        0: a / 2,
        1: (r**2 - a**2) / 8,
        2: (
            -1.5 * d_ab12**2 / ab12
            + 0.5 * ab12**3 * q**2
            + bmap.dzb(d_ab12)
            + ab12 * bmap.dzb(ab12 * q)
        )
        * q
        / 8,
    }
    for k, integrand in explicit_integrands.items():
        if k > hierarchy.n_max:
            continue
        vals = simpson(integrand[rows, :] * s_win, dz, axis=0)
        report.explicit[k] = vals
        report.explicit_dev[k] = float(np.nanmax(np.abs(vals - report.I[k])))
    return report
