"""Log-eigenvalue / rotation-angle representation of the field.

A symmetric positive unit-determinant matrix diagonalizes as
g = R(phi) diag(e^L, e^-L) R(phi)^T, so the matrix equation collapses
to two coupled scalar equations for (L, phi), and in barred light-cone
coordinates phi can be eliminated entirely, leaving one scalar PDE for
L with a two-valued sign branch.

The conservation form of the scalar equation and its windowed first
integral use sinh L where a naive substitution into the scalar
equation would suggest coth L: the form below is what actually follows
from the phi-eliminated second equivalent equation, and it is the one
whose discrete residual converges.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolation, SingularLambda
from .fields import SymUnitMatrix
from .numerics import simpson, trimmed_max

DELTA_LAMBDA = 1e-6
CONSTRAINT_SLACK = 1e-10


@dataclass(frozen=True)
class LambdaPhi:
    """Eigenvalue exponent L >= 0 and rotation angle phi in (-pi/2, pi/2]."""

    lam: float
    phi: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if not -np.pi / 2 < self.phi <= np.pi / 2 + 1e-15:
            raise ValueError("phi must lie in (-pi/2, pi/2]")


def decompose(g):
    """(L, phi) of one symmetric unit-determinant matrix.

    phi is conventionally 0 at the identity, where it is unobservable.
    """
    tr_half = (g.g11 + g.g22) / 2
    lam = math.acosh(max(tr_half, 1.0))
    if lam == 0.0:
        return LambdaPhi(0.0, 0.0)
    phi = 0.5 * math.atan2(g.g12, (g.g11 - g.g22) / 2)
    if phi <= -np.pi / 2:
        phi += np.pi
    return LambdaPhi(lam, phi)


def compose(lp):
    ch, sh = math.cosh(lp.lam), math.sinh(lp.lam)
    c2, s2 = math.cos(2 * lp.phi), math.sin(2 * lp.phi)
    return SymUnitMatrix(g11=ch + c2 * sh, g12=s2 * sh, g22=ch - c2 * sh)


def decompose_field(fieldgrid):
    """Arrays (L, phi) over the grid; dtype follows the field."""
    tr_half = (fieldgrid.g11 + fieldgrid.g22) / 2
    lam = np.arccosh(np.maximum(tr_half, 1))
    phi = 0.5 * np.arctan2(fieldgrid.g12, (fieldgrid.g11 - fieldgrid.g22) / 2)
    phi = np.where(lam == 0, 0.0 * phi, phi)
    return lam, phi


def compose_field(lam, phi):
    """(g11, g12, g22) arrays from (L, phi) arrays."""
    ch, sh = np.cosh(lam), np.sinh(lam)
    c2, s2 = np.cos(2 * phi), np.sin(2 * phi)
    return ch + c2 * sh, s2 * sh, ch - c2 * sh


def _unwrap2d(phi):
    # phi is defined mod pi; remove branch jumps before differencing
    out = np.unwrap(phi, axis=0, period=np.pi)
    return np.unwrap(out, axis=1, period=np.pi)


def alt_equations_residual(grid, lam, phi):
    """Residuals of the two equivalent scalar equations

        L_{,zeta eta} - 2 phi_{,zeta} phi_{,eta} sinh 2L = 0
        (phi_{,zeta} sinh^2 L)_{,eta} + (phi_{,eta} sinh^2 L)_{,zeta} = 0
    """
    phi_u = _unwrap2d(phi)
    lz, le = grid.diff_zeta(lam), grid.diff_eta(lam)
    pz, pe = grid.diff_zeta(phi_u), grid.diff_eta(phi_u)
    res1 = grid.diff_eta(lz) - 2 * pz * pe * np.sinh(2 * lam)
    sh2 = np.sinh(lam) ** 2
    res2 = grid.diff_eta(pz * sh2) + grid.diff_zeta(pe * sh2)
    return res1, res2


def det_identities(grid, lam, phi):
    """Predicted current determinants

        det A = -L_{,zeta}^2 - 4 phi_{,zeta}^2 sinh^2 L

    (same with eta for det B); cross-check against compute_ab."""
    phi_u = _unwrap2d(phi)
    sh2 = np.sinh(lam) ** 2
    det_a = -grid.diff_zeta(lam) ** 2 - 4 * grid.diff_zeta(phi_u) ** 2 * sh2
    det_b = -grid.diff_eta(lam) ** 2 - 4 * grid.diff_eta(phi_u) ** 2 * sh2
    return det_a, det_b


def _clipped_root(lam_deriv, name):
    over = np.nanmax(np.abs(lam_deriv)) - 1
    if over > CONSTRAINT_SLACK:
        raise ConstraintViolation(
            f"|{name}| exceeds 1 by {over:.3e}; the unit constraint cannot hold"
        )
    return np.sqrt(np.maximum(1 - lam_deriv**2, 0))


def _require_positive(lam):
    if np.nanmin(lam) <= DELTA_LAMBDA:
        raise SingularLambda(
            "L touches 0 on this window (identity-like field); the "
            "representation is singular there, choose a window away from it"
        )


def phi_elimination(bmap, lam):
    """|phi_{,zeta_bar}| and |phi_{,eta_bar}| from L alone:

        phi_{,zeta_bar} = +- sqrt(1 - L_{,zeta_bar}^2) / (2 sinh L)

    The sign is genuinely two-valued; callers resolve it against data.
    """
    _require_positive(lam)
    lzb = bmap.dzb(lam)
    leb = bmap.deb(lam)
    sh = np.sinh(lam)
    mag_z = _clipped_root(lzb, "L_{,zeta_bar}") / (2 * sh)
    mag_e = _clipped_root(leb, "L_{,eta_bar}") / (2 * sh)
    return mag_z, mag_e


def unit_constraint_residual(bmap, lam, phi):
    """L_{,zeta_bar}^2 + 4 phi_{,zeta_bar}^2 sinh^2 L - 1 (and eta_bar twin)."""
    phi_u = _unwrap2d(phi)
    sh2 = np.sinh(lam) ** 2
    res_z = bmap.dzb(lam) ** 2 + 4 * bmap.dzb(phi_u) ** 2 * sh2 - 1
    res_e = bmap.deb(lam) ** 2 + 4 * bmap.deb(phi_u) ** 2 * sh2 - 1
    return res_z, res_e


@dataclass
class ScalarReport:
    """Scalar-equation residuals on one window.

    ``residual_plus``/``residual_minus`` are the two sign branches of

        L_{,zeta_bar eta_bar} -+ sqrt((1-L_{,zeta_bar}^2)(1-L_{,eta_bar}^2)) coth L

    ``winner`` is the branch whose trimmed max norm is smaller (the sign
    is a coordinate convention and may differ between windows).
    ``conservation_residual`` is the flux form of the same equation and
    ``flux_residual`` its windowed first-integral balance, both built
    with the winning sign."""

    residual_plus: np.ndarray
    residual_minus: np.ndarray
    winner: int
    conservation_residual: np.ndarray
    rows: tuple
    I0: np.ndarray
    dI0_deta_bar: np.ndarray
    flux_diff: np.ndarray
    flux_residual: np.ndarray

    @property
    def residual(self):
        return self.residual_plus if self.winner > 0 else self.residual_minus


def scalar_residual(bmap, lam, frac=0.1):
    """Evaluate both sign branches of the scalar equation plus the
    conservation form and windowed integral balance for the winner."""
    _require_positive(lam)
    lzb = bmap.dzb(lam)
    leb = bmap.deb(lam)
    sq_z = _clipped_root(lzb, "L_{,zeta_bar}")
    sq_e = _clipped_root(leb, "L_{,eta_bar}")
    mixed = bmap.deb(lzb)
    coth = np.cosh(lam) / np.sinh(lam)
    source = sq_z * sq_e * coth
    res_plus = mixed - source
    res_minus = mixed + source
    winner = 1 if trimmed_max(res_plus) <= trimmed_max(res_minus) else -1

    sh = np.sinh(lam)
    dens = winner * sq_z * sh
    flux = sq_e * sh
    cons = bmap.deb(dens) + bmap.dzb(flux)

    grid = bmap.grid
    n0, n1 = grid.shape
    margin = max(3, int(round(frac * (n0 - 1))))
    i0, i1 = margin, n0 - 1 - margin
    if (i1 - i0) % 2 == 1:
        i1 -= 1
    rows = slice(i0, i1 + 1)
    I0 = simpson(dens[rows, :] * bmap.s[rows, :], float(grid.d0), axis=0)
    dI = np.full(n1, np.nan, dtype=I0.dtype)
    dI[1:-1] = (I0[2:] - I0[:-2]) / (2 * float(grid.d1))
    sb_bar = np.full(n1, np.nan, dtype=bmap.sb.dtype)
    sb_bar[1:-1] = np.nanmean(bmap.sb[rows, 1:-1], axis=0)
    dI_bar = dI / sb_bar
    flux_diff = flux[i1, :] - flux[i0, :]
    return ScalarReport(
        residual_plus=res_plus,
        residual_minus=res_minus,
        winner=winner,
        conservation_residual=cons,
        rows=(i0, i1),
        I0=I0,
        dI0_deta_bar=dI_bar,
        flux_diff=flux_diff,
        flux_residual=np.abs(dI_bar + flux_diff),
    )
