"""Diagonal seed solutions and their dressing normalization.

A diagonal solution g0 = diag(exp(L), exp(-L)) of the field equation has
L = F(zeta) + G(eta) (a solution of the linear wave equation).  The
conjugate profile

    Lt = -F(zeta) + G(eta)

satisfies d_eta Lt = d_eta L and d_zeta Lt = -d_zeta L; the additive
constant is fixed to zero so outputs are deterministic.  The two
canonical seeds are

    time-like:   L = t, Lt = -z   (F = zeta,  G = -eta)
    space-like:  L = z, Lt = -t   (F = zeta,  G = eta)
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, Overflow, SpectralPole

EXP_LIMIT = 700.0


@dataclass(frozen=True)
class Background:
    """Diagonal background defined by wave-equation profiles F, G.

    ``dF``/``dG`` are analytic derivatives supplied by the caller; no
    numerical differentiation of the profiles is ever performed, which
    keeps the soliton formulas exact.  All callables must be pure (they
    may be invoked concurrently and on arrays).
    """

    kind: str
    F: Callable
    G: Callable
    dF: Callable
    dG: Callable

    def eval(self, zeta, eta):
        """Return the pair (L, Lt) at the given light-cone coordinates."""
        f = self.F(np.asarray(zeta))
        g = self.G(np.asarray(eta))
        return f + g, -f + g

    def eval_tz(self, t, z):
        zeta, eta = (np.asarray(z) + np.asarray(t)) / 2, (np.asarray(z) - np.asarray(t)) / 2
        return self.eval(zeta, eta)

    def gradients(self, zeta, eta):
        """((dL/dzeta, dL/deta), (dLt/dzeta, dLt/deta)) from the analytic profiles."""
        df = self.dF(np.asarray(zeta))
        dg = self.dG(np.asarray(eta))
        return (df, dg), (-df, dg)

    def classify(self, zeta, eta):
        """Per-point causal character of L: its gradient satisfies
        (d_t L)^2 - (d_z L)^2 = -4 F'(zeta) G'(eta)."""
        df = self.dF(np.asarray(zeta))
        dg = self.dG(np.asarray(eta))
        return np.where(df * dg < 0, "timelike", "spacelike")

    def matrix(self, zeta, eta):
        """g0 = diag(exp(L), exp(-L)) componentwise."""
        L, _ = self.eval(zeta, eta)
        if np.any(np.abs(L) > EXP_LIMIT):
            raise Overflow(
                "background profile exceeds the exp range (|L| > 700); "
                "shrink the grid window"
            )
        e = np.exp(L)
        return e, np.zeros_like(e), 1.0 / e

    def diagonal_psi(self, zeta, eta, lam):
        """Diagonal dressing solution of the linear system

            psi_{,zeta} = A0 / (lam - 1) psi,  psi_{,eta} = B0 / (lam + 1) psi

        for the background currents A0 = -g0_{,zeta} g0^{-1},
        B0 = g0_{,eta} g0^{-1}:

            psi = diag(exp(-w), exp(+w)),  w = (L - lam * Lt) / (lam^2 - 1)

        Normalized so that psi(lam=0) = g0.
        """
        lam = float(lam)
        denom = lam * lam - 1.0
        if abs(denom) < 1e-12:
            raise SpectralPole(f"spectral parameter too close to a pole: lam={lam}")
        L, Lt = self.eval(zeta, eta)
        w = (L - lam * Lt) / denom
        if np.any(np.abs(w) > EXP_LIMIT):
            raise Overflow("dressing exponent exceeds the exp range")
        e = np.exp(w)
        return 1.0 / e, e


def timelike():
    """Seed with L = t (superluminal solitons)."""
    return Background(
        "timelike",
        F=lambda zeta: zeta,
        G=lambda eta: -eta,
        dF=lambda zeta: np.ones_like(np.asarray(zeta, dtype=float)),
        dG=lambda eta: -np.ones_like(np.asarray(eta, dtype=float)),
    )


def spacelike():
    """Seed with L = z (subluminal solitons)."""
    return Background(
        "spacelike",
        F=lambda zeta: zeta,
        G=lambda eta: eta,
        dF=lambda zeta: np.ones_like(np.asarray(zeta, dtype=float)),
        dG=lambda eta: np.ones_like(np.asarray(eta, dtype=float)),
    )


def custom(F, G, dF, dG):
    """User-defined profiles with analytic derivatives."""
    return Background("custom", F=F, G=G, dF=dF, dG=dG)


def flat():
    """Identity background (L = Lt = 0)."""
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    return Background("flat", F=zero, G=zero, dF=zero, dG=zero)


def by_name(name):
    name = name.strip().lower()
    if name == "timelike":
        return timelike()
    if name == "spacelike":
        return spacelike()
    if name == "flat":
        return flat()
    raise ConfigError(f"unknown background kind {name!r}")
