"""Pure numpy determinant-path kernel.

Evaluates the dressed N-soliton field from per-point profile values by
batched complex linear algebra.  Semantics are identical to the
compiled kernel in ``_native.pyx``; this module is the reference
implementation and the import-time fallback.
"""

import numpy as np


def nsoliton_points(mus, cs, L, Lt):
    """Dressed field at flat sample points.

    Parameters
    ----------
    mus, cs : complex arrays, shape (N,)
        Pole positions and dressing constants.
    L, Lt : float arrays, shape (npts,)
        Background profile and its conjugate at each point.

    Returns
    -------
    g11, g12, g22 : float64 arrays, shape (npts,)
    max_imag : float
        Largest absolute imaginary residue over all assembled entries.
    """
    mus = np.asarray(mus, dtype=np.complex128)
    cs = np.asarray(cs, dtype=np.complex128)
    L = np.asarray(L, dtype=np.float64)
    Lt = np.asarray(Lt, dtype=np.float64)
    n = mus.size
    npts = L.size

    # per-point pole exponents
    B = (L[:, None] + mus[None, :] * Lt[:, None]) / (mus[None, :] ** 2 - 1)
    D = L[:, None, None] + B[:, :, None] + B[:, None, :]

    # symmetric log-scaling keeps every exponential <= 1 in magnitude;
    # the row/column factors cancel in all assembled ratios
    m = np.max(np.abs(D.real), axis=2)
    half = (m[:, :, None] + m[:, None, :]) / 2
    ep = np.exp(D - half)
    em = np.exp(-D - half)

    mm = mus[None, :, None] * mus[None, None, :]
    cc = cs[None, :, None] * cs[None, None, :]
    denom = mm - 1.0

    mat = (cc * ep + em) / denom
    m00 = (cc * ep + mm * em) / denom
    m33 = (mm * cc * ep + em) / denom

    det_n = np.linalg.det(mat)
    det_00 = np.linalg.det(m00)
    det_33 = np.linalg.det(m33)

    pi = float(np.prod(np.abs(mus)))
    sigma = 1.0 if np.prod(mus).real >= 0 else -1.0

    eL = np.exp(L)
    g11 = eL * det_00 / (pi * det_n)
    g22 = det_33 / (pi * det_n * eL)

    u = cs[None, :] * np.exp(B - m / 2) / mus[None, :]
    v = np.exp(-B - m / 2) / mus[None, :]
    w = np.linalg.solve(mat, u[:, :, None])[:, :, 0]
    g12 = -sigma * pi * np.sum(v * w, axis=1)

    max_imag = max(
        float(np.max(np.abs(g11.imag))),
        float(np.max(np.abs(g12.imag))),
        float(np.max(np.abs(g22.imag))),
    )
    return g11.real.copy(), g12.real.copy(), g22.real.copy(), max_imag
