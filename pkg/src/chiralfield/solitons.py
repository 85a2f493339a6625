"""Exact N-soliton solutions on diagonal backgrounds.

Three evaluation paths:

* ``one_soliton`` / ``two_soliton``: closed hyperbolic forms for real
  poles with positive constants.  dtype-generic (long-double capable).
* ``n_soliton``: the general determinant path (complex poles in
  conjugate pairs allowed), evaluated by the selected kernel.

The two paths are algebraically equivalent where both apply; the test
suite enforces agreement to 1e-9, so each serves as the other's oracle.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .background import EXP_LIMIT
from .errors import DegeneratePair, InvalidPole, NoCrest, NonRealOutput, Overflow
from .fields import FieldGrid

_TOL = 1e-9


@dataclass(frozen=True)
class SolitonConfig:
    """Pole positions mu_s and dressing constants C_s."""

    poles: tuple
    constants: tuple

    def __init__(self, poles, constants):
        object.__setattr__(self, "poles", tuple(complex(m) for m in poles))
        object.__setattr__(self, "constants", tuple(complex(c) for c in constants))
        self.validate()

    @property
    def n(self):
        return len(self.poles)

    @property
    def is_real(self):
        return all(m.imag == 0 for m in self.poles) and all(
            c.imag == 0 for c in self.constants
        )

    def validate(self):
        if len(self.poles) != len(self.constants):
            raise InvalidPole("need one constant per pole")
        for m in self.poles:
            if abs(m) < _TOL or abs(abs(m) - 1) < _TOL:
                raise InvalidPole(f"|mu| must avoid 0 and 1, got mu={m}")
        for c in self.constants:
            if c == 0:
                raise InvalidPole("constants must be nonzero")
        for s, ms in enumerate(self.poles):
            for mt in self.poles[s:]:
                if abs(ms * mt - 1) < _TOL:
                    raise InvalidPole(
                        f"pole pair product too close to 1: {ms} * {mt}"
                    )
        # conjugation closure with matched constants keeps the field real
        unused = list(range(self.n))
        for s in range(self.n):
            if s not in unused:
                continue
            m, c = self.poles[s], self.constants[s]
            if m.imag == 0 and c.imag == 0:
                unused.remove(s)
                continue
            partner = None
            for t in unused:
                if t == s:
                    continue
                if (
                    abs(self.poles[t] - m.conjugate()) < 1e-12
                    and abs(self.constants[t] - c.conjugate()) < 1e-12
                ):
                    partner = t
                    break
            if partner is None:
                raise InvalidPole(
                    f"pole {m} (C={c}) lacks a conjugate partner; "
                    "the field would not be real"
                )
            unused.remove(s)
            unused.remove(partner)

    def require_real(self, op):
        if not self.is_real:
            raise InvalidPole(f"{op} requires real poles and constants")
        if any(c.real <= 0 for c in self.constants):
            raise InvalidPole(
                f"{op} requires positive constants (K = ln C); "
                "use n_soliton for C < 0"
            )

    def permuted(self, order):
        return SolitonConfig(
            [self.poles[i] for i in order], [self.constants[i] for i in order]
        )

    @classmethod
    def parse(cls, text):
        """Parse 'mu=-2,C=1;mu=3,C=2' (complex via 'a+bj')."""
        text = text.strip()
        if not text:
            return cls([], [])
        poles, constants = [], []
        for item in text.split(";"):
            entry = {}
            for part in item.split(","):
                if "=" not in part:
                    raise InvalidPole(f"malformed soliton entry {item!r}")
                key, val = part.split("=", 1)
                key = key.strip().lower()
                try:
                    entry[key] = complex(val.strip().replace("i", "j"))
                except ValueError as exc:
                    raise InvalidPole(f"bad number in {item!r}: {exc}") from exc
            if set(entry) != {"mu", "c"}:
                raise InvalidPole(f"entry {item!r} must set exactly mu and C")
            poles.append(entry["mu"])
            constants.append(entry["c"])
        return cls(poles, constants)

    def describe(self):
        def fmt(x):
            return f"{x.real:g}" if x.imag == 0 else f"{x.real:g}{x.imag:+g}j"

        return ";".join(
            f"mu={fmt(m)},C={fmt(c)}" for m, c in zip(self.poles, self.constants)
        )


@dataclass
class SolitonFrame:
    """Per-soliton phase data at sample points (real-pole path).

    B[s], gamma[s], D[s, t] broadcast over the trailing point shape;
    gamma_s = ln C_s + L + 2 B_s, gamma_tilde_s = -ln|mu_s|,
    D_st = L + B_s + B_t, Pi = prod |mu_s|.
    """

    B: np.ndarray
    gamma: np.ndarray
    gamma_tilde: np.ndarray
    D: np.ndarray
    Pi: float


def soliton_frame(cfg, bg, zeta, eta):
    cfg.require_real("soliton_frame")
    zeta = np.asarray(zeta)
    eta = np.asarray(eta)
    dtype = zeta.dtype if zeta.dtype.kind == "f" else np.float64
    L, Lt = bg.eval(zeta, eta)
    L = np.asarray(L, dtype=dtype)
    Lt = np.asarray(Lt, dtype=dtype)
    n = cfg.n
    B = np.empty((n,) + L.shape, dtype=dtype)
    gamma = np.empty_like(B)
    gtil = np.empty(n, dtype=dtype)
    for s, (m, c) in enumerate(zip(cfg.poles, cfg.constants)):
        mu = np.asarray(m.real, dtype=dtype)
        B[s] = (L + mu * Lt) / (mu * mu - 1)
        gamma[s] = np.log(np.abs(np.asarray(c.real, dtype=dtype))) + L + 2 * B[s]
        gtil[s] = -np.log(np.abs(mu))
    D = L[None, None] + B[:, None] + B[None, :]
    Pi = float(np.prod([abs(m) for m in cfg.poles]))
    return SolitonFrame(B=B, gamma=gamma, gamma_tilde=gtil, D=D, Pi=Pi)


def _cosh_ratio(gamma, delta):
    """cosh(gamma + delta) / cosh(gamma), overflow-safe for large |gamma|."""
    sign = np.where(gamma >= 0, 1.0, -1.0).astype(gamma.dtype)
    u = np.exp(-2 * np.abs(gamma))
    ed = np.exp(sign * delta)
    return (ed + u / ed) / (1 + u)


def _sech(gamma):
    u = np.exp(-np.abs(gamma))
    return 2 * u / (1 + u * u)


def one_soliton(cfg, bg, zeta, eta):
    """Closed-form single soliton; returns (g11, g12, g22)."""
    if cfg.n != 1:
        raise InvalidPole(f"one_soliton needs exactly one pole, got {cfg.n}")
    cfg.require_real("one_soliton")
    frame = soliton_frame(cfg, bg, zeta, eta)
    L, _ = bg.eval(np.asarray(zeta), np.asarray(eta))
    L = np.asarray(L, dtype=frame.B.dtype)
    if np.any(np.abs(L) > EXP_LIMIT):
        raise Overflow("background exponent out of range on this window")
    mu = cfg.poles[0].real
    gamma = frame.gamma[0]
    gtil = frame.gamma_tilde[0]
    g11 = np.exp(L) * _cosh_ratio(gamma, gtil)
    g22 = np.exp(-L) * _cosh_ratio(gamma, -gtil)
    g12 = (1 - mu * mu) / (2 * mu) * _sech(gamma)
    return g11, g12, g22


def two_soliton(cfg, bg, zeta, eta):
    """Closed-form two-soliton field; returns (g11, g12, g22).

    Written in explicitly exponential form with a joint scale factor
    exp(-|gamma_1| - |gamma_2|) on numerator and denominator, which keeps
    every term bounded and is exact for either sign of mu_1 mu_2.
    """
    if cfg.n != 2:
        raise InvalidPole(f"two_soliton needs exactly two poles, got {cfg.n}")
    cfg.require_real("two_soliton")
    m1 = cfg.poles[0].real
    m2 = cfg.poles[1].real
    if abs(m1 - m2) < 1e-12:
        raise DegeneratePair("equal poles: the two-soliton form degenerates")
    frame = soliton_frame(cfg, bg, zeta, eta)
    L, _ = bg.eval(np.asarray(zeta), np.asarray(eta))
    L = np.asarray(L, dtype=frame.B.dtype)
    if np.any(np.abs(L) > EXP_LIMIT):
        raise Overflow("background exponent out of range on this window")
    g1 = frame.gamma[0]
    g2 = frame.gamma[1]
    a = np.abs(g1) + np.abs(g2)

    ep = np.exp(g1 + g2 - a)
    em = np.exp(-g1 - g2 - a)
    e12 = np.exp(g1 - g2 - a)
    e21 = np.exp(g2 - g1 - a)
    one = np.exp(-a)

    dmm = (m1 - m2) ** 2
    dmu = (m1 * m2 - 1) ** 2
    sq = m1 * m1 * m2 * m2
    cross = 2 * m1 * m2 * (m1 * m1 - 1) * (m2 * m2 - 1)
    pi = abs(m1 * m2)

    den = (dmm * (ep + em + 2 * one) + dmu * (e12 + e21 - 2 * one)) / 4
    n11 = (dmm * (ep + sq * em) + dmu * (m2 * m2 * e12 + m1 * m1 * e21) - cross * one) / 4
    n33 = (dmm * (sq * ep + em) + dmu * (m1 * m1 * e12 + m2 * m2 * e21) - cross * one) / 4

    cosh1 = (np.exp(g1 - a) + np.exp(-g1 - a)) / 2
    cosh2 = (np.exp(g2 - a) + np.exp(-g2 - a)) / 2
    pref = (m1 - m2) * (m1 * m2 - 1) / (2 * m1 * m2)

    g11 = np.exp(L) * n11 / (pi * den)
    g22 = np.exp(-L) * n33 / (pi * den)
    g12 = pref * (m1 * (m2 * m2 - 1) * cosh1 - m2 * (m1 * m1 - 1) * cosh2) / den
    return g11, g12, g22


def _thread_count():
    try:
        n = int(os.environ.get("CHIRAL_THREADS", "1"))
    except ValueError:
        n = 1
    return max(n, 1)


def n_soliton(cfg, bg, zeta, eta, chunk=65536):
    """Determinant-path N-soliton field; returns (g11, g12, g22).

    Complex poles are allowed in conjugate pairs.  Work is chunked;
    chunks run on CHIRAL_THREADS workers (outputs are disjoint slices,
    so the result does not depend on the thread count).
    """
    zeta = np.asarray(zeta, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    shape = np.broadcast_shapes(zeta.shape, eta.shape)
    zeta, eta = np.broadcast_to(zeta, shape), np.broadcast_to(eta, shape)
    L, Lt = bg.eval(zeta, eta)
    if np.any(np.abs(L) > EXP_LIMIT):
        raise Overflow("background exponent out of range on this window")
    L = np.asarray(L, dtype=np.float64).ravel()
    Lt = np.asarray(Lt, dtype=np.float64).ravel()
    if cfg.n == 0:
        e = np.exp(L)
        return e.reshape(shape), np.zeros(shape), (1 / e).reshape(shape)

    mus = np.array(cfg.poles, dtype=np.complex128)
    cs = np.array(cfg.constants, dtype=np.complex128)
    npts = L.size
    g11 = np.empty(npts)
    g12 = np.empty(npts)
    g22 = np.empty(npts)
    spans = [(i, min(i + chunk, npts)) for i in range(0, npts, chunk)]

    def run(span):
        i, j = span
        a, b, c, resid = kernels.nsoliton_points(mus, cs, L[i:j], Lt[i:j])
        g11[i:j] = a
        g12[i:j] = b
        g22[i:j] = c
        return resid

    workers = _thread_count()
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            resids = list(pool.map(run, spans))
    else:
        resids = [run(span) for span in spans]

    max_imag = max(resids)
    if max_imag > 1e-9:
        raise NonRealOutput(
            f"imaginary residue {max_imag:.3e} exceeds 1e-9; the pole set "
            "is not closed under conjugation or cancellation failed"
        )
    return g11.reshape(shape), g12.reshape(shape), g22.reshape(shape)


def soliton_field(cfg, bg, grid, method="auto"):
    """Evaluate a soliton configuration on a grid as a FieldGrid.

    method: 'closed' (N <= 2 real-pole forms), 'determinant', or 'auto'
    (closed forms when applicable, determinant path otherwise).
    """
    closed_ok = (
        cfg.n <= 2
        and cfg.is_real
        and all(c.real > 0 for c in cfg.constants)
        and (cfg.n != 2 or abs(cfg.poles[0] - cfg.poles[1]) > 1e-12)
    )
    if method == "auto":
        method = "closed" if closed_ok else "determinant"
    if method == "closed":
        if cfg.n == 0:
            L, _ = bg.eval(grid.zeta, grid.eta)
            if np.any(np.abs(L) > EXP_LIMIT):
                raise Overflow("background exponent out of range on this window")
            e = np.exp(np.asarray(L, dtype=grid.dtype))
            g11, g12, g22 = e, np.zeros_like(e), 1 / e
        elif cfg.n == 1:
            g11, g12, g22 = one_soliton(cfg, bg, grid.zeta, grid.eta)
        elif cfg.n == 2:
            g11, g12, g22 = two_soliton(cfg, bg, grid.zeta, grid.eta)
        else:
            raise InvalidPole("closed forms cover N <= 2 only")
    elif method == "determinant":
        g11, g12, g22 = n_soliton(cfg, bg, grid.zeta, grid.eta)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FieldGrid(grid, g11=g11, g12=g12, g22=g22)


@dataclass(frozen=True)
class Kinematics:
    """Traveling-wave parameters of a single crest (phase K z - omega t)."""

    k: float
    omega: float
    v: float
    amplitude: float

    def __post_init__(self):
        if self.k != 0:
            assert abs(self.v - self.omega / self.k) < 1e-12 * max(1.0, abs(self.v))


def kinematics(mu, bg_kind, K=0.0):
    """Wavenumber, frequency, velocity and crest amplitude for a real pole.

    time-like seed:  k = 2 mu/(mu^2-1), omega = (mu^2+1)/(mu^2-1),
                     |v| = |(mu^2+1)/(2 mu)| > 1
    space-like seed: k = (mu^2+1)/(mu^2-1), omega = 2 mu/(mu^2-1),
                     |v| = |2 mu/(mu^2+1)| < 1
    The two velocities are exact reciprocals.  Amplitude of the
    off-diagonal crest: (1 - mu^2)/(2 mu).
    """
    mu = float(mu)
    if abs(mu) < _TOL or abs(abs(mu) - 1) < _TOL:
        raise InvalidPole(f"|mu| must avoid 0 and 1, got {mu}")
    amp = (1 - mu * mu) / (2 * mu)
    if bg_kind == "timelike":
        k = 2 * mu / (mu * mu - 1)
        omega = (mu * mu + 1) / (mu * mu - 1)
        v = (mu * mu + 1) / (2 * mu)
    elif bg_kind == "spacelike":
        k = (mu * mu + 1) / (mu * mu - 1)
        omega = 2 * mu / (mu * mu - 1)
        v = 2 * mu / (mu * mu + 1)
    else:
        raise ValueError(f"kinematics needs a canonical seed, got {bg_kind!r}")
    return Kinematics(k=k, omega=omega, v=v, amplitude=amp)


@dataclass
class CrestTrack:
    """One tracked crest: linear fits z = v t + b on each time flank."""

    velocity: float
    amplitude: float
    v_in: float
    b_in: float
    v_out: float
    b_out: float

    @property
    def phase_shift(self):
        return self.b_out - self.b_in


def _slice_extrema(z_axis, row, min_rel):
    """Interior local maxima of a sampled row with parabolic refinement."""
    f = np.abs(row)
    floor = min_rel * float(np.max(f))
    idx = np.nonzero((f[1:-1] >= f[:-2]) & (f[1:-1] > f[2:]) & (f[1:-1] > floor))[0] + 1
    out = []
    h = z_axis[1] - z_axis[0]
    for k in idx:
        denom = f[k - 1] - 2 * f[k] + f[k + 1]
        if denom >= 0:
            continue
        shift = 0.5 * (f[k - 1] - f[k + 1]) / denom
        z_star = z_axis[k] + h * shift
        f_star = f[k] - 0.25 * (f[k - 1] - f[k + 1]) * shift
        out.append((float(z_star), float(f_star)))
    return out


def _fit_side(ts, rows, z_axis, min_rel):
    """Sorted-order linking of per-slice extrema into straight-line fits.

    On a single flank (no collisions) crest z-order is constant, so the
    j-th extremum by position belongs to the j-th track; slices whose
    extremum count deviates from the modal count are skipped.
    """
    per_slice = []
    for t, row in zip(ts, rows):
        ext = _slice_extrema(z_axis, row, min_rel)
        if not ext:
            raise NoCrest(f"no interior crest at t={t}")
        per_slice.append((t, sorted(ext)))
    counts = [len(e) for _, e in per_slice]
    modal = max(sorted(set(counts)), key=counts.count)
    kept = [(t, e) for (t, e), c in zip(per_slice, counts) if c == modal]
    if len(kept) < 2:
        raise NoCrest("not enough consistent slices to fit a track")
    fits = []
    for j in range(modal):
        tt = np.array([t for t, _ in kept])
        zz = np.array([e[j][0] for _, e in kept])
        aa = np.array([e[j][1] for _, e in kept])
        v, b = np.polyfit(tt, zz, 1)
        fits.append((float(v), float(b), float(np.max(aa))))
    return fits


def crest_track(field, t_fit=0.0, min_rel=0.1):
    """Track |g12| crests across time slices of a lab-grid field.

    Crests are located per slice (quadratic sub-cell refinement), linked
    into tracks on each time flank |t| >= t_fit, and fitted with least
    squares.  Incoming and outgoing fits are paired by velocity; the
    offset difference of the paired lines is the phase shift picked up
    between the flanks.
    """
    grid = field.grid
    if grid.mode != "lab":
        raise ValueError("crest tracking expects a lab-coordinate grid")
    ts = np.asarray(grid.axis0, dtype=float)
    rows = np.asarray(field.g12, dtype=float)
    mask_in = ts <= -t_fit
    mask_out = ts >= t_fit
    if mask_in.sum() < 2 or mask_out.sum() < 2:
        raise NoCrest("need at least two slices per time flank")
    fit_in = _fit_side(ts[mask_in], rows[mask_in], grid.axis1, min_rel)
    fit_out = _fit_side(ts[mask_out], rows[mask_out], grid.axis1, min_rel)
    if len(fit_in) != len(fit_out):
        raise NoCrest(
            f"crest count differs between flanks: {len(fit_in)} vs {len(fit_out)}"
        )
    used = set()
    tracks = []
    for v_in, b_in, amp_in in fit_in:
        best, best_j = None, None
        for j, (v_out, _, _) in enumerate(fit_out):
            if j in used:
                continue
            d = abs(v_out - v_in)
            if best is None or d < best:
                best, best_j = d, j
        v_out, b_out, amp_out = fit_out[best_j]
        used.add(best_j)
        tracks.append(
            CrestTrack(
                velocity=0.5 * (v_in + v_out),
                amplitude=max(amp_in, amp_out),
                v_in=v_in,
                b_in=b_in,
                v_out=v_out,
                b_out=b_out,
            )
        )
    tracks.sort(key=lambda tr: tr.velocity)
    return tracks
