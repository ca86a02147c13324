"""Initial states in the chord representation.

A chord function here is the symplectic Fourier transform of the Wigner
function,

    Wt(xi) = (1/2 pi hbar) Integral e^{+(i/hbar) xi ^ x} W(x) dx,

so Wt(0) = 1/(2 pi hbar) encodes unit trace and Wt(-xi) = conj(Wt(xi))
encodes hermiticity. Built-in factories return :class:`ChordState` objects
whose evaluators are vectorized over trailing-(2) point arrays and carry an
analytic Wigner evaluator where one exists (used to seed grids and oracles).

The cat-state helpers also expose the closed-form q=0 Wigner section of the
photon-bath evolution (damping rate ``gamma``, occupancy ``nbar``), including
the fringe wavenumber and the location of the fringe zero — the quantities
that make the positivity threshold observable on a single line of the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from ._quadrature import adaptive_tensor_gl
from .errors import ConfigError, NotPositiveDefinite

__all__ = [
    "ChordState",
    "CatParameters",
    "coherent_state",
    "gaussian_state",
    "cat_state",
    "cat_wigner_line",
    "cat_fringe_wavenumber",
    "cat_fringe_zero",
    "cat_zero_crossing_time",
    "state_from_dict",
]

# |value| / peak below which a built-in state is treated as supported;
# chord_radius fields are calibrated against this.
_SUPPORT_EPS = 1e-10
_LOG_SUPPORT = math.log(1.0 / _SUPPORT_EPS)


@dataclass(frozen=True, eq=False)
class ChordState:
    """A complex-valued chord function with evaluation metadata.

    ``evaluator`` maps an (..., 2) array of chords to complex values.
    ``chord_radius`` bounds the support: |values| <= ~1e-10 * peak outside.
    ``wigner``, when present, evaluates the corresponding Wigner function on
    (..., 2) phase-space points. ``reliability`` (used by reconstruction)
    maps chords to booleans; None means everywhere reliable.
    """

    evaluator: Callable[[NDArray[np.float64]], np.ndarray]
    label: str
    pure: bool
    hbar: float = 1.0
    chord_radius: float = math.inf
    wigner: Optional[Callable[[NDArray[np.float64]], np.ndarray]] = None
    reliability: Optional[Callable[[NDArray[np.float64]], np.ndarray]] = None

    def __call__(self, xi) -> np.ndarray:
        return self.evaluator(np.asarray(xi, dtype=float))


def _chord_norm_squared(state: ChordState) -> float:
    """2 pi hbar Integral |Wt|^2 d xi over the state's support box."""
    r = state.chord_radius
    if not math.isfinite(r):
        raise ConfigError("cannot integrate a state without a finite chord_radius")

    def f(pts):
        return np.abs(state.evaluator(pts)) ** 2

    box = ((-r, r), (-r, r))
    val = adaptive_tensor_gl(f, box, rtol=1e-9)
    return 2.0 * math.pi * state.hbar * val.real


def _validate_builtin(state: ChordState) -> ChordState:
    peak = 1.0 / (2.0 * math.pi * state.hbar)
    at_zero = complex(state.evaluator(np.zeros(2)))
    if abs(at_zero - peak) > 1e-12 * peak:
        raise ConfigError(
            f"state '{state.label}' violates Wt(0) = 1/(2 pi hbar): {at_zero}")
    probes = np.array([[0.3, -0.7], [1.1, 0.4], [-0.2, 0.9]]) * math.sqrt(state.hbar)
    fwd = state.evaluator(probes)
    bwd = state.evaluator(-probes)
    if np.max(np.abs(np.conj(fwd) - bwd)) > 1e-12 * peak:
        raise ConfigError(f"state '{state.label}' violates Wt(-xi) = conj(Wt(xi))")
    if state.pure:
        norm2 = _chord_norm_squared(state)
        if abs(norm2 - 1.0) > 1e-6:
            raise ConfigError(
                f"pure state '{state.label}' has 2 pi hbar |Wt|^2 integral "
                f"{norm2!r}, expected 1")
    return state


def _wedge_with(xi: np.ndarray, point: np.ndarray) -> np.ndarray:
    """xi ^ point = xi_p * point_q - xi_q * point_p, batched over xi."""
    return xi[..., 0] * point[1] - xi[..., 1] * point[0]


def coherent_state(center, hbar: float = 1.0) -> ChordState:
    """Coherent state displaced to ``center`` = (p, q).

    Chord function (1/2 pi hbar) exp(-xi^2/4 hbar) exp((i/hbar) xi ^ center);
    Wigner function is the round Gaussian of width sqrt(hbar/2) per axis.
    """
    c = np.asarray(center, dtype=float)
    if c.shape != (2,):
        raise ConfigError("center must be a 2-vector")
    peak = 1.0 / (2.0 * math.pi * hbar)

    def evaluator(xi):
        xi = np.asarray(xi, dtype=float)
        sq = xi[..., 0] ** 2 + xi[..., 1] ** 2
        return peak * np.exp(-sq / (4.0 * hbar) + 1j * _wedge_with(xi, c) / hbar)

    def wigner(x):
        x = np.asarray(x, dtype=float)
        sq = (x[..., 0] - c[0]) ** 2 + (x[..., 1] - c[1]) ** 2
        return np.exp(-sq / hbar) / (math.pi * hbar)

    radius = 2.0 * math.sqrt(hbar * _LOG_SUPPORT)
    return _validate_builtin(ChordState(
        evaluator=evaluator, label=f"coherent@({c[0]:g},{c[1]:g})", pure=True,
        hbar=hbar, chord_radius=radius, wigner=wigner))


def gaussian_state(mean, cov, hbar: float = 1.0) -> ChordState:
    """General Gaussian state with Wigner mean and covariance as given.

    Pure iff det cov = (hbar/2)^2; purity is (hbar/2)/sqrt(det cov).
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.shape != (2,) or cov.shape != (2, 2):
        raise NotPositiveDefinite("mean must be a 2-vector and cov a 2x2 matrix")
    if float(np.max(np.abs(cov - cov.T))) > 1e-12 * max(1.0, float(np.max(np.abs(cov)))):
        raise NotPositiveDefinite("covariance must be symmetric")
    cov = 0.5 * (cov + cov.T)
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"covariance is not positive definite: {cov.tolist()}")
    det = float(np.linalg.det(cov))
    pure = abs(det - (hbar / 2.0) ** 2) <= 1e-9 * (hbar / 2.0) ** 2
    peak = 1.0 / (2.0 * math.pi * hbar)

    # chord quadratic form: J cov J^T, so the Wigner transform has covariance cov
    jcj = np.array([[cov[1, 1], -cov[0, 1]], [-cov[0, 1], cov[0, 0]]])
    cov_inv = np.linalg.inv(cov)

    def evaluator(xi):
        xi = np.asarray(xi, dtype=float)
        quad = np.einsum("...i,ij,...j->...", xi, jcj, xi)
        return peak * np.exp(-quad / (2.0 * hbar ** 2)
                             + 1j * _wedge_with(xi, mean) / hbar)

    def wigner(x):
        x = np.asarray(x, dtype=float)
        d = x - mean
        quad = np.einsum("...i,ij,...j->...", d, cov_inv, d)
        return np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))

    lam_min = float(np.linalg.eigvalsh(jcj)[0])
    radius = hbar * math.sqrt(2.0 * _LOG_SUPPORT / lam_min)
    return _validate_builtin(ChordState(
        evaluator=evaluator, label="gaussian", pure=pure, hbar=hbar,
        chord_radius=radius, wigner=wigner))


@dataclass(frozen=True)
class CatParameters:
    """Even cat along q: (|zeta> + |-zeta>)/sqrt(2)-type superposition.

    ``zeta`` is the half-separation of the two Gaussian components on the
    q axis; ``gamma`` and ``nbar`` parameterize the photon bath used by the
    closed-form evolution helpers below.
    """

    zeta: float
    gamma: float = 1.0
    nbar: float = 0.0

    def __post_init__(self) -> None:
        if self.zeta < 0:
            raise ConfigError("zeta must be nonnegative")
        if self.gamma < 0 or self.nbar < 0:
            raise ConfigError("gamma and nbar must be nonnegative")

    def normalization(self, hbar: float = 1.0) -> float:
        """N = 1/(1 + exp(-zeta^2/hbar)), in (1/2, 1] — the overlap norm."""
        return 1.0 / (1.0 + math.exp(-self.zeta ** 2 / hbar))


def cat_state(params: CatParameters, hbar: float = 1.0) -> ChordState:
    """Cat state chord function: central fringe lobe plus lobes at ±2 x_zeta.

    The two displaced-Gaussian components at x = (0, ±zeta) interfere; in the
    chord plane that appears as an oscillating central lobe cos(zeta xi_p /
    hbar) plus two real coherence lobes displaced to xi = (0, ±2 zeta). The
    normalization keeps Wt(0) = 1/(2 pi hbar) exactly.
    """
    z = params.zeta
    scriptn = 0.5 * params.normalization(hbar)
    pref = scriptn / (2.0 * math.pi * hbar)

    def evaluator(xi):
        xi = np.asarray(xi, dtype=float)
        xp, xq = xi[..., 0], xi[..., 1]
        sq = xp ** 2 + xq ** 2
        central = 2.0 * np.exp(-sq / (4.0 * hbar)) * np.cos(z * xp / hbar)
        lobe_up = np.exp(-(xp ** 2 + (xq - 2.0 * z) ** 2) / (4.0 * hbar))
        lobe_dn = np.exp(-(xp ** 2 + (xq + 2.0 * z) ** 2) / (4.0 * hbar))
        return (pref * (central + lobe_up + lobe_dn)).astype(complex)

    def wigner(x):
        x = np.asarray(x, dtype=float)
        p, q = x[..., 0], x[..., 1]
        up = np.exp(-(p ** 2 + (q - z) ** 2) / hbar)
        dn = np.exp(-(p ** 2 + (q + z) ** 2) / hbar)
        fringe = 2.0 * np.exp(-(p ** 2 + q ** 2) / hbar) * np.cos(2.0 * z * p / hbar)
        return scriptn / (math.pi * hbar) * (up + dn + fringe)

    radius = 2.0 * z + 2.0 * math.sqrt(hbar * _LOG_SUPPORT)
    return _validate_builtin(ChordState(
        evaluator=evaluator, label=f"cat(zeta={z:g})", pure=True, hbar=hbar,
        chord_radius=radius, wigner=wigner))


def _beta(params: CatParameters, t: float) -> float:
    return 2.0 * params.nbar * (1.0 - math.exp(-params.gamma * t)) + 1.0


def cat_wigner_line(params: CatParameters, t: float, p, hbar: float = 1.0):
    """Closed-form W_t(p, q=0) of the cat under the photon bath.

    With s = e^{-gamma t} and beta_t = 2 nbar (1 - s) + 1:

        W_t(p, 0) = (2 NN / pi hbar beta) e^{-p^2 / hbar beta}
                    [ e^{-A} cos(k p) + e^{-B} ],
        A = (zeta^2/hbar)(1 - s/beta),  B = (zeta^2/hbar) s/beta,
        k = 2 sqrt(s) zeta / (hbar beta),  NN = normalization/2.

    The fringe envelope e^{-A} and the Gaussian-overlap term e^{-B} swap
    dominance exactly at the positivity time (A = B there, independent of
    zeta); the fringe wavenumber k shrinks as the two components merge.
    """
    if t < 0:
        raise ConfigError("t must be nonnegative")
    p = np.asarray(p, dtype=float)
    s = math.exp(-params.gamma * t)
    beta = _beta(params, t)
    z2 = params.zeta ** 2 / hbar
    a_exp = z2 * (1.0 - s / beta)
    b_exp = z2 * s / beta
    k = cat_fringe_wavenumber(params, t, hbar)
    scriptn = 0.5 * params.normalization(hbar)
    pref = 2.0 * scriptn / (math.pi * hbar * beta)
    return pref * np.exp(-p ** 2 / (hbar * beta)) * (
        math.exp(-a_exp) * np.cos(k * p) + math.exp(-b_exp))


def cat_fringe_wavenumber(params: CatParameters, t: float, hbar: float = 1.0) -> float:
    """k(t) = 2 e^{-gamma t/2} zeta / (hbar beta_t), the q=0 fringe frequency."""
    s = math.exp(-params.gamma * t)
    return 2.0 * math.sqrt(s) * params.zeta / (hbar * _beta(params, t))


def cat_fringe_zero(params: CatParameters, t: float, hbar: float = 1.0) -> Optional[float]:
    """Smallest p > 0 with W_t(p, 0) = 0, or None once fringes cannot win.

    Solves cos(k p) = -e^{A-B}; a zero exists iff e^{A-B} <= 1, i.e. up to
    (and including) the positivity time, where the zero sits at p = pi/k.
    """
    s = math.exp(-params.gamma * t)
    beta = _beta(params, t)
    z2 = params.zeta ** 2 / hbar
    contrast = math.exp(z2 * (1.0 - 2.0 * s / beta))
    if contrast > 1.0 or params.zeta == 0.0:
        return None
    k = cat_fringe_wavenumber(params, t, hbar)
    return math.acos(-contrast) / k


def cat_zero_crossing_time(params: CatParameters, hbar: float = 1.0) -> float:
    """First t at which W_t(p, 0) loses its negative fringe minima.

    Bisects the fringe-extinction condition A(t) = B(t) from
    :func:`cat_wigner_line`; the result does not depend on zeta (or hbar) —
    only on the bath parameters.
    """
    if params.gamma <= 0:
        raise ConfigError("fringe extinction requires gamma > 0")

    def contrast(t: float) -> float:
        s = math.exp(-params.gamma * t)
        return 1.0 - 2.0 * s / _beta(params, t)

    lo, hi = 0.0, 1.0 / params.gamma
    while contrast(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6 / params.gamma:
            raise ConfigError("fringe extinction not reached within 1e6/gamma")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if contrast(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def state_from_dict(data: dict, hbar: float = 1.0) -> ChordState:
    """Parse a JSON state descriptor.

    ``{"type": "coherent", "center": [p, q]}``,
    ``{"type": "cat", "zeta": z, "gamma": g, "nbar": n}`` (bath fields
    optional, defaults 1 and 0), or
    ``{"type": "gaussian", "mean": [p, q], "cov": [[..], [..]]}``.
    """
    if not isinstance(data, dict):
        raise ConfigError("state descriptor must be a JSON object")
    kind = data.get("type")
    if kind == "coherent":
        extra = set(data) - {"type", "center"}
        if extra:
            raise ConfigError(f"unknown field(s) in coherent state: {sorted(extra)}")
        return coherent_state(data.get("center", (0.0, 0.0)), hbar=hbar)
    if kind == "cat":
        extra = set(data) - {"type", "zeta", "gamma", "nbar"}
        if extra:
            raise ConfigError(f"unknown field(s) in cat state: {sorted(extra)}")
        if "zeta" not in data:
            raise ConfigError("cat state needs 'zeta'")
        params = CatParameters(zeta=float(data["zeta"]),
                               gamma=float(data.get("gamma", 1.0)),
                               nbar=float(data.get("nbar", 0.0)))
        return cat_state(params, hbar=hbar)
    if kind == "gaussian":
        extra = set(data) - {"type", "mean", "cov"}
        if extra:
            raise ConfigError(f"unknown field(s) in gaussian state: {sorted(extra)}")
        if "cov" not in data:
            raise ConfigError("gaussian state needs 'cov'")
        return gaussian_state(data.get("mean", (0.0, 0.0)), data["cov"], hbar=hbar)
    raise ConfigError(f"unknown state type: {kind!r}")
