"""Dispersion relation of the honeycomb lattice and its degenerate frequencies.

The symbol ``z(k) = 1 + exp(i k.v1) + exp(i k.v2)`` gives the band function
``phi = |z|``. Most formulas are written in the skewed coordinates
``kt = (k.v1, k.v2)`` in which

    phi^2 = 3 + 2 cos kt1 + 2 cos kt2 + 2 cos(kt1 - kt2) = alpha1 + alpha2 + alpha12,

and the Hessian determinant factorises as ``3 alpha1 alpha2 alpha12 / (4 phi^4)``.
All array functions accept ``k`` with trailing dimension 2 and broadcast over
the leading dimensions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .lattice import GEOMETRY, SQRT3, LatticeGeometry, wrap_to_rhombic

V = GEOMETRY.V
DIRAC_POINT = np.array([0.0, 4 * np.pi / 3])
K2_POINT = np.array([0.0, np.pi])
# the intersections of two degenerate curves in one rhombic cell
K2_POINTS = np.array(
    [
        [SQRT3 * np.pi / 2, np.pi / 2],
        [SQRT3 * np.pi / 2, -np.pi / 2],
        [SQRT3 * np.pi / 6, 3 * np.pi / 2],
        [SQRT3 * np.pi / 6, -3 * np.pi / 2],
        [0.0, np.pi],
        [0.0, -np.pi],
    ]
)
DIRAC_POINTS = np.array([[0.0, 4 * np.pi / 3], [0.0, -4 * np.pi / 3]])

DEFAULT_TOL = 1e-8


class SingularPointError(ValueError):
    """Raised when a quantity is requested at a Dirac point where it is undefined."""


class ClassificationError(ValueError):
    """Raised when the residuals do not support a consistent frequency class.

    The residual vector ``(|alpha1|, |alpha2|, |alpha12|)`` and ``phi`` are
    attached so the caller can tighten the tolerance.
    """

    def __init__(self, message: str, residuals, phi: float):
        super().__init__(f"{message}; residuals={tuple(residuals)}, phi={phi:.3e}")
        self.residuals = tuple(residuals)
        self.phi = phi


def tilde(k) -> np.ndarray:
    """Skewed coordinates ``(k.v1, k.v2)``."""
    return np.asarray(k, dtype=float) @ V


def untilde(kt) -> np.ndarray:
    """Inverse of :func:`tilde`."""
    return np.linalg.solve(V.T, np.asarray(kt, dtype=float).T).T


def z_symbol(k) -> np.ndarray:
    kt = tilde(k)
    return 1 + np.exp(1j * kt[..., 0]) + np.exp(1j * kt[..., 1])


def phase(k) -> np.ndarray:
    """``phi(k) = |z(k)|``."""
    return np.abs(z_symbol(k))


def phase_squared_cos(kt) -> np.ndarray:
    """Cosine-sum form of ``phi^2`` in skewed coordinates."""
    a, b = kt[..., 0], kt[..., 1]
    return 3 + 2 * np.cos(a) + 2 * np.cos(b) + 2 * np.cos(a - b)


def phase_cos(k) -> np.ndarray:
    """``phi`` via the cosine sum; an independent code path to :func:`phase`."""
    return np.sqrt(np.maximum(phase_squared_cos(tilde(k)), 0.0))


def _alpha_tilde(kt):
    a, b = kt[..., 0], kt[..., 1]
    ca, cb, cab = np.cos(a), np.cos(b), np.cos(a - b)
    return 1 + cb + cab, 1 + ca + cab, 1 + ca + cb


def alpha(k):
    """The three functions ``(alpha1, alpha2, alpha12)`` whose zero sets are the degenerate curves."""
    return _alpha_tilde(tilde(k))


def _require_regular(phi, tol: float = DEFAULT_TOL):
    if np.any(phi < tol):
        raise SingularPointError("phase is not differentiable at a Dirac point")


def gradient_tilde(kt) -> np.ndarray:
    a, b = kt[..., 0], kt[..., 1]
    ph = np.sqrt(phase_squared_cos(kt))
    _require_regular(ph)
    g1 = -(np.sin(a) + np.sin(a - b)) / ph
    g2 = -(np.sin(b) - np.sin(a - b)) / ph
    return np.stack([g1, g2], axis=-1)


def gradient(k) -> np.ndarray:
    """Cartesian gradient of ``phi``; raises :class:`SingularPointError` at Dirac points."""
    return gradient_tilde(tilde(k)) @ V.T


def hessian_tilde(kt) -> np.ndarray:
    a1, a2, a12 = _alpha_tilde(kt)
    ph = np.sqrt(a1 + a2 + a12)
    _require_regular(ph)
    c = 1.0 / ph**3
    h = np.empty(np.shape(a1) + (2, 2))
    h[..., 0, 0] = -a2 * (a1 + a12) * c
    h[..., 0, 1] = h[..., 1, 0] = a1 * a2 * c
    h[..., 1, 1] = -a1 * (a2 + a12) * c
    return h


def hessian(k) -> np.ndarray:
    """Cartesian Hessian ``V Ht V^T`` of ``phi``."""
    return V @ hessian_tilde(tilde(k)) @ V.T


def hessian_det(k) -> np.ndarray:
    """Factorised determinant ``3 alpha1 alpha2 alpha12 / (4 phi^4)``."""
    a1, a2, a12 = alpha(k)
    phi2 = a1 + a2 + a12
    _require_regular(np.sqrt(np.maximum(phi2, 0.0)))
    return 3 * a1 * a2 * a12 / (4 * phi2**2)


def O_matrix(k) -> np.ndarray:
    """Unitary ``O(k)`` diagonalising the Laplacian symbol; undefined at Dirac points."""
    z = z_symbol(k)
    az = np.abs(z)
    _require_regular(az)
    w = z / az
    s = 1 / np.sqrt(2)
    o = np.empty(np.shape(z) + (2, 2), dtype=complex)
    o[..., 0, 0] = s
    o[..., 0, 1] = s * np.conj(w)
    o[..., 1, 0] = -s * w
    o[..., 1, 1] = s
    return o


@dataclass(frozen=True)
class SpectralEval:
    k: np.ndarray
    z: complex
    phi: float
    grad: np.ndarray
    hess: np.ndarray
    alphas: tuple[float, float, float]
    O: np.ndarray


def evaluate(k) -> SpectralEval:
    """Bundle every pointwise spectral quantity at a single non-Dirac frequency."""
    k = np.asarray(k, dtype=float)
    return SpectralEval(
        k=k,
        z=complex(z_symbol(k)),
        phi=float(phase(k)),
        grad=gradient(k),
        hess=hessian(k),
        alphas=tuple(float(a) for a in alpha(k)),
        O=O_matrix(k),
    )


# -- classification -----------------------------------------------------------


@dataclass(frozen=True)
class FrequencyClass:
    label: str
    curve_residuals: tuple[float, float, float]
    det_hess: float

    @property
    def j(self) -> int:
        return int(self.label[1])


def classify(k, tol: float = DEFAULT_TOL) -> FrequencyClass:
    """Assign ``k`` to K0..K3 by counting vanishing ``alpha`` residuals.

    Raises
    ------
    ClassificationError
        When the residuals are inconsistent at scale ``tol`` (for example a
        non-vanishing residual vector with a vanishing determinant).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = np.asarray(k, dtype=float)
    res = tuple(float(abs(a)) for a in alpha(k))
    ph = float(phase(k))
    if ph < tol:
        return FrequencyClass("K3", res, float("nan"))
    j = sum(r < tol for r in res)
    det = float(hessian_det(k))
    if j == 3:
        raise ClassificationError("all curves vanish away from a Dirac point", res, ph)
    if j == 0 and abs(det) < tol:
        raise ClassificationError("determinant vanishes but no curve residual does", res, ph)
    return FrequencyClass(f"K{j}", res, det)


def classify_grid(kx, ky, tol: float):
    """Vectorised classification returning integer classes 0..3 and the determinant."""
    k = np.stack([kx, ky], axis=-1)
    a1, a2, a12 = alpha(k)
    phi2 = a1 + a2 + a12
    ph = np.sqrt(np.maximum(phi2, 0.0))
    cls = (np.abs(a1) < tol).astype(int) + (np.abs(a2) < tol) + (np.abs(a12) < tol)
    cls = np.where(ph < tol, 3, np.minimum(cls, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        det = np.where(ph < tol, np.nan, 3 * a1 * a2 * a12 / (4 * phi2**2))
    return cls, ph, (a1, a2, a12), det


def rhombic_grid(n: int, geom: LatticeGeometry = GEOMETRY):
    """Uniform ``n x n`` grid of the rhombic cell, returned as Cartesian ``(kx, ky)``."""
    s = (np.arange(n) - n // 2 + (0 if n % 2 else 1)) / n
    s1, s2 = np.meshgrid(s, s, indexing="ij")
    kx = s1 * geom.k1d[0] + s2 * geom.k2d[0]
    ky = s1 * geom.k1d[1] + s2 * geom.k2d[1]
    return kx, ky


def sign_change_mask(field: np.ndarray) -> np.ndarray:
    """Grid cells where ``field`` changes sign towards a periodic neighbour."""
    sgn = np.sign(field)
    mask = np.zeros(field.shape, dtype=bool)
    for axis in (0, 1):
        nb = np.roll(sgn, -1, axis=axis)
        mask |= sgn * nb < 0
    return mask


def polish_intersection(k0, pair: tuple[int, int], tol: float = 1e-13) -> np.ndarray:
    """Newton-polish a point where two of the ``alpha`` functions vanish together."""
    def resid(kt):
        al = _alpha_tilde(np.asarray(kt))
        return np.array([al[pair[0]], al[pair[1]]])

    sol = optimize.root(resid, tilde(k0), method="hybr", tol=tol)
    return untilde(sol.x)


# -- expansions near the special points ----------------------------------------


@dataclass(frozen=True)
class DiracExpansion:
    theta: float
    a_theta: float
    b_theta: float


def dirac_coeffs(theta: float) -> DiracExpansion:
    """Cubic coefficients of ``phi^2`` along the rotated frame at the Dirac point."""
    s, c = np.sin(theta), np.cos(theta)
    a = s * (3 * c**2 - s**2) / (2 * SQRT3)
    b = c * (3 * s**2 - c**2) / (2 * SQRT3)
    return DiracExpansion(float(theta), float(a), float(b))


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def dirac_expansion_residual(theta: float, k) -> np.ndarray:
    """``phi(K* + R k)^2`` minus its quartic Taylor polynomial; of order ``|k|^5``."""
    k = np.asarray(k, dtype=float)
    co = dirac_coeffs(theta)
    a, b = co.a_theta, co.b_theta
    k1, k2 = k[..., 0], k[..., 1]
    r2 = k1**2 + k2**2
    poly = 0.75 * (r2 + a * k1**3 - 3 * b * k1**2 * k2 - 3 * a * k1 * k2**2 + b * k2**3 - r2**2 / 16)
    p = DIRAC_POINT + k @ rotation(theta).T
    return phase_squared_cos(tilde(p)) - poly


def stationary_curve_G(theta: float, k1: float, k2: float) -> float:
    """Normalised ``k2``-derivative of the phase in the warped Dirac frame.

    Equals ``(2/(sqrt(3)|k1|)) d/dk2 phi(K* + R (k1, k1 k2))`` so that it is
    ``k2 - 3 b k1 / 2 + ...`` for either sign of ``k1``.
    """
    R = rotation(theta)
    p = DIRAC_POINT + R @ np.array([k1, k1 * k2])
    return float(2 / SQRT3 * np.sign(k1) * gradient(p) @ R[:, 1])


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


def stationary_curve(theta: float, k1: float, delta0: float = 0.05, max_iter: int = 50) -> float:
    """Solve ``G(k1, k2) = 0`` for ``k2 = gamma(k1)`` by Newton's method."""
    if abs(k1) >= delta0:
        raise ValueError(f"|k1| must be below delta0={delta0}, got {k1}")
    if k1 == 0:
        return 0.0
    co = dirac_coeffs(theta)
    R = rotation(theta)
    e2 = R[:, 1]
    k2 = 1.5 * co.b_theta * k1 + 4.5 * co.a_theta * co.b_theta * k1**2
    g = np.inf
    for _ in range(max_iter):
        p = DIRAC_POINT + R @ np.array([k1, k1 * k2])
        g = 2 / SQRT3 * np.sign(k1) * gradient(p) @ e2
        if abs(g) <= 1e-12:
            return float(k2)
        dg = 2 / SQRT3 * np.sign(k1) * k1 * (e2 @ hessian(p) @ e2)
        k2 -= g / dg
    raise ConvergenceError("Newton iteration for the stationary curve did not converge", abs(g))


def k2_expansion_residual(k) -> np.ndarray:
    """``phi(K2 + k)`` minus its cubic Taylor polynomial in skewed coordinates."""
    k = np.asarray(k, dtype=float)
    kt = tilde(k)
    t1, t2 = kt[..., 0], kt[..., 1]
    poly = 1 - t1 + t2 + t1**3 / 6 - t2**3 / 6
    return phase(K2_POINT + k) - poly


def _phi_tilde(kt):
    return np.sqrt(phase_squared_cos(np.asarray(kt, dtype=float)))


def k1_curve_diagnostics(K, h2: float = 1e-3, h3: float = 1e-3, tol: float = DEFAULT_TOL):
    """Second derivative along ``kt1`` and third along ``kt2`` of the phase at a point of ``alpha1 = 0``.

    Returns
    -------
    (d11, d222) : tuple of float
        Finite-difference values of the two non-degeneracy derivatives.
    """
    K = np.asarray(K, dtype=float)
    c = classify(K, tol)
    if c.label != "K1":
        raise ClassificationError(f"expected a K1 frequency, got {c.label}", c.curve_residuals, float(phase(K)))
    if c.curve_residuals[0] >= tol:
        raise ClassificationError("the vanishing curve is not alpha1", c.curve_residuals, float(phase(K)))
    kt = tilde(K)
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    f1 = [_phi_tilde(kt + j * h2 * e1) for j in (-2, -1, 0, 1, 2)]
    d11 = (-f1[0] + 16 * f1[1] - 30 * f1[2] + 16 * f1[3] - f1[4]) / (12 * h2**2)
    f2 = [_phi_tilde(kt + j * h3 * e2) for j in (-3, -2, -1, 0, 1, 2, 3)]
    d222 = (f2[0] - 8 * f2[1] + 13 * f2[2] - 13 * f2[4] + 8 * f2[5] - f2[6]) / (8 * h3**3)
    return float(d11), float(d222)


def alpha1_curve(num: int = 200, margin: float = 0.2) -> np.ndarray:
    """Sample ``alpha1 = 0`` inside the rhombic cell's first quadrant, away from K2/K3.

    The curve is parametrised by ``kt2 = b`` with ``kt1 = b + arccos(-1 - cos b)``.
    """
    pts = []
    for b in np.linspace(-np.pi, np.pi, 8 * num):
        cb = -1 - np.cos(b)
        if abs(cb) > 1:
            continue
        for sgn in (1, -1):
            k = untilde([b + sgn * np.arccos(cb), b])
            k = wrap_to_rhombic(GEOMETRY, k)
            if k[0] >= 0 and k[1] >= 0 and _degenerate_distance(k) >= margin:
                pts.append(k)
    pts = np.unique(np.round(np.array(pts), 12), axis=0)
    if len(pts) > num:
        pts = pts[np.linspace(0, len(pts) - 1, num).astype(int)]
    return pts


def degenerate_representatives(reach: int = 2) -> np.ndarray:
    """K2 and Dirac points together with their dual-lattice translates."""
    base = np.vstack([K2_POINTS, DIRAC_POINTS])
    shifts = [i * GEOMETRY.k1d + j * GEOMETRY.k2d for i in range(-reach, reach + 1) for j in range(-reach, reach + 1)]
    return np.array([p + s for p in base for s in shifts])


def _degenerate_distance(k) -> float:
    reps = degenerate_representatives()
    return float(np.min(np.linalg.norm(reps - np.asarray(k), axis=1)))


def separation_from_others(K) -> float:
    """Distance from ``K`` to the nearest K2/Dirac point other than ``K`` itself."""
    d = np.linalg.norm(degenerate_representatives() - np.asarray(K, dtype=float), axis=1)
    # treat representatives within 1e-6 as K itself (tabulated inputs are rounded)
    d = d[d > 1e-6]
    return float(d.min())


# -- symmetry reduction -------------------------------------------------------

_SWAP = np.array([[0, 1], [1, 0]])
_NEG = -np.eye(2, dtype=int)
_SHEAR = np.array([[1, -1], [0, -1]])


def symmetry_group() -> list[np.ndarray]:
    """Integer maps on skewed coordinates generated by the swap, negation and shear substitutions."""
    group = [np.eye(2, dtype=int)]
    frontier = list(group)
    while frontier:
        nxt = []
        for g, s in itertools.product(frontier, (_SWAP, _NEG, _SHEAR)):
            h = s @ g
            if not any(np.array_equal(h, e) for e in group):
                group.append(h)
                nxt.append(h)
        frontier = nxt
    return group


def cartesian_map(A: np.ndarray) -> np.ndarray:
    """Cartesian matrix ``C`` with ``tilde(C k) = A tilde(k)``; orthogonal for every group element."""
    return np.linalg.solve(V.T, A @ V.T)


def symmetry_reduce(K, tol: float = 1e-6):
    """Move a degenerate frequency to the reduced representative set.

    Returns
    -------
    K_reduced : ndarray
        Representative in the rhombic cell's first quadrant lying on ``alpha1 = 0``
        (K1), equal to ``(0, pi)`` (K2) or to ``(0, 4 pi / 3)`` (Dirac).
    A : ndarray of int, shape (2, 2)
        Map on skewed coordinates; velocities follow ``v -> cartesian_map(A) @ v``.
    """
    K = np.asarray(K, dtype=float)
    a = np.abs(np.array(alpha(K)))
    if phase(K) < tol:
        target = DIRAC_POINT
    elif np.sum(a < tol) >= 2:
        target = K2_POINT
    elif np.sum(a < tol) == 1:
        target = None
    else:
        raise ValueError("symmetry_reduce expects a degenerate frequency")
    for A in symmetry_group():
        Kp = wrap_to_rhombic(GEOMETRY, cartesian_map(A) @ K)
        if target is not None:
            if np.linalg.norm(Kp - target) < 1e-6:
                return Kp, A
        elif Kp[0] >= -1e-12 and Kp[1] >= -1e-12 and abs(alpha(Kp)[0]) < tol:
            return Kp, A
    raise RuntimeError(f"no symmetry representative found for {K}")
