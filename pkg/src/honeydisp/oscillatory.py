"""Frequency-localised oscillatory integrals of the dispersion relation.

The central quantity is

    I(t; v) = integral of exp(-i t (phi(k) - v.k)) chi0(|k - K| / delta) dk

over the plane. The integrand is smooth and compactly supported away from Dirac
points, so the uniform trapezoid rule on a Cartesian grid centred at ``K`` is
spectrally accurate once the grid resolves the largest local wavenumber
``t (|grad phi| + |v|)`` plus a margin for the cutoff transition. The same
samples give ``I`` at a whole lattice of velocities through one FFT, which
drives the coarse velocity search. At a Dirac point the conical singularity
is isolated in a small disk and integrated in polar coordinates, where the
integrand is smooth in ``(rho, psi)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import spectral

# product (aliasing margin) x (cutoff transition width); 200 puts the
# trapezoid aliasing error of the cutoff near 1e-11 of the cutoff area
MARGIN_WIDTH_PRODUCT = 200.0
ROW_BLOCK = 256


# -- cutoff profiles ----------------------------------------------------------


def smooth_step(x):
    """C-infinity step: 0 for ``x <= 0``, 1 for ``x >= 1``, built from ``exp(-1/x)``."""
    x = np.asarray(x, dtype=float)
    pos = x > 0
    neg = x < 1
    a = np.where(pos, np.exp(-1.0 / np.where(pos, x, 1.0)), 0.0)
    b = np.where(neg, np.exp(-1.0 / np.where(neg, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def chi0(s):
    """Equals 1 for ``|s| <= 1/2`` and 0 for ``|s| >= 1``, monotone in between."""
    return smooth_step(2.0 * (1.0 - np.abs(np.asarray(s, dtype=float))))


def chi1(s):
    return 1.0 - chi0(s)


def _psi(s):
    # 1 on [0, 9/5], 0 on [11/5, inf)
    return smooth_step((11.0 / 5.0 - np.asarray(s, dtype=float)) * 2.5)


def eta(s):
    """Dyadic partition profile: supported in ``[4/5, 11/5]`` and equal to 1 on ``[6/5, 9/5]``.

    Written as ``psi(s) - psi(2 s)`` so the dyadic sum telescopes to 1 on ``s > 0``.
    """
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, _psi(s) - _psi(2.0 * s), 0.0)


@dataclass(frozen=True)
class CutoffFamily:
    delta: float = 0.5

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")


def cutoff_eval(family: CutoffFamily, which: str, s):
    """Evaluate one of the profiles ``chi0``, ``chi1`` or ``eta``."""
    funcs = {"chi0": chi0, "chi1": chi1, "eta": eta}
    if which not in funcs:
        raise ValueError(f"unknown cutoff {which!r}; expected one of {sorted(funcs)}")
    return funcs[which](s)


def cutoff_area(delta: float) -> float:
    """``integral chi0(|k|/delta) dk``, the value of ``I`` at ``t = 0``."""
    val, _ = integrate.quad(lambda r: chi0(r / delta) * r, 0, delta, points=[delta / 2], epsabs=1e-15, epsrel=1e-14)
    return 2 * np.pi * val


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class OscillatoryResult:
    value: complex
    abs_err_est: float
    panels_used: int
    converged: bool = True


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    max_residual: float
    t_range: tuple[float, float]


@dataclass(frozen=True)
class SearchConfig:
    """Velocity search settings.

    ``grid_radius`` bounds ``|v|``; ``grid_n`` is the side of each zoom grid;
    ``refine_iters`` zoom rounds shrink the window by ``shrink``; ``candidates``
    local maxima of the coarse scan are refined.
    """

    grid_radius: float = 2.0
    grid_n: int = 7
    refine_iters: int = 3
    shrink: float = 4.0
    candidates: int = 4
    pattern_iters: int = 12

    def __post_init__(self):
        if not self.grid_radius > 0:
            raise ValueError("grid_radius must be positive")
        if self.grid_n < 3:
            raise ValueError("grid_n must be at least 3")
        if self.refine_iters < 0 or self.candidates < 1:
            raise ValueError("refine_iters must be >= 0 and candidates >= 1")


# -- quadrature machinery -----------------------------------------------------


def is_dirac(K) -> bool:
    return float(spectral.phase(K)) < 1e-8


def max_gradient_on_disk(K, delta: float) -> float:
    """``max |grad phi|`` over the closed disk of radius ``delta`` about ``K`` (sampled, padded by 2%)."""
    K = np.asarray(K, dtype=float)
    rho = np.linspace(1e-6, delta, 60)[:, None]
    psi = np.linspace(0, 2 * np.pi, 120, endpoint=False)[None, :]
    pts = np.stack([K[0] + rho * np.cos(psi), K[1] + rho * np.sin(psi)], axis=-1).reshape(-1, 2)
    ph = spectral.phase(pts)
    pts = pts[ph > 1e-9]
    g = np.linalg.norm(spectral.gradient(pts), axis=1)
    return 1.02 * float(g.max())


def check_separation(K, delta: float) -> None:
    sep = spectral.separation_from_others(K)
    if sep <= 2 * delta:
        raise ValueError(
            f"cutoff radius delta={delta} too large: nearest other K2/Dirac point is {sep:.4f} away (needs > 2*delta)"
        )


def _gauss_panels(edges, counts):
    nodes, weights = [], []
    for (a, b), m in zip(zip(edges[:-1], edges[1:]), counts):
        x, w = np.polynomial.legendre.leggauss(int(m))
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


class LocalizedIntegral:
    """Quadrature for ``I(t; v)`` at fixed ``(K, delta, t)`` and many velocities.

    Parameters
    ----------
    K : array_like
        Centre frequency.
    delta : float
        Cutoff radius.
    t : float
        Time.
    vmax : float
        Largest ``|v|`` the rule must resolve.
    resolution : float
        Multiplies the number of nodes; values above 1 give a finer,
        independent rule used for error estimates.
    inner_radius : float, optional
        Radius of the polar disk around a Dirac point; ignored elsewhere.
    """

    def __init__(self, K, delta: float, t: float, vmax: float, resolution: float = 1.0, inner_radius: float | None = None):
        self.K = np.asarray(K, dtype=float)
        self.delta = float(delta)
        self.t = float(t)
        self.vmax = float(vmax)
        self.dirac = is_dirac(self.K)
        self.gmax = max_gradient_on_disk(self.K, self.delta)
        self.eps = None
        width = self.delta / 2
        if self.dirac:
            self.eps = inner_radius if inner_radius is not None else min(0.05, self.delta / 4)
            width = self.eps / 2
        at = abs(self.t)
        xi = at * (self.vmax + self.gmax) + MARGIN_WIDTH_PRODUCT / width
        h = 2 * np.pi / (xi * resolution)
        m = int(math.ceil(self.delta / h))
        self.h = self.delta / m
        self.x = np.arange(-m, m + 1) * self.h
        self.G = self._cartesian_samples()
        self.panels = self.x.size**2
        if self.dirac:
            self._build_polar(resolution)
            self.panels += self.polar_w.size

    def _radial_weight(self, r):
        w = chi0(r / self.delta)
        if self.dirac:
            w = w - chi0(r / self.eps)
        return w

    def _cartesian_samples(self) -> np.ndarray:
        n = self.x.size
        G = np.empty((n, n), dtype=complex)
        y = self.x[None, :]
        for s in range(0, n, ROW_BLOCK):
            xs = self.x[s : s + ROW_BLOCK, None]
            r = np.hypot(xs, y)
            w = self._radial_weight(r)
            kx = self.K[0] + xs + 0 * y
            ky = self.K[1] + y + 0 * xs
            ph = spectral.phase_cos(np.stack([kx, ky], axis=-1))
            G[s : s + ROW_BLOCK] = np.where(w != 0, w * np.exp(-1j * self.t * ph), 0) * self.h**2
        return G

    def _build_polar(self, resolution: float) -> None:
        eps = self.eps
        at = abs(self.t)
        speed = self.vmax + self.gmax
        n_psi = int(math.ceil((1.2 * at * eps * speed + 64) * resolution))
        edges = [0.0, eps / 2, 0.75 * eps, eps]
        counts = [
            math.ceil((0.7 * at * speed * (b - a) + 24) * resolution) for a, b in zip(edges[:-1], edges[1:])
        ]
        rho, wr = _gauss_panels(edges, counts)
        psi = np.arange(n_psi) * (2 * np.pi / n_psi)
        R, P = np.meshgrid(rho, psi, indexing="ij")
        off = np.stack([R * np.cos(P), R * np.sin(P)], axis=-1).reshape(-1, 2)
        ph = spectral.phase_cos(self.K + off)
        w = (wr[:, None] * rho[:, None] * chi0(rho / eps)[:, None] * (2 * np.pi / n_psi)) * np.ones_like(P)
        self.polar_off = off
        self.polar_w = w.reshape(-1) * np.exp(-1j * self.t * ph)

    def values(self, vx, vy) -> np.ndarray:
        """``I`` on the tensor grid ``vx x vy``; returns shape ``(len(vx), len(vy))``."""
        vx = np.atleast_1d(np.asarray(vx, dtype=float))
        vy = np.atleast_1d(np.asarray(vy, dtype=float))
        A = np.exp(1j * self.t * np.outer(vx, self.x))
        B = np.exp(1j * self.t * np.outer(vy, self.x))
        S = (A @ self.G) @ B.T
        if self.dirac:
            VX, VY = np.meshgrid(vx, vy, indexing="ij")
            S = S + self._polar_values(np.column_stack([VX.ravel(), VY.ravel()])).reshape(S.shape)
        shift = np.exp(1j * self.t * (vx[:, None] * self.K[0] + vy[None, :] * self.K[1]))
        return S * shift

    def values_at(self, vs) -> np.ndarray:
        """``I`` at an explicit list of velocities ``vs`` of shape ``(m, 2)``."""
        vs = np.atleast_2d(np.asarray(vs, dtype=float))
        A = np.exp(1j * self.t * np.outer(vs[:, 0], self.x))
        B = np.exp(1j * self.t * np.outer(vs[:, 1], self.x))
        S = np.einsum("mj,mj->m", A @ self.G, B)
        if self.dirac:
            S = S + self._polar_values(vs)
        return S * np.exp(1j * self.t * (vs @ self.K))

    def _polar_values(self, vs) -> np.ndarray:
        out = np.empty(len(vs), dtype=complex)
        for i, v in enumerate(vs):
            out[i] = np.exp(1j * self.t * (self.polar_off @ v)) @ self.polar_w
        return out

    def scan(self, radius: float):
        """Coarse ``|I|`` on the FFT velocity lattice inside ``|v| <= radius``.

        Returns velocity coordinates ``(vx, vy)`` and the moduli on that
        lattice (cone samples on the Cartesian grid are used as-is, which is
        adequate for locating maxima).
        """
        G = self.G
        if self.dirac:
            G = G + self._cone_samples()
        n = G.shape[0]
        F = np.fft.fftshift(np.abs(np.fft.ifft2(np.fft.ifftshift(G)))) * n * n
        freq = np.fft.fftshift(np.fft.fftfreq(n, d=self.h)) * 2 * np.pi
        v = freq / self.t
        keep = np.abs(v) <= radius
        return v[keep], v[keep], F[np.ix_(keep, keep)]

    def _cone_samples(self) -> np.ndarray:
        n = self.x.size
        out = np.zeros((n, n), dtype=complex)
        c = n // 2
        m = int(math.ceil(self.eps / self.h))
        lo, hi = max(c - m, 0), min(c + m + 1, n)
        xs = self.x[lo:hi]
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        w = chi0(np.hypot(X, Y) / self.eps)
        ph = spectral.phase_cos(np.stack([self.K[0] + X, self.K[1] + Y], axis=-1))
        out[lo:hi, lo:hi] = w * np.exp(-1j * self.t * ph) * self.h**2
        return out


def oscillatory_integral(
    K,
    delta: float,
    t: float,
    v,
    rtol: float = 1e-7,
    atol: float = 1e-12,
    max_levels: int = 4,
    enforce_separation: bool = True,
) -> OscillatoryResult:
    """Evaluate ``I(t; v)`` with an a-posteriori error estimate.

    Two rules of increasing resolution are compared; the resolution keeps
    growing by 1.25x until consecutive values agree to ``max(rtol |I|, atol)``
    or ``max_levels`` is exhausted, in which case ``converged`` is False.
    """
    K = np.asarray(K, dtype=float)
    v = np.asarray(v, dtype=float)
    if enforce_separation:
        check_separation(K, delta)
    vmax = float(np.linalg.norm(v))
    prev = LocalizedIntegral(K, delta, t, vmax, 1.0).values_at(v[None, :])[0]
    res = 1.0
    panels = 0
    err = np.inf
    for _ in range(max_levels):
        res *= 1.25
        rule = LocalizedIntegral(K, delta, t, vmax, res)
        cur = rule.values_at(v[None, :])[0]
        panels = rule.panels
        err = abs(cur - prev)
        if err <= max(rtol * abs(cur), atol):
            return OscillatoryResult(complex(cur), float(max(err, atol)), panels, True)
        prev = cur
    return OscillatoryResult(complex(prev), float(err), panels, False)


# -- sup over velocities --------------------------------------------------------


def _local_maxima(F: np.ndarray, count: int):
    """Indices of the ``count`` largest strict-or-equal local maxima of a 2D array."""
    pad = np.pad(F, 1, mode="constant", constant_values=-np.inf)
    core = pad[1:-1, 1:-1]
    mask = np.ones_like(F, dtype=bool)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx or dy:
                mask &= core >= pad[1 + dx : pad.shape[0] - 1 + dx, 1 + dy : pad.shape[1] - 1 + dy]
    idx = np.argwhere(mask)
    order = np.argsort(-F[mask], kind="stable")
    return [tuple(idx[i]) for i in order[:count]]


@dataclass
class SupResult:
    sup: float
    argmax_v: np.ndarray
    quad_err: float
    evaluations: int = 0
    history: list = field(default_factory=list)


def _zoom(rule: LocalizedIntegral, v0, step: float, cfg: SearchConfig, radius: float):
    best_v = np.asarray(v0, dtype=float)
    best = abs(rule.values_at(best_v[None, :])[0])
    evals = 1
    half = cfg.grid_n // 2
    offs = np.arange(-half, half + 1)
    for _ in range(cfg.refine_iters):
        vx = best_v[0] + offs * step
        vy = best_v[1] + offs * step
        vals = np.abs(rule.values(vx, vy))
        evals += vals.size
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        cand = np.array([vx[i], vy[j]])
        if vals[i, j] > best and np.linalg.norm(cand) <= radius:
            best, best_v = float(vals[i, j]), cand
        step /= cfg.shrink
    # compass pattern search on the final scale
    dirs = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    for _ in range(cfg.pattern_iters):
        trial = best_v + step * dirs
        vals = np.abs(rule.values_at(trial))
        evals += len(trial)
        k = int(np.argmax(vals))
        if vals[k] > best and np.linalg.norm(trial[k]) <= radius:
            best, best_v = float(vals[k]), trial[k]
        else:
            step /= 2
    return best, best_v, evals


def sup_over_velocities(K, delta: float, t: float, search: SearchConfig | None = None, enforce_separation: bool = True) -> SupResult:
    """Maximise ``|I(t; v)|`` over ``|v| <= grid_radius``.

    An FFT scan of the trapezoid samples gives ``|I|`` on a velocity lattice
    of spacing ``2 pi / (t L)``; the best local maxima are refined by
    shrinking zoom grids and a compass search, and the final value is
    re-evaluated on a finer independent rule to estimate the quadrature error.
    """
    cfg = search or SearchConfig()
    K = np.asarray(K, dtype=float)
    if enforce_separation:
        check_separation(K, delta)
    if t == 0:
        return SupResult(cutoff_area(delta), np.zeros(2), 0.0)
    rule = LocalizedIntegral(K, delta, t, cfg.grid_radius)
    vx, vy, F = rule.scan(cfg.grid_radius)
    VX, VY = np.meshgrid(vx, vy, indexing="ij")
    F = np.where(VX**2 + VY**2 <= cfg.grid_radius**2, F, -np.inf)
    spacing = float(vx[1] - vx[0])
    best, best_v, evals = -1.0, None, 0
    for i, j in _local_maxima(F, cfg.candidates):
        val, v, e = _zoom(rule, (vx[i], vy[j]), spacing / 2, cfg, cfg.grid_radius)
        evals += e
        if val > best:
            best, best_v = val, v
    fine = LocalizedIntegral(K, delta, t, cfg.grid_radius, resolution=1.25)
    fine_val = abs(fine.values_at(best_v[None, :])[0])
    err = abs(fine_val - best)
    return SupResult(float(fine_val), best_v, float(max(err, 1e-15)), evals + 1)


def sup_along_direction(K, delta: float, t: float, theta: float, search: SearchConfig | None = None) -> SupResult:
    """Maximise ``|I(t; s (cos theta, sin theta))|`` over ``0 < s <= grid_radius``."""
    cfg = search or SearchConfig()
    K = np.asarray(K, dtype=float)
    rule = LocalizedIntegral(K, delta, t, cfg.grid_radius)
    e = np.array([np.cos(theta), np.sin(theta)])
    vx, vy, F = rule.scan(cfg.grid_radius)
    spacing = float(vx[1] - vx[0])
    # lattice points within one spacing of the ray seed the 1D search
    VX, VY = np.meshgrid(vx, vy, indexing="ij")
    s = VX * e[0] + VY * e[1]
    d = np.abs(-VX * e[1] + VY * e[0])
    near = (d <= spacing) & (s > 0) & (s <= cfg.grid_radius)
    sv, fv = s[near], F[near]
    order = np.argsort(sv)
    sv, fv = sv[order], fv[order]
    peaks = [i for i in range(len(fv)) if (i == 0 or fv[i] >= fv[i - 1]) and (i == len(fv) - 1 or fv[i] >= fv[i + 1])]
    peaks = sorted(peaks, key=lambda i: -fv[i])[: cfg.candidates]
    best, best_s, evals = -1.0, None, 0
    for i in peaks:
        s0, step = float(sv[i]), spacing
        val = abs(rule.values_at((s0 * e)[None, :])[0])
        evals += 1
        for _ in range(cfg.refine_iters + cfg.pattern_iters):
            ss = s0 + step * np.arange(-3, 4)
            ss = ss[(ss > 0) & (ss <= cfg.grid_radius)]
            vals = np.abs(rule.values_at(ss[:, None] * e[None, :]))
            evals += len(ss)
            k = int(np.argmax(vals))
            if vals[k] > val:
                val, s0 = float(vals[k]), float(ss[k])
            step /= 3
        if val > best:
            best, best_s = val, s0
    fine = LocalizedIntegral(K, delta, t, cfg.grid_radius, resolution=1.25)
    fine_val = abs(fine.values_at((best_s * e)[None, :])[0])
    return SupResult(float(fine_val), best_s * e, float(max(abs(fine_val - best), 1e-15)), evals + 1)


# -- decay fits -----------------------------------------------------------------


def fit_decay_exponent(ts, sups) -> DecayFit:
    """Least-squares slope of ``log sup`` against ``log t``."""
    ts = np.asarray(ts, dtype=float)
    sups = np.asarray(sups, dtype=float)
    if ts.size < 6:
        raise ValueError(f"need at least 6 samples for a decay fit, got {ts.size}")
    if ts.shape != sups.shape:
        raise ValueError("ts and sups must have the same length")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("ts must be strictly increasing")
    if np.any(sups <= 0) or np.any(ts <= 0):
        raise ValueError("ts and sups must be positive")
    x, y = np.log(ts), np.log(sups)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return DecayFit(float(slope), float(intercept), float(np.abs(resid).max()), (float(ts[0]), float(ts[-1])))


EXPECTED_EXPONENT = {"K0": -1.0, "K1": -5.0 / 6.0, "K2": -2.0 / 3.0, "K3": -5.0 / 6.0}


def dyadic_times(tmin: float = 64, tmax: float = 8192) -> np.ndarray:
    lo, hi = math.log2(tmin), math.log2(tmax)
    if not (lo.is_integer() and hi.is_integer()):
        raise ValueError("tmin and tmax must be powers of two")
    return 2.0 ** np.arange(int(lo), int(hi) + 1)


@dataclass
class RateScan:
    fit: DecayFit
    ts: np.ndarray
    sups: list[SupResult]


def _sup_task(args):
    K, delta, t, cfg = args
    return sup_over_velocities(K, delta, t, cfg)


def _direction_task(args):
    K, delta, t, theta, cfg = args
    return sup_along_direction(K, delta, t, theta, cfg)


def _map(func, tasks, workers: int):
    if workers <= 1:
        return [func(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, tasks))


def rate_scan(K, delta: float, t_list, search: SearchConfig | None = None, workers: int = 1) -> RateScan:
    """Sup over velocities at each time and the fitted decay exponent."""
    cfg = search or SearchConfig()
    K = np.asarray(K, dtype=float)
    check_separation(K, delta)
    ts = np.asarray(t_list, dtype=float)
    sups = _map(_sup_task, [(K, delta, t, cfg) for t in ts], workers)
    fit = fit_decay_exponent(ts, [s.sup for s in sups])
    return RateScan(fit, ts, sups)


def dirac_directional_decay(
    delta: float, t_list, theta: float, eps: float, search: SearchConfig | None = None, workers: int = 1, check: bool = True
) -> RateScan:
    """Decay of the sup of ``|I|`` at the Dirac point along the velocity ray at angle ``theta``.

    ``theta`` must stay at least ``eps`` away from every multiple of ``pi/3``
    unless ``check`` is False (used to scan an excluded direction for contrast).
    """
    if check:
        dist = min(abs(theta - np.pi * n / 3) for n in range(-7, 8))
        if not (eps > 0 and dist >= eps):
            raise ValueError(f"theta={theta} is within eps={eps} of a multiple of pi/3")
    K = spectral.DIRAC_POINT
    ts = np.asarray(t_list, dtype=float)
    sups = _map(_direction_task, [(K, delta, t, theta, search or SearchConfig()) for t in ts], workers)
    fit = fit_decay_exponent(ts, [s.sup for s in sups])
    return RateScan(fit, ts, sups)
