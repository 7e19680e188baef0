"""Discrete nonlinear Schrödinger equation on the honeycomb lattice.

Solves ``i u_t = -Delta u + sign * |u|^{p-1} u`` (componentwise power) by Strang
splitting. Both substeps are exact: the linear one through the spectral
multiplier and the nonlinear one as a pointwise phase rotation, so the scheme
conserves mass to rounding and is symmetric in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import DualField, LatticeField, fourier_forward, fourier_inverse, lebesgue_norm
from .propagator import apply_flow_hat, evolve_linear, flow_matrices, wraparound_horizon


@dataclass(frozen=True)
class NlsConfig:
    """Parameters of one NLS run.

    ``coupling`` scales the nonlinearity (0 gives the linear flow);
    ``sample_every`` is the spacing of recorded statistics.
    """

    p: float = 3.0
    sign: int = 1
    dt: float = 0.01
    r: float = 4.0
    t_final: float = 10.0
    sample_every: float = 0.5
    coupling: float = 1.0

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.r >= 2:
            raise ValueError(f"r must be at least 2, got {self.r}")
        if not self.t_final >= 0:
            raise ValueError(f"t_final must be non-negative, got {self.t_final}")
        if not self.sample_every > 0:
            raise ValueError("sample_every must be positive")


@dataclass
class TrajectoryStats:
    times: list[float] = field(default_factory=list)
    mass: list[float] = field(default_factory=list)
    l2: list[float] = field(default_factory=list)
    lr_norms: list[float] = field(default_factory=list)
    weighted_lr: list[float] = field(default_factory=list)
    scattering_diff: list[float] = field(default_factory=list)
    weighted_sup: float = 0.0

    def rows(self):
        return zip(self.times, self.mass, self.l2, self.lr_norms, self.weighted_lr, self.scattering_diff)


def decay_weight_exponent(r: float) -> float:
    """Exponent ``(4/3)(1/2 - 1/r)`` of the linear ``L^r`` decay."""
    return 4.0 / 3.0 * (0.5 - 1.0 / r)


def _rotate(data: np.ndarray, tau: float, cfg: NlsConfig) -> np.ndarray:
    if cfg.coupling == 0:
        return data
    amp = np.abs(data) ** (cfg.p - 1)
    return data * np.exp(-1j * cfg.sign * cfg.coupling * tau * amp)


def nonlinear_step_exact(f: LatticeField, dt: float, cfg: NlsConfig) -> LatticeField:
    """Exact flow of ``i w_t = sign |w|^{p-1} w`` over ``dt``, site by site and component by component."""
    return LatticeField(_rotate(f.data, dt, cfg))


def _steps(total: float, dt: float) -> int:
    n = round(total / dt)
    if not math.isclose(n * dt, total, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"time span {total} is not a multiple of dt={dt}")
    return int(n)


def strang_steps(data: np.ndarray, nsteps: int, dt: float, cfg: NlsConfig, flow_hat: np.ndarray | None = None) -> np.ndarray:
    """Advance raw field data by ``nsteps`` Strang steps of signed size ``dt``."""
    n1, n2 = data.shape[:2]
    m = flow_hat if flow_hat is not None else flow_matrices(n1, n2, dt)
    u = data
    for _ in range(nsteps):
        u = _rotate(u, dt / 2, cfg)
        u = np.fft.ifft2(apply_flow_hat(m, np.fft.fft2(u, axes=(0, 1))), axes=(0, 1))
        u = _rotate(u, dt / 2, cfg)
    return u


def evolve_nls(f0: LatticeField, cfg: NlsConfig, backward: bool = False, guard: bool = False):
    """Integrate to ``t_final`` recording statistics every ``sample_every``.

    Parameters
    ----------
    backward : bool
        Integrate towards ``-t_final`` (used for time-reversal checks).
    guard : bool
        Refuse horizons beyond the wraparound time of the supercell.

    Returns
    -------
    (LatticeField, TrajectoryStats)
    """
    if guard and cfg.t_final > wraparound_horizon(f0.n1, f0.n2):
        raise ValueError(
            f"t_final={cfg.t_final} exceeds the wraparound horizon {wraparound_horizon(f0.n1, f0.n2):.2f} of this grid"
        )
    dt = -cfg.dt if backward else cfg.dt
    per_sample = _steps(cfg.sample_every, cfg.dt)
    total = _steps(cfg.t_final, cfg.dt)
    m = flow_matrices(f0.n1, f0.n2, dt)
    wexp = decay_weight_exponent(cfg.r)
    stats = TrajectoryStats()
    u = f0.data.copy()
    w_prev = u
    t = 0.0
    done = 0

    def record(t, u):
        nonlocal w_prev
        l2 = lebesgue_norm(u, 2)
        lr = lebesgue_norm(u, cfg.r)
        w = evolve_linear(LatticeField(u), -t).data if t else u
        stats.times.append(t)
        stats.mass.append(l2**2)
        stats.l2.append(l2)
        stats.lr_norms.append(lr)
        stats.weighted_lr.append((1 + abs(t)) ** wexp * lr)
        stats.scattering_diff.append(lebesgue_norm(w - w_prev, 2))
        w_prev = w

    record(0.0, u)
    while done < total:
        k = min(per_sample, total - done)
        u = strang_steps(u, k, dt, cfg, m)
        done += k
        t = done * dt
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"non-finite values encountered at t={t}")
        record(t, u)
    stats.weighted_sup = max(stats.weighted_lr)
    return LatticeField(u), stats


def weighted_decay_sup(stats: TrajectoryStats, r: float) -> float:
    """``max_t (1 + t)^{(4/3)(1/2 - 1/r)} ||u(t)||_r`` over the recorded samples."""
    if not r > 2:
        raise ValueError(f"r must exceed 2, got {r}")
    if not stats.times:
        return 0.0
    wexp = decay_weight_exponent(r)
    return float(max((1 + abs(t)) ** wexp * lr for t, lr in zip(stats.times, stats.lr_norms)))


def sigma_exponent(r: float, p: float) -> float:
    """Decay rate of ``||u||_{r' p}^p`` in the scattering argument."""
    if not r > 2:
        raise ValueError(f"r must exceed 2, got {r}")
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if p >= r - 1:
        return 4.0 / 3.0 * (0.5 - 1.0 / r) * p
    rp = r / (r - 1)
    return 4.0 / 3.0 * (0.5 - 1.0 / (rp * p)) * p


def admissible_power(r: float) -> float:
    """Smallest ``p`` (exclusive) for which small-data scattering is guaranteed at this ``r``."""
    return 3 + max(3 / (r - 2) - 1.5, 0.5 - 2 / r)


@dataclass
class ScatteringResult:
    u_plus: LatticeField
    checkpoints: list[float]
    differences: list[float]
    initial_norm: float
    warning: str | None = None


def extract_scattering_state(f0: LatticeField, cfg: NlsConfig, checkpoint_times, smallness: float = 0.05) -> ScatteringResult:
    """Pull the solution back by the linear flow at each checkpoint.

    Returns the last pullback ``w(t) = exp(-it Delta) u(t)`` as ``u_plus`` and
    the successive differences ``||w(t_{i+1}) - w(t_i)||_2``.
    """
    ts = [float(t) for t in checkpoint_times]
    if any(b <= a for a, b in zip(ts, ts[1:])) or (ts and ts[0] < 0):
        raise ValueError("checkpoint times must be non-negative and increasing")
    rprime = cfg.r / (cfg.r - 1)
    norm0 = lebesgue_norm(f0, rprime)
    warnings = []
    if norm0 > smallness:
        warnings.append(f"||u0||_{{r'}}={norm0:.3g} exceeds the smallness threshold {smallness}")
    if cfg.p <= admissible_power(cfg.r):
        warnings.append(f"p={cfg.p} is outside the admissible range p > {admissible_power(cfg.r):.4g}")
    m = flow_matrices(f0.n1, f0.n2, cfg.dt)
    u = f0.data.copy()
    t_now = 0.0
    pulls = []
    for t in ts:
        u = strang_steps(u, _steps(t - t_now, cfg.dt) if t > t_now else 0, cfg.dt, cfg, m)
        t_now = t
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"non-finite values encountered at t={t}")
        pulls.append(evolve_linear(LatticeField(u), -t).data)
    diffs = [lebesgue_norm(b - a, 2) for a, b in zip(pulls, pulls[1:])]
    return ScatteringResult(LatticeField(pulls[-1]), ts, diffs, norm0, "; ".join(warnings) or None)


def strichartz_norm(f0: LatticeField, q: float, r: float, t_grid) -> float:
    """Trapezoid approximation of ``||exp(it Delta) f0||_{L^q_t L^r_x}`` over ``t_grid``."""
    if not (2 <= q <= math.inf and 2 <= r <= math.inf):
        raise ValueError("q and r must lie in [2, inf]")
    lhs = (0 if math.isinf(q) else 3 / q) + (0 if math.isinf(r) else 2 / r)
    if abs(lhs - 1) > 1e-12:
        raise ValueError(f"(q, r) = ({q}, {r}) is not admissible: 3/q + 2/r = {lhs}")
    ts = np.asarray(t_grid, dtype=float)
    g = fourier_forward(f0).data
    norms = np.array(
        [lebesgue_norm(fourier_inverse(DualField(apply_flow_hat(flow_matrices(f0.n1, f0.n2, t), g))), r) for t in ts]
    )
    if math.isinf(q):
        return float(norms.max())
    return float(np.trapezoid(norms**q, ts) ** (1 / q))
