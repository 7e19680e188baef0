"""Honeycomb geometry, periodic two-component fields and the lattice Fourier transform.

A site of the black sub-lattice is ``x = m1*v1 + m2*v2``; the white site in the
same unit cell sits at ``x + e1_offset``. A field on an ``n1 x n2`` periodic
supercell stores the pair ``(u_black, u_white)`` per cell in an array of shape
``(n1, n2, 2)`` (row-major over ``(m1, m2)``, components interleaved).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SQRT3 = np.sqrt(3.0)
CELL_AREA = SQRT3 / 2.0


@dataclass(frozen=True)
class LatticeGeometry:
    """Primitive vectors of the triangular sub-lattice and its dual."""

    v1: np.ndarray = field(default_factory=lambda: np.array([SQRT3 / 2, 0.5]))
    v2: np.ndarray = field(default_factory=lambda: np.array([SQRT3 / 2, -0.5]))
    k1d: np.ndarray = field(default_factory=lambda: np.array([2 * np.pi / SQRT3, 2 * np.pi]))
    k2d: np.ndarray = field(default_factory=lambda: np.array([2 * np.pi / SQRT3, -2 * np.pi]))
    e1_offset: np.ndarray = field(default_factory=lambda: np.array([1 / SQRT3, 0.0]))
    cell_area: float = CELL_AREA

    @property
    def V(self) -> np.ndarray:
        """Matrix with ``v1, v2`` as columns."""
        return np.column_stack([self.v1, self.v2])

    @property
    def Kd(self) -> np.ndarray:
        """Matrix with ``k1d, k2d`` as columns."""
        return np.column_stack([self.k1d, self.k2d])


GEOMETRY = LatticeGeometry()


class LatticeField:
    """Two-component field on a periodic ``n1 x n2`` supercell.

    Parameters
    ----------
    data : array_like, shape (n1, n2, 2)
        Complex amplitudes; ``data[m1, m2, 0]`` is the black component and
        ``data[m1, m2, 1]`` the white component of cell ``(m1, m2)``.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ValueError(f"field data must have shape (n1, n2, 2), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("n1 and n2 must be positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field contains non-finite values")
        arr.setflags(write=False)
        self.data = arr

    @property
    def n1(self) -> int:
        return self.data.shape[0]

    @property
    def n2(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @classmethod
    def zeros(cls, n1: int, n2: int) -> "LatticeField":
        return cls(np.zeros((n1, n2, 2), dtype=np.complex128))

    @classmethod
    def delta(cls, n1: int, n2: int, site=(0, 0), sub: str = "black", amplitude: complex = 1.0) -> "LatticeField":
        """Single-site datum at cell ``site`` on the requested sub-lattice."""
        arr = np.zeros((n1, n2, 2), dtype=np.complex128)
        arr[site[0] % n1, site[1] % n2, _sub_index(sub)] = amplitude
        return cls(arr)

    @classmethod
    def random(cls, n1: int, n2: int, rng: np.random.Generator) -> "LatticeField":
        arr = rng.standard_normal((n1, n2, 2)) + 1j * rng.standard_normal((n1, n2, 2))
        return cls(arr)

    def __getitem__(self, idx):
        m1, m2 = idx[0], idx[1]
        return self.data[(m1 % self.n1, m2 % self.n2) + tuple(idx[2:])]

    def __add__(self, other: "LatticeField") -> "LatticeField":
        return LatticeField(self.data + other.data)

    def __sub__(self, other: "LatticeField") -> "LatticeField":
        return LatticeField(self.data - other.data)

    def __mul__(self, c) -> "LatticeField":
        return LatticeField(self.data * c)

    __rmul__ = __mul__

    def modulus(self) -> np.ndarray:
        """Pointwise Euclidean modulus ``sqrt(|u_black|^2 + |u_white|^2)``."""
        return np.sqrt(np.sum(np.abs(self.data) ** 2, axis=2))

    def roll(self, s1: int, s2: int) -> "LatticeField":
        """Translate by ``s1*v1 + s2*v2``."""
        return LatticeField(np.roll(self.data, (s1, s2), axis=(0, 1)))


class DualField:
    """Fourier coefficients on the dual grid ``k = (j1/n1) k1d + (j2/n2) k2d``."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ValueError(f"dual data must have shape (n1, n2, 2), got {arr.shape}")
        self.data = arr

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def __mul__(self, c) -> "DualField":
        return DualField(self.data * c)

    __rmul__ = __mul__


def _sub_index(sub: str) -> int:
    if sub == "black":
        return 0
    if sub == "white":
        return 1
    raise ValueError(f"sub-lattice must be 'black' or 'white', got {sub!r}")


def site_position(geom: LatticeGeometry, m1: int, m2: int, sub: str = "black") -> np.ndarray:
    """Cartesian position of the site ``(m1, m2)`` on the given sub-lattice."""
    x = m1 * geom.v1 + m2 * geom.v2
    if _sub_index(sub) == 1:
        x = x + geom.e1_offset
    return x


def lebesgue_norm(f: LatticeField | np.ndarray, r: float) -> float:
    """Discrete Lebesgue norm with the unit-cell weight ``sqrt(3)/2``.

    Parameters
    ----------
    f : LatticeField or ndarray of shape (..., 2)
    r : float
        Exponent in ``[1, inf]``.
    """
    if not (r >= 1):
        raise ValueError(f"norm exponent must satisfy r >= 1, got {r}")
    data = f.data if isinstance(f, LatticeField) else np.asarray(f)
    mod = np.sqrt(np.sum(np.abs(data) ** 2, axis=-1))
    if np.isinf(r):
        return float(mod.max(initial=0.0))
    if r == 2:
        return float(np.sqrt(CELL_AREA * np.sum(mod**2)))
    top = mod.max(initial=0.0)
    if top == 0:
        return 0.0
    # scale first so large r does not overflow
    return float(top * (CELL_AREA * np.sum((mod / top) ** r)) ** (1.0 / r))


def dual_fractions(n: int) -> np.ndarray:
    """Fractions ``j/n`` wrapped to ``(-1/2, 1/2]`` for ``j = 0..n-1``."""
    s = np.arange(n) / n
    return np.where(s > 0.5, s - 1.0, s)


def dual_frequencies(n1: int, n2: int, geom: LatticeGeometry = GEOMETRY) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian frequencies ``(kx, ky)`` of the dual grid, each of shape ``(n1, n2)``."""
    s1 = dual_fractions(n1)[:, None]
    s2 = dual_fractions(n2)[None, :]
    kx = s1 * geom.k1d[0] + s2 * geom.k2d[0]
    ky = s1 * geom.k1d[1] + s2 * geom.k2d[1]
    return kx, ky


def fourier_forward(f: LatticeField) -> DualField:
    """``f_hat(k) = (sqrt(3)/2) * sum_x f(x) exp(-i k.x)`` on the dual grid."""
    return DualField(CELL_AREA * np.fft.fft2(f.data, axes=(0, 1)))


def fourier_inverse(g: DualField) -> LatticeField:
    """Inverse of :func:`fourier_forward`; weight ``2/(sqrt(3) n1 n2)`` per dual sample."""
    return LatticeField(np.fft.ifft2(g.data, axes=(0, 1)) / CELL_AREA)


def dual_weight(n1: int, n2: int) -> float:
    """Quadrature weight of one dual sample in the Parseval identity."""
    return 2.0 / (SQRT3 * n1 * n2)


def wrap_to_rhombic(geom: LatticeGeometry, k) -> np.ndarray:
    """Representative of ``k`` modulo the dual lattice with coordinates in ``(-1/2, 1/2]``."""
    k = np.asarray(k, dtype=float)
    # s = V^T k / (2 pi) are the coordinates in the (k1d, k2d) basis
    s = (k @ geom.V) / (2 * np.pi)
    s = s - np.ceil(s - 0.5)
    # snap values that landed on -1/2 by rounding onto the closed end
    s = np.where(np.isclose(s, -0.5, rtol=0, atol=1e-12), 0.5, s)
    return s @ geom.Kd.T


# -- field I/O ---------------------------------------------------------------

FIELD_LAYOUT = "row-major-interleaved"
FIELD_DTYPE = "complex-f64"


def _header(f: LatticeField) -> dict:
    return {"n1": f.n1, "n2": f.n2, "layout": FIELD_LAYOUT, "dtype": FIELD_DTYPE}


def save_field(f: LatticeField, path: str | Path) -> None:
    """Write a field as JSON (``.json``) or as a JSON header line plus raw little-endian data."""
    path = Path(path)
    head = _header(f)
    flat = f.data.reshape(-1)
    if path.suffix == ".json":
        payload = dict(head, data=np.column_stack([flat.real, flat.imag]).reshape(-1).tolist())
        path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
        return
    with open(path, "wb") as fh:
        fh.write((json.dumps(head, sort_keys=True) + "\n").encode("utf-8"))
        fh.write(flat.astype("<c16").tobytes())


def load_field(path: str | Path) -> LatticeField:
    """Read a field written by :func:`save_field`."""
    path = Path(path)
    if path.suffix == ".json":
        payload = json.loads(path.read_text(encoding="utf-8"))
        head = payload
        vals = np.asarray(payload["data"], dtype=float)
        flat = vals[0::2] + 1j * vals[1::2]
    else:
        raw = path.read_bytes()
        nl = raw.index(b"\n")
        head = json.loads(raw[:nl].decode("utf-8"))
        flat = np.frombuffer(raw[nl + 1 :], dtype="<c16")
    if head.get("layout") != FIELD_LAYOUT or head.get("dtype") != FIELD_DTYPE:
        raise ValueError(f"unsupported field header: {head}")
    n1, n2 = int(head["n1"]), int(head["n2"])
    if flat.size != 2 * n1 * n2:
        raise ValueError(f"expected {2 * n1 * n2} complex values, found {flat.size}")
    return LatticeField(flat.reshape(n1, n2, 2))


def export_field_csv(f: LatticeField, path: str | Path) -> None:
    """CSV export with columns ``m1, m2, re_bullet, im_bullet, re_circ, im_circ``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["m1", "m2", "re_bullet", "im_bullet", "re_circ", "im_circ"])
        for m1 in range(f.n1):
            for m2 in range(f.n2):
                b, c = f.data[m1, m2]
                w.writerow([m1, m2] + [repr(float(x)) for x in (b.real, b.imag, c.real, c.imag)])
