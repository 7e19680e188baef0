import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeydisp.lattice import (
    CELL_AREA,
    GEOMETRY,
    DualField,
    LatticeField,
    dual_weight,
    export_field_csv,
    fourier_forward,
    fourier_inverse,
    lebesgue_norm,
    load_field,
    save_field,
    site_position,
    wrap_to_rhombic,
)

SQ3 = np.sqrt(3)


def test_geometry_constants_and_dual_pairing():
    g = GEOMETRY
    np.testing.assert_allclose(g.v1, [SQ3 / 2, 0.5])
    np.testing.assert_allclose(g.v2, [SQ3 / 2, -0.5])
    np.testing.assert_allclose(g.k1d, [2 * np.pi / SQ3, 2 * np.pi])
    np.testing.assert_allclose(g.k2d, [2 * np.pi / SQ3, -2 * np.pi])
    assert np.abs(g.V.T @ g.Kd - 2 * np.pi * np.eye(2)).max() < 1e-14
    assert g.cell_area == pytest.approx(SQ3 / 2)


@pytest.mark.parametrize(
    "m1, m2, sub, expected",
    [
        (0, 0, "black", (0.0, 0.0)),
        (1, 0, "black", (SQ3 / 2, 0.5)),
        (0, 0, "white", (1 / SQ3, 0.0)),
        (2, -1, "white", (SQ3 / 2 + 1 / SQ3, 1.5)),
    ],
)
def test_site_position(m1, m2, sub, expected):
    np.testing.assert_allclose(site_position(GEOMETRY, m1, m2, sub), expected, atol=1e-15)


def test_site_position_rejects_unknown_sublattice():
    with pytest.raises(ValueError):
        site_position(GEOMETRY, 0, 0, "grey")


def test_field_validation_and_periodic_indexing():
    with pytest.raises(ValueError):
        LatticeField(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        LatticeField(np.full((2, 2, 2), np.nan))
    f = LatticeField.delta(4, 5, site=(1, 2), sub="white", amplitude=2.0)
    assert f[1, 2, 1] == 2.0
    assert f[5, -3, 1] == 2.0
    assert f.data.flags.writeable is False
    assert np.array_equal(f.roll(1, 1)[2, 3], [0, 2.0])


def test_lebesgue_norm_examples():
    assert lebesgue_norm(LatticeField.zeros(4, 4), 3) == 0.0
    assert lebesgue_norm(LatticeField.delta(4, 4), 2) == pytest.approx(CELL_AREA**0.5, rel=1e-15)
    arr = np.zeros((3, 3, 2), dtype=complex)
    arr[0, 0] = [3, 4]
    assert lebesgue_norm(LatticeField(arr), np.inf) == 5.0


def test_lebesgue_norm_rejects_small_exponent():
    with pytest.raises(ValueError):
        lebesgue_norm(LatticeField.zeros(2, 2), 0.5)


def test_lebesgue_norm_large_exponent_does_not_overflow():
    f = LatticeField.delta(4, 4, amplitude=1e3) + LatticeField.delta(4, 4, site=(1, 1), amplitude=1e3)
    val = lebesgue_norm(f, 400)
    assert np.isfinite(val)
    assert val == pytest.approx(1e3 * (2 * CELL_AREA) ** (1 / 400), rel=1e-12)


@pytest.mark.parametrize("r", [1.0, 1.5, 2.0, 4.0, 8.0])
def test_lebesgue_norm_matches_direct_sum(r):
    f = LatticeField.random(5, 6, np.random.default_rng(3))
    mod = np.sqrt((np.abs(f.data) ** 2).sum(axis=-1))
    assert lebesgue_norm(f, r) == pytest.approx((CELL_AREA * (mod**r).sum()) ** (1 / r), rel=1e-13)


def test_forward_of_delta_is_constant():
    g = fourier_forward(LatticeField.delta(6, 5)).data
    np.testing.assert_allclose(g[..., 0], CELL_AREA, atol=1e-15)
    np.testing.assert_allclose(g[..., 1], 0, atol=1e-15)


def test_forward_of_constant_concentrates_at_origin():
    g = fourier_forward(LatticeField(np.ones((4, 4, 2)))).data
    assert np.abs(g[0, 0]).min() > 1
    g[0, 0] = 0
    assert np.abs(g).max() < 1e-12


def test_forward_matches_defining_sum():
    rng = np.random.default_rng(0)
    n1, n2 = 4, 6
    f = LatticeField.random(n1, n2, rng)
    g = fourier_forward(f).data
    for j1, j2 in [(1, 2), (3, 5), (2, 0)]:
        k = (j1 / n1) * GEOMETRY.k1d + (j2 / n2) * GEOMETRY.k2d
        s = sum(f.data[m1, m2] * np.exp(-1j * k @ (m1 * GEOMETRY.v1 + m2 * GEOMETRY.v2)) for m1 in range(n1) for m2 in range(n2))
        np.testing.assert_allclose(g[j1, j2], CELL_AREA * s, atol=1e-12)


@pytest.mark.parametrize("n1", [4, 8, 16, 32])
@pytest.mark.parametrize("n2", [4, 8, 16, 32])
def test_roundtrip_and_parseval(n1, n2):
    f = LatticeField.random(n1, n2, np.random.default_rng(n1 * 100 + n2))
    g = fourier_forward(f)
    back = fourier_inverse(g)
    assert np.abs(back.data - f.data).max() / np.abs(f.data).max() < 1e-12
    lhs = lebesgue_norm(f, 2) ** 2
    rhs = dual_weight(n1, n2) * (np.abs(g.data) ** 2).sum()
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_inverse_is_linear():
    rng = np.random.default_rng(1)
    g = DualField(rng.standard_normal((4, 4, 2)) + 1j * rng.standard_normal((4, 4, 2)))
    a = 0.3 - 2j
    np.testing.assert_allclose(fourier_inverse(a * g).data, a * fourier_inverse(g).data, atol=1e-14)


@pytest.mark.parametrize(
    "k, expected",
    [
        ((0.0, 0.0), (0.0, 0.0)),
        (tuple(GEOMETRY.k1d), (0.0, 0.0)),
        (tuple(np.array([0, 4 * np.pi / 3]) + GEOMETRY.k2d), (0.0, 4 * np.pi / 3)),
    ],
)
def test_wrap_examples(k, expected):
    np.testing.assert_allclose(wrap_to_rhombic(GEOMETRY, k), expected, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-20, 20, allow_nan=False),
    st.floats(-20, 20, allow_nan=False),
    st.integers(-5, 5),
    st.integers(-5, 5),
)
def test_wrap_is_idempotent_periodic_and_in_cell(kx, ky, a, b):
    k = np.array([kx, ky])
    w = wrap_to_rhombic(GEOMETRY, k)
    s = w @ GEOMETRY.V / (2 * np.pi)
    assert np.all(s > -0.5 - 1e-12) and np.all(s <= 0.5 + 1e-12)
    np.testing.assert_allclose(wrap_to_rhombic(GEOMETRY, w), w, atol=1e-9)
    shifted = wrap_to_rhombic(GEOMETRY, k + a * GEOMETRY.k1d + b * GEOMETRY.k2d)
    np.testing.assert_allclose(shifted, w, atol=1e-9)


@pytest.mark.parametrize("suffix", [".json", ".bin"])
def test_field_file_roundtrip(tmp_path, suffix):
    f = LatticeField.random(3, 4, np.random.default_rng(2))
    path = tmp_path / f"field{suffix}"
    save_field(f, path)
    g = load_field(path)
    assert np.array_equal(f.data, g.data)


def test_field_file_header_is_self_describing(tmp_path):
    path = tmp_path / "f.json"
    save_field(LatticeField.delta(2, 3), path)
    head = json.loads(path.read_text())
    assert head["layout"] == "row-major-interleaved"
    assert head["dtype"] == "complex-f64"
    assert (head["n1"], head["n2"]) == (2, 3)
    assert len(head["data"]) == 2 * 2 * 2 * 3


def test_field_file_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n1": 1, "n2": 1, "layout": "column", "dtype": "complex-f64", "data": [0, 0, 0, 0]}))
    with pytest.raises(ValueError):
        load_field(path)


def test_csv_export(tmp_path):
    path = tmp_path / "f.csv"
    export_field_csv(LatticeField.delta(2, 2, site=(1, 0), sub="white", amplitude=1 + 2j), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "m1,m2,re_bullet,im_bullet,re_circ,im_circ"
    assert len(lines) == 5
    assert lines[3] == "1,0,0.0,0.0,1.0,2.0"
