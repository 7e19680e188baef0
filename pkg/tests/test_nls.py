import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeydisp import nls as N
from honeydisp.lattice import LatticeField, lebesgue_norm
from honeydisp.propagator import evolve_linear


def gaussian(n, width=2.0, amp=1.0):
    i = np.arange(n) - n // 2
    g = amp * np.exp(-(i[:, None] ** 2 + i[None, :] ** 2) / (2 * width**2))
    return LatticeField(np.stack([g, 0.5 * g], axis=-1).astype(complex))


def random_field(n, seed, amp=1.0):
    rng = np.random.default_rng(seed)
    return LatticeField(amp * (rng.standard_normal((n, n, 2)) + 1j * rng.standard_normal((n, n, 2))))


def test_zero_field_stays_zero():
    f = LatticeField(np.zeros((8, 8, 2), complex))
    out, stats = N.evolve_nls(f, N.NlsConfig(t_final=1.0, sample_every=0.5, dt=0.05))
    assert np.all(out.data == 0)
    assert stats.weighted_sup == 0.0
    assert N.weighted_decay_sup(stats, 4.0) == 0.0


def test_nonlinear_step_is_pure_phase_rotation():
    f = random_field(8, 0)
    out = N.nonlinear_step_exact(f, 0.7, N.NlsConfig(p=3.5))
    np.testing.assert_allclose(np.abs(out.data), np.abs(f.data), rtol=1e-15)


def test_single_site_rotation_example():
    data = np.zeros((4, 4, 2), complex)
    data[0, 0, 0] = 1.0
    out = N.nonlinear_step_exact(LatticeField(data), math.pi, N.NlsConfig(p=3, sign=1))
    assert out.data[0, 0, 0] == pytest.approx(-1.0, abs=1e-15)
    assert np.count_nonzero(out.data) == 1


@pytest.mark.parametrize("p", [3.0, 3.5, 5.0])
@pytest.mark.parametrize("sign", [1, -1])
def test_mass_conservation(p, sign):
    f = gaussian(16, amp=0.8)
    _, stats = N.evolve_nls(f, N.NlsConfig(p=p, sign=sign, dt=0.02, t_final=4.0, sample_every=1.0))
    m = np.array(stats.mass)
    assert np.abs(m - m[0]).max() <= 1e-12 * m[0]


def test_second_order_convergence():
    f = gaussian(16, amp=1.0)
    finals = []
    for dt in (0.04, 0.02, 0.01, 0.005):
        cfg = N.NlsConfig(p=3, dt=dt, t_final=1.0, sample_every=1.0)
        finals.append(N.evolve_nls(f, cfg)[0].data)
    d = [lebesgue_norm(b - a, 2) for a, b in zip(finals, finals[1:])]
    for a, b in zip(d, d[1:]):
        assert 3.5 < a / b < 4.5


@pytest.mark.parametrize("p", [3.0, 5.0])
def test_time_reversal(p):
    f = random_field(12, 3, amp=0.3)
    cfg = N.NlsConfig(p=p, dt=0.01, t_final=2.0, sample_every=2.0)
    fwd, _ = N.evolve_nls(f, cfg)
    back, _ = N.evolve_nls(fwd, cfg, backward=True)
    assert lebesgue_norm(back.data - f.data, 2) <= 1e-8 * lebesgue_norm(f, 2)


def test_zero_coupling_is_linear_flow():
    f = random_field(8, 4)
    cfg = N.NlsConfig(p=3, dt=0.05, t_final=2.0, sample_every=0.5, coupling=0.0)
    out, stats = N.evolve_nls(f, cfg)
    ref = evolve_linear(f, 2.0).data
    assert lebesgue_norm(out.data - ref, 2) <= 1e-12 * lebesgue_norm(f, 2)
    assert max(stats.scattering_diff) <= 1e-12


@pytest.mark.parametrize("p", [3.0, 5.0])
def test_small_data_linear_limit(p):
    f = gaussian(16, amp=1.0)
    t = 2.0
    ref = evolve_linear(f, t).data
    dev = []
    for eps in (1e-2, 5e-3):
        g = LatticeField(eps * f.data)
        out, _ = N.evolve_nls(g, N.NlsConfig(p=p, dt=0.01, t_final=t, sample_every=t))
        dev.append(lebesgue_norm(out.data / eps - ref, 2))
    # the relative deviation scales like eps^(p-1)
    assert dev[0] / dev[1] == pytest.approx(2 ** (p - 1), rel=0.05)


def test_scattering_state_is_contractive_on_mass():
    f = gaussian(32, width=1.5, amp=0.008)
    cfg = N.NlsConfig(p=5, r=4, dt=0.02)
    res = N.extract_scattering_state(f, cfg, [0, 1, 2, 4, 8])
    assert res.warning is None
    assert lebesgue_norm(res.u_plus, 2) ** 2 <= lebesgue_norm(f, 2) ** 2 + 1e-9
    assert len(res.differences) == 4
    assert all(d >= 0 for d in res.differences)


def test_scattering_warnings_and_checkpoint_validation():
    f = gaussian(16, amp=1.0)
    res = N.extract_scattering_state(f, N.NlsConfig(p=3, r=4, dt=0.05), [0, 1])
    assert "smallness" in res.warning and "admissible" in res.warning
    with pytest.raises(ValueError):
        N.extract_scattering_state(f, N.NlsConfig(dt=0.05), [1, 0.5])


def test_weighted_sup_scales_linearly_in_small_linear_data():
    f = gaussian(16)
    cfg = N.NlsConfig(dt=0.05, t_final=2.0, sample_every=0.5, coupling=0.0)
    a = N.evolve_nls(f, cfg)[1]
    b = N.evolve_nls(LatticeField(2 * f.data), cfg)[1]
    assert N.weighted_decay_sup(b, 4.0) == pytest.approx(2 * N.weighted_decay_sup(a, 4.0), rel=1e-12)
    with pytest.raises(ValueError):
        N.weighted_decay_sup(a, 2.0)


@pytest.mark.parametrize("r, p, expected", [(4, 3, 1.0), (4, 3.5, 7 / 6), (4, 5, 5 / 3), (6, 2, 4 / 3 * (0.5 - 5 / 12) * 2)])
def test_sigma_exponent_examples(r, p, expected):
    assert N.sigma_exponent(r, p) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(2.1, 20))
def test_sigma_exponent_continuous_at_branch_point(r):
    p = r - 1
    assert N.sigma_exponent(r, p - 1e-9) == pytest.approx(N.sigma_exponent(r, p), abs=1e-7)


def test_decay_weight_exponent():
    assert N.decay_weight_exponent(4) == pytest.approx(1 / 3)
    assert N.decay_weight_exponent(math.inf) == pytest.approx(2 / 3)


def test_strichartz_norm_admissibility():
    f = gaussian(8)
    ts = np.linspace(0, 2, 21)
    assert N.strichartz_norm(f, math.inf, 2, ts) == pytest.approx(lebesgue_norm(f, 2), rel=1e-12)
    assert N.strichartz_norm(f, 5, 5, ts) > 0
    with pytest.raises(ValueError):
        N.strichartz_norm(f, 4, 4, ts)
    with pytest.raises(ValueError):
        N.strichartz_norm(f, 1, 2, ts)


@pytest.mark.parametrize(
    "kwargs",
    [dict(p=1.0), dict(sign=0), dict(dt=0.0), dict(r=1.5), dict(t_final=-1.0), dict(sample_every=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        N.NlsConfig(**kwargs)


def test_time_span_must_be_multiple_of_step():
    with pytest.raises(ValueError):
        N.evolve_nls(gaussian(8), N.NlsConfig(dt=0.3, t_final=1.0, sample_every=1.0))


def test_wraparound_guard():
    with pytest.raises(ValueError, match="wraparound"):
        N.evolve_nls(gaussian(8), N.NlsConfig(dt=0.5, t_final=2.0, sample_every=1.0), guard=True)
    N.evolve_nls(gaussian(32), N.NlsConfig(dt=0.5, t_final=2.0, sample_every=1.0), guard=True)


def test_blowup_is_reported():
    f = LatticeField(np.full((4, 4, 2), 1e200, complex))
    with pytest.raises(FloatingPointError):
        with np.errstate(all="ignore"):
            N.evolve_nls(f, N.NlsConfig(p=3, dt=0.5, t_final=0.5, sample_every=0.5))


def test_stats_rows_shape():
    _, stats = N.evolve_nls(gaussian(8), N.NlsConfig(dt=0.05, t_final=1.0, sample_every=0.25))
    rows = list(stats.rows())
    assert len(rows) == 5 and all(len(r) == 6 for r in rows)
    np.testing.assert_allclose([r[0] for r in rows], [0, 0.25, 0.5, 0.75, 1.0])
