import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from honeydisp import oscillatory as O
from honeydisp import spectral as S
from honeydisp.lattice import GEOMETRY, wrap_to_rhombic

K0 = np.array([0.3, 0.2])
K2 = S.K2_POINT
KSTAR = S.DIRAC_POINT
FAST = O.SearchConfig(grid_radius=1.5, candidates=2, refine_iters=2, pattern_iters=6)


def polar_oracle(K, delta, t, v):
    """Independent adaptive polar quadrature of the localized integral."""
    K, v = np.asarray(K, float), np.asarray(v, float)

    def f(rho, psi, part):
        k = K + rho * np.array([np.cos(psi), np.sin(psi)])
        val = np.exp(-1j * t * (S.phase_cos(k) - v @ k)) * O.chi0(rho / delta) * rho
        return val.real if part == 0 else val.imag

    out = []
    for part in (0, 1):
        val, _ = integrate.dblquad(lambda r, p: f(r, p, part), 0, 2 * np.pi, 0, delta, epsabs=1e-11, epsrel=1e-10)
        out.append(val)
    return complex(out[0], out[1])


def test_cutoff_examples():
    fam = O.CutoffFamily(0.5)
    assert O.cutoff_eval(fam, "chi0", 0.0) == 1.0
    assert O.cutoff_eval(fam, "chi0", 2.0) == 0.0
    s = np.linspace(-3, 3, 601)
    np.testing.assert_allclose(O.cutoff_eval(fam, "chi0", s) + O.cutoff_eval(fam, "chi1", s), 1.0, atol=1e-15)
    with pytest.raises(ValueError):
        O.cutoff_eval(fam, "chi2", 0.0)
    with pytest.raises(ValueError):
        O.CutoffFamily(0.0)


def test_chi0_plateau_support_monotone():
    s = np.linspace(0, 1.5, 3001)
    c = O.chi0(s)
    assert np.all(c[s <= 0.5] == 1) and np.all(c[s >= 1] == 0)
    assert np.all(np.diff(c) <= 0)


def test_eta_plateau_support_and_partition():
    s = np.linspace(0, 3, 6001)
    e = O.eta(s)
    assert np.all(e[(s <= 0.8) | (s >= 2.2)] == 0)
    assert np.allclose(e[(s >= 1.2) & (s <= 1.8)], 1.0, atol=1e-15)
    xs = np.geomspace(1e-3, 1e3, 2001)
    total = sum(O.eta(xs / 2.0**j) for j in range(-15, 16))
    assert np.abs(total - 1).max() < 1e-10


def test_cutoff_area_matches_direct_integral():
    area = O.cutoff_area(0.5)
    val, _ = integrate.dblquad(lambda y, x: O.chi0(np.hypot(x, y) / 0.5), -0.5, 0.5, -0.5, 0.5, epsabs=1e-11)
    assert area == pytest.approx(val, rel=1e-8)
    assert np.pi * 0.25**2 < area < np.pi * 0.5**2


@pytest.mark.parametrize(
    "K, delta, t, v",
    [
        (K0, 0.5, 5.0, (0.1, -0.2)),
        (K0, 0.5, 20.0, (-0.25, -0.15)),
        (K2, 0.5, 30.0, (0.0, -0.9)),
        (KSTAR, 0.4, 10.0, (0.5, 0.3)),
    ],
)
def test_integral_matches_independent_oracle(K, delta, t, v):
    res = O.oscillatory_integral(K, delta, t, v)
    assert res.converged
    ref = polar_oracle(K, delta, t, v)
    assert abs(res.value - ref) <= 1e-7 * max(abs(ref), 1e-3)


@pytest.mark.parametrize("K, delta", [(K0, 0.5), (KSTAR, 0.4)])
def test_zero_time_gives_cutoff_area(K, delta):
    for v in [(0, 0), (1.3, -0.2)]:
        assert O.oscillatory_integral(K, delta, 0.0, v).value == pytest.approx(O.cutoff_area(delta), rel=1e-9)


@pytest.mark.parametrize("K, delta", [(K0, 0.5), (K2, 0.5), (KSTAR, 0.4)])
def test_conjugation_symmetry(K, delta):
    v = np.array([0.2, -0.4])
    a = O.oscillatory_integral(K, delta, 40.0, v).value
    b = O.oscillatory_integral(K, delta, -40.0, v).value
    assert abs(a - np.conj(b)) <= 1e-8 * max(abs(a), 1e-6)


def test_dirac_self_convergence_at_t100():
    a = O.oscillatory_integral(KSTAR, 0.4, 100.0, (0, 0), rtol=1e-7).value
    b = O.oscillatory_integral(KSTAR, 0.4, 100.0, (0, 0), rtol=1e-10, max_levels=6).value
    assert abs(a - b) <= 1e-6 * abs(b)


@settings(max_examples=12, deadline=None)
@given(
    st.sampled_from(["K0", "K2", "K3"]),
    st.floats(1, 512),
    st.floats(-1.2, 1.2),
    st.floats(-1.2, 1.2),
)
def test_error_estimate_and_modulus_bound(which, t, vx, vy):
    K, delta = {"K0": (K0, 0.5), "K2": (K2, 0.5), "K3": (KSTAR, 0.4)}[which]
    res = O.oscillatory_integral(K, delta, t, (vx, vy))
    assert res.abs_err_est >= 0
    finer = O.LocalizedIntegral(K, delta, t, float(np.hypot(vx, vy)), resolution=2.0).values_at([[vx, vy]])[0]
    assert abs(finer - res.value) <= 3 * res.abs_err_est + 1e-12
    assert abs(res.value) <= O.cutoff_area(delta) * (1 + 1e-9)


def test_separation_is_enforced():
    with pytest.raises(ValueError):
        O.oscillatory_integral(K2, 0.6, 1.0, (0, 0))
    with pytest.raises(ValueError):
        O.sup_over_velocities(KSTAR, 0.53, 10.0)


def test_vectorised_values_agree_with_pointwise():
    rule = O.LocalizedIntegral(KSTAR, 0.4, 50.0, 1.0)
    vx = np.array([-0.3, 0.1, 0.7])
    vy = np.array([0.2, -0.5])
    grid = rule.values(vx, vy)
    pts = np.array([[a, b] for a in vx for b in vy])
    np.testing.assert_allclose(grid.reshape(-1), rule.values_at(pts), atol=1e-13)


def test_symmetry_covariance_of_modulus():
    K = K0
    v = np.array([0.3, -0.6])
    base = abs(O.oscillatory_integral(K, 0.5, 60.0, v).value)
    for A in S.symmetry_group()[:6]:
        C = S.cartesian_map(A)
        Kc = wrap_to_rhombic(GEOMETRY, C @ K)
        val = abs(O.oscillatory_integral(Kc, 0.5, 60.0, C @ v).value)
        assert val == pytest.approx(base, rel=1e-6)


def test_sup_at_zero_time_is_area():
    res = O.sup_over_velocities(K0, 0.5, 0.0)
    assert res.sup == pytest.approx(O.cutoff_area(0.5))


def test_sup_is_symmetry_invariant():
    Kr, A = S.symmetry_reduce(np.array([0.0, -np.pi]))
    a = O.sup_over_velocities(np.array([0.0, -np.pi]), 0.5, 64.0, FAST).sup
    b = O.sup_over_velocities(Kr, 0.5, 64.0, FAST).sup
    assert a == pytest.approx(b, rel=1e-6)


def test_sup_dominates_samples_and_decays_at_k2():
    s64 = O.sup_over_velocities(K2, 0.5, 64.0)
    s1024 = O.sup_over_velocities(K2, 0.5, 1024.0)
    assert s64.sup > s1024.sup
    rule = O.LocalizedIntegral(K2, 0.5, 1024.0, 2.0)
    rng = np.random.default_rng(0)
    probes = rng.uniform(-1.5, 1.5, size=(50, 2))
    assert np.abs(rule.values_at(probes)).max() <= s1024.sup * (1 + 1e-6)
    # the sup sits at the gradient of the phase at K2
    np.testing.assert_allclose(s1024.argmax_v, S.gradient(K2), atol=0.05)


def test_fit_synthetic_power_laws():
    ts = O.dyadic_times(64, 8192)
    assert O.fit_decay_exponent(ts, 3.0 * ts ** (-2 / 3)).exponent == pytest.approx(-2 / 3, abs=1e-12)
    assert O.fit_decay_exponent(ts, np.full(ts.shape, 0.2)).exponent == pytest.approx(0, abs=1e-12)
    rng = np.random.default_rng(1)
    for _ in range(20):
        noisy = ts ** (-5 / 6) * (1 + 0.01 * rng.standard_normal(ts.size))
        assert O.fit_decay_exponent(ts, noisy).exponent == pytest.approx(-5 / 6, abs=0.02)


@pytest.mark.parametrize(
    "ts, sups",
    [([1, 2, 3, 4, 5], [1, 1, 1, 1, 1]), ([1, 2, 3, 3, 5, 6], [1] * 6), ([1, 2, 3, 4, 5, 6], [1, 1, 0, 1, 1, 1])],
)
def test_fit_refusals(ts, sups):
    with pytest.raises(ValueError):
        O.fit_decay_exponent(ts, sups)


def test_dyadic_times():
    np.testing.assert_array_equal(O.dyadic_times(64, 8192), 2.0 ** np.arange(6, 14))
    with pytest.raises(ValueError):
        O.dyadic_times(60, 8192)


def test_directional_precondition():
    with pytest.raises(ValueError):
        O.dirac_directional_decay(0.4, O.dyadic_times(64, 2048), 0.1, 0.3)
    with pytest.raises(ValueError):
        O.dirac_directional_decay(0.4, O.dyadic_times(64, 2048), np.pi / 3 + 0.2, 0.3)


def _dirac_stabiliser():
    out = []
    for A in S.symmetry_group():
        C = S.cartesian_map(A)
        if np.linalg.norm(wrap_to_rhombic(GEOMETRY, C @ KSTAR) - KSTAR) < 1e-9:
            out.append(C)
    return out


def test_directional_sixfold_symmetry():
    stab = _dirac_stabiliser()
    assert len(stab) == 6
    theta = np.pi / 6 + 0.1
    base = O.sup_along_direction(KSTAR, 0.4, 64.0, theta, FAST)
    e = np.array([np.cos(theta), np.sin(theta)])
    for C in stab:
        ce = C @ e
        other = O.sup_along_direction(KSTAR, 0.4, 64.0, float(np.arctan2(ce[1], ce[0])), FAST)
        assert other.sup == pytest.approx(base.sup, rel=1e-6)


def test_rate_scan_on_generic_point_short_range():
    scan = O.rate_scan(K0, 1.0, O.dyadic_times(128, 4096))
    assert len(scan.sups) == 6
    assert scan.fit.exponent == pytest.approx(-1.0, abs=0.08)
    assert all(s.quad_err < 1e-6 * s.sup for s in scan.sups)
