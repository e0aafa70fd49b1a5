"""Exponential transform, martingale bookkeeping, and the reference SPDE."""

import numpy as np
import pytest

from wasep import dynamics, fluctuations, model
from wasep.fluctuations import (bracket_terms, cosine_bump, gaussian_bump,
                                hopf_cole, inner, martingale_path,
                                mshe_reference)


@pytest.fixture(scope="module")
def params():
    return model.make_params(8, 0.5)


def random_bridge(rng, n):
    incs = np.array([1] * n + [-1] * n)
    rng.shuffle(incs)
    return np.concatenate([[0], np.cumsum(incs)]).astype(model.HEIGHT_DTYPE)


def test_hopf_cole_boundary_identity(params):
    rng = np.random.default_rng(0)
    t = 0.37
    for _ in range(5):
        field = hopf_cole(random_bridge(rng, 8), t, params)
        assert field.xi[0] == np.exp(params.lam * t)
        assert field.xi[-1] == np.exp(params.lam * t)
        assert np.allclose(field.xi, np.exp(-field.h))


def test_hopf_cole_zoomed_grid(params):
    field = hopf_cole(model.flat_initial(8), 0.0, params)
    assert field.x[8] == 0.0
    assert field.x[9] - field.x[8] == pytest.approx(1.0 / 16.0)
    assert len(field.x) == 17


def test_simulated_endpoints_pinned(params):
    """Snapshots keep the walls exactly at the deterministic tilt."""
    sched = dynamics.Schedule.from_macro(np.linspace(0.0, 0.2, 5), "kpz", params)
    traj = dynamics.simulate(params, model.flat_initial(8), sched, 3)
    za = (2 * params.N) ** (4 * params.alpha)
    for i, tau in enumerate(sched.times):
        field = hopf_cole(traj.heights[i], tau / za, params)
        assert field.xi[0] == np.exp(params.lam * field.t_macro)
        assert field.xi[-1] == np.exp(params.lam * field.t_macro)


def drift_and_qv_by_enumeration(S, xi, phi_vals, params):
    """Generator drift and jump-rate quadratic variation of <xi, phi>,
    summed corner by corner, on the fast clock."""
    n2 = 2 * params.N
    za = n2 ** (2 * params.alpha)
    fast = n2 ** (4 * params.alpha)
    drift = 0.0
    qv_rate = 0.0
    for k in range(1, n2):
        lap = S[k + 1] - 2 * S[k] + S[k - 1]
        if lap == 2:        # down corner flips up at rate p
            rate, new = params.p, xi[k] * np.exp(-2 * params.gamma)
        elif lap == -2:     # up corner flips down at rate 1 - p
            rate, new = 1.0 - params.p, xi[k] * np.exp(2 * params.gamma)
        else:
            continue
        jump = phi_vals[k] * (new - xi[k]) / za
        drift += fast * rate * jump
        qv_rate += fast * rate * jump ** 2
    return drift, qv_rate


def test_lattice_heat_equation_identities(params):
    """The compensator is exactly c <Lap xi, phi> and the bracket rate is
    exactly the closed form in xi and its differences, flip by flip."""
    rng = np.random.default_rng(4)
    phi = gaussian_bump(sigma=0.5, support=2.0)
    phi_vals = phi.lattice_values(params)
    za = (2 * params.N) ** (2 * params.alpha)
    for trial in range(20):
        S = random_bridge(rng, 8)
        t = rng.uniform(0.0, 0.3)
        xi = hopf_cole(S, t, params).xi
        drift_ref, qv_ref = drift_and_qv_by_enumeration(S, xi, phi_vals, params)
        # the tilt contributes lam <xi, phi> on top of the jump drift
        drift_ref += params.lam * inner(xi, phi_vals, params)
        lap = np.zeros_like(xi)
        lap[1:-1] = xi[2:] - 2 * xi[1:-1] + xi[:-2]
        drift = params.c * inner(lap, phi_vals, params)
        assert drift == pytest.approx(drift_ref, rel=1e-12, abs=1e-12)

        grad_prod = np.zeros_like(xi)
        grad_prod[1:-1] = (xi[2:] - xi[1:-1]) * (xi[1:-1] - xi[:-2])
        phi2 = phi_vals ** 2
        rate = ((2.0 * params.lam / za) * inner(xi ** 2, phi2, params)
                + (params.lam / za) * inner(xi * lap, phi2, params)
                - za * inner(grad_prod, phi2, params))
        assert rate == pytest.approx(qv_ref, rel=1e-12, abs=1e-12)


def test_exp_weights():
    dts = np.array([0.1, 0.5])
    assert np.array_equal(fluctuations._exp_weights(dts, 0.0), dts)
    w = fluctuations._exp_weights(dts, 2.0)
    assert w[0] == pytest.approx(np.expm1(0.2) / 2.0)
    # small-rate limit reduces to dt
    assert np.allclose(fluctuations._exp_weights(dts, 1e-12), dts)


@pytest.mark.parametrize("tf", [gaussian_bump(), gaussian_bump(0.5, 2.0),
                                cosine_bump()])
def test_second_derivative_matches_finite_difference(tf):
    x = np.linspace(-0.9 * tf.support, 0.9 * tf.support, 41)
    eps = 1e-5
    fd = (tf.phi(x + eps) - 2 * tf.phi(x) + tf.phi(x - eps)) / eps ** 2
    assert np.allclose(tf.d2phi(x), fd, atol=1e-4)


def test_inner_product(params):
    ones = np.ones(17)
    assert inner(ones, ones, params) == pytest.approx(15.0 / 16.0)


def test_bracket_tracks_qv(params_small=None):
    """Averaged over replicas, the realised quadratic variation sits near
    the integrated predictable bracket."""
    p = model.make_params(64, 1.0 / 3.0)
    phi = gaussian_bump(sigma=0.5, support=2.0)
    phi_vals = phi.lattice_values(p)
    za = (2 * p.N) ** (4 * p.alpha)
    t = 0.05
    sched = dynamics.Schedule(np.linspace(0.0, t * za, 201))
    qv_tot, br_tot = 0.0, 0.0
    for r in range(20):
        traj = dynamics.simulate(p, model.flat_initial(p.N), sched, 13, r)
        xi = np.array([hopf_cole(row, tau / za, p).xi
                       for row, tau in zip(traj.heights, sched.times)])
        out = bracket_terms(sched.times / za, xi, phi_vals, p)
        qv_tot += out["qv"]
        br_tot += out["bracket"]
        assert out["martingale"][0] == 0.0
    assert 0.5 < qv_tot / br_tot < 1.6


def test_martingale_path_constant_field(params):
    """A frozen field has no jumps; M reduces to minus the drift integral."""
    xi0 = hopf_cole(model.flat_initial(8), 0.0, params).xi
    times = np.array([0.0, 0.1, 0.3])
    xi = np.tile(xi0, (3, 1))
    phi_vals = gaussian_bump().lattice_values(params)
    m = martingale_path(times, xi, phi_vals, params)
    lap = np.zeros_like(xi0)
    lap[1:-1] = xi0[2:] - 2 * xi0[1:-1] + xi0[:-2]
    d = params.c * inner(lap, phi_vals, params)
    w = fluctuations._exp_weights(np.diff(times), params.lam)
    assert m[1] == pytest.approx(-d * w[0])
    assert m[2] == pytest.approx(-d * (w[0] + w[1]))


def test_residual_wrappers(params):
    xi0 = hopf_cole(model.flat_initial(8), 0.0, params).xi
    times = np.array([0.0, 0.1, 0.3])
    xi = np.tile(xi0, (3, 1))
    phi_vals = gaussian_bump().lattice_values(params)
    incs = fluctuations.martingale_residual(times, xi, phi_vals, params)
    m = martingale_path(times, xi, phi_vals, params)
    assert np.allclose(incs, np.diff(m))
    out = fluctuations.bracket_residual(times, xi, phi_vals, params)
    assert out["residual"] == pytest.approx(out["qv"] - out["bracket"])


def test_mshe_noise_off_is_identity():
    out = mshe_reference(t_end=0.01, support=2.0, n_cells=20, dt=1e-3,
                         replicas=3, seed=0, noise_scale=0.0)
    assert np.array_equal(out["xi"], np.ones(3))


def test_mshe_guards():
    with pytest.raises(ValueError):
        mshe_reference(0.01, 2.0, 21, 1e-3, 2, 0)     # odd cell count
    with pytest.raises(ValueError):
        mshe_reference(0.01, 2.0, 100, 1e-3, 2, 0)    # dt above dx^2/2
    with pytest.raises(ValueError):
        mshe_reference(0.0105, 2.0, 20, 1e-3, 2, 0)   # not a dt multiple


def test_mshe_mean_is_one():
    """The field is a mean-one martingale at every site."""
    out = mshe_reference(t_end=0.05, support=2.0, n_cells=40, dt=2e-3,
                         replicas=4000, seed=9)
    xi = out["xi"]
    se = xi.std(ddof=1) / np.sqrt(len(xi))
    assert abs(xi.mean() - 1.0) < 4 * se
    assert np.array_equal(out["h"], -np.log(xi) / 2.0)


def test_height_samples_determinism():
    p = model.make_params(16, 0.5)
    a = fluctuations.height_samples(p, 0.05, 4, seed=5)
    b = fluctuations.height_samples(p, 0.05, 4, seed=5)
    assert np.array_equal(a, b)
    assert a.shape == (4,)


def test_kpz_compare_smoke():
    plist = [model.make_params(8, 1.0 / 3.0), model.make_params(16, 1.0 / 3.0)]
    out = fluctuations.kpz_compare(plist, 0.05, replicas=40, seed=2,
                                   support=2.0, n_cells=20, dt=1e-3)
    assert len(out["ks_between"]) == 1
    assert 0.0 <= out["ks_between"][0] <= 1.0
    assert set(out["ks_to_reference"]) == {8, 16}
    for v in out["ks_to_reference"].values():
        assert 0.0 <= v <= 1.0


def test_equilibrium_stationarity_smoke():
    p = model.make_params(32, 0.5)
    out = fluctuations.equilibrium_stationarity(p, [0.5, 1.0], 50, seed=3)
    assert out["u_samples"].shape == (2, 50)
    assert np.isfinite(out["u_samples"]).all()
    assert out["limit_variance"] == pytest.approx(0.25)
