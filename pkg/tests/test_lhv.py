import numpy as np
import pytest
import scipy.special as sp

from lhvlab import measurements as M
from lhvlab import qcore, states
from lhvlab.errors import InvalidArgument, InvalidUse, TruncationInsufficient
from lhvlab.lhv import (
    BVQB_TILT,
    HiddenState,
    TiltedSphereModel,
    almeida_iso_pm_model,
    almeida_iso_povm_model,
    almeida_noisy_pm_model,
    almeida_noisy_povm_model,
    barrett_model,
    bvqb_model,
    check_responses,
    gisin_gisin_model,
    hirsch_povm_model,
    multipartite_povm_model,
    nielsen_operators,
    raimat_model,
    schmidt_decomposition,
    simulate,
    solve_c3,
    toner_maps,
    toner_model,
    toth_acin_model,
    werner_model,
    worker_count,
)
from lhvlab.lhv.toner import c3_equation, legendre_normalized, spherical_harmonics, spherical_jn
from lhvlab.lhv.werner import sphere_hidden
from lhvlab.verify import Settings, born_behavior, compare

N = 200_000


def pms(d, n, rng):
    return [M.random_projective(d, rng) for _ in range(n)]


def povms(d, n, rng):
    return [M.random_povm(d, d + 1 + (i % 2), rng, 2 + (i % 2)) for i in range(n)]


def assert_matches(model, rho, per_party, seed=1, samples=N):
    settings = Settings.paired(per_party)
    rep = compare(simulate(model, settings, samples, seed).behavior(), born_behavior(rho, settings))
    assert rep["pass"], rep
    return rep


# -- Werner-type models ----------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 4])
def test_werner_model_matches_born(rng, d):
    assert_matches(werner_model(d), states.werner_state(d, (d - 1) / d), [pms(d, 3, rng), pms(d, 3, rng)])


def test_werner_model_bob_accepts_povm(rng):
    assert_matches(werner_model(3), states.werner_state(3, 2 / 3), [pms(3, 2, rng), povms(3, 2, rng)])


def test_werner_model_rejects_alice_povm():
    with pytest.raises(InvalidUse):
        werner_model(2).check(0, M.trine())
    with pytest.raises(InvalidUse):
        werner_model(3).check(1, M.computational(2))


@pytest.mark.parametrize("d", [2, 3])
def test_barrett_model_matches_born(rng, d):
    p = float(states.povm_threshold(d))
    assert_matches(barrett_model(d), states.werner_state(d, p), [povms(d, 3, rng), povms(d, 3, rng)])


def test_gisin_gisin_correlators(rng):
    a, b = qcore.uniform_sphere(2, rng)
    settings = Settings.paired([[M.qubit_pm(a)], [M.qubit_pm(b)]])
    beh = simulate(gisin_gisin_model(), settings, N, 3).behavior()
    assert beh.abstain
    acc = beh.accepted()
    # accepted statistics are those of the singlet
    assert abs(acc.correlator((0, 0)) + a @ b) < 0.01
    # Bob answers with probability 1/2 on average
    assert abs(beh.tables[0][:, 2].sum() - 0.5) < 0.01


def test_raimat_model_matches_born(rng):
    eta = np.array([np.cos(0.4), np.exp(0.3j) * np.sin(0.4)])
    assert_matches(raimat_model(eta), states.raimat_state(0.5, eta), [pms(2, 3, rng), pms(2, 3, rng)])


def test_bvqb_model_matches_born(rng):
    assert_matches(bvqb_model(), states.bvqb_state(0.5), [povms(2, 3, rng), pms(2, 3, rng)])


def test_literal_tilted_variant_state(rng):
    # tilt 1 with Alice deterministic realizes 1/2 psi- + 1/8 - 1/8 sz(x)1 + 1/12 1(x)sz
    s = qcore.singlet()
    z, i2 = qcore.PAULI_Z, np.eye(2)
    rho = qcore.density(0.5 * np.outer(s, s) + np.eye(4) / 8 - np.kron(z, i2) / 8 + np.kron(i2, z) / 12, (2, 2))
    assert_matches(TiltedSphereModel(1.0, 0), rho, [pms(2, 3, rng), pms(2, 3, rng)])


@pytest.mark.parametrize("tilt", [0.0, BVQB_TILT, 1.0, -0.4])
def test_sphere_hidden_tilt_moment(tilt):
    lam = sphere_hidden(np.random.default_rng(4), 400_000, tilt)["lam"]
    assert np.allclose(np.linalg.norm(lam, axis=1), 1)
    # E[lam_z] = tilt / 3 under density (1 + tilt z) / 4 pi
    assert abs(lam[:, 2].mean() - tilt / 3) < 4 * lam[:, 2].std() / np.sqrt(len(lam))


def test_tilted_model_validation():
    with pytest.raises(InvalidArgument):
        TiltedSphereModel(1.5)
    with pytest.raises(InvalidArgument):
        TiltedSphereModel(0.5, deterministic=2)


# -- Nielsen-based models ------------------------------------------------------------------

def test_schmidt_decomposition_reconstructs(rng):
    psi = qcore.haar_kets(9, 1, rng)[0]
    s, va, vb = schmidt_decomposition(psi)
    assert np.all(np.diff(s) <= 1e-15) and np.isclose(np.sum(s**2), 1)
    rebuilt = sum(s[k] * np.kron(va[:, k], vb[:, k]) for k in range(3))
    assert np.allclose(rebuilt, psi)


def test_nielsen_measurement_is_complete(rng):
    psi = qcore.haar_kets(9, 1, rng)[0]
    ops = nielsen_operators(psi)
    assert np.allclose(sum(x.conj().T @ x for x in ops.X), np.eye(3))
    for k in range(3):
        assert np.allclose(ops.U[k].conj().T @ ops.U[k], np.eye(3))


@pytest.mark.parametrize("d", [2, 3])
def test_almeida_isotropic_models(rng, d):
    pm = almeida_iso_pm_model(d)
    assert_matches(pm, states.isotropic_state(d, float(pm.p)), [pms(d, 3, rng), pms(d, 3, rng)])
    pv = almeida_iso_povm_model(d)
    assert_matches(pv, states.isotropic_state(d, float(pv.p)), [povms(d, 3, rng), povms(d, 3, rng)])


@pytest.mark.parametrize("d", [2, 3])
def test_almeida_noisy_models(rng, d):
    psi = qcore.haar_kets(d * d, 1, rng)[0]
    pm = almeida_noisy_pm_model(psi, d)
    assert_matches(pm, states.noisy_state(psi, float(pm.p)), [pms(d, 3, rng), pms(d, 3, rng)])
    pv = almeida_noisy_povm_model(psi, d)
    assert_matches(pv, states.noisy_state(psi, float(pv.p)), [povms(d, 3, rng), povms(d, 3, rng)])


def test_almeida_noisy_parameters_for_maximal_entanglement():
    from fractions import Fraction

    model = almeida_noisy_pm_model(qcore.max_entangled(3), 3)
    # p_iso = 5/12, q = 1/(1 + (7/12) 2) = 6/13, p = (5/12)/(7/6 + 1) = 5/26
    assert model.p_iso == Fraction(5, 12)
    assert model.q == pytest.approx(6 / 13)
    assert model.p == Fraction(5, 26)
    assert np.allclose(model.sigma_bar, 1 / 3)


# -- lifting and three-qubit model -----------------------------------------------------------

def test_hirsch_lift_matches_born(rng):
    sa, sb = np.diag([0.7, 0.3]), np.diag([0.25, 0.75])
    rho = states.hirsch_lift_state(states.werner_state(2, 0.5), sa, sb)
    assert_matches(hirsch_povm_model(werner_model(2), sa, sb), rho, [povms(2, 3, rng), povms(2, 3, rng)])


def test_lift_validation():
    with pytest.raises(InvalidUse):
        hirsch_povm_model(gisin_gisin_model(), np.eye(2) / 2, np.eye(2) / 2)
    with pytest.raises(InvalidArgument):
        multipartite_povm_model(werner_model(2), [np.eye(2) / 2])
    with pytest.raises(InvalidArgument):
        hirsch_povm_model(toth_acin_model(), np.eye(2) / 2, np.eye(2) / 2)


def test_lift_branches_sum_to_response(rng):
    model = hirsch_povm_model(werner_model(2), np.diag([0.6, 0.4]), np.eye(2) / 2)
    m = M.trine()
    hidden = model.sample(rng, 100)
    res = model.respond_resolved(1, m, hidden)
    assert res.shape == (100, 2, 3)
    assert np.allclose(res.sum(axis=1), model.respond(1, m, hidden))
    assert check_responses(model.respond(1, m, hidden)) < 1e-12


@pytest.mark.parametrize("a", [(1.0, 1.0, 1.0), (0.5, -0.3, 0.9), (0.0, 0.0, 0.0)])
def test_toth_acin_model_matches_born(rng, a):
    per_party = [pms(2, 3, rng), povms(2, 3, rng), povms(2, 3, rng)]
    assert_matches(toth_acin_model(*a), states.toth_acin_class(*a), per_party)


def test_multipartite_lift_matches_born(rng):
    sig = [np.diag([0.8, 0.2]), np.eye(2) / 2, np.diag([0.3, 0.7])]
    rho = states.multipartite_lift_state(states.toth_acin_class(1, 1, 1), sig)
    per_party = [povms(2, 2, rng) for _ in range(3)]
    assert_matches(multipartite_povm_model(toth_acin_model(), sig), rho, per_party)


# -- Toner ---------------------------------------------------------------------------------------

def test_c3_value():
    c3 = solve_c3()
    assert c3 == pytest.approx(1.035976371889265, abs=1e-12)
    assert abs(c3_equation(c3)) < 1e-12
    assert 2 * c3 / np.pi == pytest.approx(0.6595230, abs=1e-7)


def test_spherical_bessel_against_scipy():
    for x in (0.3, 1.0359, 5.0):
        ours = spherical_jn(40, x)
        ref = sp.spherical_jn(np.arange(41), x)
        big = np.abs(ref) > 1e-250
        assert np.allclose(ours[big], ref[big], rtol=1e-12, atol=0)


def test_spherical_harmonics_against_scipy(rng):
    vecs = qcore.uniform_sphere(20, rng)
    lmax = 7
    ours = spherical_harmonics(lmax, vecs)
    theta = np.arccos(vecs[:, 2])
    phi = np.arctan2(vecs[:, 1], vecs[:, 0])
    for l in range(lmax + 1):
        for m in range(-l, l + 1):
            ref = sp.sph_harm_y(l, m, theta, phi)
            assert np.allclose(ours[:, l, m + lmax], ref, atol=1e-13)


def test_legendre_normalized_l0():
    assert np.allclose(legendre_normalized(3, np.array([0.2]))[0, 0], np.sqrt(1 / (4 * np.pi)))


def test_toner_maps_identities(rng):
    maps = toner_maps(25)
    a, b = qcore.uniform_sphere(10, rng), qcore.uniform_sphere(10, rng)
    assert maps.norm_residual() < 1e-8
    fa, gb = maps.f(a), maps.g(b)
    assert np.allclose(np.sum(fa * gb, 1), -np.sin(maps.c3 * np.sum(a * b, 1)), atol=1e-10)
    with pytest.raises(TruncationInsufficient):
        toner_maps(3)


def test_toner_model_correlator(rng):
    a, b = qcore.uniform_sphere(2, rng)
    settings = Settings.paired([[M.qubit_pm(a)], [M.qubit_pm(b)]])
    model = toner_model(25)
    e = simulate(model, settings, N, 9).behavior().correlator((0, 0))
    expect = -2 * solve_c3() / np.pi * (a @ b)
    assert abs(e - expect) < 4 * np.sqrt((1 - expect**2) / N)


def test_toner_full_stream_agrees_with_restricted(rng):
    model = toner_model(10)
    m1, m2 = M.qubit_pm([0, 0, 1]), M.qubit_pm([1, 0, 0])
    full = model.sample(np.random.default_rng(0), 1000)
    assert full["z"].shape[1] == model.maps.dim
    r = model.respond(0, m1, full)
    assert check_responses(r) == 0
    with pytest.raises(TruncationInsufficient):
        toner_model(5)
    with pytest.raises(InvalidUse):
        model.check(0, M.trine())
    _ = m2


# -- simulation driver --------------------------------------------------------------------------

def test_simulate_independent_of_workers(rng):
    settings = Settings.paired([pms(3, 4, rng), pms(3, 4, rng)])
    a = simulate(werner_model(3), settings, 20_000, 11, workers=1)
    b = simulate(werner_model(3), settings, 20_000, 11, workers=3)
    for x, y in zip(a.counts, b.counts):
        assert np.array_equal(x, y)


def test_simulate_counts_total(rng):
    settings = Settings.product([pms(2, 2, rng), povms(2, 2, rng)])
    res = simulate(barrett_model(2), settings, 12_345, 2, chunk=1000)
    assert all(c.sum() == 12_345 for c in res.counts)
    assert len(res.counts) == 4


def test_simulate_validation(rng):
    settings = Settings.paired([pms(2, 1, rng), pms(2, 1, rng)])
    with pytest.raises(InvalidArgument):
        simulate(werner_model(2), settings, 0, 1)
    with pytest.raises(InvalidArgument):
        simulate(toth_acin_model(), settings, 10, 1)
    with pytest.raises(InvalidUse):
        simulate(werner_model(2), Settings.paired([[M.trine()], [M.trine()]]), 10, 1)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("LHVLAB_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("LHVLAB_THREADS", "many")
    with pytest.raises(InvalidArgument):
        worker_count()


def test_hidden_state_take():
    h = HiddenState("ket", {"lam": np.arange(6).reshape(3, 2)}, {"x": 1})
    t = h.take([0, 2])
    assert len(t) == 2 and t.meta == {"x": 1}


def test_check_responses_flags_bad_rows():
    assert check_responses(np.array([[0.5, 0.5]])) == 0
    assert check_responses(np.array([[0.7, 0.5]])) == pytest.approx(0.2)
    assert check_responses(np.array([[0.3, 0.5]]), abstain=True) == 0
    assert check_responses(np.array([[-0.1, 0.5]]), abstain=True) == pytest.approx(0.1)


def test_model_descriptors_are_json():
    import json

    for m in (werner_model(2), barrett_model(3), bvqb_model(), raimat_model([1, 0]), toth_acin_model(),
              almeida_iso_pm_model(2), toner_model(10),
              hirsch_povm_model(werner_model(2), np.eye(2) / 2, np.eye(2) / 2)):
        assert json.loads(m.to_json())["model"] == m.name
