from fractions import Fraction

import numpy as np
import pytest

from lhvlab import measurements as M
from lhvlab import qcore, states
from lhvlab.errors import CapacityExceeded, InvalidArgument, InvalidDimension
from lhvlab.verify import (
    Behavior,
    BellInequality,
    Scenario,
    Settings,
    bloch_halfsphere_oracle,
    born_behavior,
    chsh_correlator_form,
    chsh_probability_form,
    chsh_value,
    closed_form_behavior,
    compare,
    correlation_tensor,
    deterministic_strategies,
    dof_count,
    halfsphere_closed_forms,
    kg_constants,
    local_bound,
    maximize_chsh,
    monotonicity_flags,
    no_signalling_check,
    simplex_closed_form,
    simplex_integral_oracle,
    simplex_integral_oracles,
    threshold_rows,
    thresholds_csv,
)
from lhvlab.verify.behavior import born_table
from lhvlab.verify.closed_form import hirsch_table, isotropic_table, werner_table


# -- behaviors and comparison -------------------------------------------------------------------

def _mc(tables, samples, keys=None):
    keys = keys or [(j,) * tables[0].ndim for j in range(len(tables))]
    ses = [np.sqrt(t * (1 - t) / samples) for t in tables]
    return Behavior(keys, tables, ses, {"kind": "mc", "samples": samples})


def test_born_table_normalized(rng):
    rho = states.werner_state(3, 0.4)
    ms = (M.random_povm(3, 4, rng, 3), M.random_projective(3, rng))
    t = born_table(rho, ms)
    assert t.shape == (3, 3) and np.isclose(t.sum(), 1) and np.all(t >= -1e-15)


def test_born_table_rejects_dimension_mismatch(rng):
    with pytest.raises(InvalidArgument):
        born_table(states.werner_state(3, 0.4), (M.computational(2), M.computational(3)))


def test_compare_rule():
    ref = Behavior([(0, 0)], [np.array([[0.25, 0.25], [0.25, 0.25]])])
    # SE = sqrt(0.25 * 0.75 / 1e4) = 0.00433; 4 SE = 0.0173
    ok = _mc([np.array([[0.26, 0.24], [0.25, 0.25]])], 10_000)
    bad = _mc([np.array([[0.27, 0.23], [0.25, 0.25]])], 10_000)
    assert compare(ok, ref)["pass"]
    rep = compare(bad, ref)
    assert not rep["pass"] and rep["n_fail"] == 2
    assert rep["worst"]["outcome"] in ([0, 0], [0, 1])
    # exact vs exact falls back to the 1e-3 floor
    near = Behavior([(0, 0)], [np.array([[0.2505, 0.2495], [0.25, 0.25]])])
    assert compare(near, ref)["pass"]


def test_compare_cells_and_key_mismatch():
    a = Behavior([(0, 0)], [np.full((2, 2), 0.25)])
    b = Behavior([(1, 1)], [np.full((2, 2), 0.25)])
    with pytest.raises(InvalidArgument):
        compare(a, b)
    rep = compare(a, a, with_cells=True)
    assert len(rep["cells"]) == 4 and rep["max_abs_dev"] == 0


def test_no_signalling_exact(rng):
    rho = states.werner_state(2, 0.7)
    settings = Settings.product([[M.random_projective(2, rng) for _ in range(2)] for _ in range(2)])
    assert no_signalling_check(born_behavior(rho, settings))["pass"]


def test_no_signalling_detects_signalling():
    # Bob's marginal follows Alice's setting
    t0 = np.array([[0.5, 0.0], [0.5, 0.0]])
    t1 = np.array([[0.0, 0.5], [0.0, 0.5]])
    b = Behavior([(0, 0), (1, 0)], [t0, t1])
    rep = no_signalling_check(b)
    assert not rep["pass"]
    assert rep["witness"]["parties"] == [1]


def test_behavior_marginal_and_correlator():
    t = np.array([[0.4, 0.1], [0.1, 0.4]])
    b = Behavior([(0, 0)], [t])
    assert b.correlator((0, 0)) == pytest.approx(0.6)
    assert np.allclose(b.marginal([0]).tables[0], [0.5, 0.5])
    assert b.normalization_residual() == pytest.approx(0)


def test_behavior_accepted_rescales():
    t = np.zeros((3, 3))
    t[:2, :2] = 0.125
    t[2, :] = 0.5 / 3
    b = Behavior([(0, 0)], [t], None, {"kind": "exact"}, abstain=True)
    acc = b.accepted()
    assert np.allclose(acc.tables[0], 0.25)


def test_behavior_json_round_values(rng):
    import json

    settings = Settings.paired([[M.computational(2)], [M.computational(2)]])
    b = born_behavior(states.werner_state(2, 1.0), settings)
    data = json.loads(b.to_json())
    assert data["tables"][0] == [[0.0, 0.5], [0.5, 0.0]]


def test_settings_product_and_scenario(rng):
    per = [[M.computational(2), M.trine()], [M.computational(2)]]
    s = Settings.product(per)
    assert s.keys == ((0, 0), (1, 0))
    assert s.scenario() == Scenario(2, 2, 3)
    with pytest.raises(InvalidArgument):
        Settings.paired(per)


# -- closed forms vs Born ----------------------------------------------------------------------

@pytest.mark.parametrize("d,p", [(2, 0.3), (3, 0.9), (4, 0.5)])
def test_werner_and_isotropic_closed_forms(rng, d, p):
    for _ in range(5):
        m1, m2 = M.random_povm(d, d + 2, rng, 3), M.random_povm(d, d + 1, rng)
        assert np.allclose(werner_table(m1, m2, p), born_table(states.werner_state(d, p), (m1, m2)), atol=1e-14)
        assert np.allclose(isotropic_table(m1, m2, p), born_table(states.isotropic_state(d, p), (m1, m2)), atol=1e-14)


def test_werner_pm_closed_form(rng):
    d = 3
    settings = Settings.paired([[M.random_projective(d, rng) for _ in range(3)] for _ in range(2)])
    a = closed_form_behavior("werner-pm", settings)
    b = born_behavior(states.werner_state(d, 2 / 3), settings)
    assert compare(a, b, floor=1e-12)["pass"]


def test_hirsch_terms(rng):
    rho0 = states.werner_state(3, 0.5)
    sa, sb = np.diag([0.6, 0.3, 0.1]), np.eye(3) / 3
    m1, m2 = M.random_povm(3, 4, rng, 2), M.random_povm(3, 5, rng, 3)
    terms = hirsch_table(rho0, sa, sb, m1, m2, terms=True)
    assert terms.shape == (4, 2, 3)
    lifted = states.hirsch_lift_state(rho0, sa, sb)
    assert np.allclose(terms.sum(axis=0), born_table(lifted, (m1, m2)), atol=1e-14)


def test_closed_form_validation(rng):
    settings = Settings.paired([[M.computational(2)], [M.computational(2)]])
    with pytest.raises(InvalidArgument):
        closed_form_behavior("ghz", settings)
    with pytest.raises(InvalidArgument):
        closed_form_behavior("toth-acin", settings)


# -- Bell tools -----------------------------------------------------------------------------------

@pytest.mark.parametrize("N,m,d,expect", [(2, 2, 2, 8), (3, 2, 2, 26), (2, 3, 3, 48)])
def test_dof_count(N, m, d, expect):
    assert dof_count(Scenario(N, m, d)) == expect


def test_deterministic_strategies():
    s = deterministic_strategies(2, 3)
    assert s.shape == (9, 2, 3)
    assert np.all(s.sum(axis=2) == 1)
    assert len({tuple(x.ravel()) for x in s}) == 9


def test_chsh_local_bounds():
    assert local_bound(chsh_correlator_form()) == pytest.approx(2)
    assert local_bound(chsh_probability_form()) == pytest.approx(3)


def test_local_bound_capacity():
    ineq = BellInequality(Scenario(3, 4, 4), np.zeros((4,) * 6))
    with pytest.raises(CapacityExceeded):
        local_bound(ineq)
    with pytest.raises(InvalidArgument):
        BellInequality(Scenario(2, 2, 2), np.zeros((2, 2)))


def test_chsh_forms_agree_on_quantum_behavior():
    s = qcore.singlet()
    rho = qcore.pure_state(s, (2, 2))
    a = [M.qubit_pm([0, 0, 1]), M.qubit_pm([1, 0, 0])]
    r = np.sqrt(0.5)
    b = [M.qubit_pm([-r, 0, -r]), M.qubit_pm([r, 0, -r])]
    beh = born_behavior(rho, Settings.product([a, b]))
    assert chsh_correlator_form().value(beh) == pytest.approx(2 * np.sqrt(2))
    # sum_xy (1 + (-1)^xy E_xy) / 2 = 2 + S / 2
    assert chsh_probability_form().value(beh) == pytest.approx(2 + np.sqrt(2))


def test_correlation_tensor_singlet():
    t = correlation_tensor(qcore.pure_state(qcore.singlet(), (2, 2)))
    assert np.allclose(t, -np.eye(3))
    with pytest.raises(InvalidArgument):
        correlation_tensor(np.eye(9) / 9)


def test_chsh_value_optimal_singlet_settings():
    rho = qcore.pure_state(qcore.singlet(), (2, 2))
    r = np.sqrt(0.5)
    v = chsh_value(rho, [0, 0, 1], [1, 0, 0], [r, 0, r], [-r, 0, r])
    assert v == pytest.approx(2 * np.sqrt(2))


@pytest.mark.parametrize("p", [0.3, 0.6, 0.9])
def test_maximize_chsh_werner(p):
    res = maximize_chsh(states.werner_state(2, p), restarts=5, seed=1)
    assert res["max_value"] == pytest.approx(2 * np.sqrt(2) * p, abs=1e-9)
    s = res["settings"]
    assert chsh_value(states.werner_state(2, p), s["a1"], s["a2"], s["b1"], s["b2"]) == pytest.approx(res["max_value"])


def test_maximize_chsh_product_state():
    rho = qcore.density(np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2), (2, 2))
    assert maximize_chsh(rho)["max_value"] <= 2 + 1e-12
    assert maximize_chsh(qcore.density(np.eye(4) / 4, (2, 2)))["max_value"] == 0


def test_kg_constants_chain():
    k = kg_constants()
    assert k["K_G2"] == pytest.approx(np.sqrt(2))
    assert 1 / 3 < 5 / 12 < 1 / 2 < k["werner_local_from_K_G3"] < k["werner_nonlocal_known"] < k["werner_chsh_threshold"]
    assert k["werner_local_from_K_G3"] == pytest.approx(1 / k["K_G3_upper"], abs=1e-4)


# -- integrals --------------------------------------------------------------------------------------

SIMPLEX_VALUES = {
    2: {"J_u1": Fraction(1, 8), "Jt_u1": Fraction(3, 8), "Jt_u1sq": Fraction(7, 24), "Jcal_u1": Fraction(3, 8)},
    # u1 ~ Beta(1, 2) at d = 3, e.g. int_{1/3}^1 2 u^2 (1 - u) du = 4/27
    3: {"J_u1": Fraction(1, 27), "Jt_u1": Fraction(20, 81), "Jt_u1sq": Fraction(4, 27), "Jcal_u1": Fraction(11, 54)},
}


@pytest.mark.parametrize("d", [2, 3])
def test_simplex_closed_form_values(d):
    for kind, val in SIMPLEX_VALUES[d].items():
        assert simplex_closed_form(kind, d) == val


def test_simplex_closed_form_validation():
    with pytest.raises(InvalidArgument):
        simplex_closed_form("J_u2", 2)
    with pytest.raises(InvalidDimension):
        simplex_closed_form("J_u1", 1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_simplex_oracles_agree(d):
    for est in simplex_integral_oracles(d, 400_000, seed=d).values():
        assert abs(est.estimate - est.exact) < 4 * est.std_error + 1e-12


def test_simplex_oracle_single_and_reproducible():
    a = simplex_integral_oracle("Jt_u1", 3, 50_000, 5)
    b = simplex_integral_oracle("Jt_u1", 3, 50_000, 5)
    assert a == b
    assert a.to_dict()["rel_error"] == a.rel_error
    with pytest.raises(InvalidArgument):
        simplex_integral_oracle("nope", 3, 10, 1)


def test_halfsphere_oracle(rng):
    x, y, z = qcore.uniform_sphere(3, rng)
    lin, quad = halfsphere_closed_forms(x, y, z)
    res = bloch_halfsphere_oracle(x, y, z, 400_000, 3)
    assert abs(res["linear"]["estimate"] - lin) < 4 * res["linear"]["std_error"]
    assert abs(res["quadratic"]["estimate"] - quad) < 4 * res["quadratic"]["std_error"]
    with pytest.raises(InvalidArgument):
        bloch_halfsphere_oracle([1, 1, 0], y, z, 10, 1)


def test_halfsphere_trivial_case():
    # y = -x: the linear integral is pi, the quadratic one with z = y is 2 pi / 3
    x = np.array([0.0, 0.0, 1.0])
    assert halfsphere_closed_forms(x, -x, -x) == pytest.approx((np.pi, 2 * np.pi / 3))


# -- tables ----------------------------------------------------------------------------------------------

def test_threshold_rows_and_csv():
    rows = threshold_rows("werner", 3)
    assert [r["d"] for r in rows] == [2, 3]
    text = thresholds_csv("isotropic", 2)
    assert text.splitlines() == ["family,d,p_sep,p_pm,p_povm", "isotropic,2,0.3333333333,0.5,0.4166666667"]
    noisy = thresholds_csv("noisy", 3).splitlines()[2]
    assert noisy.startswith("noisy,3,[0.125;0.1818181818],")


def test_monotonicity_flags():
    assert monotonicity_flags("werner", 20) == {"p_sep": "decreasing", "p_pm": "increasing", "p_povm": "decreasing"}
    assert monotonicity_flags("isotropic", 20)["p_pm"] == "decreasing"
