import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermidecay.lattice import DOWN, UP, LatticeSpec, enumerate_sites, mode_index
from fermidecay.model import (
    HermiticityError,
    InteractionCoefficients,
    ModelFileError,
    ModelParams,
    antisym_pinned_norm,
    antisymmetrize,
    build_example_interaction,
    check_fourier_consistency,
    check_smallness,
    decay_base,
    dispersion,
    hopping_matrix,
    hubbard_antisymmetric_tensor,
    hubbard_interaction,
    interaction_norm,
    lattice_terms,
    load_model,
    model_from_dict,
    model_to_dict,
    restrict_interaction,
    save_model,
    spin_field_interaction,
    spin_spin_interaction,
    table_pinned_norm,
)


def test_hopping_matrix_entries():
    spec = LatticeSpec(d=1, L=4)
    T = hopping_matrix(spec, ModelParams(t=1.0, mu=0.0))
    assert T[mode_index(spec, (0,), UP), mode_index(spec, (1,), UP)] == -1.0
    assert T[mode_index(spec, (0,), UP), mode_index(spec, (1,), DOWN)] == 0.0
    s2 = LatticeSpec(d=2, L=4)
    T2 = hopping_matrix(s2, ModelParams(t=0.0, t_prime=0.5, mu=0.0))
    assert T2[mode_index(s2, (0, 0), UP), mode_index(s2, (1, 1), UP)] == -0.5


def test_hopping_matrix_hermitian_and_guard():
    spec = LatticeSpec(d=2, L=3)
    T = hopping_matrix(spec, ModelParams(t=0.7, t_prime=-0.3, mu=0.1))
    np.testing.assert_allclose(T, T.conj().T)
    with pytest.raises(ValueError):
        hopping_matrix(LatticeSpec(d=1, L=4), ModelParams(t=0.0, t_prime=1.0))
    # t' alone is fine in d >= 2
    hopping_matrix(LatticeSpec(d=2, L=2), ModelParams(t=0.0, t_prime=1.0))


def test_dispersion_values():
    p = ModelParams(t=1.0, mu=0.0)
    assert dispersion((0.0,), p, 1) == -2.0
    v = dispersion((np.pi, np.pi), ModelParams(t=1.0, t_prime=0.5, mu=0.2), 2)
    assert abs(v - 1.8) < 1e-14
    v = dispersion((0.0,), p, 1, shifts=((0.3j, 0),))
    assert abs(v - (-2.0 * math.cosh(0.3))) < 1e-14
    assert abs(v.imag) == 0.0
    with pytest.raises(ValueError):
        dispersion((0.0,), p, 1, shifts=((0.1j, 1),))


@pytest.mark.parametrize("d,L,t,tp,mu", [
    (1, 4, 1.0, 0.0, 0.3),
    (2, 2, 1.0, 0.4, 0.0),
    (1, 1, 1.0, 0.0, 0.0),
    (2, 3, 0.8, -0.2, 0.5),
])
def test_fourier_consistency(d, L, t, tp, mu):
    dev = check_fourier_consistency(LatticeSpec(d=d, L=L),
                                    ModelParams(t=t, t_prime=tp, mu=mu))
    assert dev <= 1e-10


def test_fourier_consistency_single_mode():
    # L = 1: E_0 = -2t - mu is the whole 1x1 matrix
    spec = LatticeSpec(d=1, L=1)
    p = ModelParams(t=0.7, mu=0.4)
    T = hopping_matrix(spec, p)
    assert abs(T[0, 0] - (-2 * 0.7 - 0.4)) < 1e-14


def test_hermiticity_validation():
    u = InteractionCoefficients()
    u.add(2, ((((0,), (0,))), (UP, DOWN), (UP, DOWN)), 0.5 + 0.2j)
    with pytest.raises(HermiticityError):
        u.validate_hermiticity()
    u.add(2, ((((0,), (0,))), (UP, DOWN), (UP, DOWN)), -0.2j)  # now real
    u.validate_hermiticity()


def test_restrict_interaction_reduces_and_rejects_aliases():
    u = InteractionCoefficients()
    u.add(1, ((3,), UP, UP), 1.0)
    r = restrict_interaction(u, LatticeSpec(d=1, L=4))
    assert ((-1,), UP, UP) in r.orders[1]
    u2 = InteractionCoefficients()
    u2.add(2, (((5,), (0,)), (UP, UP), (UP, UP)), 1.0)
    r2 = restrict_interaction(u2, LatticeSpec(d=1, L=4))
    assert (((1,), (0,)), (UP, UP), (UP, UP)) in r2.orders[2]
    u3 = InteractionCoefficients()
    u3.add(1, ((1,), UP, UP), 1.0)
    u3.add(1, ((5,), UP, UP), 1.0)
    with pytest.raises(ValueError):
        restrict_interaction(u3, LatticeSpec(d=1, L=4))


def test_restrict_hubbard_is_L_independent():
    u = hubbard_interaction(0.7, d=1)
    for L in (1, 2, 4, 8):
        r = restrict_interaction(u, LatticeSpec(d=1, L=L))
        assert r.orders == u.orders


def test_interaction_norms():
    # single order-1 term: norm is |c|
    u = InteractionCoefficients()
    u.add(1, ((0,), UP, UP), -2.5)
    assert interaction_norm(u, 1) == 2.5
    assert interaction_norm(InteractionCoefficients(), 2) == 0.0
    # hubbard as stored: pinned spin up on slot 1 collects the single entry
    hub = hubbard_interaction(0.3, d=1)
    assert interaction_norm(hub, 2) == pytest.approx(0.3)
    assert interaction_norm(hub, 2, LatticeSpec(d=1, L=4)) == pytest.approx(0.3)


def test_spin_field_interaction():
    b = 0.8
    u = spin_field_interaction({(0,): (0.0, 0.0, b)})
    table = u.orders[1]
    assert table[((0,), UP, UP)] == pytest.approx(b / 2)
    assert table[((0,), DOWN, DOWN)] == pytest.approx(-b / 2)
    assert ((0,), UP, DOWN) not in table
    u.validate_hermiticity()
    ux = spin_field_interaction({(0,): (0.3, 0.4, 0.0)})
    ux.validate_hermiticity()
    with pytest.raises(ValueError):
        spin_field_interaction({(0,): (0.1 + 0.2j, 0, 0)})


def test_spin_spin_interaction_structure():
    w0 = 0.4
    u = spin_spin_interaction({(0,): w0}, d=1, L=4)
    # quadratic correction: (w0/4) sum_a (P^a P^a) = (3 w0/4) Id in spin
    # space, one entry per window site since it is site-independent
    for site in ((0,), (1,), (-1,), (-2,)):
        assert u.orders[1][(site, UP, UP)] == pytest.approx(3 * w0 / 4)
        assert u.orders[1][(site, DOWN, DOWN)] == pytest.approx(3 * w0 / 4)
    with pytest.raises(ValueError):
        spin_spin_interaction({(0,): w0}, d=1)
    # quartic term present with both diagonal and spin-flip components
    assert u.orders[2][(((0,), (0,)), (UP, UP), (UP, UP))] == pytest.approx(w0 / 4)
    assert u.orders[2][(((0,), (0,)), (UP, DOWN), (DOWN, UP))] == pytest.approx(w0 / 2)
    u.validate_hermiticity()


def test_build_example_interaction_dispatch():
    u = build_example_interaction("hubbard", U=0.2, d=1)
    assert u.hubbard_coupling() == pytest.approx(0.2)
    with pytest.raises(ValueError):
        build_example_interaction("nope")


# --- anti-symmetrization -----------------------------------------------------

def _random_hermitian_table(spec, rng, n_entries=6):
    g = {}
    sites = enumerate_sites(spec)
    for _ in range(n_entries):
        X = (sites[int(rng.integers(len(sites)))],
             sites[int(rng.integers(len(sites)))])
        Xi = (int(rng.integers(2)), int(rng.integers(2)))
        Phi = (int(rng.integers(2)), int(rng.integers(2)))
        val = complex(rng.normal(), rng.normal())
        g[(X, Xi, Phi)] = g.get((X, Xi, Phi), 0) + val
        g[(X, Phi, Xi)] = g.get((X, Phi, Xi), 0) + val.conjugate()
    return g


def test_antisymmetrize_order1_is_diagonal():
    spec = LatticeSpec(d=1, L=2)
    g = {(((1,),), (UP,), (DOWN,)): 0.7 + 0.1j}
    f = antisymmetrize(g, spec, 1)
    a = mode_index(spec, (1,), UP)
    b = mode_index(spec, (1,), DOWN)
    assert f[a, b] == pytest.approx(0.7 + 0.1j)
    assert np.count_nonzero(f) == 1


def test_antisymmetrize_hubbard_matches_explicit_tensor():
    spec = LatticeSpec(d=1, L=4)
    U = 0.9
    g = {((x, x), (UP, DOWN), (UP, DOWN)): U for x in enumerate_sites(spec)}
    f = antisymmetrize(g, spec, 2)
    np.testing.assert_allclose(f, hubbard_antisymmetric_tensor(U, spec), atol=1e-14)
    assert antisym_pinned_norm(f, 2) == pytest.approx(abs(U) / 2)


def test_antisymmetrize_sign_equivariance(rng):
    spec = LatticeSpec(d=1, L=2)
    g = _random_hermitian_table(spec, rng)
    f = antisymmetrize(g, spec, 2)
    n = spec.n_modes
    idx = rng.integers(0, n, size=(100, 4))
    for a, b, c, d in idx:
        assert f[a, b, c, d] == pytest.approx(-f[b, a, c, d], abs=1e-12)
        assert f[a, b, c, d] == pytest.approx(-f[a, b, d, c], abs=1e-12)


def test_antisym_norm_inequality(rng):
    spec = LatticeSpec(d=1, L=2)
    for _ in range(50):
        g = _random_hermitian_table(spec, rng)
        f = antisymmetrize(g, spec, 2)
        assert antisym_pinned_norm(f, 2) <= table_pinned_norm(g, 2) + 1e-12


def test_antisymmetrize_rejects_large_order():
    with pytest.raises(ValueError):
        antisymmetrize({}, LatticeSpec(d=1, L=1), 3)


# --- smallness ---------------------------------------------------------------

def test_decay_base_values(params):
    assert decay_base(params, 1, 0.0) == pytest.approx(1.0)
    # frozen from a 40-digit evaluation of the closed form
    assert decay_base(ModelParams(t=1.0), 1, math.pi / 2) == pytest.approx(
        2.056952438710966, rel=1e-12)
    rs = np.linspace(0.1, 3.0, 15)
    vals = [decay_base(params, 1, r) for r in rs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ZeroDivisionError):
        decay_base(ModelParams(t=0.0), 1, 1.0)


def test_check_smallness_zero_interaction(params, chain4):
    u = InteractionCoefficients()
    for R in (0.1, 0.5, 0.9):
        rep = check_smallness(u, params, chain4, variant="general", R=R)
        assert rep.satisfied and rep.lhs == 0.0


def test_check_smallness_hubbard_rhs(params, chain4):
    hub = hubbard_interaction(1e-5, d=1)
    rep = check_smallness(hub, params, chain4, variant="hubbard")
    # frozen from a 40-digit evaluation of (108 beta)^-1 ((F^a+1)/(F^a-1))^-1
    assert rep.rhs == pytest.approx(1.9546924557624060e-04, rel=1e-12)
    assert rep.satisfied


def test_smallness_threshold_beta_scaling():
    # rhs * beta^{d+1} stays within a bounded ratio over beta in [1, 8]
    vals = []
    for beta in (1.0, 2.0, 3.0, 4.0, 6.0, 8.0):
        p = ModelParams(t=1.0, mu=0.0, beta=beta)
        rep = check_smallness(hubbard_interaction(1e-9), p,
                              LatticeSpec(d=1, L=4), variant="hubbard")
        vals.append(rep.rhs * beta**2)
    assert max(vals) / min(vals) < 10.0


# --- model files -------------------------------------------------------------

def test_model_roundtrip(tmp_path, params, chain4):
    u = hubbard_interaction(0.25, d=1)
    path = tmp_path / "model.json"
    save_model(path, chain4, params, u)
    spec2, params2, u2 = load_model(path)
    assert spec2 == chain4 and params2 == params
    assert u2.orders == u.orders


def test_model_file_rejects_hermiticity_violation(tmp_path, params, chain4):
    data = model_to_dict(chain4, params, hubbard_interaction(0.25, d=1))
    data["interaction"][0]["entries"][0]["im"] = 0.3
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(HermiticityError) as err:
        load_model(path)
    assert "order 2 entry" in str(err.value)


def test_model_file_errors(tmp_path):
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    with pytest.raises(ModelFileError):
        load_model(bad)
    with pytest.raises(ModelFileError):
        model_from_dict({"d": 1})


def test_lattice_terms_translate_anchored_entries():
    spec = LatticeSpec(d=1, L=4)
    hub = restrict_interaction(hubbard_interaction(0.3, d=1), spec)
    terms = lattice_terms(hub, spec)
    assert len(terms) == 4
    sites = sorted(t[1][0] for t in terms)
    assert sites == [(0,), (1,), (2,), (3,)]


@settings(max_examples=30)
@given(st.floats(-2.0, 2.0), st.floats(-1.0, 1.0))
def test_example_interactions_hermitian(u_val, b_val):
    hub = hubbard_interaction(u_val, d=1)
    hub.validate_hermiticity()
    fld = spin_field_interaction({(0,): (b_val, 0.5 * b_val, -b_val)})
    fld.validate_hermiticity()
    ss = spin_spin_interaction({(0,): u_val, (1,): b_val}, d=1, L=4)
    ss.validate_hermiticity()


def test_restrict_pointwise_convergence():
    # finite support: once the window contains it, restriction is the identity
    u = InteractionCoefficients()
    u.add(2, (((2,), (0,)), (UP, DOWN), (UP, DOWN)), 0.4)
    u.add(1, ((-1,), UP, UP), 0.7)
    for L in (6, 8, 12):
        r = restrict_interaction(u, LatticeSpec(d=1, L=L))
        assert r.orders == u.orders


def test_cancelling_entries_prune_order():
    u = InteractionCoefficients()
    u.add(2, ((((0,), (0,))), (UP, DOWN), (UP, DOWN)), 1.0)
    u.add(2, ((((0,), (0,))), (UP, DOWN), (UP, DOWN)), -1.0)
    assert u.orders == {}
    assert u.max_order == 0
    assert u.hubbard_coupling() is None
