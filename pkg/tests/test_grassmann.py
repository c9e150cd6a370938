import numpy as np
import pytest

from fermidecay import fock
from fermidecay.covariance import CovarianceSpec, covariance_value
from fermidecay.grassmann import (
    EtaSeries,
    GrassmannIndexSpace,
    GrassmannPolynomial,
    SchwingerEngine,
    berezin_gaussian,
    build_vertices,
    correlation_via_grassmann,
    discrete_partition,
    monomial,
    monomial_product,
    observable_monomials,
    partition_via_exponential,
    schwinger_taylor,
    wick_canonical,
    wick_expectation,
)
from fermidecay.lattice import DOWN, UP, LatticeSpec, TimeGrid
from fermidecay.model import LambdaCoefficients, ModelParams, hubbard_interaction


def random_g(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 3.0 * np.eye(n)


def test_wick_expectation_contract(rng):
    G = random_g(rng, 6)
    assert wick_expectation(6, [2], [3], G) == pytest.approx(G[2, 3])
    assert wick_expectation(6, [], [], G) == 1.0
    assert wick_expectation(6, [1], [2, 3], G) == 0.0
    assert abs(wick_expectation(6, [0, 1], [2, 2], G)) <= 1e-14
    with pytest.raises(ValueError):
        wick_expectation(6, [7], [0], G)


def test_monomial_canonicalization_signs():
    # swapping two adjacent generators flips the sign exactly
    m1 = monomial([0, 1], [2, 3])
    m2 = monomial([1, 0], [2, 3])
    assert m1[2] == -m2[2] and m1[:2] == m2[:2]
    m3 = monomial([0, 1], [3, 2])
    assert m3[2] == -m1[2]
    assert monomial([0, 0], [1, 2]) is None


def test_monomial_product_nilpotent_and_sign():
    a = monomial([0], [1])
    b = monomial([2], [3])
    ab = monomial_product(a, b)
    ba = monomial_product(b, a)
    # even parity blocks: psibar_0 psi_1 psibar_2 psi_3 = + psibar_0 psibar_2 psi_1 psi_3
    assert ab == (0b101, 0b1010, -1.0)  # one swap merging psi_1 past psibar_2
    assert ab[2] == ba[2]
    assert monomial_product(a, a) is None


def test_wick_berezin_agreement(rng):
    # acceptance-grade: N=6, 200 random monomials, well-conditioned G
    n = 6
    G = random_g(rng, n)
    worst = 0.0
    for _ in range(200):
        k = int(rng.integers(1, 5))
        barred = [int(v) for v in rng.permutation(n)[:k]]
        unbarred = [int(v) for v in rng.permutation(n)[:k]]
        ref = wick_canonical(monomial(barred, unbarred), G)
        via = berezin_gaussian(n, GrassmannPolynomial.from_monomial(barred, unbarred), G)
        worst = max(worst, abs(ref - via))
    assert worst <= 1e-12


def test_berezin_normalization_and_antisymmetry(rng):
    n = 4
    G = random_g(rng, n)
    assert berezin_gaussian(n, GrassmannPolynomial.one(), G) == pytest.approx(1.0)
    v1 = berezin_gaussian(n, GrassmannPolynomial.from_monomial([0, 1], [2, 3]), G)
    v2 = berezin_gaussian(n, GrassmannPolynomial.from_monomial([1, 0], [2, 3]), G)
    assert v1 == pytest.approx(-v2)
    # degree-4 monomial against the 2x2 Wick determinant
    det = G[0, 2] * G[1, 3] - G[0, 3] * G[1, 2]
    assert v1 == pytest.approx(-det)  # (-1)^{k(k-1)/2} at k=2


def test_berezin_guard():
    with pytest.raises(ValueError):
        berezin_gaussian(11, GrassmannPolynomial.one(), np.eye(11))


def test_index_space_size_and_order(atom):
    space = GrassmannIndexSpace(atom, TimeGrid(1.0, 2))
    assert space.n == 8
    assert space.index((0,), UP, 0) == 0
    assert space.index((0,), DOWN, 0) == 1
    assert space.index((0,), UP, 1) == 2
    with pytest.raises(ValueError):
        GrassmannIndexSpace(LatticeSpec(d=1, L=2), TimeGrid(1.0, 4))  # 32 > 24


def test_partition_free_is_one(atom, params):
    grid = TimeGrid(1.0, 1)
    assert discrete_partition(atom, params, grid, None)["value"] == pytest.approx(1.0)
    assert partition_via_exponential(atom, params, grid, None) == pytest.approx(1.0)
    assert partition_via_exponential(atom, params, grid,
                                     hubbard_interaction(0.3, d=1),
                                     eta=0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("half_steps", [1, 2, 4])
def test_partition_equivalence(atom, params, half_steps):
    hub = hubbard_interaction(0.3, d=1)
    grid = TimeGrid(1.0, half_steps)
    dp = discrete_partition(atom, params, grid, hub)["value"]
    pe = partition_via_exponential(atom, params, grid, hub)
    assert abs(dp - pe) <= 1e-10


def test_partition_berezin_oracle(atom, params):
    # brute-force Berezin integration of exp(interaction) at N = 4
    hub = hubbard_interaction(0.2, d=1)
    grid = TimeGrid(1.0, 1)
    space = GrassmannIndexSpace(atom, grid)
    G = space.covariance(params)
    vs = build_vertices(space, params, hub)
    poly = GrassmannPolynomial.one()
    for (b, u, c) in vs.monomials:
        term = GrassmannPolynomial()
        term.add(b, u, c)
        poly = poly * GrassmannPolynomial.one().plus(term)
    ber = berezin_gaussian(space, poly, G)
    dp = discrete_partition(atom, params, grid, hub)["value"]
    assert ber == pytest.approx(dp, abs=1e-12)


def test_partition_h_convergence_to_trace(atom, params):
    hub = hubbard_interaction(0.2, d=1)
    space = fock.FockSpace(atom)
    exact = fock.partition_ratio(space, params, hub)
    errs = []
    for hs in (1, 2, 4):
        dp = discrete_partition(atom, params, TimeGrid(1.0, hs), hub)["value"]
        errs.append(abs(dp - exact))
    assert errs[2] < errs[1] < errs[0]


def test_partition_truncation_tail_bound(atom, params):
    hub = hubbard_interaction(0.2, d=1)
    grid = TimeGrid(1.0, 2)
    full = discrete_partition(atom, params, grid, hub)["value"]
    for m_max in (0, 1, 2):
        res = discrete_partition(atom, params, grid, hub, m_max=m_max)
        assert abs(full - res["value"]) <= res["tail_bound"] + 1e-15


def test_partition_instance_guard(params):
    hub = hubbard_interaction(0.2, d=1)
    with pytest.raises(ValueError):
        discrete_partition(LatticeSpec(d=1, L=4), params, TimeGrid(1.0, 4), hub)


def test_lambda_vertices_differentiate_partition(atom, params):
    # finite difference of log (Tr ratio)_h in a lambda entry reproduces the
    # grid-level Schwinger correlation, tying the two formulations together
    hub = hubbard_interaction(0.2, d=1)
    grid = TimeGrid(1.0, 2)
    q = fock.query(((0,),), ((0,),), (UP,), (UP,))
    eng = SchwingerEngine(atom, params, grid, hub)
    target = eng.correlation(q)
    eps = 1e-6
    vals = {}
    for s in (eps, -eps):
        lam = LambdaCoefficients(m_hat=1)
        lam.add(q.x_sites, q.y_sites, q.xi_spins, q.phi_spins, s)
        vals[s] = discrete_partition(atom, params, grid, hub, lam=lam)["value"]
    fd = -(np.log(vals[eps]) - np.log(vals[-eps])) / (2 * eps * params.beta)
    assert fd == pytest.approx(target.real, abs=1e-7)


def test_b0_equals_covariance_block(chain4, params):
    hub = hubbard_interaction(0.1, d=1)
    grid = TimeGrid(1.0, 1)
    cs = CovarianceSpec(chain4, params)
    q = fock.query(((0,),), ((2,),), (UP,), (UP,))
    spec2 = LatticeSpec(d=1, L=2)
    ser = schwinger_taylor(spec2, params, grid, hub,
                           fock.query(((0,),), ((1,),), (UP,), (UP,)), 2)
    cs2 = CovarianceSpec(spec2, params)
    expected = covariance_value(cs2, ((0,), UP, 0.0), ((1,), UP, 0.0))
    assert ser[0] == pytest.approx(expected, abs=1e-12)
    # m_hat = 2: b_0 is the 2x2 determinant of the equal-time block
    q2 = fock.query(((0,), (1,)), ((1,), (0,)), (UP, DOWN), (UP, DOWN))
    ser2 = schwinger_taylor(spec2, params, grid, hub, q2, 1)
    blk = np.array([
        [covariance_value(cs2, ((0,), UP, 0.0), ((1,), UP, 0.0)),
         covariance_value(cs2, ((0,), UP, 0.0), ((0,), DOWN, 0.0))],
        [covariance_value(cs2, ((1,), DOWN, 0.0), ((1,), UP, 0.0)),
         covariance_value(cs2, ((1,), DOWN, 0.0), ((0,), DOWN, 0.0))],
    ])
    assert ser2[0] == pytest.approx(complex(np.linalg.det(blk)), abs=1e-12)


def test_b0_bounded_by_four_power(rng, params):
    spec = LatticeSpec(d=1, L=2)
    grid = TimeGrid(1.0, 1)
    hub = hubbard_interaction(0.1, d=1)
    eng = SchwingerEngine(spec, params, grid, hub)
    for _ in range(20):
        m_hat = int(rng.integers(1, 3))
        xs = tuple((int(rng.integers(2)),) for _ in range(m_hat))
        ys = tuple((int(rng.integers(2)),) for _ in range(m_hat))
        xi = tuple(int(rng.integers(2)) for _ in range(m_hat))
        phi = tuple(int(rng.integers(2)) for _ in range(m_hat))
        ser = eng.schwinger_series(xs, ys, xi, phi, 0)
        assert abs(ser[0]) <= 4.0**m_hat + 1e-12


def test_free_interaction_taylor_vanishes(params):
    spec = LatticeSpec(d=1, L=2)
    ser = schwinger_taylor(spec, params, TimeGrid(1.0, 1), None,
                           fock.query(((0,),), ((1,),), (UP,), (UP,)), 3)
    assert abs(ser[0]) > 0
    assert all(abs(c) == 0 for c in ser.coefficients[1:])


def test_correlation_free_equals_covariance(atom, params):
    q = fock.query(((0,),), ((0,),), (UP,), (UP,))
    cs = CovarianceSpec(atom, params)
    free = 2 * covariance_value(cs, ((0,), UP, 0.0), ((0,), UP, 0.0)).real
    for r in correlation_via_grassmann(atom, params, None, q, (1, 2, 4)):
        assert r["value"].real == pytest.approx(free, abs=1e-12)
        assert abs(r["value"].imag) <= 1e-10


def test_correlation_h_convergence(atom):
    p = ModelParams(t=0.5, t_prime=0.0, mu=0.2, beta=1.0)
    hub = hubbard_interaction(0.3, d=1)
    space = fock.FockSpace(atom)
    q = fock.query(((0,),), ((0,),), (UP,), (UP,))
    exact = fock.correlation(space, p, hub, q).real
    conv = correlation_via_grassmann(atom, p, hub, q, (1, 2, 4))
    errs = [abs(r["value"].real - exact) for r in conv]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 5e-2
    for r in conv:
        assert abs(r["value"].imag) <= 1e-10


def test_schwinger_denominator_zero_detected(atom, params):
    # evaluate at a root of the denominator polynomial in eta
    grid = TimeGrid(1.0, 1)
    eng = SchwingerEngine(atom, params, grid, hubbard_interaction(1.0, d=1))
    coeffs = eng.denominator().coefficients
    root = complex(np.roots(list(reversed(coeffs)))[0])
    with pytest.raises(ZeroDivisionError):
        eng.schwinger_value(((0,),), ((0,),), (UP,), (UP,), eta=root)


def test_eta_series_evaluation():
    s = EtaSeries([1.0, 2.0, 3.0])
    assert s.value_at(1.0) == pytest.approx(6.0)
    assert s.value_at(0.0) == pytest.approx(1.0)
    assert len(s) == 3 and s[1] == 2.0


def test_pinned_interaction_sites(params):
    spec = LatticeSpec(d=1, L=2)
    grid = TimeGrid(1.0, 1)
    hub = hubbard_interaction(0.4, d=1)
    q = fock.query(((0,), (0,)), ((0,), (0,)), (UP, DOWN), (UP, DOWN))
    full = schwinger_taylor(spec, params, grid, hub, q, 2)
    pinned = schwinger_taylor(spec, params, grid, hub, q, 2,
                              interaction_sites={(0,)})
    assert full[0] == pytest.approx(pinned[0])
    assert abs(full[1]) != pytest.approx(abs(pinned[1]))


def test_partition_equivalence_two_sites(params):
    spec = LatticeSpec(d=1, L=2)
    hub = hubbard_interaction(0.25, d=1)
    grid = TimeGrid(1.0, 1)
    dp = discrete_partition(spec, params, grid, hub)["value"]
    pe = partition_via_exponential(spec, params, grid, hub)
    assert abs(dp - pe) <= 1e-10
    space = fock.FockSpace(spec)
    exact = fock.partition_ratio(space, params, hub)
    assert abs(dp - exact) < 0.05


def test_exp_nilpotent_rejects_odd_terms():
    p = GrassmannPolynomial.from_monomial([0], [])
    with pytest.raises(ValueError):
        p.exp_nilpotent()


def test_correlation_h_convergence_offdiagonal(params):
    # two-site chain, site 0 -> site 1 with interaction on
    spec = LatticeSpec(d=1, L=2)
    hub = hubbard_interaction(0.4, d=1)
    space = fock.FockSpace(spec)
    q = fock.query(((0,),), ((1,),), (UP,), (UP,))
    exact = fock.correlation(space, params, hub, q).real
    conv = correlation_via_grassmann(spec, params, hub, q, (1, 2))
    errs = [abs(r["value"].real - exact) for r in conv]
    assert errs[1] < errs[0]


def test_four_point_correlation_converges(atom):
    # the pair observable of the on-site decay theorem at m_hat = 2
    p = ModelParams(t=0.5, t_prime=0.0, mu=0.2, beta=1.0)
    hub = hubbard_interaction(0.3, d=1)
    space = fock.FockSpace(atom)
    q = fock.query(((0,), (0,)), ((0,), (0,)), (UP, DOWN), (UP, DOWN))
    exact = fock.correlation(space, p, hub, q).real
    conv = correlation_via_grassmann(atom, p, hub, q, (1, 2, 4))
    errs = [abs(r["value"].real - exact) for r in conv]
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 5e-2


def test_taylor_coefficient_against_berezin_derivative(atom, params):
    # independent oracle for b_1: central differences in eta of the Schwinger
    # value computed entirely through the Berezin engine at N = 4
    hub = hubbard_interaction(0.2, d=1)
    grid = TimeGrid(1.0, 1)
    space = GrassmannIndexSpace(atom, grid)
    G = space.covariance(params)
    vs = build_vertices(space, params, hub)
    obs = observable_monomials(space, ((0,),), ((0,),), (UP,), (UP,))

    def schwinger_berezin(eta):
        expw = GrassmannPolynomial.one()
        for (b, u, c) in vs.monomials:
            term = GrassmannPolynomial()
            term.add(b, u, c * eta)
            expw = expw * GrassmannPolynomial.one().plus(term)
        den = berezin_gaussian(space, expw, G)
        num = 0.0 + 0.0j
        for (b, u, c) in obs:
            mono = GrassmannPolynomial()
            mono.add(b, u, c)
            num += berezin_gaussian(space, mono * expw, G)
        return -num / (params.beta * den)

    ser = schwinger_taylor(atom, params, grid, hub,
                           fock.query(((0,),), ((0,),), (UP,), (UP,)), 2)
    eps = 1e-3
    b0 = schwinger_berezin(0.0)
    b1_fd = (schwinger_berezin(eps) - schwinger_berezin(-eps)) / (2 * eps)
    assert abs(b0 - ser[0]) <= 1e-12
    assert abs(b1_fd - ser[1]) <= 1e-7


def test_unnormalized_gaussian_sign_at_n4(rng):
    # int exp(-<psi^t, G^{-1} psibar^t>) = (-1)^{N(N-1)/2} (det G)^{-1}, which
    # is +(det G)^{-1} on every lattice-backed index set (N = 0 mod 4)
    n = 4
    G = random_g(rng, n)
    Ginv = np.linalg.inv(G)
    weight = GrassmannPolynomial()
    for i in range(n):
        for j in range(n):
            weight.add(1 << j, 1 << i, Ginv[i, j])
    top = weight.exp_nilpotent().coefficient((1 << n) - 1, (1 << n) - 1)
    assert top == pytest.approx(1.0 / complex(np.linalg.det(G)), rel=1e-12)
