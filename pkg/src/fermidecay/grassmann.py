"""Finite-dimensional Grassmann calculus over the space-time index set.

Monomials live in a canonical normal form: all barred generators first, then
all unbarred, each block in ascending global index order, with the sign of the
reordering tracked explicitly.  Gaussian expectations of canonical monomials
are determinants of the covariance sampled at the barred/unbarred indices; the
Berezin engine below instead expands the Gaussian weight literally and serves
as the independent cross-check of every sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .covariance import CovarianceSpec, covariance_matrix
from .lattice import LatticeSpec, TimeGrid, spacetime_index
from .model import (
    InteractionCoefficients,
    LambdaCoefficients,
    ModelParams,
    lattice_terms,
    restrict_interaction,
)

MAX_WICK_GENERATORS = 24
MAX_BEREZIN_GENERATORS = 10
MAX_INSTANCES = 16


@dataclass(frozen=True)
class GrassmannIndexSpace:
    """The N = 2 L^d beta*h generator triples (site, spin, grid time), doubled
    into barred and unbarred families, in the global space-time order."""

    spec: LatticeSpec
    grid: TimeGrid

    def __post_init__(self):
        if self.n > MAX_WICK_GENERATORS:
            raise ValueError(f"{self.n} generators exceed the "
                             f"{MAX_WICK_GENERATORS}-generator guard")
        # beta*h even and 2L^d even make N = 0 mod 4, so the Gaussian
        # normalization sign (-1)^{N(N-1)/2} is +1.
        assert self.n % 4 == 0

    @property
    def n(self) -> int:
        return self.spec.n_modes * self.grid.n_points

    def index(self, site, spin: int, time_idx: int) -> int:
        return spacetime_index(self.spec, self.grid, site, spin, time_idx)

    def covariance(self, params: ModelParams, shifts=()) -> np.ndarray:
        return covariance_matrix(CovarianceSpec(self.spec, params, tuple(shifts)),
                                 self.grid)


# ---------------------------------------------------------------------------
# canonical monomials as (barred mask, unbarred mask, coefficient)
# ---------------------------------------------------------------------------

def _seq_to_mask(seq) -> tuple[int, int] | None:
    """Mask and reordering sign of a generator sequence; None on repeats."""
    mask = 0
    sign = 1
    for i in seq:
        i = int(i)
        bit = 1 << i
        if mask & bit:
            return None
        # generators already placed with larger index must jump over this one
        above = (mask >> (i + 1)).bit_count()
        if above % 2:
            sign = -sign
        mask |= bit
    return mask, sign


def _merge_sign(m1: int, m2: int) -> int:
    """Parity of interleaving block m2 after block m1 into ascending order."""
    sign = 1
    m = m2
    while m:
        i = (m & -m).bit_length() - 1
        if (m1 >> (i + 1)).bit_count() % 2:
            sign = -sign
        m &= m - 1
    return sign


def monomial(barred, unbarred, coeff=1.0):
    """Canonical (bmask, umask, coeff) of coeff * psibar_{b1}..psi_{u_k} in the
    written order; returns None when a generator repeats."""
    b = _seq_to_mask(barred)
    u = _seq_to_mask(unbarred)
    if b is None or u is None:
        return None
    (bm, bs), (um, us) = b, u
    c = complex(coeff) * bs * us
    return (bm, um, c)


def monomial_product(t1, t2):
    """Product of two canonical monomials, or None when it vanishes."""
    b1, u1, c1 = t1
    b2, u2, c2 = t2
    if (b1 & b2) or (u1 & u2):
        return None
    sign = 1
    # barred block of t2 moves left past the unbarred block of t1
    if (b2.bit_count() * u1.bit_count()) % 2:
        sign = -sign
    sign *= _merge_sign(b1, b2) * _merge_sign(u1, u2)
    return (b1 | b2, u1 | u2, c1 * c2 * sign)


def _mask_bits(mask: int) -> list[int]:
    out = []
    while mask:
        out.append((mask & -mask).bit_length() - 1)
        mask &= mask - 1
    return out


def _generator_count(space) -> int:
    """Either a lattice-backed index space or a bare generator count; the
    bare form serves abstract covariances (e.g. random G in cross-checks)."""
    return space if isinstance(space, int) else space.n


def wick_expectation(space, barred, unbarred, G: np.ndarray) -> complex:
    """Gaussian expectation det(G(j_u, p_v)) of the reversed-barred monomial;
    mismatched degrees integrate to zero."""
    n = _generator_count(space)
    if len(barred) != len(unbarred):
        return 0.0 + 0.0j
    for i in list(barred) + list(unbarred):
        if not 0 <= i < n:
            raise ValueError(f"generator index {i} outside 0..{n - 1}")
    if not barred:
        return 1.0 + 0.0j
    sub = G[np.ix_(list(barred), list(unbarred))]
    return complex(np.linalg.det(sub))


def wick_canonical(term, G: np.ndarray) -> complex:
    """Gaussian expectation of a canonical monomial: the written-order barred
    block picks up (-1)^{k(k-1)/2} relative to the determinant convention."""
    bm, um, c = term
    k = bm.bit_count()
    if k != um.bit_count():
        return 0.0 + 0.0j
    if k == 0:
        return complex(c)
    sub = G[np.ix_(_mask_bits(bm), _mask_bits(um))]
    sign = -1.0 if (k * (k - 1) // 2) % 2 else 1.0
    return c * sign * complex(np.linalg.det(sub))


# ---------------------------------------------------------------------------
# brute-force Berezin engine
# ---------------------------------------------------------------------------

class GrassmannPolynomial:
    """Sparse polynomial over canonical monomials, keyed by mask pairs."""

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int], complex] = {}
        if terms:
            for key, c in terms.items():
                self.add(key[0], key[1], c)

    def add(self, bmask: int, umask: int, coeff):
        coeff = complex(coeff)
        if coeff == 0:
            return
        key = (bmask, umask)
        new = self.terms.get(key, 0.0 + 0.0j) + coeff
        if new == 0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    @classmethod
    def one(cls):
        p = cls()
        p.add(0, 0, 1.0)
        return p

    @classmethod
    def from_monomial(cls, barred, unbarred, coeff=1.0):
        p = cls()
        t = monomial(barred, unbarred, coeff)
        if t is not None:
            p.add(t[0], t[1], t[2])
        return p

    def __mul__(self, other):
        out = GrassmannPolynomial()
        for (b1, u1), c1 in self.terms.items():
            for (b2, u2), c2 in other.terms.items():
                t = monomial_product((b1, u1, c1), (b2, u2, c2))
                if t is not None:
                    out.add(t[0], t[1], t[2])
        return out

    def scaled(self, factor):
        out = GrassmannPolynomial()
        for (b, u), c in self.terms.items():
            out.add(b, u, c * factor)
        return out

    def plus(self, other):
        out = GrassmannPolynomial(dict(self.terms))
        for (b, u), c in other.terms.items():
            out.add(b, u, c)
        return out

    def exp_nilpotent(self):
        """exp of an even polynomial: product over terms of (1 + term)."""
        out = GrassmannPolynomial.one()
        for (b, u), c in sorted(self.terms.items()):
            if (b.bit_count() + u.bit_count()) % 2:
                raise ValueError("exp needs even-degree terms (they commute)")
            binomial = GrassmannPolynomial.one()
            binomial.add(b, u, c)
            out = out * binomial
        return out

    def coefficient(self, bmask: int, umask: int) -> complex:
        return self.terms.get((bmask, umask), 0.0 + 0.0j)


def berezin_gaussian(space, f: GrassmannPolynomial, G: np.ndarray) -> complex:
    """Normalized Gaussian integral of f by literal nilpotent expansion of the
    weight exp(-<psi^t, G^{-1} psibar^t>).

    Deliberately independent of Wick determinants: the weight is multiplied
    out monomial by monomial and the top coefficient extracted.
    """
    n = _generator_count(space)
    if n > MAX_BEREZIN_GENERATORS:
        raise ValueError(f"Berezin engine limited to {MAX_BEREZIN_GENERATORS} "
                         f"generators, got {n}")
    Ginv = np.linalg.inv(G)
    # -<psi^t, G^{-1} psibar^t> = sum_{ij} (G^{-1})_{ij} psibar_j psi_i
    weight = GrassmannPolynomial()
    for i in range(n):
        for j in range(n):
            if Ginv[i, j] != 0:
                weight.add(1 << j, 1 << i, Ginv[i, j])
    expw = weight.exp_nilpotent()
    full = (1 << n) - 1
    denom = expw.coefficient(full, full)
    if denom == 0:
        raise ZeroDivisionError("singular Gaussian weight")
    num = (f * expw).coefficient(full, full)
    return complex(num / denom)


# ---------------------------------------------------------------------------
# interaction vertices on the time grid
# ---------------------------------------------------------------------------

@dataclass
class VertexSet:
    """Grassmann interaction monomials, one per (lattice term, grid time)."""

    space: GrassmannIndexSpace
    monomials: list = field(default_factory=list)   # canonical (b, u, c)
    blocks: list = field(default_factory=list)      # (row idx list, col idx list, coeff)
    term_weight: float = 0.0                        # sum_terms |coeff| 4^l

    def __len__(self):
        return len(self.monomials)


def build_vertices(space: GrassmannIndexSpace, params: ModelParams,
                   u: InteractionCoefficients | None,
                   lam: LambdaCoefficients | None = None,
                   interaction_sites=None,
                   max_instances: int = MAX_INSTANCES) -> VertexSet:
    """One vertex per interaction term and grid time.

    The vertex with coefficient c is c * V where V = -(1/h) sum_t
    psibar_{x1 xi1 t}..psibar_{xl xil t} psi_{yl phil t}..psi_{y1 phi1 t};
    here the time sum is unrolled into separate instances.
    """
    spec, grid = space.spec, space.grid
    vs = VertexSet(space)
    term_list = []
    if u is not None:
        fin = restrict_interaction(u, spec)
        for l, X, Xi, Phi, coeff in lattice_terms(fin, spec):
            if interaction_sites is not None and any(
                    tuple(x) not in interaction_sites for x in X):
                continue
            term_list.append((X, X, Xi, Phi, coeff))
    if lam is not None:
        for X, Y, Xi, Phi, coeff in lam.symmetrized_terms():
            Xc = tuple(tuple(int(c) % spec.L for c in x) for x in X)
            Yc = tuple(tuple(int(c) % spec.L for c in y) for y in Y)
            term_list.append((Xc, Yc, Xi, Phi, coeff))
    for X, Y, Xi, Phi, coeff in term_list:
        vs.term_weight += abs(coeff) * 4.0 ** len(X)
        for t in range(grid.n_points):
            barred = [space.index(x, s, t) for x, s in zip(X, Xi)]
            unbarred = [space.index(y, s, t)
                        for y, s in zip(reversed(Y), reversed(Phi))]
            mono = monomial(barred, unbarred, -coeff / grid.h)
            rows = [space.index(x, s, t) for x, s in zip(X, Xi)]
            cols = [space.index(y, s, t) for y, s in zip(Y, Phi)]
            if mono is not None:
                vs.monomials.append(mono)
            else:
                # vanishing vertex (repeated generator); keep the det block,
                # whose determinant is then identically zero as well
                vs.monomials.append((0, 0, 0.0))
            vs.blocks.append((rows, cols, coeff))
    if len(vs.blocks) > max_instances:
        raise ValueError(
            f"{len(vs.blocks)} interaction instances exceed the subset-sum "
            f"guard of {max_instances}; shrink the grid or the support")
    return vs


def observable_monomials(space: GrassmannIndexSpace, x_sites, y_sites,
                         xi_spins, phi_spins) -> list:
    """The canonical monomials of V^{m}_{h, X, Y, Xi, Phi}: one per grid time,
    each weighted by -1/h."""
    spec, grid = space.spec, space.grid
    out = []
    for t in range(grid.n_points):
        barred = [space.index(tuple(int(c) % spec.L for c in x), s, t)
                  for x, s in zip(x_sites, xi_spins)]
        unbarred = [space.index(tuple(int(c) % spec.L for c in y), s, t)
                    for y, s in zip(reversed(y_sites), reversed(phi_spins))]
        mono = monomial(barred, unbarred, -1.0 / grid.h)
        if mono is not None:
            out.append(mono)
    return out


def _subset_scan(seed, monomials, G: np.ndarray) -> list:
    """Sum of Gaussian expectations of seed * prod_{v in S} monomial_v over all
    subsets S, graded by |S|.  Returns coefficients[m]."""
    V = len(monomials)
    out = [0.0 + 0.0j] * (V + 1)

    def recurse(state, start, depth):
        out[depth] += wick_canonical(state, G)
        for i in range(start, V):
            nxt = monomial_product(state, monomials[i])
            if nxt is not None:
                recurse(nxt, i + 1, depth + 1)

    recurse(seed, 0, 0)
    return out


@dataclass
class EtaSeries:
    """Truncated power series in the coupling strength eta."""

    coefficients: list

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, m):
        return self.coefficients[m]

    def value_at(self, eta: complex) -> complex:
        return complex(sum(c * eta**m for m, c in enumerate(self.coefficients)))


class SchwingerEngine:
    """Numerator/denominator of the Schwinger function as exact polynomials in
    eta; one engine serves the partition checks, the Taylor coefficients and
    the correlation values."""

    def __init__(self, spec: LatticeSpec, params: ModelParams, grid: TimeGrid,
                 u: InteractionCoefficients | None, shifts=(),
                 interaction_sites=None, max_instances: int = MAX_INSTANCES):
        self.spec, self.params, self.grid = spec, params, grid
        self.space = GrassmannIndexSpace(spec, grid)
        self.G = self.space.covariance(params, shifts)
        self.vertices = build_vertices(self.space, params, u,
                                       interaction_sites=interaction_sites,
                                       max_instances=max_instances)

    def denominator(self) -> EtaSeries:
        seed = (0, 0, 1.0 + 0.0j)
        return EtaSeries(_subset_scan(seed, self.vertices.monomials, self.G))

    def numerator(self, x_sites, y_sites, xi_spins, phi_spins) -> EtaSeries:
        obs = observable_monomials(self.space, x_sites, y_sites, xi_spins, phi_spins)
        V = len(self.vertices)
        total = [0.0 + 0.0j] * (V + 1)
        for seed in obs:
            part = _subset_scan(seed, self.vertices.monomials, self.G)
            total = [a + b for a, b in zip(total, part)]
        return EtaSeries(total)

    def schwinger_series(self, x_sites, y_sites, xi_spins, phi_spins,
                         m_max: int) -> EtaSeries:
        """Taylor coefficients b_m of the Schwinger function around eta = 0,
        by exact power-series division of the numerator by the denominator."""
        num = self.numerator(x_sites, y_sites, xi_spins, phi_spins)
        den = self.denominator()
        quot = _series_divide(num.coefficients, den.coefficients, m_max)
        return EtaSeries([-q / self.params.beta for q in quot])

    def schwinger_value(self, x_sites, y_sites, xi_spins, phi_spins,
                        eta: complex = 1.0) -> complex:
        num = self.numerator(x_sites, y_sites, xi_spins, phi_spins)
        den = self.denominator()
        d = den.value_at(eta)
        if abs(d) < 1e-12:
            raise ZeroDivisionError(
                f"Schwinger denominator {d} too small at eta={eta}; "
                "the grid is too coarse for the positivity lemma")
        return -num.value_at(eta) / (self.params.beta * d)

    def correlation(self, q) -> complex:
        """The symmetrized correlation S_{X,Y,Xi,Phi} + S_{Y,X,Phi,Xi} at
        eta = 1 (the -1/beta prefactor lives inside the Schwinger function)."""
        s1 = self.schwinger_value(q.x_sites, q.y_sites, q.xi_spins, q.phi_spins)
        s2 = self.schwinger_value(q.y_sites, q.x_sites, q.phi_spins, q.xi_spins)
        return s1 + s2


def _series_divide(num, den, m_max: int) -> list:
    if den[0] == 0:
        raise ZeroDivisionError("denominator series starts at zero")
    out = []
    for m in range(m_max + 1):
        acc = num[m] if m < len(num) else 0.0 + 0.0j
        for j in range(1, m + 1):
            dj = den[j] if j < len(den) else 0.0 + 0.0j
            acc -= dj * out[m - j]
        out.append(acc / den[0])
    return out


# ---------------------------------------------------------------------------
# discretized partition function (determinant-assembly route)
# ---------------------------------------------------------------------------

def discrete_partition(spec: LatticeSpec, params: ModelParams, grid: TimeGrid,
                       u: InteractionCoefficients | None,
                       lam: LambdaCoefficients | None = None,
                       m_max: int | None = None,
                       max_instances: int = MAX_INSTANCES) -> dict:
    """The discretized expansion of Tr e^{-beta H_lambda} / Tr e^{-beta H_0}:

        1 + sum over nonempty subsets S of (vertex, time) instances of
        (-1)^{|S|} prod(coeff/h) det(C_h(row args, col args)).

    The ordered m-fold products of the printed series collapse to subsets
    because repeated instances give repeated determinant rows.  With m_max the
    sum is truncated at |S| <= m_max and a rigorous tail bound from the
    4^n determinant estimate is reported alongside.
    """
    space = GrassmannIndexSpace(spec, grid)
    G = covariance_matrix(CovarianceSpec(spec, params), grid)
    vs = build_vertices(space, params, u, lam, max_instances=max_instances)
    blocks = vs.blocks
    V = len(blocks)
    h = grid.h
    total = 0.0 + 0.0j

    def det_of(selection):
        rows, cols, coeff = [], [], 1.0 + 0.0j
        for i in selection:
            r, c, cf = blocks[i]
            rows.extend(r)
            cols.extend(c)
            coeff *= cf / h
        sub = G[np.ix_(rows, cols)]
        return coeff * complex(np.linalg.det(sub))

    depth_cap = V if m_max is None else min(m_max, V)
    stack = [([], 0)]
    while stack:
        selection, start = stack.pop()
        if selection:
            total += (-1) ** len(selection) * det_of(selection)
        else:
            total += 1.0
        if len(selection) < depth_cap:
            for i in range(start, V):
                stack.append((selection + [i], i + 1))

    result = {"value": total, "instances": V, "truncated_at": m_max}
    if m_max is not None:
        W = params.beta * vs.term_weight
        tail = 0.0
        term = 1.0
        for m in range(1, m_max + 1):
            term *= W / m
        # sum_{m > m_max} W^m / m!
        m = m_max + 1
        term *= W / m
        while term > 1e-300:
            tail += term
            m += 1
            term *= W / m
            if m > m_max + 10000:
                break
        result["tail_bound"] = tail
    return result


def partition_via_exponential(spec: LatticeSpec, params: ModelParams,
                              grid: TimeGrid,
                              u: InteractionCoefficients | None,
                              eta: complex = 1.0,
                              max_instances: int = MAX_INSTANCES) -> complex:
    """int exp(eta sum U V) dmu_{C_h}, by expanding the nilpotent exponential
    into subset products of vertex monomials and Wick-evaluating each."""
    engine = SchwingerEngine(spec, params, grid, u, max_instances=max_instances)
    return engine.denominator().value_at(eta)


def schwinger_taylor(spec: LatticeSpec, params: ModelParams, grid: TimeGrid,
                     u: InteractionCoefficients | None, q, m_max: int,
                     interaction_sites=None,
                     max_instances: int = MAX_INSTANCES) -> EtaSeries:
    """Taylor coefficients b_m of the Schwinger function of the query; sites of
    the interaction may be pinned through interaction_sites."""
    engine = SchwingerEngine(spec, params, grid, u,
                             interaction_sites=interaction_sites,
                             max_instances=max_instances)
    return engine.schwinger_series(q.x_sites, q.y_sites, q.xi_spins,
                                   q.phi_spins, m_max)


def correlation_via_grassmann(spec: LatticeSpec, params: ModelParams,
                              u: InteractionCoefficients | None, q,
                              half_steps_list,
                              max_instances: int = MAX_INSTANCES) -> list[dict]:
    """The correlation from the Grassmann side at a sequence of grids; the
    values converge to the exact trace as h grows."""
    out = []
    for hs in half_steps_list:
        grid = TimeGrid(beta=params.beta, half_steps=int(hs))
        engine = SchwingerEngine(spec, params, grid, u,
                                 max_instances=max_instances)
        out.append({"half_steps": int(hs), "h": grid.h,
                    "value": engine.correlation(q)})
    return out
