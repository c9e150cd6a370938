"""Model parameters, hopping matrix, dispersion, interactions and their norms.

Interactions are stored in anchored form: an order-l coefficient (l >= 2) is a
sparse map keyed by (X, Xi, Phi) with the last site of X pinned at the origin;
translation invariance is then structural rather than validated.  Order-1
coefficients keep their absolute site (they need not be translation invariant).
"""

from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    DOWN,
    SPINS,
    UP,
    LatticeSpec,
    canonical_site,
    enumerate_sites,
    mode_index,
    momentum_grid,
    periodic_reduce,
)

_SPIN_NAMES = {UP: "up", DOWN: "down"}
_SPIN_FROM_NAME = {"up": UP, "down": DOWN}

PAULI = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


@dataclass(frozen=True)
class ModelParams:
    """Hopping amplitudes t, t', chemical potential mu, inverse temperature beta."""

    t: float = 1.0
    t_prime: float = 0.0
    mu: float = 0.2
    beta: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    def has_hopping(self, d: int) -> bool:
        return abs(self.t) + abs(self.t_prime) * (1 if d >= 2 else 0) != 0.0


class HermiticityError(ValueError):
    """An interaction entry violates conj(U(X,Xi,Phi)) = U(X,Phi,Xi)."""


def _as_site_tuple(x) -> tuple[int, ...]:
    return tuple(int(c) for c in x)


def _entry_name(l: int, key) -> str:
    if l == 1:
        x, xi, phi = key
        return f"order 1 entry at x={x}, xi={_SPIN_NAMES[xi]}, phi={_SPIN_NAMES[phi]}"
    X, Xi, Phi = key
    return (f"order {l} entry at X={X}, "
            f"Xi={tuple(_SPIN_NAMES[s] for s in Xi)}, "
            f"Phi={tuple(_SPIN_NAMES[s] for s in Phi)}")


class InteractionCoefficients:
    """Sparse multi-body coefficients U_l, hermitian and translation anchored.

    orders maps l -> {key: complex}.  Keys: for l == 1, (x, xi, phi) with x an
    integer site tuple; for l >= 2, (X, Xi, Phi) with X a tuple of l site
    tuples whose last element is the origin.
    """

    def __init__(self, orders: dict[int, dict] | None = None):
        self.orders: dict[int, dict] = {}
        if orders:
            for l, table in sorted(orders.items()):
                for key, value in table.items():
                    self.add(l, key, value)

    def add(self, l: int, key, value):
        value = complex(value)
        if value == 0:
            return
        if l < 1:
            raise ValueError(f"interaction order must be >= 1, got {l}")
        if l == 1:
            x, xi, phi = key
            key = (_as_site_tuple(x), int(xi), int(phi))
        else:
            X, Xi, Phi = key
            X = tuple(_as_site_tuple(x) for x in X)
            if len(X) != l or len(Xi) != l or len(Phi) != l:
                raise ValueError(f"order {l} entry must carry l sites and spins")
            if any(c != 0 for c in X[-1]):
                raise ValueError(
                    f"order {l} entries must be anchored: last site of X is "
                    f"{X[-1]}, expected the origin")
            key = (X, tuple(int(s) for s in Xi), tuple(int(s) for s in Phi))
        table = self.orders.setdefault(l, {})
        table[key] = table.get(key, 0.0 + 0.0j) + value
        if table[key] == 0:
            del table[key]
        if not table:
            del self.orders[l]

    @property
    def max_order(self) -> int:
        return max(self.orders) if self.orders else 0

    def validate_hermiticity(self, tol: float = 0.0):
        """Check conj(U_l(X,Xi,Phi)) == U_l(X,Phi,Xi) entry by entry."""
        for l, table in self.orders.items():
            for key, value in table.items():
                if l == 1:
                    x, xi, phi = key
                    partner = (x, phi, xi)
                else:
                    X, Xi, Phi = key
                    partner = (X, Phi, Xi)
                pv = table.get(partner, 0.0 + 0.0j)
                if abs(value.conjugate() - pv) > tol:
                    raise HermiticityError(
                        f"{_entry_name(l, key)}: conjugate value "
                        f"{value.conjugate()} does not match the swapped-spin "
                        f"entry value {pv}")

    def hubbard_coupling(self) -> float | None:
        """Return U when the interaction is exactly the on-site Hubbard term."""
        if set(self.orders) != {2}:
            return None
        table = self.orders[2]
        if len(table) != 1:
            return None
        (X, Xi, Phi), value = next(iter(table.items()))
        origin2 = ((0,) * len(X[0]),) * 2
        if X != origin2 or Xi != (UP, DOWN) or Phi != (UP, DOWN):
            return None
        if abs(value.imag) > 0:
            return None
        return value.real


def restrict_interaction(u: InteractionCoefficients,
                         spec: LatticeSpec) -> InteractionCoefficients:
    """Reduce every stored coordinate into the centered window mod L.

    Two distinct stored entries that alias onto the same reduced key would make
    the finite-lattice coefficient ambiguous, so that case is rejected.
    """
    out = InteractionCoefficients()
    for l, table in u.orders.items():
        seen = {}
        for key, value in table.items():
            if l == 1:
                x, xi, phi = key
                red = (periodic_reduce(x, spec.L), xi, phi)
            else:
                X, Xi, Phi = key
                red = (tuple(periodic_reduce(x, spec.L) for x in X), Xi, Phi)
            if red in seen and seen[red] != key:
                raise ValueError(
                    f"{_entry_name(l, key)} aliases {_entry_name(l, seen[red])} "
                    f"after reduction mod L={spec.L}")
            seen[red] = key
            out.add(l, red, value)
    return out


def lattice_terms(u: InteractionCoefficients, spec: LatticeSpec):
    """Expand a restricted interaction into per-lattice-site terms.

    Yields (l, X_sites, Xi, Phi, coeff) with X_sites canonical Gamma
    coordinates; order >= 2 anchors are translated over the whole lattice.
    """
    terms = []
    for l, table in sorted(u.orders.items()):
        if l == 1:
            for (x, xi, phi), value in sorted(table.items()):
                terms.append((1, (canonical_site(spec, x),), (xi,), (phi,), value))
        else:
            for (X, Xi, Phi), value in sorted(table.items()):
                for y in enumerate_sites(spec):
                    shifted = tuple(
                        tuple((c + yc) % spec.L for c, yc in zip(x, y)) for x in X)
                    terms.append((l, shifted, Xi, Phi, value))
    return terms


def interaction_norm(u: InteractionCoefficients, l: int,
                     spec: LatticeSpec | None = None) -> float:
    """The paper-style norm: max over the pinned index j and its spin, sum of
    absolute values over everything else (sites summed with the anchor fixed).

    With spec given the entries are reduced mod L first (finite-lattice norm);
    otherwise the stored infinite-lattice table is used directly.
    """
    table = u.orders.get(l)
    if not table:
        return 0.0
    if spec is not None:
        table = restrict_interaction(u, spec).orders.get(l, {})
    if l == 1:
        best = 0.0
        sums: dict[tuple, float] = {}
        for (x, xi, _phi), value in table.items():
            sums[(x, xi)] = sums.get((x, xi), 0.0) + abs(value)
        for total in sums.values():
            best = max(best, total)
        return best
    best = 0.0
    for j in range(l):
        for sigma in SPINS:
            total = 0.0
            for (_X, Xi, _Phi), value in table.items():
                if Xi[j] == sigma:
                    total += abs(value)
            best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# hopping matrix and dispersion relation
# ---------------------------------------------------------------------------

def hopping_matrix(spec: LatticeSpec, params: ModelParams,
                   require_hopping: bool = True) -> np.ndarray:
    """Spin-diagonal hermitian hopping matrix T on (Gamma x spin)^2.

    Built literally from the delta-function formula, so coincidences on small
    lattices (L <= 2, where x+e_j = x-e_j) accumulate automatically.
    """
    if require_hopping and not params.has_hopping(spec.d):
        raise ValueError("hopping amplitudes vanish: |t| + |t'|*1_{d>=2} == 0")
    n = spec.n_modes
    T = np.zeros((n, n), dtype=complex)
    sites = enumerate_sites(spec)
    d, L = spec.d, spec.L

    def delta(x, y) -> bool:
        return all((a - b) % L == 0 for a, b in zip(x, y))

    for x in sites:
        for y in sites:
            val = 0.0
            for j in range(d):
                ym = tuple(c - (1 if a == j else 0) for a, c in enumerate(y))
                yp = tuple(c + (1 if a == j else 0) for a, c in enumerate(y))
                val += -params.t * (delta(x, ym) + delta(x, yp))
            if d >= 2 and params.t_prime != 0.0:
                for j in range(d):
                    for k in range(j + 1, d):
                        for sj, sk in ((-1, -1), (-1, 1), (1, -1), (1, 1)):
                            yy = tuple(
                                c + (sj if a == j else 0) + (sk if a == k else 0)
                                for a, c in enumerate(y))
                            val += -params.t_prime * delta(x, yy)
            if delta(x, y):
                val += -params.mu
            if val != 0.0:
                for spin in SPINS:
                    T[mode_index(spec, x, spin), mode_index(spec, y, spin)] = val
    return T


def dispersion(k, params: ModelParams, d: int, shifts=()) -> complex:
    """Dispersion at momentum k with optional complex shifts z*e_p added in.

    shifts is a sequence of (z, axis) pairs; several shifts on the same axis
    accumulate, which the iterated contour formula requires.
    """
    k = list(float(c) for c in k)
    if len(k) != d:
        raise ValueError(f"momentum has {len(k)} components, expected {d}")
    args = [complex(c) for c in k]
    for z, p in shifts:
        if not 0 <= p < d:
            raise ValueError(f"shift axis {p} outside 0..{d - 1}")
        args[p] += complex(z)
    E = -2.0 * params.t * sum(cmath.cos(a) for a in args)
    if d >= 2 and params.t_prime != 0.0:
        E += -4.0 * params.t_prime * sum(
            cmath.cos(args[j]) * cmath.cos(args[l])
            for j in range(d) for l in range(j + 1, d))
    E -= params.mu
    if not shifts and abs(E.imag) == 0.0:
        return complex(E.real)
    return E


def dispersion_grid(spec: LatticeSpec, params: ModelParams, shifts=(),
                    extra_axis_shift=None) -> np.ndarray:
    """Vectorized dispersion over the full momentum grid.

    extra_axis_shift = (axis, w_array) evaluates E_{k + shifts + w e_axis} for a
    whole array of w at once; the result then has shape (L^d,) + w.shape.
    """
    ks = momentum_grid(spec)  # (n, d)
    args = ks.astype(complex)
    for z, p in shifts:
        if not 0 <= p < spec.d:
            raise ValueError(f"shift axis {p} outside 0..{spec.d - 1}")
        args[:, p] += complex(z)
    if extra_axis_shift is None:
        cos = np.cos(args)
    else:
        axis, w = extra_axis_shift
        w = np.asarray(w, dtype=complex)
        full = np.broadcast_to(
            args.reshape(args.shape[0], *(1,) * w.ndim, spec.d),
            (args.shape[0], *w.shape, spec.d)).copy()
        full[..., axis] += w
        cos = np.cos(full)
    E = -2.0 * params.t * cos.sum(axis=-1)
    if spec.d >= 2 and params.t_prime != 0.0:
        cross = np.zeros_like(E)
        for j in range(spec.d):
            for l in range(j + 1, spec.d):
                cross = cross + cos[..., j] * cos[..., l]
        E = E - 4.0 * params.t_prime * cross
    return E - params.mu


def check_fourier_consistency(spec: LatticeSpec, params: ModelParams) -> float:
    """Max over k of |E_k - sum_x T(x xi, 0 xi) e^{-i<k,x>}|.

    E_k must be the Fourier symbol of the hopping matrix; this ties the two
    independent implementations together.
    """
    T = hopping_matrix(spec, params, require_hopping=False)
    sites = enumerate_sites(spec)
    origin = (0,) * spec.d
    col = np.array([T[mode_index(spec, x, UP), mode_index(spec, origin, UP)]
                    for x in sites])
    ks = momentum_grid(spec)
    xs = np.array(sites, dtype=float).reshape(len(sites), spec.d)
    phases = np.exp(-1j * (ks @ xs.T))  # (n_k, n_x)
    synth = phases @ col
    direct = np.array([dispersion(k, params, spec.d) for k in ks])
    return float(np.max(np.abs(direct - synth)))


# ---------------------------------------------------------------------------
# example interactions
# ---------------------------------------------------------------------------

def hubbard_interaction(U: float, d: int = 1) -> InteractionCoefficients:
    """On-site Hubbard term U sum_x n_up n_down in the order-2 normal form."""
    origin = (0,) * d
    u = InteractionCoefficients()
    u.add(2, ((origin, origin), (UP, DOWN), (UP, DOWN)), float(U))
    return u


def spin_field_interaction(B: dict) -> InteractionCoefficients:
    """Local magnetic field coupled to the spin operator: order-1 coefficients
    (1/2) sum_a B_x^(a) P^(a)_{xi,phi}.  B maps site tuples to real 3-vectors.
    """
    u = InteractionCoefficients()
    for x, vec in B.items():
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (3,) or np.any(np.abs(vec.imag) > 0):
            raise ValueError(f"field at {x} must be a real 3-vector, got {vec}")
        mat = 0.5 * sum(vec.real[a] * PAULI[a] for a in range(3))
        for xi in SPINS:
            for phi in SPINS:
                u.add(1, (tuple(x), xi, phi), mat[xi, phi])
    return u


def spin_spin_interaction(w: dict, d: int = 1,
                          L: int | None = None) -> InteractionCoefficients:
    """Spin-spin interaction sum_{x,y} w(x-y) <S_x, S_y>.

    Produces the quadratic on-site correction (w(0)/4) sum_a (P^a P^a)_{xi,phi}
    and the quartic term (w(x1-x2)/4) sum_a P^a_{xi1,phi1} P^a_{xi2,phi2}.
    The quadratic coefficient is site-independent, so a nonzero w(0) needs the
    lattice size L to place one entry on every site of the reduction window.
    """
    u = InteractionCoefficients()
    w = {tuple(int(c) for c in x): v for x, v in w.items()}
    for x, val in w.items():
        if isinstance(val, complex) and val.imag != 0:
            raise ValueError(f"spin-spin coefficient at {x} must be real")
    origin = (0,) * d
    w0 = float(w.get(origin, 0.0))
    if w0:
        if L is None:
            raise ValueError("w(0) != 0 adds a site-independent quadratic "
                             "correction; pass the lattice size L")
        quad = 0.25 * w0 * sum(p @ p for p in PAULI)
        window = range(-(L // 2), -(L // 2) + L)
        for site in itertools.product(window, repeat=d):
            for xi in SPINS:
                for phi in SPINS:
                    u.add(1, (site, xi, phi), quad[xi, phi])
    # quartic part, anchored at x2 = 0; displacement x1 - x2 runs over supp(w)
    for disp, val in w.items():
        val = float(val)
        if val == 0.0:
            continue
        for xi1 in SPINS:
            for xi2 in SPINS:
                for phi1 in SPINS:
                    for phi2 in SPINS:
                        c = 0.25 * val * sum(
                            PAULI[a][xi1, phi1] * PAULI[a][xi2, phi2]
                            for a in range(3))
                        if c != 0:
                            u.add(2, ((disp, origin), (xi1, xi2), (phi1, phi2)), c)
    return u


def density_density_interaction(tables: dict[int, dict]) -> InteractionCoefficients:
    """Density-density interaction from real tables U^dd_l keyed by (X, Xi).

    Order-1 keys are (x, xi); order >= 2 keys are (X, Xi) with X anchored at the
    origin in its last slot.  The normal form inserts prod_j delta_{xi_j,phi_j}.
    """
    u = InteractionCoefficients()
    for l, table in tables.items():
        for key, value in table.items():
            value = complex(value)
            if value.imag != 0:
                raise ValueError("density-density coefficients must be real")
            if l == 1:
                x, xi = key
                u.add(1, (x, xi, xi), value.real)
            else:
                X, Xi = key
                if any((tuple(X[j]), Xi[j]) == (tuple(X[k]), Xi[k])
                       for j in range(l) for k in range(j + 1, l)):
                    raise ValueError(
                        "density-density tables must vanish on coinciding "
                        f"(site, spin) pairs, got X={X}, Xi={Xi}")
                u.add(l, (X, Xi, Xi), value.real)
    return u


def build_example_interaction(kind: str, **kwargs) -> InteractionCoefficients:
    """Dispatch to the example constructors: hubbard, density_density,
    spin_field, spin_spin."""
    builders = {
        "hubbard": hubbard_interaction,
        "density_density": density_density_interaction,
        "spin_field": spin_field_interaction,
        "spin_spin": spin_spin_interaction,
    }
    if kind not in builders:
        raise ValueError(f"unknown interaction kind {kind!r}")
    return builders[kind](**kwargs)


# ---------------------------------------------------------------------------
# lambda couplings for the derivative formula
# ---------------------------------------------------------------------------

@dataclass
class LambdaCoefficients:
    """Real couplings lambda(X,Y,Xi,Phi) of order m_hat, entering the modified
    interaction as lambda(X,Y,Xi,Phi) + lambda(Y,X,Phi,Xi)."""

    m_hat: int
    entries: dict = field(default_factory=dict)

    def add(self, X, Y, Xi, Phi, value: float):
        if len(X) != self.m_hat:
            raise ValueError("lambda entry order mismatch")
        key = (tuple(_as_site_tuple(x) for x in X),
               tuple(_as_site_tuple(y) for y in Y),
               tuple(int(s) for s in Xi), tuple(int(s) for s in Phi))
        self.entries[key] = self.entries.get(key, 0.0) + float(value)

    def symmetrized_terms(self):
        """Terms (X, Y, Xi, Phi, coeff) of sum lambda(X,Y,Xi,Phi)+lambda(Y,X,Phi,Xi)."""
        out = {}
        for (X, Y, Xi, Phi), v in self.entries.items():
            for key in ((X, Y, Xi, Phi), (Y, X, Phi, Xi)):
                out[key] = out.get(key, 0.0) + v
        return [(X, Y, Xi, Phi, v) for (X, Y, Xi, Phi), v in sorted(out.items())
                if v != 0.0]


# ---------------------------------------------------------------------------
# anti-symmetrization (unique sign-equivariant coefficient tensor)
# ---------------------------------------------------------------------------

def antisymmetrize(g: dict, spec: LatticeSpec, l: int) -> np.ndarray:
    """Anti-symmetrize an order-l lattice table g[(X, Xi, Phi)] into the dense
    tensor f over mode indices, shape (2L^d,)*2l.

    f(pi(X_Xi), tau(Y_Phi)) = sgn(pi) sgn(tau) f(X_Xi, Y_Phi), and contracting f
    against psi*_{x1 xi1}..psi*_{xl xil} psi_{y1 phi1}..psi_{yl phil} reproduces
    the operator written with g.
    """
    if l > spec.n_modes:
        raise ValueError(f"order {l} exceeds the {spec.n_modes} available modes")
    n = spec.n_modes
    f = np.zeros((n,) * (2 * l), dtype=complex)
    base_sign = (-1) ** (l * (l - 1) // 2)
    perms = [(p, _perm_sign(p)) for p in itertools.permutations(range(l))]
    norm = 1.0 / math.factorial(l) ** 2
    for (X, Xi, Phi), value in g.items():
        modes_x = [mode_index(spec, x, xi) for x, xi in zip(X, Xi)]
        modes_y = [mode_index(spec, x, phi) for x, phi in zip(X, Phi)]
        amp = base_sign * norm * complex(value)
        for p, sp in perms:
            rows = tuple(modes_x[p[i]] for i in range(l))
            for q, sq in perms:
                cols = tuple(modes_y[q[i]] for i in range(l))
                f[rows + cols] += sp * sq * amp
    return f


def _perm_sign(p) -> int:
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def antisym_pinned_norm(f: np.ndarray, l: int) -> float:
    """Left side of the anti-symmetrization norm inequality: max over the first
    creation (resp. annihilation) slot of the l1 mass of f over the rest."""
    n = f.shape[0]
    flat = f.reshape(n, -1)
    first = float(np.max(np.sum(np.abs(flat), axis=1)))
    moved = np.moveaxis(f, l, 0).reshape(n, -1)
    second = float(np.max(np.sum(np.abs(moved), axis=1)))
    return max(first, second)


def table_pinned_norm(g: dict, l: int) -> float:
    """Right side of the norm inequality: max over pinned (x_j, xi_j) or
    (x_j, phi_j) of the summed absolute values of g."""
    best = 0.0
    sums: dict[tuple, float] = {}
    for (X, Xi, Phi), value in g.items():
        for j in range(l):
            sums[(0, j, X[j], Xi[j])] = sums.get((0, j, X[j], Xi[j]), 0.0) + abs(value)
            sums[(1, j, X[j], Phi[j])] = sums.get((1, j, X[j], Phi[j]), 0.0) + abs(value)
    for total in sums.values():
        best = max(best, total)
    return best


def hubbard_antisymmetric_tensor(U: float, spec: LatticeSpec) -> np.ndarray:
    """The explicit -U/4 tensor equivalent to the on-site Hubbard interaction."""
    n = spec.n_modes
    f = np.zeros((n,) * 4, dtype=complex)
    for x in enumerate_sites(spec):
        up, down = mode_index(spec, x, UP), mode_index(spec, x, DOWN)
        for (a, b), s1 in (((up, down), 1), ((down, up), -1)):
            for (c, e), s2 in (((up, down), 1), ((down, up), -1)):
                f[a, b, c, e] = -0.25 * U * s1 * s2
    return f


# ---------------------------------------------------------------------------
# smallness conditions of the two decay theorems
# ---------------------------------------------------------------------------

def decay_base(params: ModelParams, d: int, r: float) -> float:
    """F_{t,t',d}(r) = r/(2A) + sqrt(r^2/(4A^2) + 1), A = |t| + 2(d-1)|t'|."""
    A = abs(params.t) + 2.0 * (d - 1) * abs(params.t_prime)
    if A == 0.0:
        raise ZeroDivisionError("decay base undefined: |t| + 2(d-1)|t'| == 0")
    x = r / (2.0 * A)
    return x + math.sqrt(x * x + 1.0)


def geometric_sum_factor(params: ModelParams, d: int) -> float:
    """((F^{1/(2 e pi d)} + 1)/(F^{1/(2 e pi d)} - 1))^d at F = F(pi/(2 beta))."""
    F = decay_base(params, d, math.pi / (2.0 * params.beta))
    g = F ** (1.0 / (2.0 * math.e * math.pi * d))
    return ((g + 1.0) / (g - 1.0)) ** d


@dataclass(frozen=True)
class SmallnessReport:
    variant: str
    lhs: float
    rhs: float
    satisfied: bool
    R: float | None = None


def check_smallness(u: InteractionCoefficients, params: ModelParams,
                    spec: LatticeSpec, variant: str = "general",
                    R: float | None = None) -> SmallnessReport:
    """Evaluate the interaction-smallness hypothesis of the decay theorems.

    general: sum_l l 16^l ||U_l||_l < beta^{-1} K^{-d} R with R in (0,1);
    hubbard: |U| <= (108 beta)^{-1} K^{-d}.
    """
    K = geometric_sum_factor(params, spec.d)
    if variant == "general":
        if R is None or not 0.0 < R < 1.0:
            raise ValueError("general variant needs R in (0, 1)")
        lhs = sum(l * 16.0**l * interaction_norm(u, l) for l in u.orders)
        rhs = R / (params.beta * K)
        return SmallnessReport("general", lhs, rhs, lhs < rhs, R)
    if variant == "hubbard":
        U = u.hubbard_coupling()
        if U is None:
            raise ValueError("hubbard variant requires a pure on-site interaction")
        rhs = 1.0 / (108.0 * params.beta * K)
        return SmallnessReport("hubbard", abs(U), rhs, abs(U) <= rhs)
    raise ValueError(f"unknown smallness variant {variant!r}")


def hubbard_threshold(params: ModelParams, d: int) -> float:
    """The |U| threshold (108 beta)^{-1} K^{-d} of the on-site decay theorem."""
    return 1.0 / (108.0 * params.beta *
                  geometric_sum_factor(params, d))


# ---------------------------------------------------------------------------
# model description files
# ---------------------------------------------------------------------------

class ModelFileError(ValueError):
    pass


def model_to_dict(spec: LatticeSpec, params: ModelParams,
                  u: InteractionCoefficients) -> dict:
    interaction = []
    for l, table in sorted(u.orders.items()):
        entries = []
        for key, value in sorted(table.items()):
            if l == 1:
                x, xi, phi = key
                X, Xi, Phi = (x,), (xi,), (phi,)
            else:
                X, Xi, Phi = key
            entries.append({
                "X": [list(x) for x in X],
                "Xi": [_SPIN_NAMES[s] for s in Xi],
                "Phi": [_SPIN_NAMES[s] for s in Phi],
                "re": value.real,
                "im": value.imag,
            })
        interaction.append({"order": l, "entries": entries})
    return {
        "d": spec.d, "L": spec.L,
        "t": params.t, "t_prime": params.t_prime,
        "mu": params.mu, "beta": params.beta,
        "interaction": interaction,
    }


def save_model(path, spec, params, u):
    with open(path, "w") as fh:
        json.dump(model_to_dict(spec, params, u), fh, indent=2, sort_keys=True)
        fh.write("\n")


def model_from_dict(data: dict):
    try:
        spec = LatticeSpec(d=int(data["d"]), L=int(data["L"]))
        params = ModelParams(t=float(data["t"]),
                             t_prime=float(data.get("t_prime", 0.0)),
                             mu=float(data["mu"]), beta=float(data["beta"]))
        u = InteractionCoefficients()
        for block in data.get("interaction", []):
            l = int(block["order"])
            for i, entry in enumerate(block.get("entries", [])):
                X = tuple(tuple(int(c) for c in x) for x in entry["X"])
                Xi = tuple(_SPIN_FROM_NAME[s] for s in entry["Xi"])
                Phi = tuple(_SPIN_FROM_NAME[s] for s in entry["Phi"])
                value = complex(float(entry["re"]), float(entry.get("im", 0.0)))
                if l == 1:
                    u.add(1, (X[0], Xi[0], Phi[0]), value)
                else:
                    u.add(l, (X, Xi, Phi), value)
    except HermiticityError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ModelFileError(f"malformed model description: {exc}") from exc
    u.validate_hermiticity()
    return spec, params, u


def load_model(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)
