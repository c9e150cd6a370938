"""Free thermal covariance on the lattice and its analytic identities.

The covariance is the momentum sum

    C(x xi s, y phi t) = delta_{xi,phi} / L^d * sum_k e^{i<k, y-x>} e^{-(t-s) E_k}
                         * ( 1_{t-s <= 0} / (1 + e^{beta E_k})
                           - 1_{t-s  > 0} / (1 + e^{-beta E_k}) )

with the dispersion optionally shifted by complex multiples of coordinate
axes.  The two branches are evaluated in the exponentially safe arrangement
(splitting on the sign of Re E), which is exactly the rearrangement used to
prove the determinant bound, so no overflow occurs for any beta in range.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    SPINS,
    LatticeSpec,
    TimeGrid,
    enumerate_sites,
    momentum_grid,
    periodic_reduce,
)
from .model import ModelParams, decay_base, dispersion_grid, geometric_sum_factor

E_CONST = math.e

MATRIX_SIZE_LIMIT = 4096


class CovarianceGuardError(ValueError):
    """A shifted dispersion violates |Im E_k| < pi/beta at some momentum."""


@dataclass(frozen=True)
class CovarianceSpec:
    """Lattice + parameters + a tuple of complex momentum shifts (z, axis)."""

    spec: LatticeSpec
    params: ModelParams
    shifts: tuple = ()

    def __post_init__(self):
        for z, p in self.shifts:
            if not 0 <= int(p) < self.spec.d:
                raise ValueError(f"shift axis {p} outside 0..{self.spec.d - 1}")

    def with_extra_shift(self, z: complex, axis: int) -> "CovarianceSpec":
        return CovarianceSpec(self.spec, self.params,
                              self.shifts + ((complex(z), int(axis)),))


def shift_radius(params: ModelParams, d: int, r: float) -> float:
    """Half log of the decay base: |Im z| below this keeps |Im E_{k+z e_p}| < r."""
    return 0.5 * math.log(decay_base(params, d, r))


@functools.lru_cache(maxsize=128)
def _dispersions(cs: CovarianceSpec) -> np.ndarray:
    return dispersion_grid(cs.spec, cs.params, cs.shifts)


def guarded_dispersions(cs: CovarianceSpec) -> np.ndarray:
    """Dispersion over the momentum grid, failing loudly when the imaginary
    part guard |Im E_k| < pi/beta is violated (names the offending k)."""
    E = _dispersions(cs)
    limit = math.pi / cs.params.beta
    bad = np.abs(E.imag) >= limit
    if np.any(bad):
        idx = int(np.argmax(bad))
        k = momentum_grid(cs.spec)[idx]
        raise CovarianceGuardError(
            f"|Im E_k| = {abs(E.imag[idx]):.6g} >= pi/beta = {limit:.6g} "
            f"at k = {tuple(k)} (shifts {cs.shifts})")
    return E


def _fermi_factor(E: np.ndarray, dt: float, beta: float) -> np.ndarray:
    """The two-branch time kernel, rearranged per sign of Re E for stability."""
    E = np.asarray(E, dtype=complex)
    pos = E.real > 0
    den = 1.0 + np.exp(-beta * np.where(pos, E, -E))
    if dt <= 0:
        expo = -dt * E - np.where(pos, beta * E, 0.0)
        return np.exp(expo) / den
    expo = -dt * E + np.where(pos, 0.0, beta * E)
    return -np.exp(expo) / den


def covariance_value(cs: CovarianceSpec, a, b) -> complex:
    """C(a, b) for space-time points a = (site, spin, time), b likewise.

    Sites may be arbitrary integer vectors (periodicity makes the phase well
    defined); times must lie in (-beta, beta] differences, which covers both
    the [0, beta) arguments and the doubled grid of the l1 sum.
    """
    (xa, sa, ta), (xb, sb, tb) = a, b
    if sa != sb:
        return 0.0 + 0.0j
    E = guarded_dispersions(cs)
    ks = momentum_grid(cs.spec)
    dvec = np.array([int(q) - int(p) for p, q in zip(xa, xb)], dtype=float)
    phase = np.exp(1j * (ks @ dvec))
    vals = _fermi_factor(E, float(tb) - float(ta), cs.params.beta)
    return complex(np.sum(phase * vals) / cs.spec.n_sites)


@functools.lru_cache(maxsize=64)
def _covariance_lookup(cs: CovarianceSpec, grid: TimeGrid):
    """Tables C[site_diff_rank, time_diff_idx] over canonical site differences
    and all grid time differences in (-beta, beta]."""
    spec = cs.spec
    E = guarded_dispersions(cs)
    ks = momentum_grid(spec)
    diffs = np.array(enumerate_sites(spec), dtype=float)
    phases = np.exp(1j * (diffs @ ks.T))  # (n_sites, n_k)
    n = grid.n_points
    dts = np.arange(-(n - 1), n) / grid.h  # time differences t_b - t_a
    kernel = np.stack([_fermi_factor(E, float(dt), cs.params.beta) for dt in dts])
    table = phases @ kernel.T / spec.n_sites  # (n_sites, n_dt)
    return table, dts


def covariance_matrix(cs: CovarianceSpec, grid: TimeGrid) -> np.ndarray:
    """The full N x N covariance matrix in the global (site, spin, time) order,
    N = 2 L^d beta h (time is the slowest index)."""
    spec = cs.spec
    N = spec.n_modes * grid.n_points
    if N > MATRIX_SIZE_LIMIT:
        raise ValueError(f"covariance matrix size {N} exceeds {MATRIX_SIZE_LIMIT}")
    table, _ = _covariance_lookup(cs, grid)
    sites = enumerate_sites(spec)
    ns = spec.n_sites
    # rank of (site_b - site_a) mod L for every ordered site pair
    diff_rank = np.empty((ns, ns), dtype=int)
    for ia, a in enumerate(sites):
        for ib, b in enumerate(sites):
            r = 0
            for ca, cb in zip(a, b):
                r = r * spec.L + (cb - ca) % spec.L
            diff_rank[ia, ib] = r
    mode_site = np.repeat(np.arange(ns), 2)
    mode_spin = np.tile(np.arange(2), ns)
    spin_eq = (mode_spin[:, None] == mode_spin[None, :])
    block_rank = diff_rank[mode_site[:, None], mode_site[None, :]]
    T = grid.n_points
    tidx = np.arange(T)
    dt_idx = tidx[None, :] - tidx[:, None] + (T - 1)  # index into dts
    M = table[block_rank[None, :, None, :], dt_idx[:, None, :, None]]
    M = np.where(spin_eq[None, :, None, :], M, 0.0)
    return M.reshape(N, N)


def det_identity_check(cs: CovarianceSpec, grid: TimeGrid) -> dict:
    """det C_h against the closed-form product over momenta of
    (1 + e^{beta E_k})^{-2}; the square counts the two spins."""
    M = covariance_matrix(cs, grid)
    lhs = complex(np.linalg.det(M))
    E = guarded_dispersions(cs)
    beta = cs.params.beta
    # (1 + e^{beta E})^{-2} evaluated overflow-safely via the sign of Re E
    pos = E.real > 0
    log_terms = np.where(pos, -beta * E - np.log1p(np.exp(-beta * np.where(pos, E, 0))),
                         -np.log1p(np.exp(beta * np.where(pos, 0, E))))
    rhs = complex(np.exp(2.0 * np.sum(log_terms)))
    if abs(lhs) < 1e-300 or abs(rhs) < 1e-300:
        raise ArithmeticError(
            f"determinant underflow: |det C_h| = {abs(lhs)}, "
            f"closed form = {abs(rhs)}")
    rel = abs(lhs - rhs) / abs(rhs)
    return {"lhs": lhs, "rhs": rhs, "relative_error": rel}


def matsubara_frequencies(grid: TimeGrid) -> np.ndarray:
    """The beta*h odd frequencies pi(2Z+1)/beta inside (-pi h, pi h)."""
    n = grid.n_points
    odd = np.arange(-n + 1, n, 2)
    return math.pi * odd / grid.beta


def matsubara_check(cs: CovarianceSpec, grid: TimeGrid) -> dict:
    """Conjugate C_h by the momentum/frequency plane-wave unitary and compare
    with the diagonal (1 - e^{-i omega/h + E_k/h})^{-1}."""
    spec = cs.spec
    M = covariance_matrix(cs, grid)
    E = guarded_dispersions(cs)
    omegas = matsubara_frequencies(grid)
    ks = momentum_grid(spec)
    sites = np.array(enumerate_sites(spec), dtype=float)
    T = grid.n_points
    times = grid.points
    n_modes = spec.n_modes
    N = n_modes * T
    rows = []
    targets = []
    for ik in range(spec.n_sites):
        for phi in SPINS:
            for w in omegas:
                rows.append((ik, phi, w))
                targets.append(1.0 / (1.0 - np.exp((-1j * w + E[ik]) / grid.h)))
    Y = np.zeros((N, N), dtype=complex)
    norm = 1.0 / math.sqrt(T * spec.n_sites)
    for r, (ik, phi, w) in enumerate(rows):
        kvec = ks[ik]
        for t_idx in range(T):
            tphase = np.exp(-1j * w * times[t_idx]) * norm
            for isite in range(spec.n_sites):
                col = t_idx * n_modes + 2 * isite + phi
                Y[r, col] = np.exp(1j * (kvec @ sites[isite])) * tphase
    D = Y @ M @ Y.conj().T
    diag = np.diag(D).copy()
    off = D - np.diag(diag)
    max_off = float(np.max(np.abs(off)))
    max_diag_dev = float(np.max(np.abs(diag - np.array(targets))))
    unitarity = float(np.max(np.abs(Y @ Y.conj().T - np.eye(N))))
    return {"max_offdiagonal": max_off, "max_diagonal_deviation": max_diag_dev,
            "unitarity_defect": unitarity}


def u1_shift_identity_check(cs: CovarianceSpec, grid: TimeGrid, axis: int) -> float:
    """Max deviation of e^{i 2pi <x-y, e_q>/L} C(x,y)(shifts) from
    C(x,y)(shifts + (2pi/L) e_q), entrywise over the full matrix."""
    spec = cs.spec
    M0 = covariance_matrix(cs, grid)
    M1 = covariance_matrix(cs.with_extra_shift(2.0 * math.pi / spec.L, axis), grid)
    sites = np.array(enumerate_sites(spec), dtype=float)
    comp = np.repeat(sites[:, axis], 2)
    comp = np.tile(comp, grid.n_points)
    phase = np.exp(1j * 2.0 * math.pi * (comp[:, None] - comp[None, :]) / spec.L)
    return float(np.max(np.abs(phase * M0 - M1)))


def chord_components(spec: LatticeSpec, dvec) -> list[float]:
    """|e^{i 2pi d_q / L} - 1| / (2pi/L) per axis: the finite-lattice distance."""
    out = []
    for c in dvec:
        out.append(abs(np.exp(1j * 2.0 * math.pi * int(c) / spec.L) - 1.0)
                   / (2.0 * math.pi / spec.L))
    return out


def chord_exponent(spec: LatticeSpec, dvec) -> float:
    return sum(chord_components(spec, dvec)) / (4.0 * E_CONST * spec.d)


def reduced_exponent(spec: LatticeSpec, dvec) -> float:
    red = periodic_reduce(tuple(int(c) for c in dvec), spec.L)
    if np.isscalar(red):
        red = (red,)
    return sum(abs(c) for c in red) / (2.0 * E_CONST * math.pi * spec.d)


def contour_formula_check(cs: CovarianceSpec, a, b, axis: int, n: int = 1,
                          circle_nodes: int = 512, theta_nodes: int = 24,
                          radius: float | None = None) -> dict:
    """Iterated contour representation of the chord-weighted covariance.

    lhs: the n-fold (L/2pi) int_0^{2pi/L} dtheta (2pi i)^{-1} oint dw/(w-theta)^2
    quadrature of C(shifts + sum_j w_j e_axis); rhs: chord^n * C(shifts).
    Circles use the composite trapezoid rule (spectrally accurate since the
    integrand is periodic); the theta segments use Gauss-Legendre.
    """
    spec, params = cs.spec, cs.params
    if radius is None:
        radius = math.log(decay_base(params, spec.d, math.pi / (2.0 * params.beta))) / (2.0 * n)
    (xa, sa, ta), (xb, sb, tb) = a, b
    dvec = [int(p) - int(q) for p, q in zip(xa, xb)]
    chord = (np.exp(1j * 2.0 * math.pi * dvec[axis] / spec.L) - 1.0) / (2.0 * math.pi / spec.L)
    rhs = chord**n * covariance_value(cs, a, b)

    nodes, weights = np.polynomial.legendre.leggauss(theta_nodes)
    seg = 2.0 * math.pi / spec.L
    thetas = 0.5 * seg * (nodes + 1.0)
    th_w = 0.5 * seg * weights * (spec.L / (2.0 * math.pi))
    phis = 2.0 * math.pi * np.arange(circle_nodes) / circle_nodes
    circ = radius * np.exp(1j * phis)
    circ_w = np.exp(-1j * phis) / (radius * circle_nodes)

    w1 = thetas[:, None] + circ[None, :]
    wt1 = th_w[:, None] * circ_w[None, :]
    total_w = wt1.reshape(-1)
    total_shift = w1.reshape(-1)
    for _ in range(n - 1):
        total_shift = (total_shift[:, None] + w1.reshape(-1)[None, :]).reshape(-1)
        total_w = (total_w[:, None] * wt1.reshape(-1)[None, :]).reshape(-1)

    E = dispersion_grid(spec, params, cs.shifts, extra_axis_shift=(axis, total_shift))
    limit = math.pi / params.beta
    if np.any(np.abs(E.imag) >= limit):
        raise CovarianceGuardError(
            "contour quadrature leaves the analyticity strip; reduce radius")
    if sa != sb:
        lhs = 0.0 + 0.0j
    else:
        ks = momentum_grid(spec)
        phase = np.exp(1j * (ks @ np.array([-float(c) for c in dvec])))
        vals = _fermi_factor(E, float(tb) - float(ta), params.beta)
        cw = (phase[:, None] * vals).sum(axis=0) / spec.n_sites
        lhs = complex(np.sum(cw * total_w))
    return {"lhs": lhs, "rhs": rhs, "deviation": abs(lhs - rhs), "radius": radius}


def decay_envelope_check(cs: CovarianceSpec, grid: TimeGrid) -> dict:
    """Scan all (site difference, time difference) pairs for the two decay
    envelopes: 2 F^{-chord exponent} and the reduced-window l1 variant."""
    spec = cs.spec
    F = decay_base(cs.params, spec.d, math.pi / (2.0 * cs.params.beta))
    table, _ = _covariance_lookup(cs, grid)
    worst_chord = 0.0
    worst_reduced = 0.0
    rows = []
    for rank, dvec in enumerate(enumerate_sites(spec)):
        cmax = float(np.max(np.abs(table[rank])))
        env_chord = 2.0 * F ** (-chord_exponent(spec, dvec))
        env_reduced = 2.0 * F ** (-reduced_exponent(spec, dvec))
        worst_chord = max(worst_chord, cmax / env_chord)
        worst_reduced = max(worst_reduced, cmax / env_reduced)
        rows.append({"diff": dvec, "max_abs_c": cmax,
                     "envelope_chord": env_chord, "envelope_reduced": env_reduced})
    return {"worst_ratio_chord": worst_chord, "worst_ratio_reduced": worst_reduced,
            "rows": rows}


def l1_bound_check(cs: CovarianceSpec, grid: TimeGrid) -> dict:
    """(1/h) sum over [-beta, beta)_h and over the lattice of |C(x xi t, 0 xi 0)|
    against the closed-form 4 beta ((F^a + 1)/(F^a - 1))^d bound."""
    spec = cs.spec
    E = guarded_dispersions(cs)
    ks = momentum_grid(spec)
    sites = np.array(enumerate_sites(spec), dtype=float)
    phases = np.exp(1j * (-sites @ ks.T))  # C(x.., 0..): phase e^{i<k, 0-x>}
    total = 0.0
    for t in grid.points_double:
        vals = _fermi_factor(E, -float(t), cs.params.beta)
        total += float(np.sum(np.abs(phases @ vals))) / spec.n_sites
    lhs = total / grid.h
    rhs = 4.0 * cs.params.beta * geometric_sum_factor(cs.params, spec.d)
    return {"lhs": lhs, "rhs": rhs, "satisfied": lhs <= rhs}


def det_decay_check(cs: CovarianceSpec, pairs) -> dict:
    """|det(C(a_j, b_k))| against 2 * 4^n * F^{-chord exponent of (sum x - sum y)}."""
    n = len(pairs)
    M = np.array([[covariance_value(cs, a, b) for (_, b) in pairs]
                  for (a, _) in pairs], dtype=complex)
    lhs = abs(complex(np.linalg.det(M)))
    dsum = np.zeros(cs.spec.d, dtype=int)
    for (xa, _, _), (xb, _, _) in pairs:
        dsum += np.array([int(p) - int(q) for p, q in zip(xa, xb)])
    F = decay_base(cs.params, cs.spec.d, math.pi / (2.0 * cs.params.beta))
    bound = 2.0 * 4.0**n * F ** (-chord_exponent(cs.spec, dsum))
    return {"abs_det": lhs, "bound": bound, "ratio": lhs / bound,
            "satisfied": lhs <= bound}
