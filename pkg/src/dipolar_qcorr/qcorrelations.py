"""Concurrence and quantum discord of two-qubit states.

Entropies are in bits. Subsystem A is the first spin and B the second;
discord measurements are rank-1 projective measurements on B along the
Bloch direction ``(sin t cos p, sin t sin p, cos t)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import XState, xstate_arrays
from .errors import NumericFailure
from .optimize import golden_section_min
from .smatrix import PAULI_Y, as_cmat, general_eigenvalues, herm_eigen, kron, partial_trace
from .spinmodel import SimParams

EIG_CLIP = 1e-10
DEGENERATE_P = 1e-14
N_THETA = 129
N_PHI = 64
ANGLE_TOL = 1e-10
MAX_ROUNDS = 50

SIGMA_YY = kron(PAULI_Y, PAULI_Y)


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    lambdas: tuple
    method: str


@dataclass(frozen=True)
class DiscordResult:
    value: float
    optimal_theta: float
    optimal_phi: float
    classical_correlation: float
    mutual_information: float


# -- concurrence -----------------------------------------------------------


def r_matrix(rho):
    """``rho (sy x sy) rho^* (sy x sy)`` with ``rho^*`` the entrywise conjugate."""
    rho = as_cmat(rho, dims=(4,))
    return rho @ SIGMA_YY @ rho.conj() @ SIGMA_YY


def _combine(lambdas):
    roots = np.sqrt(lambdas)
    return max(0.0, roots[0] - roots[1] - roots[2] - roots[3])


def concurrence_numeric(rho):
    """Wootters concurrence from the QR eigenvalues of the R matrix."""
    ev = general_eigenvalues(r_matrix(rho))
    worst_imag = float(np.max(np.abs(ev.imag)))
    if worst_imag >= EIG_CLIP:
        raise NumericFailure(f"R has a complex eigenvalue (|Im| = {worst_imag:.3e}); not a valid state")
    lam = np.sort(ev.real)[::-1]
    if lam[-1] < -EIG_CLIP:
        raise NumericFailure(f"R has a negative eigenvalue {lam[-1]:.3e}; not a valid state")
    lam = np.clip(lam, 0.0, None)
    value = min(1.0, _combine(lam))
    return ConcurrenceResult(value=float(value), lambdas=tuple(float(v) for v in lam), method="numeric")


def concurrence_lambdas(beta, g, t):
    """Closed-form eigenvalues ``(l1, l2, l3)`` of R for rho(t); ``l4 == l3``.

    Vectorized. Written in terms of ``q = exp(-g t)`` so large ``g t`` cannot
    overflow. ``l2`` is obtained from ``l1 * l2 == l3**2``, which avoids the
    cancellation in the minus branch when the state is nearly pure.
    """
    beta, g, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (beta, g, t)))
    tau = np.tanh(0.5 * beta)
    tau2 = tau * tau
    q = np.exp(-g * t)
    cos3 = np.cos(3.0 * t)
    sin_half = np.abs(np.sin(1.5 * t))
    root = np.sqrt(np.maximum(1.0 - 2.0 * tau2 * q * cos3 + (tau2 * q) ** 2, 0.0))
    split = 4.0 * tau * np.sqrt(q) * sin_half * root
    l3 = (1.0 - tau2 * q) ** 2 / 16.0
    # (1 + x)^2 - 4 x cos 3t = (1 - x)^2 + 8 x sin^2(3t/2): l1 >= l3 exactly
    l1 = l3 + (8.0 * tau2 * q * sin_half**2 + split) / 16.0
    with np.errstate(divide="ignore", invalid="ignore"):
        l2 = np.where(l1 > 0, np.minimum(l3 * l3 / l1, l3), 0.0)
    return l1, l2, l3


def concurrence_analytic_array(beta, g, t):
    l1, l2, l3 = concurrence_lambdas(beta, g, t)
    s1 = np.sqrt(l1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = np.where(s1 > 0, l3 / s1, 0.0)
    return np.maximum(0.0, s1 - s2 - 2.0 * np.sqrt(l3))


def concurrence_analytic(p: SimParams):
    l1, l2, l3 = (float(v) for v in concurrence_lambdas(p.beta, p.g, p.t))
    value = float(concurrence_analytic_array(p.beta, p.g, p.t))
    lambdas = tuple(sorted((l1, l2, l3, l3), reverse=True))
    return ConcurrenceResult(value=float(value), lambdas=lambdas, method="analytic")


def concurrence_xstate(x: XState):
    """``2 max(0, |alpha| - sqrt(b c), |z| - sqrt(a d))`` with the inner anti-diagonal z = 0."""
    return 2.0 * max(0.0, abs(x.alpha) - math.sqrt(max(x.b * x.c, 0.0)), -math.sqrt(max(x.a * x.d, 0.0)))


# -- entropies -------------------------------------------------------------


def _plogp(p):
    """Elementwise ``-p log2 p`` with ``0 log 0 = 0``; non-positive inputs give 0."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > 0, p, 1.0)
    return np.where(p > 0, -p * np.log2(safe), 0.0)


def von_neumann_entropy(rho):
    rho = as_cmat(rho, dims=(2, 4))
    values = herm_eigen(rho).values
    if values[-1] < -EIG_CLIP:
        raise ValueError(f"eigenvalue {values[-1]:.3e} < 0: not a density matrix")
    return float(np.sum(_plogp(values)))


def _projectors(theta, phi):
    """|n+><n+| for Bloch directions; output shape ``theta.shape + (2, 2)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    nx = np.sin(theta) * np.cos(phi)
    ny = np.sin(theta) * np.sin(phi)
    nz = np.cos(theta)
    proj = np.empty(theta.shape + (2, 2), dtype=complex)
    proj[..., 0, 0] = 0.5 * (1.0 + nz)
    proj[..., 1, 1] = 0.5 * (1.0 - nz)
    proj[..., 0, 1] = 0.5 * (nx - 1j * ny)
    proj[..., 1, 0] = 0.5 * (nx + 1j * ny)
    return proj


def _branch_entropy(blocks):
    """``p * S(block / p)`` for unnormalized 2x2 Hermitian blocks, plus ``p``."""
    m00 = blocks[..., 0, 0].real
    m11 = blocks[..., 1, 1].real
    off = np.abs(blocks[..., 0, 1])
    p = m00 + m11
    spread = np.sqrt((m00 - m11) ** 2 + 4.0 * off ** 2)
    mu_hi = 0.5 * (p + spread)
    mu_lo = 0.5 * (p - spread)
    # sum(-mu log2 mu) + p log2 p == p * S(rho_A)
    value = _plogp(mu_hi) + _plogp(mu_lo) - _plogp(p)
    return np.where(p < DEGENERATE_P, 0.0, value), p


def _conditional_entropy(rho, theta, phi):
    """Vectorized post-measurement conditional entropy of A given B."""
    t = rho.reshape(2, 2, 2, 2)
    plus = _projectors(theta, phi)
    eye = np.eye(2)
    total = 0.0
    for proj in (plus, eye - plus):
        # Tr_B[(I x P) rho]_{ij} = sum_{k,l} P_{lk} rho_{(i,k),(j,l)}
        blocks = np.einsum("ikjl,...lk->...ij", t, proj)
        value, _ = _branch_entropy(blocks)
        total = total + value
    return total


def measure_conditional_entropy(rho, theta, phi):
    """Measure B along ``(theta, phi)`` and average the entropy of A.

    Returns ``(s_cond, outcomes)`` where ``outcomes`` is
    ``[(p_plus, rho_A_plus), (p_minus, rho_A_minus)]``. A branch with
    probability below 1e-14 reports ``None`` for its state and adds nothing.
    """
    rho = as_cmat(rho, dims=(4,))
    t = rho.reshape(2, 2, 2, 2)
    plus = _projectors(theta, phi)
    outcomes = []
    s_cond = 0.0
    for proj in (plus, np.eye(2) - plus):
        block = np.einsum("ikjl,lk->ij", t, proj)
        p = float(np.trace(block).real)
        if p < DEGENERATE_P:
            outcomes.append((p, None))
            continue
        state = block / p
        outcomes.append((p, state))
        s_cond += p * von_neumann_entropy(state)
    return s_cond, outcomes


def _fold_angles(theta, phi):
    """Map a direction onto theta in [0, pi/2] using n ~ -n."""
    theta = math.remainder(theta, 2.0 * math.pi)
    if theta < 0:
        theta, phi = -theta, phi + math.pi
    if theta > 0.5 * math.pi:
        theta, phi = math.pi - theta, phi + math.pi
    return theta, phi % (2.0 * math.pi)


def _entropies(rho):
    s_ab = von_neumann_entropy(rho)
    s_a = von_neumann_entropy(partial_trace(rho, "A"))
    s_b = von_neumann_entropy(partial_trace(rho, "B"))
    return s_ab, s_a, s_b


def _assemble(s_min, s_ab, s_a, s_b, theta, phi):
    value = s_min - s_ab + s_b
    if -EIG_CLIP <= value < 0:
        value = 0.0
    return DiscordResult(
        value=float(value),
        optimal_theta=float(theta),
        optimal_phi=float(phi),
        classical_correlation=float(s_a - s_min),
        mutual_information=float(s_a + s_b - s_ab),
    )


def conditional_entropy_grid(rho, n_theta=N_THETA, n_phi=N_PHI):
    """Conditional entropy on the ``theta x phi`` search grid.

    theta spans ``[0, pi/2]`` inclusive and phi ``[0, 2 pi)``, which covers
    every projective measurement once up to the equator.
    """
    thetas = np.linspace(0.0, 0.5 * math.pi, n_theta)
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    values = _conditional_entropy(rho, thetas[:, None], phis[None, :])
    return thetas, phis, values


def discord(rho, n_theta=N_THETA, n_phi=N_PHI):
    """Discord with measurement on B, minimized over both Bloch angles.

    A coarse grid picks the starting cell (first index on ties, i.e.
    smallest theta then phi). Golden-section refinement then alternates
    between theta and phi, one grid step either side, accepting a move only
    when it lowers the conditional entropy.
    """
    rho = as_cmat(rho, dims=(4,))
    s_ab, s_a, s_b = _entropies(rho)
    thetas, phis, grid = conditional_entropy_grid(rho, n_theta, n_phi)
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    theta, phi, best = float(thetas[i]), float(phis[j]), float(grid[i, j])
    h_theta = thetas[1] - thetas[0]
    h_phi = phis[1] - phis[0]

    for _ in range(MAX_ROUNDS):
        moved = False
        x, fx = golden_section_min(
            lambda th: _conditional_entropy(rho, th, phi), theta - h_theta, theta + h_theta, ANGLE_TOL
        )
        if fx < best:
            moved = moved or abs(float(x) - theta) > ANGLE_TOL
            theta, best = float(x), float(fx)
        x, fx = golden_section_min(
            lambda ph: _conditional_entropy(rho, theta, ph), phi - h_phi, phi + h_phi, ANGLE_TOL
        )
        if fx < best:
            moved = moved or abs(float(x) - phi) > ANGLE_TOL
            phi, best = float(x), float(fx)
        if not moved:
            break

    theta, phi = _fold_angles(theta, phi)
    return _assemble(best, s_ab, s_a, s_b, theta, phi)


# -- single-variable discord for X states ----------------------------------


def _xstate_conditional_entropy(a, b, c, d, alpha_abs, theta):
    """Conditional entropy for a real X state measured at azimuth 0.

    Uses the Bloch form: outcome +/- has weight ``(1 +/- s3 cos)/2`` and A's
    unnormalized eigenvalues ``[(1 +/- s3 cos) +/- |r +/- T n|] / 4``.
    """
    r3 = a + b - c - d
    s3 = a - b + c - d
    t33 = a - b - c + d
    cos = np.cos(theta)
    transverse = (2.0 * alpha_abs * np.sin(theta)) ** 2
    total = 0.0
    for sign in (1.0, -1.0):
        weight = 1.0 + sign * s3 * cos
        length = np.sqrt(transverse + (r3 + sign * t33 * cos) ** 2)
        total = total + _plogp(0.25 * (weight + length)) + _plogp(0.25 * (weight - length)) - _plogp(0.5 * weight)
    return total


def _xstate_entropies(a, b, c, d, alpha_abs):
    mid = 0.5 * (a + d)
    spread = np.sqrt((0.5 * (a - d)) ** 2 + alpha_abs ** 2)
    s_ab = _plogp(b) + _plogp(c) + _plogp(mid + spread) + _plogp(mid - spread)
    s_a = _plogp(a + b) + _plogp(c + d)
    s_b = _plogp(a + c) + _plogp(b + d)
    return s_ab, s_a, s_b


def discord_xstate_arrays(a, b, c, d, alpha_abs, n_theta=N_THETA):
    """Vectorized single-angle discord for X states with real coherence.

    Returns ``(discord, classical, mutual, theta)`` arrays. Minimizes over
    polar angle on an ``n_theta`` grid over ``[0, pi/2]`` followed by
    golden-section refinement.
    """
    a, b, c, d, alpha_abs = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, d, alpha_abs)))
    thetas = np.linspace(0.0, 0.5 * math.pi, n_theta)
    grid = _xstate_conditional_entropy(
        a[..., None], b[..., None], c[..., None], d[..., None], alpha_abs[..., None], thetas
    )
    idx = np.argmin(grid, axis=-1)
    grid_min = np.take_along_axis(grid, idx[..., None], axis=-1)[..., 0]
    theta0 = thetas[idx]
    h = thetas[1] - thetas[0]
    x, fx = golden_section_min(
        lambda th: _xstate_conditional_entropy(a, b, c, d, alpha_abs, th), theta0 - h, theta0 + h, ANGLE_TOL
    )
    better = fx < grid_min
    s_min = np.where(better, fx, grid_min)
    theta = np.abs(np.where(better, x, theta0))
    theta = np.where(theta > 0.5 * math.pi, math.pi - theta, theta)

    s_ab, s_a, s_b = _xstate_entropies(a, b, c, d, alpha_abs)
    value = s_min - s_ab + s_b
    value = np.where((value < 0) & (value >= -EIG_CLIP), 0.0, value)
    return value, s_a - s_min, s_a + s_b - s_ab, theta


def discord_single_variable(x: XState):
    """Discord of an X state with ``b == c`` by a one-angle search.

    The phase of ``alpha`` is removed by a local phase rotation on B, which
    leaves discord unchanged; the search then runs over the polar angle
    only. ``optimal_phi`` is reported in the original frame.
    """
    if abs(x.b - x.c) > 1e-10:
        raise ValueError(f"single-variable discord needs b == c, got b={x.b!r}, c={x.c!r}")
    x.check(tol=1e-10)
    value, classical, mutual, theta = discord_xstate_arrays(x.a, x.b, x.c, x.d, abs(x.alpha))
    phi = (-np.angle(x.alpha)) % (2.0 * math.pi) if x.alpha != 0 else 0.0
    return DiscordResult(
        value=float(value),
        optimal_theta=float(theta),
        optimal_phi=float(phi),
        classical_correlation=float(classical),
        mutual_information=float(mutual),
    )


def discord_analytic_array(beta, g, t):
    """Discord of rho(t) over broadcast parameter arrays."""
    a, b, c, d, alpha = xstate_arrays(beta, g, t)
    return discord_xstate_arrays(a, b, c, d, np.abs(alpha))[0]
