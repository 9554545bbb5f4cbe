"""Time evolution of the two-spin state under dipolar coupling and dephasing.

Two independent routes are provided:

* closed-form expressions for rho(t) and for its X-state form, and
* a fixed-step RK4 integration of the vectorized Lindblad equation,

so that each can be checked against the other.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyWarning, NumericFailure
from .smatrix import as_cmat, dagger, hermiticity_error
from .spinmodel import SimParams, build_hamiltonian, initial_state, spin_operators

DEFAULT_DT = 1e-4
TRACE_DRIFT_TOL = 1e-12
HERMITIZE_WARN_TOL = 1e-10
_NAN_CHECK_EVERY = 1024


@dataclass(frozen=True)
class XState:
    """State of the form [[a, 0, 0, alpha], [0, b, 0, 0], [0, 0, c, 0], [alpha*, 0, 0, d]]."""

    a: float
    b: float
    c: float
    d: float
    alpha: complex

    def to_matrix(self):
        m = np.diag([self.a, self.b, self.c, self.d]).astype(complex)
        m[0, 3] = self.alpha
        m[3, 0] = np.conj(self.alpha)
        return m

    @classmethod
    def from_matrix(cls, m, tol=1e-12):
        m = as_cmat(m, dims=(4,))
        mask = np.ones((4, 4), dtype=bool)
        mask[np.diag_indices(4)] = False
        mask[0, 3] = mask[3, 0] = False
        off = float(np.max(np.abs(m[mask])))
        if off > tol:
            raise ValueError(f"matrix is not an X state (largest stray entry {off:.3e})")
        a, b, c, d = (float(v) for v in np.real(np.diag(m)))
        return cls(a, b, c, d, complex(m[0, 3]))

    def check(self, tol=1e-12):
        """Raise ``ValueError`` unless this is a valid density matrix."""
        pops = (self.a, self.b, self.c, self.d)
        if abs(sum(pops) - 1.0) > tol:
            raise ValueError(f"populations sum to {sum(pops)!r}, expected 1")
        if min(pops) < -tol:
            raise ValueError(f"negative population in {pops}")
        if abs(self.alpha) ** 2 > self.a * self.d + tol:
            raise ValueError("coherence too large: |alpha|^2 > a*d")
        return self


def xstate_arrays(beta, g, t):
    """Vectorized X-state parameters ``(a, b, c, d, alpha)`` of rho(t).

    Inputs broadcast against each other. The state is the Hadamard
    transform of the closed-form rho(t); ``alpha`` is purely imaginary.
    """
    beta, g, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (beta, g, t)))
    tau = np.tanh(0.5 * beta)
    half_decay = np.exp(-0.5 * g * t)
    dq = tau ** 2 * half_decay ** 2
    cos_term = 2.0 * np.cos(1.5 * t) * tau * half_decay
    a = 0.25 * (dq + cos_term + 1.0)
    b = 0.25 - 0.25 * dq
    c = b.copy()
    d = 0.25 * (dq - cos_term + 1.0)
    alpha = 0.5j * np.sin(1.5 * t) * tau * half_decay
    return a, b, c, d, np.asarray(alpha)


def analytic_density(p: SimParams):
    """Closed-form rho(t) in the Zeeman product basis."""
    tau = math.tanh(0.5 * p.beta)
    single = 0.25 * tau * np.exp(-0.5 * (p.g + 3j) * p.t)
    single_c = np.conj(single)
    double = 0.25 * tau ** 2 * math.exp(-p.g * p.t)
    q = 0.25
    return np.array(
        [
            [q, single, single, double],
            [single_c, q, double, single_c],
            [single_c, double, q, single_c],
            [double, single, single, q],
        ],
        dtype=complex,
    )


def analytic_xstate(p: SimParams):
    a, b, c, _, alpha = (v.item() for v in xstate_arrays(p.beta, p.g, p.t))
    # d is fixed by normalization; it matches the transformed matrix to round-off.
    return XState(a=a, b=b, c=c, d=1.0 - a - b - c, alpha=complex(alpha))


def vec(rho):
    """Column-stacked vectorization: entry (i, j) lands at index ``4*j + i``."""
    rho = np.asarray(rho)
    return np.swapaxes(rho, -1, -2).reshape(rho.shape[:-2] + (16,))


def unvec(v):
    v = np.asarray(v)
    return np.swapaxes(v.reshape(v.shape[:-1] + (4, 4)), -1, -2)


def vec_index(i, j):
    """Zero-based position of rho[i, j] in ``vec(rho)``."""
    return 4 * j + i


@dataclass(frozen=True)
class Liouvillian:
    """Generator ``d vec(rho)/dt = matrix @ vec(rho)`` (column stacking)."""

    matrix: np.ndarray
    g: float

    def apply(self, rho):
        return unvec(self.matrix @ vec(as_cmat(rho, dims=(4,))))


def build_liouvillian(g):
    """Liouvillian for the dipolar Hamiltonian plus I_z dephasing of both spins at rate ``g``.

    With column stacking ``vec(A X B) = (B^T kron A) vec(X)``, so

        L = -i (I kron H - H^T kron I)
            + g sum_k [Z_k^* kron Z_k - (I kron Z_k^2 + (Z_k^2)^T kron I) / 2]

    where ``Z_k`` is the z spin operator of site k.
    """
    if not math.isfinite(g) or g < 0:
        raise ValueError(f"g must be finite and >= 0, got {g!r}")
    h = build_hamiltonian()
    eye = np.eye(4)
    ops = spin_operators()
    mat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for z in (ops[2], ops[5]):
        z2 = z @ z
        mat = mat + g * (np.kron(z.conj(), z) - 0.5 * (np.kron(eye, z2) + np.kron(z2.T, eye)))
    return Liouvillian(matrix=mat, g=float(g))


def _finalize(rho, trace0):
    asym = hermiticity_error(rho)
    if asym > HERMITIZE_WARN_TOL:
        warnings.warn(f"integrated state lost Hermiticity by {asym:.3e}", AccuracyWarning, stacklevel=3)
    rho = 0.5 * (rho + dagger(rho))
    drift = abs(np.trace(rho) - trace0)
    if drift > TRACE_DRIFT_TOL:
        warnings.warn(f"trace drifted by {drift:.3e}; renormalizing", AccuracyWarning, stacklevel=3)
        rho = rho * (trace0 / np.trace(rho).real)
    return rho


def integrate_trajectory(rho0, g, times, dt=DEFAULT_DT):
    """RK4 integration of the Lindblad equation sampled at ``times``.

    ``rho0`` is a 4x4 state or a stack of them with shape ``(k, 4, 4)``;
    ``times`` must be non-decreasing and non-negative. Each interval
    between consecutive samples is split into the smallest number of equal
    steps not longer than ``dt``.

    Returns an array of shape ``(len(times), 4, 4)`` or
    ``(len(times), k, 4, 4)`` for stacked input.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-decreasing 1-D sequence of values >= 0")
    rho0 = np.asarray(rho0, dtype=complex)
    single = rho0.ndim == 2
    stack = rho0[None] if single else rho0
    if stack.shape[1:] != (4, 4):
        raise ValueError(f"expected 4x4 states, got shape {rho0.shape}")
    traces = np.real(np.trace(stack, axis1=1, axis2=2))

    lv = build_liouvillian(g).matrix
    y = vec(stack).T.copy()  # (16, k)
    now = 0.0
    out = np.empty((len(times),) + stack.shape, dtype=complex)
    for n_out, target in enumerate(times):
        span = target - now
        if span > 0:
            steps = max(1, math.ceil(span / dt - 1e-9))
            h = span / steps
            for step in range(steps):
                k1 = lv @ y
                k2 = lv @ (y + (0.5 * h) * k1)
                k3 = lv @ (y + (0.5 * h) * k2)
                k4 = lv @ (y + h * k3)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if step % _NAN_CHECK_EVERY == 0 and not np.all(np.isfinite(y)):
                    raise NumericFailure(f"non-finite state at t = {now + (step + 1) * h:.6g}")
            if not np.all(np.isfinite(y)):
                raise NumericFailure(f"non-finite state at t = {target:.6g}")
            now = target
        states = unvec(y.T)
        for k in range(stack.shape[0]):
            out[n_out, k] = _finalize(states[k], traces[k])
    return out[:, 0] if single else out


def integrate(rho0, g, t_final, dt=DEFAULT_DT):
    """Integrate from ``rho0`` over ``[0, t_final]`` with fixed RK4 steps."""
    rho0 = as_cmat(rho0, dims=(4,))
    if hermiticity_error(rho0) > HERMITIZE_WARN_TOL:
        raise ValueError("rho0 is not Hermitian")
    if abs(np.trace(rho0) - 1.0) > 1e-10:
        raise ValueError("rho0 does not have unit trace")
    if not t_final >= 0:
        raise ValueError(f"t_final must be >= 0, got {t_final!r}")
    if t_final == 0:
        return rho0.copy()
    if dt > t_final:
        raise ValueError(f"dt = {dt!r} exceeds t_final = {t_final!r}")
    return integrate_trajectory(rho0, g, [t_final], dt)[0]


def evolve(p: SimParams, method="analytic", dt=DEFAULT_DT):
    """rho(t) for ``p`` by the closed form or by RK4 from the initial state."""
    if method == "analytic":
        return analytic_density(p)
    if method == "numeric":
        return integrate(initial_state(p.beta), p.g, p.t, dt)
    raise ValueError(f"unknown method {method!r}")


# Density-matrix entries that the generator couples to each other (1-based labels).
EXPECTED_COMPONENTS = frozenset(
    frozenset(c)
    for c in (
        {(4, 2), (4, 3)},
        {(2, 4), (3, 4)},
        {(2, 1), (3, 1)},
        {(1, 2), (1, 3)},
        {(1, 4)},
        {(4, 1)},
        {(1, 1)},
        {(4, 4)},
        {(2, 2), (2, 3), (3, 2), (3, 3)},
    )
)

_SUM_DIFF = np.array(
    [
        [1, 0, 0, 1],  # rho22 + rho33
        [0, 1, 1, 0],  # rho23 + rho32
        [0, 1, -1, 0],  # rho23 - rho32
        [1, 0, 0, -1],  # rho22 - rho33
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class BlockReport:
    components: tuple
    constant: frozenset
    matches_expected: bool
    sum_difference: np.ndarray
    population_sum_conserved: bool


def decoupled_blocks_check(lv: Liouvillian, tol=0.0):
    """Split the Liouvillian's coupling graph into connected components.

    Entries ``rho_ij`` are labelled 1-based. ``constant`` holds the labels
    whose time derivative vanishes identically. The 4-variable population
    block is additionally rewritten in sum/difference variables
    ``(r22+r33, r23+r32, r23-r32, r22-r33)``.
    """
    m = np.asarray(lv.matrix)
    labels = [(i + 1, j + 1) for j in range(4) for i in range(4)]  # index 4*j + i
    coupled = np.abs(m) > tol
    coupled = coupled | coupled.T
    seen = [False] * 16
    comps = []
    for start in range(16):
        if seen[start]:
            continue
        stack, members = [start], []
        seen[start] = True
        while stack:
            u = stack.pop()
            members.append(u)
            for w in np.flatnonzero(coupled[u]):
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(frozenset(labels[u] for u in members))
    comps.sort(key=lambda c: (len(c), sorted(c)))
    constant = frozenset(labels[u] for u in range(16) if not np.any(np.abs(m[u]) > tol))

    idx = [vec_index(i, j) for i, j in ((1, 1), (1, 2), (2, 1), (2, 2))]
    block = m[np.ix_(idx, idx)]
    transformed = _SUM_DIFF @ block @ np.linalg.inv(_SUM_DIFF)
    return BlockReport(
        components=tuple(comps),
        constant=constant,
        matches_expected=frozenset(comps) == EXPECTED_COMPONENTS,
        sum_difference=transformed,
        population_sum_conserved=bool(np.all(np.abs(transformed[0]) <= 1e-15)),
    )
