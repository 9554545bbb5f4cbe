"""Spin operators, dipolar Hamiltonian and the post-pulse thermal state.

Basis ordering is ``|uu>, |ud>, |du>, |dd>`` (row 0 has both spins up).
Energies and times are in units of the dipolar coupling constant, so the
Hamiltonian carries no prefactor.
"""

import math
from dataclasses import dataclass

import numpy as np

from .smatrix import IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z, as_cmat, kron

BETA_MAX = 700.0

HBAR = 1.054571817e-34  # J s
K_BOLTZMANN = 1.380649e-23  # J / K
OMEGA0_DEFAULT = 2.0 * math.pi * 500e6  # rad / s


@dataclass(frozen=True)
class SimParams:
    """Dimensionless inverse temperature, dephasing rate and time."""

    beta: float
    g: float
    t: float

    def __post_init__(self):
        for name in ("beta", "g", "t"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.beta > BETA_MAX:
            raise ValueError(f"beta must be <= {BETA_MAX}, got {self.beta!r}")


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR
    k_boltzmann: float = K_BOLTZMANN
    omega0: float = OMEGA0_DEFAULT

    def __post_init__(self):
        for name in ("hbar", "k_boltzmann", "omega0"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


def check_beta(beta):
    if not math.isfinite(beta) or beta < 0 or beta > BETA_MAX:
        raise ValueError(f"beta must lie in [0, {BETA_MAX}], got {beta!r}")


def spin_operators():
    """Return ``(Ix1, Iy1, Iz1, Ix2, Iy2, Iz2)`` as 4x4 matrices."""
    halves = [0.5 * PAULI_X, 0.5 * PAULI_Y, 0.5 * PAULI_Z]
    first = [kron(s, IDENTITY2) for s in halves]
    second = [kron(IDENTITY2, s) for s in halves]
    return tuple(first + second)


def build_hamiltonian():
    """Secular dipolar Hamiltonian ``2 Iz1 Iz2 - Ix1 Ix2 - Iy1 Iy2``."""
    ix1, iy1, iz1, ix2, iy2, iz2 = spin_operators()
    return 2.0 * iz1 @ iz2 - ix1 @ ix2 - iy1 @ iy2


def total_iz():
    ops = spin_operators()
    return ops[2] + ops[5]


def initial_state(beta):
    """Thermal equilibrium state rotated by a pi/2 pulse about y.

    Every diagonal entry is 1/4; entries connecting states that differ by
    one spin flip are ``tanh(beta/2)/4`` and those differing by two flips
    are ``tanh(beta/2)**2/4``.
    """
    check_beta(beta)
    tau = math.tanh(0.5 * beta)
    flips = np.array([[0, 1, 1, 2], [1, 0, 2, 1], [1, 2, 0, 1], [2, 1, 1, 0]])
    return (0.25 * tau ** flips).astype(complex)


# (1/2) [[1, 1], [1, -1]] (x) [[1, 1], [1, -1]]; real symmetric and its own inverse.
HADAMARD = 0.5 * np.kron(np.array([[1, 1], [1, -1]]), np.array([[1, 1], [1, -1]])).astype(complex)


def hadamard_transform(rho):
    """Change to the basis where a centrosymmetric state is an X matrix."""
    rho = as_cmat(rho, dims=(4,))
    return HADAMARD @ rho @ HADAMARD


def beta_from_temperature(temperature, consts=PhysicalConstants()):
    """Dimensionless inverse temperature ``hbar * omega0 / (k * T)``; T in kelvin."""
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0 K, got {temperature!r}")
    return consts.hbar * consts.omega0 / (consts.k_boltzmann * temperature)


def temperature_from_beta(beta, consts=PhysicalConstants()):
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta!r}")
    return consts.hbar * consts.omega0 / (consts.k_boltzmann * beta)
