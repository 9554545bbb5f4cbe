"""Cross-validation battery: every closed form against an independent route."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    analytic_density,
    analytic_xstate,
    build_liouvillian,
    decoupled_blocks_check,
    integrate_trajectory,
)
from .errors import NumericFailure
from .qcorrelations import (
    concurrence_analytic,
    concurrence_numeric,
    concurrence_xstate,
    discord,
    discord_single_variable,
)
from .smatrix import dagger, herm_eigen
from .spinmodel import SimParams, hadamard_transform, initial_state

BETAS = (0.0, 0.5, 1.5, 5.0)
RATES = (0.0, 0.1, 0.5, 2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    worst: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        detail = f"  worst at {self.worst}" if self.worst and not self.passed else ""
        return f"{status}  {self.name:<34} max error {self.max_error:.3e}  (tol {self.tolerance:.0e}){detail}"


class _Tracker:
    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.worst, self.where = 0.0, ""

    def update(self, err, where):
        err = float(err)
        if not err <= self.worst:  # NaN counts as worst
            self.worst, self.where = err, where

    def result(self):
        passed = bool(self.worst <= self.tol)
        return CheckResult(self.name, passed, self.worst, self.tol, self.where)


def time_grid(quick=False):
    if quick:
        return np.round(np.arange(0, 21) * 0.1, 12)
    return np.round(np.arange(0, 101) * 0.1, 12)


def _density(beta, g, t, perturb):
    rho = analytic_density(SimParams(beta, g, t))
    if perturb:
        rho[0, 3] += perturb
    return rho


def check_analytic_vs_rk4(times, dt=1e-4, perturb=0.0, tol=1e-8):
    track = _Tracker("analytic rho(t) vs RK4", tol)
    stack = np.array([initial_state(b) for b in BETAS])
    for g in RATES:
        traj = integrate_trajectory(stack, g, times, dt)
        for (n, t), (k, beta) in itertools.product(enumerate(times), enumerate(BETAS)):
            err = np.max(np.abs(_density(beta, g, t, perturb) - traj[n, k]))
            track.update(err, f"beta={beta}, g={g}, t={t}")
    return track.result()


def check_conserved_quantities(times, dt=1e-4, tol=1e-8):
    track = _Tracker("conserved populations (RK4)", tol)
    stack = np.array([initial_state(b) for b in BETAS])
    for g in RATES:
        traj = integrate_trajectory(stack, g, times, dt)
        for (n, t), (k, beta) in itertools.product(enumerate(times), enumerate(BETAS)):
            rho = traj[n, k]
            err = max(
                abs(rho[1, 1] + rho[2, 2] - 0.5),
                abs(rho[1, 1] - rho[2, 2]),
                abs(rho[1, 2] - rho[2, 1]),
                abs(abs(rho[0, 3]) - math.tanh(0.5 * beta) ** 2 * math.exp(-g * t) / 4),
            )
            track.update(err, f"beta={beta}, g={g}, t={t}")
    return track.result()


def check_state_validity(times, perturb=0.0, tol=1e-12):
    track = _Tracker("state validity (herm/trace/PSD/sym)", tol)
    flip = np.arange(4)[::-1]
    for beta, g, t in itertools.product(BETAS, RATES, times):
        rho = _density(beta, g, t, perturb)
        errs = [
            np.max(np.abs(rho - dagger(rho))),
            abs(np.trace(rho) - 1.0),
            np.max(np.abs(rho - rho[np.ix_(flip, flip)])),
        ]
        try:
            errs.append(max(0.0, -herm_eigen(rho).values[-1]))
        except ValueError:
            errs.append(math.inf)
        track.update(max(errs), f"beta={beta}, g={g}, t={t}")
    return track.result()


def check_concurrence_triple(times, perturb=0.0, tol=1e-10):
    track = _Tracker("concurrence analytic/numeric/X", tol)
    for beta, g, t in itertools.product(BETAS, RATES, times):
        p = SimParams(beta, g, t)
        where = f"beta={beta}, g={g}, t={t}"
        try:
            ca = concurrence_analytic(p).value
            cn = concurrence_numeric(hadamard_transform(_density(beta, g, t, perturb))).value
            cx = concurrence_xstate(analytic_xstate(p))
        except (NumericFailure, ValueError):
            track.update(math.inf, where)
            continue
        track.update(max(abs(ca - cn), abs(ca - cx), abs(cn - cx)), where)
    return track.result()


def check_discord_routes(times, perturb=0.0, tol=1e-6):
    track = _Tracker("discord single-angle vs two-angle", tol)
    for beta, g, t in itertools.product(BETAS, RATES, times):
        where = f"beta={beta}, g={g}, t={t}"
        try:
            single = discord_single_variable(analytic_xstate(SimParams(beta, g, t)))
            full = discord(hadamard_transform(_density(beta, g, t, perturb)))
        except (NumericFailure, ValueError):
            track.update(math.inf, where)
            continue
        track.update(abs(single.value - full.value), where)
    return track.result()


def check_discord_additivity(times, tol=1e-9):
    track = _Tracker("discord + J = mutual information", tol)
    for beta, g, t in itertools.product(BETAS, RATES, times):
        res = discord_single_variable(analytic_xstate(SimParams(beta, g, t)))
        track.update(
            abs(res.value + res.classical_correlation - res.mutual_information),
            f"beta={beta}, g={g}, t={t}",
        )
    return track.result()


def check_block_structure():
    track = _Tracker("Liouvillian block structure", 0.0)
    for g in RATES + (0.7,):
        rep = decoupled_blocks_check(build_liouvillian(g))
        expected_sd = np.array(
            [[0, 0, 0, 0], [0, -g, 0, 0], [0, 0, -g, -1j], [0, 0, -1j, 0]], dtype=complex
        )
        ok = (
            rep.matches_expected
            and rep.population_sum_conserved
            and rep.constant >= {(1, 1), (4, 4)}
            and np.max(np.abs(rep.sum_difference - expected_sd)) < 1e-14
        )
        track.update(0.0 if ok else 1.0, f"g={g}")
    return track.result()


def run_all(quick=False, perturb=0.0):
    """Run the battery; ``quick`` restricts discord checks to a coarse time grid."""
    times = time_grid(quick)
    discord_times = times[::5] if quick else times
    return [
        check_analytic_vs_rk4(times, perturb=perturb),
        check_conserved_quantities(times),
        check_state_validity(times, perturb=perturb),
        check_concurrence_triple(times, perturb=perturb),
        check_discord_routes(discord_times, perturb=perturb),
        check_discord_additivity(times),
        check_block_structure(),
    ]


__all__ = ["CheckResult", "run_all"]
