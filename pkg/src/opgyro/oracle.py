"""Brute-force ground truth for the closed form.

H(t) = omega(t) K with a fixed operator K = S.I, so the propagator from -inf is
exp(-i phi(t) K) and no time ordering is needed. The RK4 integrator ignores
that shortcut on purpose and steps the Schrodinger equation in t.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .angular_momentum import CompositeSystem, InitialState, Operator, VectorOp, cross_product, dot
from .errors import ConfigurationError, ImaginaryResidueError, StepTooCoarseError
from .pulse import PulseProfile

HERMITIAN_TOL = 1e-12
NORM_DRIFT_LIMIT = 1e-4
DEFAULT_STEPS = 2000


@dataclass(frozen=True, eq=False)
class PropagatorCache:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    system: CompositeSystem = field(repr=False)

    @classmethod
    def build(cls, system: CompositeSystem) -> PropagatorCache:
        k, v = np.linalg.eigh(system.K)
        return cls(k, v, system)


def exact_propagate(cache: PropagatorCache, initial: InitialState, phi):
    """exp(-i phi K) |Psi>. Array ``phi`` gives one row per phase."""
    v = cache.eigenvectors
    if initial.vector.shape[0] != v.shape[0]:
        raise ValueError("initial state and propagator dimensions differ")
    coeffs = v.conj().T @ initial.vector
    phases = np.exp(-1j * np.multiply.outer(np.asarray(phi, dtype=float), cache.eigenvalues))
    return (phases * coeffs) @ v.T


def _check_hermitian(op: Operator) -> None:
    scale = max(1.0, float(np.max(np.abs(op))))
    if np.max(np.abs(op - op.conj().T)) > HERMITIAN_TOL * scale:
        raise ConfigurationError("observable is not Hermitian")


def _expect(states: np.ndarray, op: Operator) -> np.ndarray:
    vals = np.einsum("...i,...i->...", states.conj(), states @ op.T)
    scale = np.maximum(1.0, np.abs(vals))
    if np.any(np.abs(vals.imag) > HERMITIAN_TOL * scale):
        raise ImaginaryResidueError("expectation of a Hermitian observable has an imaginary part")
    return vals.real


def expectation_via_oracle(cache: PropagatorCache, initial: InitialState, phi, observable: Operator):
    _check_hermitian(observable)
    out = _expect(exact_propagate(cache, initial, phi), observable)
    return float(out) if np.ndim(out) == 0 else out


def observables(system: CompositeSystem) -> dict[str, Operator]:
    """Operators recorded along trajectories, in output column order."""
    return {
        "Sz": system.Sz,
        "Sx": system.Sx,
        "Sy": system.Sy,
        "Iz": system.Iz,
        "Jz": system.Jz,
        "JdotS": system.JdotS,
        "J2": system.J2,
    }


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    phi: np.ndarray
    observables: dict[str, np.ndarray]
    states: np.ndarray = field(repr=False)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.observables[name]


def default_grid(profile: PulseProfile, steps: int = DEFAULT_STEPS) -> np.ndarray:
    lo, hi = profile.support
    return np.linspace(lo, hi, steps + 1)


def step_integrator(
    system: CompositeSystem,
    initial: InitialState,
    profile: PulseProfile,
    t_grid: Sequence[float] | None = None,
    substeps: int = 1,
    backend: str | None = None,
) -> TimeSeries:
    """Fixed-step RK4 of d psi/dt = -i omega(t) K psi over ``t_grid``.

    The state at t_grid[0] is taken to be the initial state, so the grid
    should start before the pulse does. Each grid interval is split into
    ``substeps`` RK4 steps; the state is renormalized after every step and
    StepTooCoarseError is raised if a single step drifts by more than 1e-4.
    """
    t_grid = default_grid(profile) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise ConfigurationError("t_grid must be strictly increasing with at least two points")
    if substeps < 1:
        raise ConfigurationError("substeps must be >= 1")
    fine = np.interp(
        np.arange((t_grid.size - 1) * substeps + 1) / substeps, np.arange(t_grid.size), t_grid
    )
    h = np.diff(fine)
    w0 = np.asarray(profile.omega(fine[:-1]), dtype=float)
    wm = np.asarray(profile.omega(fine[:-1] + 0.5 * h), dtype=float)
    w1 = np.asarray(profile.omega(fine[1:]), dtype=float)
    record = np.arange(t_grid.size, dtype=np.int_) * substeps

    evolve = kernels.rk4_evolve if backend is None else kernels.BACKENDS[backend].rk4_evolve
    K = np.ascontiguousarray(system.K, dtype=complex)
    states, drift = evolve(K, initial.vector, h, w0, wm, w1, record)
    if drift > NORM_DRIFT_LIMIT:
        raise StepTooCoarseError(f"norm drift {drift:.2e} per step; refine the time grid")
    obs = {name: _expect(states, op) for name, op in observables(system).items()}
    return TimeSeries(t_grid, np.asarray(profile.phi(t_grid), dtype=float), obs, states)


class SeriesResult(NamedTuple):
    value: np.ndarray  # complex (3,)
    last_term: float


def series_truncated_sigma(system: CompositeSystem, initial: InitialState, phi: float, n_max: int) -> SeriesResult:
    """exp(-i phi) * sum_{n <= n_max} phi^n/n! <P_n>, with P_n = J x P_{n-1}.

    ``last_term`` is the largest component magnitude of the n_max-th term,
    a crude truncation estimate.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    psi = initial.vector
    Jx, Jy, Jz = system.J
    vx, vy, vz = (op @ psi for op in system.S)
    total = np.zeros(3, dtype=complex)
    weight = 1.0
    last = 0.0
    for n in range(n_max + 1):
        if n:
            weight *= phi / n
            vx, vy, vz = Jy @ vz - Jz @ vy, Jz @ vx - Jx @ vz, Jx @ vy - Jy @ vx
        term = weight * np.array([np.vdot(psi, vx), np.vdot(psi, vy), np.vdot(psi, vz)])
        total += term
        last = float(np.max(np.abs(term)))
    return SeriesResult(np.exp(-1j * phi) * total, last)


def pn_by_cross(J: VectorOp, S: VectorOp, n: int) -> VectorOp:
    """J x (J x (... x S)) with n factors of J (hbar = 1)."""
    out = tuple(S)
    for _ in range(n):
        out = cross_product(J, out)
    return out


def pn_rhs(J: VectorOp, S: VectorOp, n: int, hbar: float = 1.0) -> VectorOp:
    """hbar^n P_n written in the (J.S)J, S, J x S family, n = 1..4.

    ``hbar = 0`` leaves only the terms that survive for commuting vectors.
    Scalar factors built from J^2 multiply from the left.
    """
    dim = J[0].shape[0]
    one = np.eye(dim)
    j2 = dot(J, J)
    js = dot(J, S)
    jsj = [js @ ju for ju in J]
    jxs = cross_product(J, S)
    h = hbar
    if n == 1:
        ixs = cross_product([ju - su for ju, su in zip(J, S)], S)
        return tuple(1j * h * S[u] + ixs[u] for u in range(3))
    if n == 2:
        return tuple(jsj[u] - j2 @ S[u] + 1j * h * jxs[u] for u in range(3))
    if n == 3:
        return tuple(
            -(j2 + h**2 * one) @ jxs[u] + 2j * h * jsj[u] - 1j * h * j2 @ S[u] for u in range(3)
        )
    if n == 4:
        return tuple(
            -(j2 + 3 * h**2 * one) @ jsj[u]
            + j2 @ (j2 + h**2 * one) @ S[u]
            - 1j * h * (2 * j2 + h**2 * one) @ jxs[u]
            for u in range(3)
        )
    raise ValueError("explicit forms exist for n = 1..4 only")


def verify_Pn_identities(system: CompositeSystem) -> dict[str, float]:
    """Max-abs entry deviation between J x ... x S and its expansion, per n."""
    report = {}
    for n in range(1, 5):
        lhs = pn_by_cross(system.J, system.S, n)
        rhs = pn_rhs(system.J, system.S, n)
        report[f"P{n}"] = float(max(np.max(np.abs(a - b)) for a, b in zip(lhs, rhs)))
    return report
