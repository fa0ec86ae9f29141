"""Spin operators, composite spin systems and the coupled (J, M_J) basis.

Everything is in units of hbar (hbar = 1). Basis states of a single spin are
ordered by descending projection m = s, s-1, ..., -s; composite spaces are
Kronecker products with the impurity spin I as the last factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import (
    ConfigurationError,
    CouplingError,
    DimensionCapError,
    InvalidSpinError,
    NotEigenstateError,
)
from .halfint import HalfInt, check_magnitude, check_projection

DEFAULT_MAX_DIM = 4096
J_ROUNDING_TOL = 1e-6
ORTHONORMAL_TOL = 1e-10
EIGENSTATE_TOL = 1e-10

Operator = NDArray[np.complex128]
VectorOp = tuple[Operator, Operator, Operator]


@dataclass(frozen=True, eq=False)
class SpinOperators:
    s: HalfInt
    sx: Operator
    sy: Operator
    sz: Operator
    s_plus: Operator
    s_minus: Operator

    @property
    def dim(self) -> int:
        return self.s.twice + 1

    @property
    def vector(self) -> VectorOp:
        return (self.sx, self.sy, self.sz)


def spin_matrices(s) -> SpinOperators:
    """Spin-s matrices from the ladder elements sqrt(s(s+1) - m(m+1))."""
    s = check_magnitude(HalfInt.parse(s))
    dim = s.twice + 1
    m = (s.twice - 2 * np.arange(dim)) / 2
    sv = s.twice / 2
    s_plus = np.zeros((dim, dim), dtype=complex)
    # <m+1| S+ |m> sits one row above column m in descending order
    k = np.arange(1, dim)
    s_plus[k - 1, k] = np.sqrt(sv * (sv + 1) - m[k] * (m[k] + 1))
    s_minus = s_plus.T.copy()
    sx = (s_plus + s_minus) / 2
    sy = (s_plus - s_minus) / 2j
    sz = np.diag(m).astype(complex)
    return SpinOperators(s, sx, sy, sz, s_plus, s_minus)


class Mode(enum.Enum):
    FULL = "full"
    COLLECTIVE = "collective"


def cross_product(a: Sequence[Operator], b: Sequence[Operator]) -> VectorOp:
    """Operator cross product, keeping the order of every product."""
    if len(a) != 3 or len(b) != 3:
        raise ValueError("cross_product needs three components on each side")
    shapes = {np.shape(x) for x in (*a, *b)}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch in cross_product: {sorted(shapes)}")
    return (
        a[1] @ b[2] - a[2] @ b[1],
        a[2] @ b[0] - a[0] @ b[2],
        a[0] @ b[1] - a[1] @ b[0],
    )


def dot(a: Sequence[Operator], b: Sequence[Operator]) -> Operator:
    return a[0] @ b[0] + a[1] @ b[1] + a[2] @ b[2]


@dataclass(frozen=True, eq=False)
class CompositeSystem:
    """N identical spins S_i plus one impurity spin I.

    In FULL mode the spins live in the (2s+1)^N tensor product; in COLLECTIVE
    mode they are represented by a single spin of magnitude ``s_total``.
    J, K = S.I and the derived scalars are built lazily.
    """

    n_spins: int
    s_each: HalfInt
    i_spin: HalfInt
    mode: Mode
    s_total: HalfInt | None
    Sx: Operator = field(repr=False)
    Sy: Operator = field(repr=False)
    Sz: Operator = field(repr=False)
    Ix: Operator = field(repr=False)
    Iy: Operator = field(repr=False)
    Iz: Operator = field(repr=False)

    @property
    def dim(self) -> int:
        return self.Sz.shape[0]

    @property
    def S(self) -> VectorOp:
        return (self.Sx, self.Sy, self.Sz)

    @property
    def I(self) -> VectorOp:  # noqa: E743
        return (self.Ix, self.Iy, self.Iz)

    @cached_property
    def J(self) -> VectorOp:
        return (self.Sx + self.Ix, self.Sy + self.Iy, self.Sz + self.Iz)

    @property
    def Jx(self) -> Operator:
        return self.J[0]

    @property
    def Jy(self) -> Operator:
        return self.J[1]

    @property
    def Jz(self) -> Operator:
        return self.J[2]

    @cached_property
    def K(self) -> Operator:
        """S.I, the coupling operator (H(t) = omega(t) K)."""
        return dot(self.S, self.I)

    @cached_property
    def J2(self) -> Operator:
        return dot(self.J, self.J)

    @cached_property
    def S2(self) -> Operator:
        return dot(self.S, self.S)

    @cached_property
    def JdotS(self) -> Operator:
        return dot(self.J, self.S)

    @cached_property
    def JcrossS(self) -> VectorOp:
        return cross_product(self.J, self.S)

    @property
    def max_j(self) -> HalfInt:
        top = self.s_total if self.mode is Mode.COLLECTIVE else self.s_each * self.n_spins
        return top + self.i_spin

    def sector_indices(self, m_j) -> NDArray[np.intp]:
        """Product-basis indices with J_z = m_j (J_z is diagonal there)."""
        m_j = HalfInt.parse(m_j)
        diag = np.real(np.diag(self.Jz))
        return np.flatnonzero(np.abs(diag - float(m_j)) < 1e-9)


def _embed(op: Operator, position: int, dims: Sequence[int]) -> Operator:
    left = int(np.prod(dims[:position], dtype=int))
    right = int(np.prod(dims[position + 1:], dtype=int))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def build_composite(
    n_spins: int,
    s_each,
    i_spin,
    mode: Mode | str = Mode.FULL,
    s_total=None,
    max_dim: int = DEFAULT_MAX_DIM,
) -> CompositeSystem:
    """Build the operators of the N-spins-plus-impurity system.

    ``s_total`` only matters in COLLECTIVE mode and defaults to N*s (the fully
    symmetric sector). ``max_dim`` caps the FULL tensor dimension.
    """
    mode = Mode(mode)
    if not isinstance(n_spins, (int, np.integer)) or n_spins < 1:
        raise ConfigurationError(f"n_spins must be a positive integer, got {n_spins!r}")
    n_spins = int(n_spins)
    s_each = check_magnitude(HalfInt.parse(s_each), "s")
    i_spin = check_magnitude(HalfInt.parse(i_spin), "I")
    ops_i = spin_matrices(i_spin)
    d_i = ops_i.dim

    if mode is Mode.FULL:
        d_s = s_each.twice + 1
        dim = d_s**n_spins * d_i
        if dim > max_dim:
            raise DimensionCapError(
                f"full tensor dimension {dim} exceeds cap {max_dim}; "
                "use collective mode or raise the cap"
            )
        ops_s = spin_matrices(s_each)
        dims = [d_s] * n_spins
        s_vec = []
        for comp in ops_s.vector:
            total = sum(_embed(comp, k, dims) for k in range(n_spins))
            s_vec.append(np.kron(total, np.eye(d_i)).astype(complex))
        d_rest = d_s**n_spins
        s_total = None
    else:
        top = s_each * n_spins
        s_total = top if s_total is None else check_magnitude(HalfInt.parse(s_total), "S_total")
        if s_total.twice > top.twice or (top.twice - s_total.twice) % 2:
            raise InvalidSpinError(
                f"S_total={s_total} cannot be reached by {n_spins} spins of {s_each}"
            )
        ops_s = spin_matrices(s_total)
        if ops_s.dim * d_i > max_dim:
            raise DimensionCapError(f"collective dimension {ops_s.dim * d_i} exceeds cap {max_dim}")
        s_vec = [np.kron(c, np.eye(d_i)) for c in ops_s.vector]
        d_rest = ops_s.dim
    i_vec = [np.kron(np.eye(d_rest), c) for c in ops_i.vector]
    return CompositeSystem(n_spins, s_each, i_spin, mode, s_total, *s_vec, *i_vec)


@dataclass(frozen=True, eq=False)
class CoupledState:
    J: HalfInt
    M_J: HalfInt
    mult_index: int
    vector: NDArray[np.complex128] = field(repr=False)


@dataclass(frozen=True, eq=False)
class CoupledBasis:
    M_J: HalfInt
    states: tuple[CoupledState, ...]

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    @property
    def matrix(self) -> NDArray[np.complex128]:
        """Columns are the basis vectors, in ``states`` order."""
        return np.column_stack([st.vector for st in self.states])

    @property
    def j_values(self) -> list[HalfInt]:
        return sorted({st.J for st in self.states})


def _j_from_eigenvalue(lam: float) -> HalfInt:
    twice = int(round(np.sqrt(1.0 + 4.0 * max(lam, 0.0)) - 1.0))
    j = twice / 2
    if twice < 0 or abs(lam - j * (j + 1)) > J_ROUNDING_TOL:
        raise CouplingError(f"J^2 eigenvalue {float(lam):.12g} is not of the form J(J+1)")
    return HalfInt(twice)


def couple_basis(system: CompositeSystem, m_j) -> CoupledBasis:
    """Simultaneous eigenvectors of (J^2, J_z) in the J_z = m_j sector."""
    m_j = HalfInt.parse(m_j)
    idx = system.sector_indices(m_j)
    if idx.size == 0:
        raise ConfigurationError(f"J_z = {m_j} sector is empty")
    lam, vecs = np.linalg.eigh(system.J2[np.ix_(idx, idx)])
    js = [_j_from_eigenvalue(x) for x in lam]

    states = []
    for j in sorted(set(js)):
        cols = vecs[:, [k for k, x in enumerate(js) if x == j]]
        if cols.shape[1] > 1 and system.mode is Mode.FULL:
            # pin the multiplicity labels by S^2 inside the degenerate block
            s2 = system.S2[np.ix_(idx, idx)]
            _, rot = np.linalg.eigh(cols.conj().T @ s2 @ cols)
            cols = cols @ rot
        for i in range(cols.shape[1]):
            full = np.zeros(system.dim, dtype=complex)
            full[idx] = cols[:, i]
            states.append(CoupledState(j, m_j, i, full))
    return CoupledBasis(m_j, tuple(states))


@dataclass(frozen=True, eq=False)
class InitialState:
    vector: NDArray[np.complex128] = field(repr=False)
    M_J: HalfInt

    @classmethod
    def from_vector(cls, system: CompositeSystem, vector) -> InitialState:
        """Normalize ``vector`` and require it to be a J_z eigenvector."""
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if v.shape[0] != system.dim:
            raise ConfigurationError(f"state has length {v.shape[0]}, system dim is {system.dim}")
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ConfigurationError("initial state is the zero vector")
        v = v / norm
        jz_v = system.Jz @ v
        m_j = HalfInt.from_float(float(np.real(np.vdot(v, jz_v))), tol=1e-6)
        if np.linalg.norm(jz_v - float(m_j) * v) > EIGENSTATE_TOL:
            raise NotEigenstateError("initial state is not an eigenvector of J_z")
        return cls(v, m_j)


def ferromagnetic_state(system: CompositeSystem, m_i) -> InitialState:
    """All spins S_i maximally up, impurity projection ``m_i``."""
    m_i = HalfInt.parse(m_i)
    check_projection(system.i_spin, m_i)
    if system.mode is Mode.COLLECTIVE and system.s_total != system.s_each * system.n_spins:
        raise ConfigurationError("ferromagnetic state needs S_total = N*s in collective mode")
    v = np.zeros(system.dim, dtype=complex)
    v[(system.i_spin.twice - m_i.twice) // 2] = 1.0
    return InitialState(v, system.s_each * system.n_spins + m_i)


class Amplitude(NamedTuple):
    J: HalfInt
    mult_index: int
    c: complex


def expand_initial(state: InitialState, basis: CoupledBasis) -> list[Amplitude]:
    """Coefficients c = <psi_{J,i}|Psi> of the initial state."""
    if state.M_J != basis.M_J:
        raise ConfigurationError(f"state has M_J={state.M_J}, basis has M_J={basis.M_J}")
    return [Amplitude(st.J, st.mult_index, complex(np.vdot(st.vector, state.vector)))
            for st in basis.states]


def cg_case_A_states(n: int, system: CompositeSystem) -> tuple[CoupledState, CoupledState, CoupledState]:
    """Closed-form coupled states J = N/2-1, N/2, N/2+1 at M_J = N/2-1.

    Valid for N spin-1/2 in the collective S = N/2 representation coupled to
    an impurity of spin 1. Returned in ascending J.
    """
    half, one = HalfInt(1), HalfInt(2)
    if (
        n < 2
        or system.n_spins != n
        or system.s_each != half
        or system.i_spin != one
        or system.mode is not Mode.COLLECTIVE
        or system.s_total != HalfInt(n)
    ):
        raise ConfigurationError("cg_case_A_states needs N >= 2 spin-1/2, I = 1, collective S = N/2")

    def ket(m_s_twice: int, m_i: int) -> NDArray[np.complex128]:
        v = np.zeros(system.dim, dtype=complex)
        v[(n - m_s_twice) // 2 * 3 + (1 - m_i)] = 1.0
        return v

    # |S, M_S; m_I> with M_S = N/2-2, N/2-1, N/2
    low, mid, top = ket(n - 4, 1), ket(n - 2, 0), ket(n, -1)
    up = (np.sqrt(2 * n * (n - 1)) * low + 2 * np.sqrt(2 * n) * mid + 2 * top) / np.sqrt(
        2 * (n + 1) * (n + 2)
    )
    same = (-2 * np.sqrt(n - 1) * low + (n - 2) * mid + np.sqrt(2 * n) * top) / np.sqrt(n * (n + 2))
    down = (np.sqrt(2) * low - np.sqrt(2 * (n - 1)) * mid + np.sqrt(n * (n - 1)) * top) / np.sqrt(
        n * (n + 1)
    )
    m_j = HalfInt(n - 2)
    return (
        CoupledState(HalfInt(n - 2), m_j, 0, down),
        CoupledState(HalfInt(n), m_j, 0, same),
        CoupledState(HalfInt(n + 2), m_j, 0, up),
    )
