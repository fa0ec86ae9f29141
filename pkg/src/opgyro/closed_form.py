"""Closed-form expectation of S(t) for precession about the operator J.

Iterating P_{n+1} = J x P_n keeps P_n inside the span of (J.S)J, S and J x S,
with coefficients depending on J^2 only. On a J^2 eigenspace they become the
scalars alpha_n, beta_n, gamma_n; summing the exponential series gives the
s-functions, and

    <S>(phi) = sum_{J,i} c*_{J,i} / (2J+1) <psi_{J,i}| s0 (J.S)J + s_par S + i s_perp J x S |Psi>

where phi is the accumulated phase. The multiplicity label i is summed over.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .angular_momentum import CompositeSystem, CoupledBasis, InitialState
from .errors import ExpansionResidualError, ImaginaryResidueError
from .halfint import HalfInt

IMAG_RESIDUE_TOL = 1e-9
EXPANSION_RESIDUE_TOL = 1e-10
EXPANSION_PRUNE_TOL = 1e-12


class CoefficientTriple(NamedTuple):
    alpha: complex
    beta: complex
    gamma: complex


def coefficients_recursive(J, n_max: int) -> list[CoefficientTriple]:
    """alpha_n, beta_n, gamma_n for n = 0..n_max by direct iteration."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    j = float(HalfInt.parse(J))
    jj = j * (j + 1)
    a, b, c = 0j, 1 + 0j, 0j
    out = [CoefficientTriple(a, b, c)]
    for _ in range(n_max):
        a, b, c = 1j * a + c, -jj * c, b + 1j * c
        out.append(CoefficientTriple(a, b, c))
    return out


def coefficients_explicit(J, n: int) -> CoefficientTriple:
    """Closed-form coefficients from the eigenvalues i, -iJ, i(J+1).

    J = 0 uses the continuous limit: alpha_n = (1-n) i^n - [n == 0],
    beta_n = [n == 0], gamma_n = i([n == 0] - i^n).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    J = HalfInt.parse(J)
    if J.twice == 0:
        delta = 1.0 if n == 0 else 0.0
        i_n = 1j**n
        return CoefficientTriple((1 - n) * i_n - delta, complex(delta), 1j * (delta - i_n))
    j = float(J)
    lam0, lam_minus, lam_plus = 1j**n, (-1j * j) ** n, (1j * (j + 1)) ** n
    alpha = ((2 * j + 1) * lam0 - j * lam_minus - (j + 1) * lam_plus) / (j * (j + 1) * (2 * j + 1))
    beta = ((j + 1) * lam_minus + j * lam_plus) / (2 * j + 1)
    gamma = 1j * (lam_minus - lam_plus) / (2 * j + 1)
    return CoefficientTriple(complex(alpha), complex(beta), complex(gamma))


class SFunctions(NamedTuple):
    s0: complex
    s_par: complex
    s_perp: complex


def s_functions(J, phi) -> SFunctions:
    """s0, s_par and s_perp at accumulated phase ``phi`` (scalar or array).

    At J = 0, s0 takes its limiting value 1 - i phi - exp(-i phi).
    """
    J = HalfInt.parse(J)
    j = float(J)
    phi = np.asarray(phi, dtype=float)
    e_minus = np.exp(-1j * (j + 1) * phi)
    e_plus = np.exp(1j * j * phi)
    if J.twice == 0:
        s0 = 1 - 1j * phi - np.exp(-1j * phi)
    else:
        s0 = ((2 * j + 1) - j * e_minus - (j + 1) * e_plus) / (j * (j + 1))
    s_par = (j + 1) * e_minus + j * e_plus
    s_perp = e_minus - e_plus
    if phi.ndim == 0:
        return SFunctions(complex(s0), complex(s_par), complex(s_perp))
    return SFunctions(s0, s_par, s_perp)


@dataclass(frozen=True, eq=False)
class Channels:
    """Per coupled state: weight c*/(2J+1) and the three matrix elements.

    ``a[k, u] = <psi_k|(J.S) J_u|Psi>``, ``b[k, u] = <psi_k|S_u|Psi>``,
    ``c[k, u] = <psi_k|(J x S)_u|Psi>``.
    """

    js: tuple[HalfInt, ...]
    weight: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def channels(system: CompositeSystem, basis: CoupledBasis, initial: InitialState) -> Channels:
    if basis.M_J != initial.M_J:
        raise ValueError(f"basis M_J={basis.M_J} does not match initial M_J={initial.M_J}")
    psi = initial.vector
    J, S = system.J, system.S
    s_psi = [op @ psi for op in S]
    a_vecs = [system.JdotS @ (op @ psi) for op in J]
    c_vecs = [
        J[1] @ s_psi[2] - J[2] @ s_psi[1],
        J[2] @ s_psi[0] - J[0] @ s_psi[2],
        J[0] @ s_psi[1] - J[1] @ s_psi[0],
    ]
    w = basis.matrix
    bra = w.conj().T
    js = tuple(st.J for st in basis.states)
    two_j1 = np.array([st.J.twice + 1 for st in basis.states], dtype=float)
    weight = np.conj(bra @ psi) / two_j1
    stack = lambda vecs: bra @ np.column_stack(vecs)  # noqa: E731
    return Channels(js, weight, stack(a_vecs), stack(s_psi), stack(c_vecs))


def _evaluate(ch: Channels, phi: np.ndarray) -> np.ndarray:
    """Complex <S_u>(phi), shape (3, len(phi))."""
    total = np.zeros((3, phi.size), dtype=complex)
    for k, J in enumerate(ch.js):
        sf = s_functions(J, phi)
        total += ch.weight[k] * (
            np.outer(ch.a[k], sf.s0) + np.outer(ch.b[k], sf.s_par) + 1j * np.outer(ch.c[k], sf.s_perp)
        )
    return total


def expectation_S(system: CompositeSystem, basis: CoupledBasis, initial: InitialState, phi):
    """(<S_x>, <S_y>, <S_z>) at accumulated phase ``phi``.

    ``phi`` may be a scalar (returns three floats) or an array (returns a
    (3, n) array). Raises ImaginaryResidueError if the imaginary parts fail
    to cancel.
    """
    phi_arr = np.atleast_1d(np.asarray(phi, dtype=float))
    values = _evaluate(channels(system, basis, initial), phi_arr)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > IMAG_RESIDUE_TOL:
        raise ImaginaryResidueError(f"imaginary residue {residue:.3e} in <S>")
    if np.ndim(phi) == 0:
        return tuple(float(x) for x in values.real[:, 0])
    return values.real


class Term(NamedTuple):
    freq: HalfInt
    amplitude: float


@dataclass(frozen=True)
class ClosedFormExpansion:
    """constant + sum amplitude * cos(freq * phi)."""

    constant: float
    terms: tuple[Term, ...]

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.full(phi.shape, self.constant, dtype=float)
        for t in self.terms:
            out = out + t.amplitude * np.cos(float(t.freq) * phi)
        return float(out) if out.ndim == 0 else out

    evaluate = __call__

    @property
    def frequencies(self) -> list[HalfInt]:
        return [t.freq for t in self.terms]

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "terms": [{"freq_twice": t.freq.twice, "amplitude": t.amplitude} for t in self.terms],
        }


def _exponential_coefficients(ch: Channels, u: int) -> tuple[complex, dict[int, complex]]:
    """Constant and {signed doubled frequency: coefficient of exp(i f phi)}."""
    const = 0j
    coef: dict[int, complex] = {}

    def add(f2: int, value: complex):
        coef[f2] = coef.get(f2, 0j) + value

    for k, J in enumerate(ch.js):
        w, a, b, c = ch.weight[k], ch.a[k, u], ch.b[k, u], ch.c[k, u]
        if J.twice == 0:
            # s0 carries a secular -i*phi term; its matrix element must vanish
            if abs(w * a) > IMAG_RESIDUE_TOL:
                raise ImaginaryResidueError("secular J = 0 term does not vanish")
            const += w * (a - 1j * c)
            add(-2, w * (-a + b + 1j * c))
            continue
        j = float(J)
        const += w * (2 * j + 1) / (j * (j + 1)) * a
        add(-(J.twice + 2), w * (-a / (j + 1) + (j + 1) * b + 1j * c))
        add(J.twice, w * (-a / j + j * b - 1j * c))
    return const, coef


def closed_form_expansion(
    system: CompositeSystem, basis: CoupledBasis, initial: InitialState, component: int = 2
) -> ClosedFormExpansion:
    """Cosine series of <S_u>(phi), u = ``component`` (z by default).

    Amplitudes are collected analytically from the three matrix-element
    channels. The series is then checked against expectation_S on 64
    phases in [0, 4 pi].
    """
    ch = channels(system, basis, initial)
    const, coef = _exponential_coefficients(ch, component)
    const += coef.pop(0, 0j)
    residues = [abs(const.imag)]
    terms = []
    for f2 in sorted({abs(f) for f in coef}):
        plus, minus = coef.get(f2, 0j), coef.get(-f2, 0j)
        cos_amp = plus + minus
        sin_amp = 1j * (plus - minus)
        residues += [abs(cos_amp.imag), abs(sin_amp)]
        if abs(cos_amp.real) > EXPANSION_PRUNE_TOL:
            terms.append(Term(HalfInt(f2), float(cos_amp.real)))
    residue = max(residues)
    if residue > EXPANSION_RESIDUE_TOL:
        raise ImaginaryResidueError(f"non-cosine residue {residue:.3e} in expansion")
    constant = float(const.real) if abs(const.real) > EXPANSION_PRUNE_TOL else 0.0
    expansion = ClosedFormExpansion(constant, tuple(terms))

    grid = np.linspace(0.0, 4 * np.pi, 64)
    direct = _evaluate(ch, grid)[component].real
    err = float(np.max(np.abs(expansion(grid) - direct)))
    if err > EXPANSION_RESIDUE_TOL:
        raise ExpansionResidualError(f"expansion misfit {err:.3e}")
    return expansion


def analytic_case_A(n: int, phi):
    """<S_z> for N spin-1/2 and I = 1 from the ferromagnetic start."""
    phi = np.asarray(phi, dtype=float)
    out = (
        n / 2
        + 4 * (n - 1) / (n * (n + 1)) * (np.cos(n * phi / 2) - 1)
        + 8 * n / ((n + 1) * (n + 2) ** 2) * (np.cos((n / 2 + 1) * phi) - 1)
    )
    return float(out) if out.ndim == 0 else out


def analytic_case_B(n: int, phi):
    """<S_z> for N spin-1/2 and I = 1/2 from the ferromagnetic start."""
    phi = np.asarray(phi, dtype=float)
    out = n / 2 + 2 * n / (n + 1) ** 2 * (np.cos((n + 1) / 2 * phi) - 1)
    return float(out) if out.ndim == 0 else out


def lower_bound_bN(n: int) -> float:
    """Case A lower bound, reached when both cosines equal -1 (odd N)."""
    return (n**4 + 4 * n**3 - 12 * n**2 - 64 * n + 64) / (2 * n * (n + 2) ** 2)


def lower_bound_case_B(n: int) -> float:
    """Case B minimum over phi, N/2 - 4N/(N+1)^2."""
    return n * (n * n + 2 * n - 7) / (2 * (n + 1) ** 2)


def large_N_approx_A(n: int, phi):
    """Case A to order 1/N^2; the error is O(1/N^3)."""
    phi = np.asarray(phi, dtype=float)
    out = (
        n / 2
        - 8 / n * np.sin(n * phi / 4) ** 2
        - 8 / n**2 * (np.cos(n * phi / 2) - np.cos((n / 2 + 1) * phi))
    )
    return float(out) if out.ndim == 0 else out
