"""Spin precession about an operator Larmor vector.

N identical spins coupled to one impurity spin by H(t) = omega(t) S.I evolve
through the accumulated phase phi(t) only. This package evaluates <S>(phi)
in closed form and checks it against exact and stepped propagation.
"""

from .angular_momentum import (
    CompositeSystem,
    CoupledBasis,
    CoupledState,
    InitialState,
    Mode,
    build_composite,
    couple_basis,
    cross_product,
    expand_initial,
    ferromagnetic_state,
    spin_matrices,
)
from .closed_form import (
    ClosedFormExpansion,
    analytic_case_A,
    analytic_case_B,
    closed_form_expansion,
    coefficients_explicit,
    coefficients_recursive,
    expectation_S,
    s_functions,
)
from .halfint import HalfInt
from .oracle import PropagatorCache, exact_propagate, expectation_via_oracle, step_integrator
from .pulse import Gaussian, Rectangular, Tabulated

__all__ = [
    "ClosedFormExpansion",
    "CompositeSystem",
    "CoupledBasis",
    "CoupledState",
    "Gaussian",
    "HalfInt",
    "InitialState",
    "Mode",
    "PropagatorCache",
    "Rectangular",
    "Tabulated",
    "analytic_case_A",
    "analytic_case_B",
    "build_composite",
    "closed_form_expansion",
    "coefficients_explicit",
    "coefficients_recursive",
    "couple_basis",
    "cross_product",
    "exact_propagate",
    "expand_initial",
    "expectation_S",
    "expectation_via_oracle",
    "ferromagnetic_state",
    "s_functions",
    "spin_matrices",
    "step_integrator",
]
