"""Exact computations with Drinfeld twists of U(g) acting on polynomial functions.

Everything is computed over Q[h]/h^{N+1} with :class:`fractions.Fraction`
coefficients, so identities are checked exactly at the truncation order.
"""
from .series import ConfigurationError, Series, Truncation
from .verdict import Verdict
from .hopf import (HopfAlgebra, HopfElement, LiePresentation, RMatrix, TensorElement, Twist,
                   TwistRejected, build_twist, jordanian_twist, moyal_twist, twist_r_matrix)
from .funcalg import PolyFunction, PolyRing, Realization, derive_structure_constants, star
from .bimod import Deformed, FormsCalculus, FreeBimodule, Undeformed, phi, phi_inverse
from .morphism import OperatorMatrix, adjoint_act, d_quantize, d_quantize_inverse, tensor_R, tau
from .connection import Connection, curvature, form_connection, quantize_connection, sum_connections
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .verify import CATALOG, CheckResult, SuiteReport, run_suite

__version__ = "0.1.0"
