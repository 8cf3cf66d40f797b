"""Variational tools for anisotropic discrete two-point boundary value problems.

The energy ``J_λ(u) = Σ |Δu(k-1)|^{p(k-1)}/p(k-1) - λ Σ F(k, u(k))`` lives on
sequences with ``u(0) = u(T+1) = 0``; its critical points solve the
difference equation. Submodules cover the sequence space, closed-form
nonlinearities, the energy, embedding constants, existence criteria and
numerical solvers.
"""

__version__ = "0.1.0"

from .energy import CriticalPoint, ProblemSpec, energy, gradient, strong_residual
from .nonlinearity import Nonlinearity, NodeFunction, Region, Term
from .sequence_space import ExponentProfile, Sequence

__all__ = [
    "CriticalPoint",
    "ExponentProfile",
    "NodeFunction",
    "Nonlinearity",
    "ProblemSpec",
    "Region",
    "Sequence",
    "Term",
    "energy",
    "gradient",
    "strong_residual",
]
