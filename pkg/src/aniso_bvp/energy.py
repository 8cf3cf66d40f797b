"""Energy ``J_λ(u) = μ(u) - λ Σ F(k, u(k))``, its gradient and residuals."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .nonlinearity import Nonlinearity
from .sequence_space import ExponentProfile, Sequence, h_norm, modular


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """One instance of the two-point problem: grid size, exponents, ``f``, ``λ``."""

    T: int
    p: ExponentProfile
    nl: Nonlinearity
    lam: float = 1.0

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")
        if not isinstance(self.p, ExponentProfile):
            object.__setattr__(self, "p", ExponentProfile(self.p))
        self.p.for_differences(self.T)
        if self.nl.T != self.T:
            raise ValueError(f"nonlinearity defines {self.nl.T} nodes, expected T={self.T}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "_pk", np.asarray(self.p.for_differences(self.T)))

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return replace(self, lam=lam)

    def values(self, u) -> np.ndarray:
        """Full vector ``u(0..T+1)`` from a Sequence, a full array or interior values."""
        if isinstance(u, Sequence):
            v = u.values
        else:
            v = np.asarray(u, dtype=float).ravel()
            if v.size == self.T:
                v = np.concatenate(([0.0], v, [0.0]))
            else:
                v = Sequence(v).values
        if v.size != self.T + 2:
            raise ValueError(f"sequence length {v.size} does not match T={self.T}")
        return v


def phi(x: np.ndarray, p) -> np.ndarray:
    """``|x|^{p-2} x``, taken as 0 at ``x = 0`` for every ``p > 1``."""
    return np.sign(x) * np.abs(x) ** (np.asarray(p) - 1.0)


def _flux(spec: ProblemSpec, v: np.ndarray) -> np.ndarray:
    return phi(np.diff(v), spec._pk)


def energy(spec: ProblemSpec, u) -> float:
    v = spec.values(u)
    mu = np.sum(np.abs(np.diff(v)) ** spec._pk / spec._pk)
    return float(mu - spec.lam * np.sum(spec.nl.F_all(v[1:-1])))


def gradient(spec: ProblemSpec, u) -> np.ndarray:
    """Components ``<J_λ'(u), e_j>``, ``j = 1..T``."""
    v = spec.values(u)
    g = _flux(spec, v)
    return g[:-1] - g[1:] - spec.lam * spec.nl.f_all(v[1:-1])


def strong_residual(spec: ProblemSpec, u) -> np.ndarray:
    """``Δ(|Δu(k-1)|^{p(k-1)-2} Δu(k-1)) + λ f(k, u(k))`` for ``k = 1..T``.

    Vanishes exactly at critical points of ``J_λ``; equals ``-gradient``.
    """
    v = spec.values(u)
    g = _flux(spec, v)
    return (g[1:] - g[:-1]) + spec.lam * spec.nl.f_all(v[1:-1])


def literal_residual(spec: ProblemSpec, u) -> np.ndarray:
    """``Δ(|Δu(k-1)|^{p(k-1)-2} Δu(k-1)) - λ f(k, u(k))``.

    This sign convention is not the Euler-Lagrange equation of ``J_λ``: its
    zeros are the critical points of ``μ + λ Σ F``.
    """
    v = spec.values(u)
    g = _flux(spec, v)
    return (g[1:] - g[:-1]) - spec.lam * spec.nl.f_all(v[1:-1])


def functional_j(spec: ProblemSpec, u) -> float:
    """``J(u) = -Σ F(k, u(k))``, the λ-free part of the energy."""
    v = spec.values(u)
    return float(-np.sum(spec.nl.F_all(v[1:-1])))


def composite_energy(spec: ProblemSpec, u) -> float:
    """``μ(u) + λ J(u)``; the same number as :func:`energy`."""
    return modular(spec.values(u), spec.p) + spec.lam * functional_j(spec, u)


def truncated_phi(u, p: ExponentProfile, r: float, s: float) -> float:
    """Modular flattened to the constant ``r`` on ``r <= μ(u) <= s``."""
    if not 0 < r < s:
        raise ValueError(f"need 0 < r < s, got r={r}, s={s}")
    return truncate_value(modular(u, p), r, s)


def truncate_value(mu: float, r: float, s: float) -> float:
    if mu < r:
        return mu
    if mu <= s:
        return r
    return mu - s + r


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    u: Sequence
    energy: float
    grad_norm: float
    residual_norm: float
    classification: str
    morse_index: int
    eigenvalues: tuple = ()
    warnings: tuple = ()
    provenance: str = ""
    converged: bool = True

    def certified(self, tol: float) -> bool:
        return self.converged and self.residual_norm < tol

    def to_dict(self) -> dict:
        return {
            "u": self.u.values.tolist(),
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "residual_norm": self.residual_norm,
            "classification": self.classification,
            "morse_index": self.morse_index,
            "eigenvalues": list(self.eigenvalues),
            "warnings": list(self.warnings),
            "provenance": self.provenance,
            "converged": self.converged,
        }


def numeric_hessian(spec: ProblemSpec, u, step: float | None = None) -> np.ndarray:
    """Central differences of the analytic gradient, symmetrized."""
    v = spec.values(u)
    x = v[1:-1].copy()
    h = step if step is not None else 1e-5 * max(1.0, h_norm(v))
    H = np.empty((spec.T, spec.T))
    for j in range(spec.T):
        e = np.zeros(spec.T)
        e[j] = h
        H[:, j] = (gradient(spec, x + e) - gradient(spec, x - e)) / (2 * h)
    return 0.5 * (H + H.T)


def hessian_warnings(spec: ProblemSpec, u) -> list:
    d = np.abs(np.diff(spec.values(u)))
    bad = np.nonzero((d < 1e-8) & (spec._pk < 3.0))[0]
    if bad.size:
        return [
            "hessian untrustworthy: |Δu| < 1e-8 where p < 3 at difference index "
            + ",".join(str(int(i)) for i in bad)
        ]
    return []


def morse_class(eigenvalues: np.ndarray, rel_threshold: float = 1e-8):
    """``(classification, morse_index)`` from Hessian eigenvalues."""
    radius = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    band = rel_threshold * radius
    index = int(np.sum(eigenvalues < -band))
    if radius == 0.0 or np.any(np.abs(eigenvalues) <= band):
        return "degenerate", index
    if index == 0:
        return "local-min", 0
    if index == eigenvalues.size:
        return "local-max", index
    return "saddle", index


def classify(spec: ProblemSpec, u, provenance: str = "", converged: bool = True) -> CriticalPoint:
    v = spec.values(u)
    grad = gradient(spec, v)
    res = strong_residual(spec, v)
    H = numeric_hessian(spec, v)
    notes = hessian_warnings(spec, v)
    if np.all(np.isfinite(H)):
        eig = np.linalg.eigvalsh(H)
        label, index = morse_class(eig)
    else:
        eig, label, index = np.zeros(0), "degenerate", 0
        notes.append("hessian not finite")
    return CriticalPoint(
        u=Sequence(v),
        energy=energy(spec, v),
        grad_norm=float(np.max(np.abs(grad))),
        residual_norm=float(np.max(np.abs(res))),
        classification=label,
        morse_index=index,
        eigenvalues=tuple(float(e) for e in eig),
        warnings=tuple(notes),
        provenance=provenance,
        converged=converged,
    )
