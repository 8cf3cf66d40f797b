"""Grid functions with homogeneous Dirichlet boundary values.

A :class:`Sequence` stores ``u(0), ..., u(T+1)`` explicitly, boundary entries
included, so differences at both ends need no special casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class BoundaryError(ValueError):
    """Raised when a strict sequence has nonzero boundary entries."""


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Sequence:
    """Element of H: a real vector ``u(0..T+1)`` with ``u(0) = u(T+1) = 0``.

    With ``strict=False`` nonzero boundary entries are silently zeroed.
    """

    values: np.ndarray
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        if arr.size < 3:
            raise ValueError(f"a sequence needs T >= 1, got length {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sequence entries must be finite")
        if arr[0] != 0.0 or arr[-1] != 0.0:
            if self.strict:
                raise BoundaryError(
                    f"boundary entries must vanish, got u(0)={arr[0]!r}, u(T+1)={arr[-1]!r}"
                )
            arr[0] = arr[-1] = 0.0
        object.__setattr__(self, "values", _readonly(arr))

    @classmethod
    def from_interior(cls, interior) -> "Sequence":
        inner = np.asarray(interior, dtype=float).ravel()
        return cls(np.concatenate(([0.0], inner, [0.0])))

    @classmethod
    def zeros(cls, T: int) -> "Sequence":
        return cls(np.zeros(T + 2))

    @property
    def T(self) -> int:
        return self.values.size - 2

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def reflected(self) -> "Sequence":
        """The sequence ``k -> u(T+1-k)``."""
        return Sequence(self.values[::-1])


@dataclass(frozen=True, eq=False)
class ExponentProfile:
    """Node exponents ``p(0), p(1), ...``, each strictly greater than one.

    Only ``p(0..T)`` enter the modular; a trailing ``p(T+1)`` may be given and
    then only affects ``p_minus``/``p_plus``.
    """

    p: np.ndarray

    def __post_init__(self):
        arr = np.array(self.p, dtype=float).ravel()
        if arr.size < 2:
            raise ValueError("an exponent profile needs at least p(0) and p(1)")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 1.0):
            raise ValueError(f"every exponent must satisfy p(k) > 1, got {arr.tolist()}")
        object.__setattr__(self, "p", _readonly(arr))

    @classmethod
    def constant(cls, value: float, T: int) -> "ExponentProfile":
        return cls(np.full(T + 1, float(value)))

    @property
    def p_minus(self) -> float:
        return float(self.p.min())

    @property
    def p_plus(self) -> float:
        return float(self.p.max())

    def for_differences(self, T: int) -> np.ndarray:
        """Exponents ``p(0..T)`` attached to ``Δu(0..T)``."""
        if self.p.size not in (T + 1, T + 2):
            raise ValueError(
                f"exponent profile of length {self.p.size} does not fit T={T} "
                f"(expected {T + 1} or {T + 2} entries)"
            )
        return self.p[: T + 1]

    def with_value(self, index: int, value: float) -> "ExponentProfile":
        arr = self.p.copy()
        arr[index] = value
        return ExponentProfile(arr)


def as_values(u) -> np.ndarray:
    if isinstance(u, Sequence):
        return u.values
    return Sequence(u).values


def forward_difference(u) -> np.ndarray:
    """``Δu(k-1) = u(k) - u(k-1)`` for ``k = 1..T+1``."""
    return np.diff(as_values(u))


def h_norm(u) -> float:
    return float(np.linalg.norm(forward_difference(u)))


def sup_norm(u) -> float:
    return float(np.max(np.abs(as_values(u))))


def power_sum(x: np.ndarray, p) -> np.ndarray:
    """Elementwise ``|x|^p / p``."""
    return np.abs(x) ** p / p


def modular(u, p: ExponentProfile) -> float:
    """Anisotropic modular ``Σ_{k=1}^{T+1} |Δu(k-1)|^{p(k-1)} / p(k-1)``."""
    values = as_values(u)
    d = np.diff(values)
    return float(np.sum(power_sum(d, p.for_differences(values.size - 2))))
