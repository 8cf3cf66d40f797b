"""Embedding and norm-equivalence constants on the grid space H.

The best constants are suprema of homogeneous ratios, estimated by multi-start
BFGS followed by coordinate refinement. The value returned is the ratio at the
best sample found, so it is always attained, i.e. a certified lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize

from .sequence_space import ExponentProfile

SEED = 0x5EED
SLACK_BAND = 1e-10


@dataclass(frozen=True)
class Budget:
    n_starts: int = 64
    max_iter: int = 5000
    stall: int = 50
    rel_tol: float = 1e-10
    seed: int = SEED


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    argmax: np.ndarray
    converged: bool


@dataclass(frozen=True)
class Fuzz:
    """Random interior vectors with entries uniform in ``[low, high]``."""

    n: int = 10_000
    T_values: tuple = (1, 2, 3, 4, 5, 6, 7, 8)
    low: float = -10.0
    high: float = 10.0
    seed: int = SEED

    def batches(self):
        """Yield ``(T, U)`` with ``U`` of shape ``(count, T+2)``, boundary zeros included."""
        rng = np.random.default_rng(self.seed)
        counts = np.bincount(rng.integers(0, len(self.T_values), self.n), minlength=len(self.T_values))
        for T, count in zip(self.T_values, counts):
            if count == 0:
                continue
            U = np.zeros((count, T + 2))
            U[:, 1:-1] = rng.uniform(self.low, self.high, (count, T))
            yield T, U


@dataclass
class Verdict:
    name: str
    passed: bool
    n_checked: int
    min_slack: float
    witness: list | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "n_checked": self.n_checked,
            "min_slack": self.min_slack,
            "witness": self.witness,
            **self.details,
        }


def _slack(big: np.ndarray, small: np.ndarray) -> np.ndarray:
    """Relative slack of ``big >= small``; round-off sits near zero."""
    scale = np.maximum(1.0, np.maximum(np.abs(big), np.abs(small)))
    return (big - small) / scale


class _Tally:
    def __init__(self, name: str):
        self.name = name
        self.n = 0
        self.min_slack = np.inf
        self.witness = None
        self.details: dict = {}

    def add(self, U: np.ndarray, slack: np.ndarray):
        if slack.size == 0:
            return
        self.n += slack.size
        i = int(np.argmin(slack))
        if slack[i] < self.min_slack:
            self.min_slack = float(slack[i])
            self.witness = U[i].tolist()

    def verdict(self) -> Verdict:
        ok = self.n > 0 and self.min_slack >= -SLACK_BAND
        return Verdict(self.name, bool(ok), self.n, float(self.min_slack),
                       None if ok else self.witness, self.details)


def _sums(U: np.ndarray, m: float):
    inner = np.sum(np.abs(U[:, 1:-1]) ** m, axis=1)
    diffs = np.sum(np.abs(np.diff(U, axis=1)) ** m, axis=1)
    return inner, diffs


def _log_ratio(x: np.ndarray, m: float, denom: str):
    v = np.concatenate(([0.0], x, [0.0]))
    d = np.diff(v)
    num = np.sum(np.abs(x) ** m)
    gnum = m * np.sign(x) * np.abs(x) ** (m - 1) / num
    if denom == "diff":
        den = np.sum(np.abs(d) ** m)
        w = m * np.sign(d) * np.abs(d) ** (m - 1) / den
    else:
        den = np.sum(d**2) ** (m / 2)
        w = m * d / np.sum(d**2)
    # adjoint of the difference map on interior coordinates
    gden = w[:-1] - w[1:]
    return np.log(num) - np.log(den), gnum - gden


def _ratio(x, m, denom):
    v = np.concatenate(([0.0], x, [0.0]))
    d = np.diff(v)
    num = np.sum(np.abs(x) ** m)
    den = np.sum(np.abs(d) ** m) if denom == "diff" else np.sum(d**2) ** (m / 2)
    return num / den if den > 0 else 0.0


def _starts(T: int, budget: Budget):
    k = np.arange(1, T + 1)
    starts = [np.sin(np.pi * k / (T + 1))]
    for j in range(T):
        e = np.zeros(T)
        e[j] = 1.0
        starts.append(e)
    rng = np.random.default_rng(budget.seed)
    while len(starts) < budget.n_starts:
        starts.append(rng.standard_normal(T))
    return starts[: max(1, budget.n_starts)]


def _maximize(T: int, m: float, denom: str, budget: Budget) -> ConstantEstimate:
    if T < 1:
        raise ValueError("T must be at least 1")
    if not m >= 2:
        raise ValueError(f"m must be >= 2, got {m}")

    def neg(x):
        val, grad = _log_ratio(x, m, denom)
        return -val, -grad

    best_x, best = None, -np.inf
    for x0 in _starts(T, budget):
        res = optimize.minimize(neg, x0, jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 2000})
        x = res.x / np.max(np.abs(res.x))
        val = _ratio(x, m, denom)
        if val > best:
            best, best_x = val, x

    # coordinate refinement on the unit sup-norm sphere
    x = best_x.copy()
    stalled = 0
    converged = False
    for it in range(budget.max_iter):
        i = it % T

        def along(t, i=i):
            y = x.copy()
            y[i] = t
            return -_ratio(y, m, denom)

        res = optimize.minimize_scalar(along, bounds=(x[i] - 1.0, x[i] + 1.0), method="bounded",
                                       options={"xatol": 1e-13})
        gain = -res.fun - best
        if gain > 0:
            x[i] = res.x
            x /= np.max(np.abs(x))
            best = _ratio(x, m, denom)
        if gain <= budget.rel_tol * best:
            stalled += 1
            if stalled >= budget.stall:
                converged = True
                break
        else:
            stalled = 0
    return ConstantEstimate(float(best), x, converged)


@lru_cache(maxsize=256)
def _cached(T: int, m: float, denom: str, budget: Budget) -> ConstantEstimate:
    return _maximize(T, m, denom, budget)


def best_c_m(T: int, m: float, budget: Budget = Budget()) -> ConstantEstimate:
    """Largest ``Σ_{k=1}^T |u(k)|^m / Σ_{k=1}^{T+1} |Δu(k-1)|^m`` found."""
    return _cached(int(T), float(m), "diff", budget)


def best_K_m(T: int, m: float, budget: Budget = Budget()) -> ConstantEstimate:
    """Largest ``(Σ|u(k)|^m)^{1/m} / ||u||`` found."""
    est = _cached(int(T), float(m), "hnorm", budget)
    return ConstantEstimate(est.value ** (1.0 / m), est.argmax, est.converged)


def dirichlet_laplacian_c2(T: int) -> float:
    """``1/λ_min`` of the tridiagonal ``(−1, 2, −1)`` matrix: the exact ``c_2``."""
    L = 2 * np.eye(T) - np.eye(T, k=1) - np.eye(T, k=-1)
    return float(1.0 / np.linalg.eigvalsh(L)[0])


def verify_eq1(m: float, fuzz: Fuzz = Fuzz()) -> Verdict:
    """``2^m Σ|u(k)|^m >= Σ|Δu(k-1)|^m`` on every fuzzed sample."""
    tally = _Tally(f"points_dominate_differences(m={m})")
    for _, U in fuzz.batches():
        inner, diffs = _sums(U, m)
        tally.add(U, _slack(2.0**m * inner, diffs))
    return tally.verdict()


def verify_relation_m(m: float, fuzz: Fuzz = Fuzz()) -> Verdict:
    """Two-sided comparison of the m-sum of differences with the H-norm."""
    if not m >= 2:
        raise ValueError("m must be >= 2")
    tally = _Tally(f"m_norm_vs_h_norm(m={m})")
    tight = 0
    for T, U in fuzz.batches():
        d = np.diff(U, axis=1)
        mid = np.sum(np.abs(d) ** m, axis=1) ** (1.0 / m)
        h = np.linalg.norm(d, axis=1)
        left = (T + 1) ** ((2.0 - m) / (2.0 * m)) * h
        right = (T + 1) ** (1.0 / m) * h
        tally.add(U, np.minimum(_slack(mid, left), _slack(right, mid)))
        tight += int(np.sum(np.abs(mid - left) <= 1e-12 * np.maximum(1.0, mid)))
    tally.details["left_tight"] = tight
    return tally.verdict()


def lemma1a_pair(T: int, p: ExponentProfile) -> tuple[float, float]:
    """A valid ``(C1, C2)`` for ``Σ|Δu(k-1)|^{p(k-1)} >= C1 ||u||^{p-} - C2``.

    Each ``|x|^{p(k-1)} >= |x|^{p-} - 1``, and the power-mean comparison of
    the ``p-``-sum with the Euclidean sum gives ``C1``; ``C2 = T + 1``.
    """
    pm = p.p_minus
    C1 = float((T + 1) ** min(0.0, (2.0 - pm) / 2.0))
    return C1, float(T + 1)


def verify_lemma1a(T: int, p: ExponentProfile, fuzz: Fuzz | None = None, pair=None) -> Verdict:
    """Fuzz the lower bound of the exponent-weighted difference sum on ``||u|| > 1``."""
    fuzz = fuzz or Fuzz(T_values=(T,))
    C1, C2 = pair if pair is not None else lemma1a_pair(T, p)
    pk = p.for_differences(T)
    tally = _Tally(f"anisotropic_sum_lower_bound(T={T})")
    for t, U in fuzz.batches():
        if t != T:
            raise ValueError("fuzz batches must all have the profile's T")
        d = np.diff(U, axis=1)
        h = np.linalg.norm(d, axis=1)
        keep = h > 1.0
        lhs = np.sum(np.abs(d[keep]) ** pk, axis=1)
        rhs = C1 * h[keep] ** p.p_minus - C2
        tally.add(U[keep], _slack(lhs, rhs))
    tally.details.update(C1=C1, C2=C2)
    if tally.n == 0:
        raise RuntimeError(f"{C1=}, {C2=}: no samples with ||u|| > 1")
    verdict = tally.verdict()
    if not verdict.passed:
        raise AssertionError(f"constructed pair violated at {verdict.witness}")
    return verdict


def verify_lemma1b(m: float, fuzz: Fuzz = Fuzz(), budget: Budget = Budget()) -> Verdict:
    """``Σ|u(k)|^m <= c_m Σ|Δu(k-1)|^m`` with the estimated best ``c_m`` per T."""
    tally = _Tally(f"points_bounded_by_differences(m={m})")
    used = {}
    for T, U in fuzz.batches():
        c = best_c_m(T, m, budget).value
        used[T] = c
        inner, diffs = _sums(U, m)
        tally.add(U, _slack(c * diffs, inner))
    tally.details["c_m"] = used
    return tally.verdict()


@dataclass
class ConstantsReport:
    T: int
    m: float
    c_m_best: float
    K_m_best: float
    C1: float
    C2: float
    converged: bool
    verifications: dict

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "m": self.m,
            "c_m_best": self.c_m_best,
            "K_m_best": self.K_m_best,
            "C1": self.C1,
            "C2": self.C2,
            "converged": self.converged,
            "verifications": {k: v.to_dict() for k, v in self.verifications.items()},
        }


def constants_report(T: int, m: float, p: ExponentProfile | None = None, n_samples: int = 10_000,
                     budget: Budget = Budget(), seed: int = SEED) -> ConstantsReport:
    p = p if p is not None else ExponentProfile.constant(m, T)
    c = best_c_m(T, m, budget)
    K = best_K_m(T, m, budget)
    C1, C2 = lemma1a_pair(T, p)
    fuzz = Fuzz(n=n_samples, T_values=(T,), seed=seed)
    checks = {
        "points_dominate_differences": verify_eq1(m, fuzz),
        "m_norm_vs_h_norm": verify_relation_m(m, fuzz),
        "anisotropic_sum_lower_bound": verify_lemma1a(T, p, fuzz),
        "points_bounded_by_differences": verify_lemma1b(m, fuzz, budget),
    }
    return ConstantsReport(T, float(m), c.value, K.value, C1, C2, c.converged and K.converged, checks)
