"""Numerical searches for critical points of ``J_λ``.

Direct descent finds minimizers, deflated Newton collects several critical
points from many starts, a discretized-path method locates mountain-pass
saddles, and a λ sweep ties deflation runs together with warm starts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .constants import SEED
from .energy import CriticalPoint, ProblemSpec, classify, energy, gradient

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 10_000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    alpha: float = 1.0
    power: float = 2.0
    distinct_radius: float = 1e-4
    n_starts: int = 8
    seed: int = SEED
    scales: tuple = (0.1, 1.0, 10.0)
    newton_max_iter: int = 60
    n_path: int = 41
    lambda_grid: tuple | None = None

    def __post_init__(self):
        for name in ("tol", "armijo_c", "alpha", "power", "distinct_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if self.distinct_radius <= self.tol:
            raise ValueError("distinctness radius must exceed the residual tolerance")
        if self.n_path < 3:
            raise ValueError("a path needs at least 3 points")

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["scales"] = list(self.scales)
        d["lambda_grid"] = None if self.lambda_grid is None else list(self.lambda_grid)
        return d


def _hdist(a: np.ndarray, b: np.ndarray) -> float:
    d = np.zeros(a.size + 1)
    d[:-1] += a - b
    d[1:] -= a - b
    return float(np.linalg.norm(d))


@dataclass
class SolutionSet:
    points: list
    lam: float
    tol: float
    distances: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        X = [pt.u.interior for pt in self.points]
        n = len(X)
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = _hdist(X[i], X[j])
        self.distances = D

    def __len__(self):
        return len(self.points)

    @property
    def energies(self) -> list:
        return [pt.energy for pt in self.points]

    @property
    def classifications(self) -> list:
        return [pt.classification for pt in self.points]

    def min_distance(self) -> float:
        n = len(self.points)
        if n < 2:
            return float("inf")
        return float(np.min(self.distances[np.triu_indices(n, 1)]))

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "tol": self.tol,
            "n_solutions": len(self),
            "points": [pt.to_dict() for pt in self.points],
            "distances": self.distances.tolist(),
        }


def _residual(spec: ProblemSpec, x: np.ndarray) -> float:
    return float(np.max(np.abs(gradient(spec, x))))


def minimize_direct(spec: ProblemSpec, cfg: SolverConfig = SolverConfig(), start=None,
                    trace: list | None = None) -> CriticalPoint:
    """Gradient descent with Barzilai-Borwein steps and Armijo backtracking.

    Energies of accepted iterates are appended to ``trace`` when given; they
    never increase.
    """
    x = np.zeros(spec.T) if start is None else spec.values(start)[1:-1].copy()
    Ex, g = energy(spec, x), gradient(spec, x)
    step = 1.0
    if trace is not None:
        trace.append(Ex)
    converged = False
    for _ in range(cfg.max_iter):
        if np.max(np.abs(g)) < cfg.tol:
            converged = True
            break
        gg = float(g @ g)
        a = step
        while True:
            xn = x - a * g
            with np.errstate(over="ignore", invalid="ignore"):
                En = energy(spec, xn)
            if np.isfinite(En) and En <= Ex - cfg.armijo_c * a * gg:
                break
            a *= cfg.backtrack
            if a < 1e-300:
                break
        if not En <= Ex or np.max(np.abs(xn)) > 1e12:
            break
        gn = gradient(spec, xn)
        s, y = xn - x, gn - g
        sy = float(s @ y)
        step = float(np.clip(s @ s / sy, 1e-12, 1e12)) if sy > 0 else min(2 * a, 1e12)
        x, g, Ex = xn, gn, En
        if trace is not None:
            trace.append(Ex)
    return classify(spec, x, "minimize_direct", converged)


def _jacobian(spec: ProblemSpec, x: np.ndarray) -> np.ndarray:
    h = 1e-6 * max(1.0, float(np.max(np.abs(x))))
    J = np.empty((spec.T, spec.T))
    for j in range(spec.T):
        e = np.zeros(spec.T)
        e[j] = h
        J[:, j] = (gradient(spec, x + e) - gradient(spec, x - e)) / (2 * h)
    return J


def _newton_direction(J: np.ndarray, g: np.ndarray) -> np.ndarray:
    try:
        d = np.linalg.solve(J, -g)
        if np.all(np.isfinite(d)):
            return d
    except np.linalg.LinAlgError:
        pass
    return np.linalg.solve(J + 1e-10 * np.eye(J.shape[0]), -g)


class _Deflation:
    """``M(x) = Π_w (1/||x - w||^power + α)`` and its log-gradient."""

    def __init__(self, roots, alpha: float, power: float):
        self.roots = [np.asarray(r) for r in roots]
        self.alpha, self.power = alpha, power

    def factor(self, x: np.ndarray) -> float:
        m = 1.0
        for w in self.roots:
            m *= _hdist(x, w) ** -self.power + self.alpha
        return m

    def log_grad(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        for w in self.roots:
            v = x - w
            Lv = 2 * v
            Lv[1:] -= v[:-1]
            Lv[:-1] -= v[1:]
            d = _hdist(x, w)
            m = d**-self.power + self.alpha
            out += -self.power * d ** (-self.power - 2) * Lv / m
        return out


def _polish(spec: ProblemSpec, x: np.ndarray, tol: float, steps: int = 100) -> np.ndarray:
    """Plain Newton while the residual keeps dropping.

    Degenerate roots converge only linearly, so a residual below ``tol`` can
    still sit far from the root; polishing continues until progress stops.
    """
    best, rbest = x, _residual(spec, x)
    for _ in range(steps):
        if rbest == 0.0:
            break
        step = _newton_direction(_jacobian(spec, best), gradient(spec, best))
        xn = best + step
        rn = _residual(spec, xn)
        if not rn < rbest:
            break
        best, rbest = xn, rn
        if np.max(np.abs(step)) <= 1e-15 * (1.0 + np.max(np.abs(best))):
            break
    return best


def deflated_newton(spec: ProblemSpec, cfg: SolverConfig, x0: np.ndarray, roots=()):
    """Damped Newton on the deflated gradient from ``x0``; ``(x, converged)``."""
    defl = _Deflation(roots, cfg.alpha, cfg.power)
    x = np.array(x0, dtype=float)

    def gnorm(z):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            v = defl.factor(z) * np.linalg.norm(gradient(spec, z))
        return v if np.isfinite(v) else np.inf

    for _ in range(cfg.newton_max_iter):
        g = gradient(spec, x)
        if np.max(np.abs(g)) < cfg.tol:
            return _polish(spec, x, cfg.tol), True
        dF = _newton_direction(_jacobian(spec, x), g)
        if defl.roots:
            denom = 1.0 - float(defl.log_grad(x) @ dF)
            if abs(denom) > 1e-12:
                dF = dF / denom
        G0 = gnorm(x)
        a = 1.0
        while a > 1e-8:
            xn = x + a * dF
            if gnorm(xn) < (1 - cfg.armijo_c * a) * G0:
                break
            a *= cfg.backtrack
        else:
            return x, False
        x = xn
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > 1e8:
            return x, False
    g = gradient(spec, x)
    if np.max(np.abs(g)) < cfg.tol:
        return _polish(spec, x, cfg.tol), True
    return x, False


def _starts(T: int, cfg: SolverConfig, warm=()):
    yield np.zeros(T)
    for w in warm:
        yield np.asarray(w, dtype=float)
    for t in cfg.scales:
        for k in range(T):
            for sign in (1.0, -1.0):
                e = np.zeros(T)
                e[k] = sign * t
                yield e
    rng = np.random.default_rng(cfg.seed)
    for t in cfg.scales:
        for _ in range(cfg.n_starts):
            yield t * rng.standard_normal(T)


def solve_deflated(spec: ProblemSpec, cfg: SolverConfig = SolverConfig(), warm=()) -> SolutionSet:
    """Collect distinct certified critical points by deflated Newton.

    Each start is retried against the growing root list until Newton fails
    from it; the run ends when every start is exhausted.
    """
    roots: list = []
    for x0 in _starts(spec.T, cfg, warm):
        while True:
            x, ok = deflated_newton(spec, cfg, x0, roots)
            if not ok or _residual(spec, x) >= cfg.tol:
                break
            if any(_hdist(x, w) <= cfg.distinct_radius for w in roots):
                break
            roots.append(x)
    points = [classify(spec, x, "solve_deflated") for x in roots]
    order = sorted(range(len(points)), key=lambda i: (points[i].energy, tuple(roots[i])))
    return SolutionSet([points[i] for i in order], spec.lam, cfg.tol)


class NoBarrierError(RuntimeError):
    """The path maximum sits at an endpoint, so there is no mountain to cross."""


def _equidistribute(P: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(P, axis=0), axis=1)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    if s[-1] == 0:
        return P
    target = np.linspace(0.0, s[-1], P.shape[0])
    return np.column_stack([np.interp(target, s, P[:, j]) for j in range(P.shape[1])])


def mountain_pass(spec: ProblemSpec, cfg: SolverConfig = SolverConfig(), u1=None, u0=None) -> CriticalPoint:
    """Discretized-path mountain pass between ``u0`` (default 0) and ``u1``.

    The interior path point of highest energy moves downhill across the path
    (its tangential gradient removed), then the path is re-spaced by arc
    length. The final maximum is refined along its two segments and polished
    by Newton on the plain gradient.
    """
    if u1 is None:
        raise ValueError("mountain_pass needs an endpoint u1")
    a = np.zeros(spec.T) if u0 is None else spec.values(u0)[1:-1]
    b = spec.values(u1)[1:-1]
    N = cfg.n_path
    P = a + np.linspace(0.0, 1.0, N)[:, None] * (b - a)

    def energies(Q):
        return np.array([energy(spec, q) for q in Q])

    E = energies(P)
    step = 1.0
    for _ in range(cfg.max_iter):
        i = int(np.argmax(E))
        if i in (0, N - 1):
            raise NoBarrierError("no barrier detected (path maximum at an endpoint)")
        tang = P[i + 1] - P[i - 1]
        tang /= np.linalg.norm(tang)
        g = gradient(spec, P[i])
        g = g - (g @ tang) * tang
        gg = float(g @ g)
        if np.max(np.abs(g)) < 1e-3 * cfg.tol ** 0.5 or gg == 0.0:
            break
        t = step
        while t > 1e-14:
            q = P[i] - t * g
            Eq = energy(spec, q)
            if Eq <= E[i] - cfg.armijo_c * t * gg:
                break
            t *= cfg.backtrack
        else:
            break
        P[i] = q
        step = min(2 * t, 1e6)
        P = _equidistribute(P)
        E = energies(P)

    i = int(np.argmax(E))
    if i in (0, N - 1):
        raise NoBarrierError("no barrier detected (path maximum at an endpoint)")
    best, Ebest = P[i], E[i]
    for j in (i - 1, i + 1):
        lo, hi = P[min(i, j)], P[max(i, j)]
        res = optimize.minimize_scalar(lambda s: -energy(spec, lo + s * (hi - lo)), bounds=(0.0, 1.0),
                                       method="bounded", options={"xatol": 1e-12})
        if -res.fun > Ebest:
            best, Ebest = lo + res.x * (hi - lo), -res.fun
    x = best
    for _ in range(cfg.newton_max_iter):
        g = gradient(spec, x)
        if np.max(np.abs(g)) < cfg.tol:
            break
        x = x + _newton_direction(_jacobian(spec, x), g)
    x = _polish(spec, x, cfg.tol)
    floor = max(E[0], E[-1])
    pt = classify(spec, x, "mountain_pass")
    ok = pt.residual_norm < cfg.tol and pt.energy >= floor - 1e-12
    if not ok:
        log.warning("mountain pass did not certify: residual %.3g, energy %.6g", pt.residual_norm, pt.energy)
        pt = classify(spec, x, "mountain_pass", converged=False)
    return pt


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` points from ``lo`` to ``hi`` equally spaced in ``log2``."""
    if not 0 < lo <= hi or n < 1:
        raise ValueError("log grid needs 0 < lo <= hi and n >= 1")
    return np.exp2(np.linspace(np.log2(lo), np.log2(hi), n))


@dataclass
class SweepResult:
    rows: list
    target: int
    first_hit: float | None

    def table(self) -> list:
        return [
            {"lambda": s.lam, "n_solutions": len(s), "energies": s.energies,
             "classifications": s.classifications}
            for s in self.rows
        ]

    def to_dict(self) -> dict:
        return {"target": self.target, "first_hit": self.first_hit, "rows": self.table(),
                "solutions": [s.to_dict() for s in self.rows]}


def sweep_lambda(template: ProblemSpec, grid, cfg: SolverConfig = SolverConfig(), target: int = 3,
                 stop_at_target: bool = False) -> SweepResult:
    """Deflated solves along an ascending λ grid, warm-started from the last λ.

    With ``stop_at_target`` the sweep ends at the first λ reaching ``target``
    solutions.
    """
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("empty lambda grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be strictly ascending")
    rows, warm, first = [], [], None
    for lam in grid:
        sol = solve_deflated(template.with_lambda(lam), cfg, warm)
        rows.append(sol)
        warm = [pt.u.interior for pt in sol.points]
        if first is None and len(sol) >= target:
            first = lam
        log.info("lambda=%g: %d critical points", lam, len(sol))
        if stop_at_target and first is not None:
            break
    return SweepResult(rows, target, first)
