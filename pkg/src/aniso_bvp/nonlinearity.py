"""Closed-form node nonlinearities ``f(k, t)`` and their antiderivatives.

Each node carries a finite list of :class:`Term` objects, either a polynomial
piece ``coef * (t - shift)**n`` or a signed power ``coef * sign(t - shift) *
|t - shift|**gamma``.  Both have exact antiderivatives, so ``F(k, t) =
∫_0^t f(k, τ) dτ`` is evaluated in closed form and suprema of ``F`` over
intervals are found by enumerating the zeros of ``f``.

Growth hypotheses are keyed ``"H1"``..``"H4"`` as in the problem file:

* ``H1``: ``|f(k,t)| <= a(k)|t|^q(k) + b(k)``
* ``H2``: ``|f(k,t)| >= a1(k)|t|^q(k) + b1(k)``
* ``H3``: ``|f(k,t)| >= c(k)|t|^q(k)``
* ``H4``: ``|f(k,t)| <= c1(k)|t|^q(k)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate, optimize, special

# per-hypothesis (coefficient names, direction, names that must be positive)
HYPOTHESES = {
    "H1": (("a", "b"), "upper", ("a",)),
    "H2": (("a1", "b1"), "lower", ("a1",)),
    "H3": (("c",), "lower", ("c",)),
    "H4": (("c1",), "upper", ("c1",)),
}

_DEG_TOL = 1e-9


@dataclass(frozen=True)
class Term:
    """One additive piece of ``f(k, ·)``.

    ``power`` (integer ``n >= 0``) selects ``coef*(t-shift)**n``; ``gamma``
    (real ``> 0``) selects ``coef*sign(t-shift)*|t-shift|**gamma``.
    """

    coef: float
    shift: float = 0.0
    power: int | None = None
    gamma: float | None = None

    def __post_init__(self):
        if (self.power is None) == (self.gamma is None):
            raise ValueError("a term needs exactly one of `power` or `gamma`")
        if self.power is not None:
            if int(self.power) != self.power or self.power < 0:
                raise ValueError(f"integer power must be >= 0, got {self.power!r}")
            object.__setattr__(self, "power", int(self.power))
        elif not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        object.__setattr__(self, "coef", float(self.coef))
        object.__setattr__(self, "shift", float(self.shift))

    @property
    def is_polynomial(self) -> bool:
        return self.power is not None

    def f(self, t):
        x = np.asarray(t, dtype=float) - self.shift
        if self.is_polynomial:
            return self.coef * x**self.power
        return self.coef * np.sign(x) * np.abs(x) ** self.gamma

    def df(self, t):
        x = np.asarray(t, dtype=float) - self.shift
        if self.is_polynomial:
            if self.power == 0:
                return np.zeros_like(x)
            return self.coef * self.power * x ** (self.power - 1)
        with np.errstate(divide="ignore"):
            return self.coef * self.gamma * np.abs(x) ** (self.gamma - 1.0)

    def antiderivative(self, t):
        """Antiderivative normalized so that it vanishes at ``t = 0``."""
        x = np.asarray(t, dtype=float) - self.shift
        c = -self.shift
        if self.is_polynomial:
            m = self.power + 1
            return self.coef * (x**m - c**m) / m
        g = self.gamma + 1.0
        return self.coef * (np.abs(x) ** g - abs(c) ** g) / g

    def expansion(self, kind: str, side: int, n_terms: int = 40):
        """Asymptotic series of ``f`` (kind ``"f"``) or ``F`` (kind ``"F"``)
        as ``t -> side*inf``, written in ``s = |t|``: list of ``(degree, coef)``.
        """
        c = self.shift
        if self.is_polynomial:
            if kind == "F":
                m = self.power + 1
                scale = self.coef / m
                out = [(0.0, -scale * (-c) ** m)]
            else:
                m = self.power
                scale = self.coef
                out = []
            # (t - c)^m with t = side*s
            for j in range(m + 1):
                d = m - j
                out.append((float(d), scale * math.comb(m, j) * (-c) ** j * side**d))
            return out
        if kind == "F":
            g = self.gamma + 1.0
            scale = self.coef / g
            out = [(0.0, -scale * abs(c) ** g)]
        else:
            g = self.gamma
            scale = self.coef * side
            out = []
        # |t - c| = s - side*c for large s
        for j in range(n_terms):
            b = special.binom(g, j)
            if b == 0.0:
                break
            out.append((g - j, scale * b * (-side * c) ** j))
        return out


def _merge(pairs):
    acc: dict[float, float] = {}
    for d, a in pairs:
        key = round(d / _DEG_TOL) * _DEG_TOL
        acc[key] = acc.get(key, 0.0) + a
    return sorted(acc.items(), key=lambda da: -da[0])


def _leading(pairs):
    """First non-negligible ``(degree, coef)`` of a merged series."""
    merged = _merge(pairs)
    if not merged:
        return (-math.inf, 0.0)
    scale = max(1.0, max(abs(a) for _, a in merged))
    for d, a in merged:
        if abs(a) > 1e-13 * scale:
            return (d, a)
    return (-math.inf, 0.0)


@dataclass(frozen=True)
class Region:
    """Where to take a supremum: ``|t| <= sigma``, ``rho <= |t| <= sigma`` or ℝ."""

    kind: str
    sigma: float = math.inf
    rho: float = 0.0

    @classmethod
    def ball(cls, sigma: float) -> "Region":
        if not sigma > 0:
            raise ValueError("ball radius must be positive")
        return cls("ball", float(sigma))

    @classmethod
    def annulus(cls, rho: float, sigma: float) -> "Region":
        if not 0 <= rho < sigma:
            raise ValueError(f"annulus needs 0 <= rho < sigma, got {rho}, {sigma}")
        return cls("annulus", float(sigma), float(rho))

    @classmethod
    def reals(cls) -> "Region":
        return cls("reals")

    def intervals(self):
        if self.kind == "ball":
            return [(-self.sigma, self.sigma)]
        if self.kind == "annulus":
            return [(-self.sigma, -self.rho), (self.rho, self.sigma)]
        raise ValueError("the real line is not a finite union of intervals")


@dataclass(frozen=True)
class NodeFunction:
    """``f(k, ·)`` at one node as a sum of terms."""

    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    exact = True

    def f(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term.f(t)
        return out

    def df(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term.df(t)
        return out

    def F(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term.antiderivative(t)
        return out

    @property
    def is_polynomial(self) -> bool:
        return all(term.is_polynomial for term in self.terms)

    def polynomial(self) -> np.ndarray:
        """Monomial coefficients (ascending) of ``f`` when it is a polynomial."""
        coeffs = np.zeros(1)
        for term in self.terms:
            coeffs = P.polyadd(coeffs, term.coef * P.polypow([-term.shift, 1.0], term.power))
        return P.polytrim(coeffs, 0.0) if np.any(coeffs) else np.zeros(1)

    def tail(self, kind: str, side: int):
        """Leading ``(degree, coef)`` of ``f`` or ``F`` as ``t -> side*inf``."""
        pairs = []
        for term in self.terms:
            pairs.extend(term.expansion(kind, side))
        return _leading(pairs)

    def _polish(self, r: float, lo: float, hi: float) -> float:
        best, best_val = r, abs(float(self.f(r)))
        x = r
        for _ in range(8):
            d = float(self.df(x))
            if d == 0.0 or not np.isfinite(d):
                break
            x = x - float(self.f(x)) / d
            if not lo <= x <= hi:
                break
            val = abs(float(self.f(x)))
            if val < best_val:
                best, best_val = x, val
        return best

    def stationary_points(self, lo: float, hi: float, n_grid: int = 257) -> np.ndarray:
        """Zeros of ``f`` in ``[lo, hi]`` (exact route for polynomials)."""
        if not self.terms:
            return np.array([])
        if self.is_polynomial:
            coeffs = self.polynomial()
            if coeffs.size <= 1:
                return np.array([])
            roots = P.polyroots(coeffs)
            tol = 1e-6 * (1.0 + np.abs(roots))
            real = roots.real[np.abs(roots.imag) <= tol]
            slack = 1e-12 * max(1.0, abs(lo), abs(hi))
            real = real[(real >= lo - slack) & (real <= hi + slack)]
            return np.array([min(max(self._polish(r, lo, hi), lo), hi) for r in real])
        knots = {lo, hi}
        knots.update(t.shift for t in self.terms if not t.is_polynomial and lo < t.shift < hi)
        knots = sorted(knots)
        found = []
        for a, b in zip(knots[:-1], knots[1:]):
            grid = np.linspace(a, b, n_grid)
            vals = self.f(grid)
            found.extend(grid[vals == 0.0])
            flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
            for i in flips:
                found.append(optimize.brentq(self.f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
        found.extend(k for k in knots if k not in (lo, hi))
        return np.array(found)

    def _sup_interval(self, lo: float, hi: float) -> float:
        cand = np.concatenate(([lo, hi], self.stationary_points(lo, hi)))
        return float(np.max(self.F(cand)))

    def _root_radius(self) -> float:
        """Radius beyond which ``f`` keeps its tail sign (sampling heuristic
        for signed-power terms; polynomials never reach this)."""
        R = 1.0 + max((abs(t.shift) for t in self.terms), default=0.0)
        for _ in range(12):
            ok = True
            for side in (1, -1):
                lead = np.sign(self.tail("f", side)[1])
                s = side * np.geomspace(R, 64 * R, 200)
                if np.any(np.sign(self.f(s)) != lead):
                    ok = False
            if ok:
                return R
            R *= 64.0
        return R

    def sup(self, region: Region) -> float:
        """Supremum of ``F`` over ``region``; ``math.inf`` when unbounded."""
        if region.kind != "reals":
            return max(self._sup_interval(lo, hi) for lo, hi in region.intervals())
        limits = []
        for side in (1, -1):
            d, a = self.tail("F", side)
            if d > _DEG_TOL and a > 0:
                return math.inf
            if d <= _DEG_TOL and d > -math.inf:
                limits.append(a if abs(d) <= _DEG_TOL else 0.0)
        if not self.terms:
            return 0.0
        if self.is_polynomial:
            cand = np.concatenate(([0.0], self.stationary_points(-math.inf, math.inf)))
            return float(max([np.max(self.F(cand))] + limits))
        R = self._root_radius()
        return float(max([self._sup_interval(-R, R)] + limits))


@dataclass(frozen=True)
class BlackBoxNode:
    """Escape hatch: arbitrary continuous ``f`` with ``F`` by adaptive quadrature.

    Excluded from the exact supremum and tail operations.
    """

    func: Callable[[float], float]
    tol: float = 1e-10

    exact = False

    def f(self, t):
        return np.vectorize(lambda x: float(self.func(x)), otypes=[float])(t)

    def F(self, t):
        def one(x):
            return integrate.quad(self.func, 0.0, x, epsabs=self.tol, epsrel=self.tol, limit=200)[0]

        return np.vectorize(one, otypes=[float])(t)


class NotExactError(TypeError):
    """An exact operation was asked of a black-box node."""


def _require_exact(node):
    if not getattr(node, "exact", False):
        raise NotExactError("exact analysis needs a term-list node, not a black box")
    return node


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """The family ``f(k, ·)``, ``k = 1..T``, with growth metadata.

    ``q`` is the growth exponent profile over ``k = 1..T``; ``hypotheses`` maps
    ``"H1"``..``"H4"`` to per-node coefficient arrays.
    """

    nodes: tuple
    q: np.ndarray | None = None
    hypotheses: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = tuple(n if not isinstance(n, (list, tuple)) else NodeFunction(tuple(n)) for n in self.nodes)
        if not nodes:
            raise ValueError("a nonlinearity needs at least one node")
        object.__setattr__(self, "nodes", nodes)
        if self.q is not None:
            q = np.array(self.q, dtype=float).ravel()
            if q.size != len(nodes):
                raise ValueError(f"q has {q.size} entries, expected T={len(nodes)}")
            if np.any(q <= 0):
                raise ValueError("growth exponents q(k) must be positive")
            q.setflags(write=False)
            object.__setattr__(self, "q", q)
        hyp = {}
        for name, block in dict(self.hypotheses).items():
            if name not in HYPOTHESES:
                raise ValueError(f"unknown hypothesis {name!r}")
            names = HYPOTHESES[name][0]
            arrs = {}
            for key in names:
                if key not in block:
                    raise ValueError(f"hypothesis {name} is missing coefficient {key!r}")
                arr = np.array(block[key], dtype=float).ravel()
                if arr.size == 1:
                    arr = np.full(len(nodes), arr[0])
                if arr.size != len(nodes):
                    raise ValueError(f"{name}.{key} has {arr.size} entries, expected T={len(nodes)}")
                arrs[key] = arr
            hyp[name] = arrs
        object.__setattr__(self, "hypotheses", hyp)
        object.__setattr__(self, "_packed", self._pack())

    @classmethod
    def zero(cls, T: int) -> "Nonlinearity":
        return cls(tuple(NodeFunction(()) for _ in range(T)))

    @property
    def T(self) -> int:
        return len(self.nodes)

    @property
    def q_minus(self) -> float:
        return float(self._need_q().min())

    @property
    def q_plus(self) -> float:
        return float(self._need_q().max())

    def _need_q(self) -> np.ndarray:
        if self.q is None:
            raise ValueError("growth exponents q(k) were not supplied")
        return self.q

    def node(self, k: int):
        if not 1 <= k <= self.T:
            raise IndexError(f"node index k={k} outside [1, {self.T}]")
        return self.nodes[k - 1]

    def _pack(self):
        if not all(isinstance(n, NodeFunction) for n in self.nodes):
            return None
        rows = [(k, t) for k, n in enumerate(self.nodes) for t in n.terms]
        if not rows:
            return {"idx": np.zeros(0, int)}
        idx = np.array([k for k, _ in rows])
        coef = np.array([t.coef for _, t in rows])
        shift = np.array([t.shift for _, t in rows])
        poly = np.array([t.is_polynomial for _, t in rows])
        expo = np.array([float(t.power) if t.is_polynomial else t.gamma for _, t in rows])
        return {"idx": idx, "coef": coef, "shift": shift, "poly": poly, "expo": expo}

    def f_all(self, u_inner) -> np.ndarray:
        """``f(k, u(k))`` for ``k = 1..T`` from the interior values."""
        u_inner = np.asarray(u_inner, dtype=float)
        pk = self._packed
        if pk is None:
            return np.array([float(n.f(x)) for n, x in zip(self.nodes, u_inner)])
        if pk["idx"].size == 0:
            return np.zeros(self.T)
        x = u_inner[pk["idx"]] - pk["shift"]
        with np.errstate(invalid="ignore"):  # np.where evaluates both branches
            basis = np.where(pk["poly"], x ** pk["expo"], np.sign(x) * np.abs(x) ** pk["expo"])
        return np.bincount(pk["idx"], weights=pk["coef"] * basis, minlength=self.T)

    def F_all(self, u_inner) -> np.ndarray:
        """``F(k, u(k))`` for ``k = 1..T`` from the interior values."""
        u_inner = np.asarray(u_inner, dtype=float)
        pk = self._packed
        if pk is None:
            return np.array([float(n.F(x)) for n, x in zip(self.nodes, u_inner)])
        if pk["idx"].size == 0:
            return np.zeros(self.T)
        x = u_inner[pk["idx"]] - pk["shift"]
        c = -pk["shift"]
        m = pk["expo"] + 1.0
        poly = pk["poly"]
        with np.errstate(invalid="ignore"):
            raw = np.where(poly, x**m - c**m, np.abs(x) ** m - np.abs(c) ** m) / m
        return np.bincount(pk["idx"], weights=pk["coef"] * raw, minlength=self.T)


def eval_f(nl: Nonlinearity, k: int, t):
    return nl.node(k).f(t)


def eval_F(nl: Nonlinearity, k: int, t):
    return nl.node(k).F(t)


def sup_F_on(nl: Nonlinearity, k: int, region: Region) -> float:
    """Exact ``sup F(k, ·)`` over ``region``; ``math.inf`` flags unboundedness."""
    return _require_exact(nl.node(k)).sup(region)


@dataclass(frozen=True)
class LimsupVerdict:
    nonpositive: bool
    limsup: float
    witness: float | None = None


def limsup_ratio(nl: Nonlinearity, k: int, exponent: float, tol: float = 1e-12) -> LimsupVerdict:
    """Sign of ``limsup_{|t|->inf} F(k,t)/|t|^exponent`` from the tails of ``F``."""
    if not exponent > 1:
        raise ValueError("exponent must exceed 1")
    node = _require_exact(nl.node(k))
    limits = {}
    for side in (1, -1):
        d, a = node.tail("F", side)
        if d > exponent + _DEG_TOL:
            limits[side] = math.copysign(math.inf, a)
        elif abs(d - exponent) <= _DEG_TOL:
            limits[side] = a
        else:
            limits[side] = 0.0
    value = max(limits.values())
    if value <= 0:
        return LimsupVerdict(True, value)
    side = max(limits, key=limits.get)
    witness = None
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(0, 300):
            t = side * 10.0**j
            ratio = float(node.F(t)) / abs(t) ** exponent
            if np.isfinite(ratio) and ratio > tol:
                witness = t
                break
    return LimsupVerdict(False, value, witness)


@dataclass(frozen=True)
class GrowthGrid:
    limit: float = 1e3
    n: int = 100_001


@dataclass(frozen=True)
class GrowthVerdict:
    hypothesis: str
    holds: bool
    k: int | None = None
    t: float | None = None
    lhs: float | None = None
    rhs: float | None = None
    reason: str = ""

    def describe(self) -> str:
        if self.holds:
            return "holds-on-grid"
        return f"violated-at(k={self.k}, t={self.t})"


def _growth_coeffs(nl: Nonlinearity, hypothesis: str, coeffs):
    if hypothesis not in HYPOTHESES:
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    names, _, positive = HYPOTHESES[hypothesis]
    if coeffs is None:
        if hypothesis not in nl.hypotheses:
            raise ValueError(f"no coefficients for {hypothesis} supplied")
        coeffs = nl.hypotheses[hypothesis]
    out = {}
    for key in names:
        if key not in coeffs:
            raise ValueError(f"{hypothesis} needs coefficient {key!r}")
        arr = np.array(coeffs[key], dtype=float).ravel()
        if arr.size == 1:
            arr = np.full(nl.T, arr[0])
        if arr.size != nl.T:
            raise ValueError(f"{hypothesis}.{key} needs {nl.T} entries")
        if key in positive and np.any(arr <= 0):
            raise ValueError(f"{hypothesis}.{key} must be positive, got {arr.tolist()}")
        out[key] = arr
    return out


def check_growth(nl: Nonlinearity, hypothesis: str, coeffs=None, grid: GrowthGrid = GrowthGrid()) -> GrowthVerdict:
    """Check a growth hypothesis on a dense grid plus the leading-term tails.

    A passing verdict means "holds on the grid and asymptotically at leading
    order", not a proof.
    """
    cf = _growth_coeffs(nl, hypothesis, coeffs)
    names, direction, _ = HYPOTHESES[hypothesis]
    q = nl._need_q()
    mult = cf[names[0]]
    add = cf[names[1]] if len(names) > 1 else np.zeros(nl.T)
    ts = np.union1d(np.linspace(-grid.limit, grid.limit, grid.n), [0.0])

    def violated(lhs, rhs):
        band = 1e-12 * np.maximum(1.0, np.abs(rhs))
        return lhs > rhs + band if direction == "upper" else lhs < rhs - band

    for k in range(1, nl.T + 1):
        node = nl.node(k)
        i = k - 1
        lhs = np.abs(node.f(ts))
        rhs = mult[i] * np.abs(ts) ** q[i] + add[i]
        bad = np.nonzero(violated(lhs, rhs))[0]
        if bad.size:
            # closest to the origin is the most informative witness
            j = bad[np.argmin(np.abs(ts[bad]))]
            return GrowthVerdict(hypothesis, False, k, float(ts[j]), float(lhs[j]), float(rhs[j]), "grid")
        if not getattr(node, "exact", False):
            continue
        for side in (1, -1):
            d, a = node.tail("f", side)
            a = abs(a)
            if direction == "upper":
                ok = d < q[i] - _DEG_TOL or (abs(d - q[i]) <= _DEG_TOL and a <= mult[i])
            else:
                ok = d > q[i] + _DEG_TOL or (abs(d - q[i]) <= _DEG_TOL and a >= mult[i])
            if not ok:
                with np.errstate(over="ignore", invalid="ignore"):
                    for j in range(3, 300):
                        t = side * 10.0**j
                        lv = abs(float(node.f(t)))
                        rv = mult[i] * abs(t) ** q[i] + add[i]
                        if violated(np.array(lv), np.array(rv)):
                            return GrowthVerdict(hypothesis, False, k, t, lv, float(rv), "asymptotic")
                return GrowthVerdict(hypothesis, False, k, side * math.inf, None, None, "asymptotic")
    return GrowthVerdict(hypothesis, True)
