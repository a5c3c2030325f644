"""Monotone densities and measures of finite unions of intervals.

A ``MonotoneFn`` is a handle for a positive continuous function
increasing to infinity, tagged with the monotonicity of its derivative:
``L_plus`` (non-decreasing derivative), ``L_minus`` (non-increasing) or
plain ``L``.  The derivative is supplied explicitly rather than
differenced numerically, because every downstream convergence condition
consumes it directly.

An ``IntervalSet`` is a sorted disjoint union of half-open intervals
[a, b); it carries the exceptional sets detected or constructed
elsewhere in the package.
"""

from __future__ import annotations

import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import BracketError, DomainError, QuadratureError


@dataclass(frozen=True)
class MonotoneFn:
    """An increasing function with an explicit derivative.

    ``inverse`` is optional; when absent, ``inv`` falls back to bisection.
    Class tags are asserted by sampling (see ``check_class_tag``), not
    proven: handles may be arbitrary user callables.
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    class_tag: str = "L"
    domain_floor: float = 0.0
    inverse: Callable[[float], float] | None = None
    name: str = ""

    def __call__(self, x: float) -> float:
        return self.value(x)

    def inv(self, target: float, tol: float = 1e-12) -> float:
        if self.inverse is not None:
            return self.inverse(target)
        return numeric_inverse(self, target, tol)


def _np_exp(v: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.exp(v))


def identity() -> MonotoneFn:
    return MonotoneFn(lambda x: x, lambda x: 1.0, "L_plus", inverse=lambda t: t, name="identity")


def power(exponent: float, scale: float = 1.0) -> MonotoneFn:
    """scale * x**exponent; class L+ for exponent >= 1, else L-."""
    if exponent <= 0 or scale <= 0:
        raise ValueError("exponent and scale must be positive")
    tag = "L_plus" if exponent >= 1.0 else "L_minus"
    return MonotoneFn(
        lambda x: scale * x**exponent,
        lambda x: scale * exponent * x ** (exponent - 1.0),
        tag,
        inverse=lambda t: (t / scale) ** (1.0 / exponent),
        name=f"power({exponent:g})" if scale == 1.0 else f"power({exponent:g},{scale:g})",
    )


def exponential(rate: float = 1.0) -> MonotoneFn:
    """exp(rate * x) with rate > 0; class L+."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return MonotoneFn(
        lambda x: _np_exp(rate * x),
        lambda x: rate * _np_exp(rate * x),
        "L_plus",
        inverse=lambda t: math.log(t) / rate,
        name=f"exp({rate:g})",
    )


def log_shifted() -> MonotoneFn:
    """ln(1 + x); class L- (derivative 1/(1+x) decreases)."""
    return MonotoneFn(
        lambda x: math.log1p(x),
        lambda x: 1.0 / (1.0 + x),
        "L_minus",
        inverse=lambda t: math.expm1(t),
        name="log_shifted",
    )


def affine(slope: float, intercept: float = 0.0) -> MonotoneFn:
    if slope <= 0:
        raise ValueError("slope must be positive")
    return MonotoneFn(
        lambda x: slope * x + intercept,
        lambda x: slope,
        "L_plus",
        inverse=lambda t: (t - intercept) / slope,
        name=f"affine({slope:g},{intercept:g})",
    )


_BUILTINS: dict[str, Callable[..., MonotoneFn]] = {
    "identity": identity,
    "power": power,
    "exp": exponential,
    "log_shifted": log_shifted,
    "affine": affine,
}


def builtin(name: str, **params) -> MonotoneFn:
    """Instantiate a builtin density by name; see _BUILTINS for the set."""
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin function {name!r}; have {sorted(_BUILTINS)}") from None
    return factory(**params)


def numeric_inverse(
    f: MonotoneFn | Callable[[float], float],
    target: float,
    tol: float = 1e-10,
    lo: float | None = None,
    max_doublings: int = 200,
    max_iter: int = 500,
) -> float:
    """x with |f(x) - target| <= tol, for increasing f, via bisection.

    The upper bracket is found by doubling the step from the domain
    floor.  Raises BracketError when the target cannot be bracketed
    within ``max_doublings`` or bisection stalls above ``tol``.
    """
    if isinstance(f, MonotoneFn):
        floor = f.domain_floor if lo is None else lo
        fn = f.value
    else:
        floor = 0.0 if lo is None else lo
        fn = f
    flo = fn(floor)
    if flo > target:
        raise BracketError(f"target {target!r} lies below f({floor!r}) = {flo!r}")
    if abs(flo - target) <= tol:
        return floor
    step = 1.0
    hi = floor + step
    for _ in range(max_doublings):
        with np.errstate(over="ignore"):
            if fn(hi) >= target:
                break
        step *= 2.0
        hi = floor + step
    else:
        raise BracketError(f"could not bracket target {target!r} within {max_doublings} doublings")
    lo_x = floor
    for _ in range(max_iter):
        mid = 0.5 * (lo_x + hi)
        val = fn(mid)
        if abs(val - target) <= tol:
            return mid
        if val < target:
            lo_x = mid
        else:
            hi = mid
        if hi - lo_x <= math.ulp(max(abs(lo_x), abs(hi))):
            break
    if abs(fn(0.5 * (lo_x + hi)) - target) <= tol:
        return 0.5 * (lo_x + hi)
    raise BracketError(f"bisection stalled above tolerance {tol!r} for target {target!r}")


def check_class_tag(
    fn: MonotoneFn, lo: float, hi: float, samples: int = 100, seed: int = 0
) -> bool:
    """Spot-check the class tag on random pairs in [lo, hi]."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(lo, hi, samples)
    b = rng.uniform(lo, hi, samples)
    a, b = np.minimum(a, b), np.maximum(a, b)
    keep = b > a
    a, b = a[keep], b[keep]
    va = np.array([fn.value(t) for t in a])
    vb = np.array([fn.value(t) for t in b])
    if not np.all(va < vb):
        return False
    da = np.array([fn.derivative(t) for t in a])
    db = np.array([fn.derivative(t) for t in b])
    if fn.class_tag == "L_plus":
        return bool(np.all(db >= da))
    if fn.class_tag == "L_minus":
        return bool(np.all(db <= da))
    return True


@dataclass(frozen=True, eq=False)
class IntervalSet:
    """Finite sorted disjoint union of half-open intervals [a, b).

    Overlapping inputs are merged; touching intervals are kept separate,
    which preserves the lengths of constructed families.  When
    ``include_right`` is set, membership tests treat each interval as
    closed on the right (measures are unaffected).
    """

    intervals: tuple[tuple[float, float], ...]
    include_right: bool = False

    def __post_init__(self):
        cleaned = []
        for a, b in self.intervals:
            a, b = float(a), float(b)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("interval endpoints must be finite")
            if not a < b:
                raise ValueError(f"empty or reversed interval [{a}, {b})")
            cleaned.append((a, b))
        cleaned.sort()
        merged: list[tuple[float, float]] = []
        for a, b in cleaned:
            if merged and a < merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]], include_right: bool = False) -> "IntervalSet":
        return cls(tuple(pairs), include_right)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def total_length(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    @property
    def bounds(self) -> tuple[float, float] | None:
        if not self.intervals:
            return None
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, x: float) -> bool:
        pos = bisect_right([a for a, _ in self.intervals], x)
        if pos == 0:
            return False
        a, b = self.intervals[pos - 1]
        return x <= b if self.include_right else x < b

    def _boundaries(self) -> list[float]:
        out: list[float] = []
        for a, b in self.intervals:
            out.extend((a, b))
        return out

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        pieces = []
        for a, b in self.intervals:
            for c, d in other.intervals:
                lo, hi = max(a, c), min(b, d)
                if lo < hi:
                    pieces.append((lo, hi))
        return IntervalSet(tuple(pieces), self.include_right)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        pieces = []
        for a, b in self.intervals:
            cur = a
            for c, d in other.intervals:
                if d <= cur or c >= b:
                    continue
                if c > cur:
                    pieces.append((cur, min(c, b)))
                cur = max(cur, d)
                if cur >= b:
                    break
            if cur < b:
                pieces.append((cur, b))
        return IntervalSet(tuple(pieces), self.include_right)

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        left = self.difference(other)
        right = other.difference(self)
        return IntervalSet(left.intervals + right.intervals, self.include_right)

    def coalesce(self) -> "IntervalSet":
        """Merge touching neighbours; measures are unchanged."""
        merged: list[tuple[float, float]] = []
        for a, b in self.intervals:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return IntervalSet(tuple(merged), self.include_right)

    def log_image(self) -> "IntervalSet":
        """Image under x = ln r; endpoints must be positive."""
        if any(a <= 0 for a, _ in self.intervals):
            raise DomainError("log image requires positive endpoints")
        return IntervalSet(tuple((math.log(a), math.log(b)) for a, b in self.intervals), self.include_right)


def h_measure(h: MonotoneFn, intervals: IntervalSet) -> float:
    """Stieltjes measure sum h(b_i) - h(a_i); exact by additivity."""
    for a, _ in intervals:
        if a < h.domain_floor:
            raise DomainError(f"interval start {a} below domain floor {h.domain_floor}")
    return math.fsum(h.value(b) - h.value(a) for a, b in intervals)


def log_measure(intervals: IntervalSet, strict: bool = False) -> float:
    """Logarithmic measure sum ln(b_i) - ln(a_i).

    With ``strict`` the classical domain [1, inf) is enforced; otherwise
    any positive endpoints are accepted.
    """
    for a, _ in intervals:
        if a <= 0:
            raise DomainError(f"logarithmic measure needs positive endpoints, got {a}")
        if strict and a < 1.0:
            raise DomainError(f"interval start {a} < 1 in strict mode")
    return math.fsum(math.log(b) - math.log(a) for a, b in intervals)


def _quad_sum(f: Callable[[float], float], intervals: IntervalSet, quad_tol: float, what: str) -> float:
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        # non-convergence is reported as QuadratureError below
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in intervals:
            val, est = quad(f, a, b, epsabs=quad_tol * 1e-2, epsrel=1e-12, limit=200)
            total += val
            err += est
    if err > quad_tol:
        raise QuadratureError(f"{what} did not converge to quad_tol={quad_tol:g}", achieved=err)
    return total


def h_log_measure(h: MonotoneFn, intervals_r: IntervalSet, quad_tol: float = 1e-8) -> float:
    """Radial measure integral of h'(r)/r over the set, by adaptive
    quadrature.  Under the substitution x = ln r it equals the measure of
    the log image with density h'(e^x)."""
    for a, _ in intervals_r:
        if a <= 0:
            raise DomainError(f"radial measure needs positive endpoints, got {a}")
    return _quad_sum(lambda r: h.derivative(r) / r, intervals_r, quad_tol, "radial measure")


def density_measure(density: Callable[[float], float], intervals: IntervalSet, quad_tol: float = 1e-8) -> float:
    """Integral of an arbitrary density over the set, by adaptive quadrature."""
    return _quad_sum(density, intervals, quad_tol, "density measure")
