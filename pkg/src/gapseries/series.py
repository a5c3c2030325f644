"""Log-domain core for entire series of exponential terms.

A series  sum_n a_n exp(z*lambda_n)  is stored as the exponent sequence
(lambda_n) together with ln|a_n| and arg(a_n).  All magnitude arithmetic
happens on logarithms, so terms like exp(x*lambda_n) never overflow;
complex sums are formed only after rescaling by the maximal term.

For a gap power series  f(z) = sum_k f_k z^{n_k}  use integer exponents
and substitute x = ln r: the maximal term, central index and the modulus
extrema on |z| = r coincide with the ones computed here on the vertical
line Re z = x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import HorizonExceeded, InvalidTolerance

TWO_PI = 2.0 * math.pi

#: a maximizing index within this many slots of a truncated horizon is
#: refused: the stored prefix cannot certify that the true maximum is not
#: further out.
DEFAULT_GUARD_MARGIN = 5

_KINDS = ("dirichlet", "gap-power", "general")


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ExponentSequence:
    """Strictly increasing non-negative exponents.

    kind:
      * ``dirichlet``: requires the first exponent to be 0,
      * ``gap-power``: requires every exponent to be an integer,
      * ``general``:   no extra constraint (used by the criteria checkers
        for sequences that fit neither convention).
    """

    values: np.ndarray
    kind: str = "dirichlet"

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        v = self.values
        if v.ndim != 1 or v.size == 0:
            raise ValueError("exponent sequence must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)) or v[0] < 0:
            raise ValueError("exponents must be finite and non-negative")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ValueError("exponents must be strictly increasing")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown exponent kind {self.kind!r}")
        if self.kind == "dirichlet" and v[0] != 0.0:
            raise ValueError("a dirichlet exponent sequence must start at 0")
        if self.kind == "gap-power" and not np.all(v == np.round(v)):
            raise ValueError("gap-power exponents must be integers")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def gaps(self) -> np.ndarray:
        """Consecutive differences lambda_{n+1} - lambda_n."""
        return np.diff(self.values)

    @property
    def min_gap(self) -> float:
        g = self.gaps
        return float(g.min()) if g.size else math.inf

    def is_integral(self) -> bool:
        return bool(np.all(self.values == np.round(self.values)))


def geometric_exponents(base: float, count: int, kind: str = "dirichlet") -> ExponentSequence:
    """0, base, base^2, ..., base^(count-1)."""
    if count < 1:
        raise ValueError("count must be positive")
    if base <= 1.0:
        raise ValueError("base must exceed 1")
    vals = [0.0] + [float(base) ** n for n in range(1, count)]
    return ExponentSequence(np.array(vals), kind)


def power_exponents(scale: float, power: float, count: int, kind: str = "dirichlet") -> ExponentSequence:
    """scale * n^power for n = 0, 1, ..., count-1."""
    if count < 1:
        raise ValueError("count must be positive")
    if scale <= 0 or power <= 0:
        raise ValueError("scale and power must be positive")
    vals = scale * np.arange(count, dtype=float) ** power
    return ExponentSequence(vals, kind)


@dataclass(frozen=True, eq=False)
class SeriesSpec:
    """Stored prefix of a series: exponents, ln|a_n| and arg(a_n).

    Only nonzero coefficients are stored, so every log modulus must be
    finite.  ``complete=True`` marks the prefix as the whole series (a
    polynomial in e^z, or in z for gap-power exponents); truncation tail
    bounds and the horizon guard are skipped in that case.
    """

    exponents: ExponentSequence
    log_moduli: np.ndarray
    phases: np.ndarray | None = None
    complete: bool = False

    def __post_init__(self):
        object.__setattr__(self, "log_moduli", _readonly(self.log_moduli))
        if self.phases is None:
            ph = np.zeros(len(self.exponents))
        else:
            ph = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        object.__setattr__(self, "phases", _readonly(ph))
        n = len(self.exponents)
        if self.log_moduli.shape != (n,) or self.phases.shape != (n,):
            raise ValueError("exponents, log_moduli and phases must have equal length")
        if not np.all(np.isfinite(self.log_moduli)):
            raise ValueError("log moduli must be finite (drop zero coefficients)")

    def __len__(self) -> int:
        return len(self.exponents)

    def entirety_proxy_ok(self, from_index: int = 1) -> bool:
        """Check that ln|a_n| / lambda_n decreases beyond ``from_index``.

        A finite-prefix stand-in for the entirety requirement
        ln|a_n| / lambda_n -> -inf; meaningful for constructed instances,
        not enforced on arbitrary user prefixes.
        """
        lam = self.exponents.values
        mask = lam > 0
        ratios = self.log_moduli[mask] / lam[mask]
        start = max(0, from_index - int(np.argmax(mask)))
        tail = ratios[start:]
        if tail.size < 2:
            return True
        return bool(np.all(np.diff(tail) <= 0) and tail[-1] < tail[0])


@dataclass(frozen=True)
class TermValue:
    """A single term a_n * exp((x+iy) lambda_n) in log-polar form."""

    log_magnitude: float
    phase: float

    def __post_init__(self):
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)


def term_value(spec: SeriesSpec, n: int, x: float, y: float = 0.0) -> TermValue:
    lam = spec.exponents.values[n]
    return TermValue(float(spec.log_moduli[n] + x * lam), float(spec.phases[n] + y * lam))


class MaximalTerm(NamedTuple):
    log_value: float
    index: int


def _argmax_last(values: np.ndarray) -> int:
    # np.argmax returns the first maximizer; ties resolve to the largest
    # index by scanning the reversed array.
    return int(values.size - 1 - np.argmax(values[::-1]))


def log_maximal_term(
    spec: SeriesSpec, x: float, guard_margin: int = DEFAULT_GUARD_MARGIN
) -> MaximalTerm:
    """Largest term at abscissa x: max_n (ln|a_n| + x*lambda_n).

    Returns the log of the maximal term together with the central index,
    the largest index attaining the maximum.

    Raises HorizonExceeded when the spec is a truncation and the argmax
    lies within ``guard_margin`` of the stored horizon: the prefix then
    cannot certify that the true maximum is among the stored terms.
    """
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    values = spec.log_moduli + x * spec.exponents.values
    idx = _argmax_last(values)
    n = len(spec)
    if not spec.complete and n > guard_margin and idx > n - guard_margin:
        raise HorizonExceeded(
            f"maximal term at index {idx} of {n} stored terms is within "
            f"guard margin {guard_margin} of the horizon"
        )
    return MaximalTerm(float(values[idx]), idx)


@dataclass(frozen=True, eq=False)
class CentralIndexTable:
    """Piecewise-constant central index: nu(x) = segment_indices[i] on
    [jump_points[i-1], jump_points[i]), with the first segment extending
    to -inf and the last to +inf."""

    jump_points: np.ndarray
    segment_indices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "jump_points", _readonly(self.jump_points))
        object.__setattr__(self, "segment_indices", _readonly(self.segment_indices, dtype=int))
        if self.segment_indices.size != self.jump_points.size + 1:
            raise ValueError("need exactly one more segment than jump points")
        if self.jump_points.size and not np.all(np.diff(self.jump_points) > 0):
            raise ValueError("jump points must be strictly increasing")
        if not np.all(np.diff(self.segment_indices) > 0):
            raise ValueError("segment indices must be strictly increasing")

    def index_at(self, x):
        """Central index at x (scalar or array).  At a jump point the new,
        larger index applies, matching the largest-tied-index convention."""
        pos = np.searchsorted(self.jump_points, x, side="right")
        out = self.segment_indices[pos]
        return int(out) if np.isscalar(x) else out

    def segment_span(self, position: int) -> tuple[float, float]:
        """Half-open x-range of the segment at ``position``."""
        lo = -math.inf if position == 0 else float(self.jump_points[position - 1])
        hi = math.inf if position == self.jump_points.size else float(self.jump_points[position])
        return lo, hi

    @property
    def index_of_segment(self) -> dict[int, int]:
        return {i: int(k) for i, k in enumerate(self.segment_indices)}


def central_index_table(spec: SeriesSpec) -> CentralIndexTable:
    """Segment structure of the central index.

    The maximal term as a function of x is the upper envelope of the
    lines ln|a_n| + x*lambda_n.  Its vertices are the upper convex hull
    of the points (lambda_n, ln|a_n|); the jump points are the abscissas
    where consecutive supporting lines intersect.  Collinear middle
    points are dropped, which reproduces the convention that a tie
    resolves to the largest index.
    """
    lam = spec.exponents.values
    c = spec.log_moduli
    hull: list[int] = []
    for i in range(len(spec)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (lam[a] - lam[o]) * (c[i] - c[o]) - (c[a] - c[o]) * (lam[i] - lam[o])
            if cross >= 0.0:
                hull.pop()
            else:
                break
        hull.append(i)

    def jump(i: int, j: int) -> float:
        return (c[i] - c[j]) / (lam[j] - lam[i])

    jumps = [jump(hull[i], hull[i + 1]) for i in range(len(hull) - 1)]
    # Rounding can produce an empty segment; drop its vertex and re-join.
    i = 0
    while i + 1 < len(jumps):
        if jumps[i + 1] <= jumps[i]:
            del hull[i + 1]
            del jumps[i]
            jumps[i] = jump(hull[i], hull[i + 1])
            i = max(i - 1, 0)
        else:
            i += 1
    return CentralIndexTable(np.array(jumps), np.array(hull))


class EvalResult(NamedTuple):
    """Value of F(x+iy) divided by the maximal term, plus ln mu(x)."""

    ratio_re: float
    ratio_im: float
    log_mu: float


def _certified_prefix(
    spec: SeriesSpec,
    x: float,
    rel_tol: float,
    delta: float,
    guard_margin: int,
) -> tuple[np.ndarray, MaximalTerm, int]:
    """Scaled term magnitudes exp(ln|a_n| + x*lambda_n - ln mu) for a
    prefix whose unsummed remainder is certified below rel_tol.

    The tail beyond index N of the full series is bounded by
        mu(x+delta)/mu(x) * exp(-delta*lambda_N) / (1 - exp(-delta*g_min)),
    a geometric envelope using the smallest stored gap g_min.  Summation
    stops at the first N where this bound drops below rel_tol.  Complete
    specs (and single-term prefixes, which carry no gap information) have
    no tail and are summed whole.
    """
    if not (0.0 < rel_tol < 1.0):
        raise InvalidTolerance(f"rel_tol must lie in (0, 1), got {rel_tol}")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    top = log_maximal_term(spec, x, guard_margin)
    lam = spec.exponents.values
    scaled = spec.log_moduli + x * lam - top.log_value
    if spec.complete or len(spec) < 2:
        return np.exp(scaled), top, len(spec) - 1

    shifted = log_maximal_term(spec, x + delta, guard_margin)
    gmin = spec.exponents.min_gap
    log_geom = math.log1p(-math.exp(-delta * gmin))
    log_tail = (shifted.log_value - top.log_value) - delta * lam - log_geom
    certified = log_tail < math.log(rel_tol)
    if not certified.any():
        raise HorizonExceeded(
            "truncation tail bound cannot be driven below "
            f"rel_tol={rel_tol:g} with {len(spec)} stored terms"
        )
    stop = int(np.argmax(certified))
    stop = max(stop, top.index)
    return np.exp(scaled[: stop + 1]), top, stop


def evaluate(
    spec: SeriesSpec,
    x: float,
    y: float,
    rel_tol: float = 1e-9,
    delta: float = 1.0,
    guard_margin: int = DEFAULT_GUARD_MARGIN,
) -> EvalResult:
    """F(x+iy) / mu(x, F) with certified truncation error below rel_tol."""
    w, top, stop = _certified_prefix(spec, x, rel_tol, delta, guard_margin)
    ang = spec.phases[: stop + 1] + y * spec.exponents.values[: stop + 1]
    s = np.sum(w * np.exp(1j * ang))
    return EvalResult(float(s.real), float(s.imag), top.log_value)


def sum_modulus(
    spec: SeriesSpec,
    x: float,
    rel_tol: float = 1e-9,
    delta: float = 1.0,
    guard_margin: int = DEFAULT_GUARD_MARGIN,
) -> float:
    """Upper envelope sum |a_n| e^{x lambda_n} / mu(x, F); always >= 1."""
    w, _, _ = _certified_prefix(spec, x, rel_tol, delta, guard_margin)
    return float(np.sum(w))


@dataclass(frozen=True)
class PhaseSearchOpts:
    """Grid-plus-refinement options for modulus extrema over y.

    For reliable results on integral exponents the grid should have at
    least four points per unit of the top exponent (|F| restricted to the
    circle is a trigonometric polynomial of that degree).
    """

    grid_points: int = 4096
    phase_tol: float = 1e-10
    y_window: float | None = None
    rel_tol: float = 1e-9
    delta: float = 1.0


@dataclass(frozen=True)
class ModulusResult:
    """A modulus extremum in maximal-term units.

    ``direction`` records the certified side: a maximum search returns a
    lower bound for sup |F|, a minimum search an upper bound for inf |F|
    (both up to the truncation tolerance of the underlying evaluation).
    ``window_approximate`` is set when non-integral exponents forced the
    search onto a finite y-window instead of one exact period.
    """

    value: float
    y_at: float
    direction: str
    window_approximate: bool
    log_mu: float


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc <= fd else (d, fd)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
        if fc < best_f:
            best_x, best_f = c, fc
        if fd < best_f:
            best_x, best_f = d, fd
    return best_x, best_f


def _abs_profile(w: np.ndarray, lam: np.ndarray, ph: np.ndarray, ys: np.ndarray) -> np.ndarray:
    out = np.empty(ys.size)
    chunk = max(1, 2_000_000 // max(1, w.size))
    for start in range(0, ys.size, chunk):
        block = ys[start : start + chunk]
        ang = ph[None, :] + block[:, None] * lam[None, :]
        out[start : start + block.size] = np.abs((w[None, :] * np.exp(1j * ang)).sum(axis=1))
    return out


def _phase_extremum(spec: SeriesSpec, x: float, opts: PhaseSearchOpts, want_max: bool) -> ModulusResult:
    w, top, stop = _certified_prefix(spec, x, opts.rel_tol, opts.delta, DEFAULT_GUARD_MARGIN)
    lam = spec.exponents.values[: stop + 1]
    ph = spec.phases[: stop + 1]
    direction = "lower" if want_max else "upper"
    if stop == 0:
        return ModulusResult(float(w[0]), 0.0, direction, False, top.log_value)

    periodic = spec.exponents.is_integral()
    if periodic:
        span = TWO_PI
        ys = np.linspace(0.0, span, opts.grid_points, endpoint=False)
    else:
        span = opts.y_window if opts.y_window is not None else 10.0 * TWO_PI / spec.exponents.min_gap
        ys = np.linspace(0.0, span, opts.grid_points)
    vals = _abs_profile(w, lam, ph, ys)

    sign = -1.0 if want_max else 1.0
    j = int(np.argmin(sign * vals))
    dy = ys[1] - ys[0]
    lo, hi = ys[j] - dy, ys[j] + dy
    if not periodic:
        lo, hi = max(lo, 0.0), min(hi, span)

    def objective(y: float) -> float:
        return sign * float(_abs_profile(w, lam, ph, np.array([y]))[0])

    y_ref, f_ref = _golden_min(objective, lo, hi, opts.phase_tol)
    if sign * vals[j] <= f_ref:
        y_best, v_best = float(ys[j]), float(vals[j])
    else:
        y_best, v_best = float(y_ref % span if periodic else y_ref), float(sign * f_ref)
    return ModulusResult(v_best, y_best, direction, not periodic, top.log_value)


def max_modulus(spec: SeriesSpec, x: float, opts: PhaseSearchOpts | None = None) -> ModulusResult:
    """sup_y |F(x+iy)| / mu(x,F), certified from below.

    For integral exponents the search covers one exact period [0, 2*pi);
    otherwise a finite window is scanned and the result is flagged
    window-approximate (the true supremum over all of R is not finitely
    computable for incommensurable exponents).
    """
    return _phase_extremum(spec, x, opts or PhaseSearchOpts(), want_max=True)


def min_modulus(spec: SeriesSpec, x: float, opts: PhaseSearchOpts | None = None) -> ModulusResult:
    """inf_y |F(x+iy)| / mu(x,F), certified from above; see max_modulus."""
    return _phase_extremum(spec, x, opts or PhaseSearchOpts(), want_max=False)
