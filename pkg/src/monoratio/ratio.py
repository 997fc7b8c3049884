"""Validated (f, g) pairs on a finite window and the derived quantities
r = f/g, rho = f'/g', and rho-tilde = (f'g - fg')/|g'|.

The standing assumptions are that g and g' never vanish on the window and
keep a constant sign.  Validation is sampling-based (Chebyshev-spaced
points, denser near the endpoints where degeneration typically happens);
it is not a certified enclosure.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Callable, Sequence

from .intervals import Interval

# Anything callable as x -> (value, derivative).
DifferentiableFn = Callable[[float], tuple[float, float]]

# "nonzero" means above this times max(1, largest sample magnitude)
ZERO_REL_TOL = 1e-12


class ValidationError(Exception):
    """A standing assumption on g failed at a concrete point."""

    def __init__(self, x: float, message: str):
        self.x = x
        super().__init__(f"{message} near x = {x:.9g}")


class ZeroG(ValidationError):
    def __init__(self, x: float):
        super().__init__(x, "g takes the zero value")


class ZeroGPrime(ValidationError):
    def __init__(self, x: float):
        super().__init__(x, "g' takes the zero value")


class SignChange(ValidationError):
    """Sign flip between adjacent samples with no small-magnitude root
    in between (typically a pole)."""

    def __init__(self, x: float, what: str):
        super().__init__(x, f"sign of {what} changes discontinuously")


@dataclass(frozen=True)
class FunctionPair:
    """A validated (f, g) bundle: the unit of analysis.

    sign_gg is the constant sign of g*g' over the window, the row selector
    of the monotonicity rule tables; sign_gprime the constant sign of g'.
    """

    f: DifferentiableFn
    g: DifferentiableFn
    window: Interval
    sign_gg: int
    sign_gprime: int
    grid_n: int


def _chebyshev_points(window: Interval, n: int) -> list[float]:
    mid, half = window.midpoint, 0.5 * window.length
    pts = [mid + half * math.cos(math.pi * (2 * k + 1) / (2 * n)) for k in range(n)]
    pts.reverse()  # ascending
    return pts


def _bisect_root(value_at: Callable[[float], float], lo: float, hi: float,
                 xtol: float) -> float:
    flo = value_at(lo)
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        fm = value_at(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_g_assumptions(g: DifferentiableFn, window: Interval, n: int) -> tuple[int, int]:
    """Validate g != 0, g' != 0, constant signs, on n Chebyshev samples.

    Returns (sign of g, sign of g').  A sign flip between adjacent samples
    is chased down by bisection: a small-magnitude root reports ZeroG /
    ZeroGPrime at the located crossing, anything else is a SignChange.
    """
    xs = _chebyshev_points(window, n)
    values = []
    derivs = []
    for x in xs:
        v, d = g(x)
        values.append(v)
        derivs.append(d)

    scale_v = max(1.0, max(abs(v) for v in values))
    scale_d = max(1.0, max(abs(d) for d in derivs))
    for x, v in zip(xs, values):
        if abs(v) <= ZERO_REL_TOL * scale_v:
            raise ZeroG(x)
    for x, d in zip(xs, derivs):
        if abs(d) <= ZERO_REL_TOL * scale_d:
            raise ZeroGPrime(x)

    xtol = 1e-9 * (1.0 + window.length)
    for i in range(len(xs) - 1):
        if (values[i] > 0.0) != (values[i + 1] > 0.0):
            root = _bisect_root(lambda t: g(t)[0], xs[i], xs[i + 1], xtol)
            if abs(g(root)[0]) <= 1e-6 * scale_v:
                raise ZeroG(root)
            raise SignChange(root, "g")
        if (derivs[i] > 0.0) != (derivs[i + 1] > 0.0):
            root = _bisect_root(lambda t: g(t)[1], xs[i], xs[i + 1], xtol)
            if abs(g(root)[1]) <= 1e-6 * scale_d:
                raise ZeroGPrime(root)
            raise SignChange(root, "g'")

    sign_g = 1 if values[0] > 0.0 else -1
    sign_gp = 1 if derivs[0] > 0.0 else -1
    return sign_g, sign_gp


def make_pair(f: DifferentiableFn, g: DifferentiableFn, window: Interval,
              grid_n: int = 2048) -> FunctionPair:
    """Bundle f and g after validating the standing assumptions on g."""
    if not (math.isfinite(window.lo) and math.isfinite(window.hi)):
        raise ValueError("analysis window must be finite")
    if window.length <= 0.0:
        raise ValueError("analysis window must have positive length")
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    sign_g, sign_gp = check_g_assumptions(g, window, grid_n)
    return FunctionPair(f=f, g=g, window=window, sign_gg=sign_g * sign_gp,
                        sign_gprime=sign_gp, grid_n=grid_n)


def ratio_at(pair: FunctionPair, x: float) -> float:
    """r(x) = f(x)/g(x)."""
    fv, _ = pair.f(x)
    gv, _ = pair.g(x)
    return fv / gv


def rho_at(pair: FunctionPair, x: float) -> float:
    """rho(x) = f'(x)/g'(x)."""
    _, fd = pair.f(x)
    _, gd = pair.g(x)
    return fd / gd


def rho_tilde_at(pair: FunctionPair, x: float) -> float:
    """rho-tilde(x) = (f'g - fg')/|g'|, algebraically r' g^2/|g'|.

    Computed from the product form rather than a finite difference of r,
    which removes one layer of approximation and the cancellation in r'.
    """
    fv, fd = pair.f(x)
    gv, gd = pair.g(x)
    return (fd * gv - fv * gd) / abs(gd)


@dataclass(frozen=True)
class SampleTable:
    """One shared evaluation pass over the analysis grid."""

    xs: list[float]
    f_values: list[float]
    f_derivs: list[float]
    g_values: list[float]
    g_derivs: list[float]
    r: list[float]
    rho: list[float]
    rho_tilde: list[float]

    @property
    def step(self) -> float:
        return self.xs[1] - self.xs[0]


def sample_table(pair: FunctionPair, n: int | None = None) -> SampleTable:
    """Evaluate f and g on n uniform interior points (inset from the window
    endpoints by half a step) and derive r, rho, rho-tilde."""
    n = pair.grid_n if n is None else n
    if n < 2:
        raise ValueError("n must be >= 2")
    lo, step = pair.window.lo, pair.window.length / n
    xs, fv, fd, gv, gd, r, rho, rho_t = [], [], [], [], [], [], [], []
    for i in range(n):
        x = lo + (i + 0.5) * step
        a, ap = pair.f(x)
        b, bp = pair.g(x)
        xs.append(x)
        fv.append(a)
        fd.append(ap)
        gv.append(b)
        gd.append(bp)
        r.append(a / b)
        rho.append(ap / bp)
        rho_t.append((ap * b - a * bp) / abs(bp))
    return SampleTable(xs, fv, fd, gv, gd, r, rho, rho_t)


def sample(pair: FunctionPair, which: str, n: int) -> list[tuple[float, float]]:
    """n uniform interior samples of "r", "rho", or "rho_tilde"."""
    table = sample_table(pair, n)
    try:
        values = {"r": table.r, "rho": table.rho, "rho_tilde": table.rho_tilde}[which]
    except KeyError:
        raise ValueError(f"unknown quantity {which!r}") from None
    return list(zip(table.xs, values))


def median_abs(values: Sequence[float]) -> float:
    return statistics.median(abs(v) for v in values)


def negated(fn: DifferentiableFn) -> DifferentiableFn:
    """x -> -f(x), for vertical reflection."""

    def wrapped(x: float) -> tuple[float, float]:
        v, d = fn(x)
        return -v, -d

    wrapped.label = f"-({getattr(fn, 'label', 'f')})"
    return wrapped


def mirrored(fn: DifferentiableFn) -> DifferentiableFn:
    """x -> f(-x), for horizontal reflection (chain rule flips the slope)."""

    def wrapped(x: float) -> tuple[float, float]:
        v, d = fn(-x)
        return v, -d

    wrapped.label = f"({getattr(fn, 'label', 'f')})|x->-x"
    return wrapped
