"""Build a ratio with a prescribed maximal interval of constancy.

Given g (with g, g' nonzero), a monotone continuous rho, a point z inside
the chosen constancy interval of rho, and K = rho(z), the function

    f(x) = K*g(z) + integral from z to x of rho(u) dg(u)

has f'/g' = rho, and the only maximal constancy interval of f/g is the
chosen one.  Since g is differentiable the Stieltjes integral reduces to
an ordinary integral of rho*g', done here with adaptive Simpson panels
split a priori at the staircase breakpoints, cumulative checkpoints making
each later query a single local panel.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .intervals import Interval
from .ratio import DifferentiableFn, FunctionPair, check_g_assumptions, make_pair


class QuadratureError(ArithmeticError):
    """A panel's error estimate never got below tolerance."""

    def __init__(self, a: float, b: float, estimate: float):
        self.a, self.b, self.estimate = a, b, estimate
        super().__init__(
            f"quadrature did not converge on [{a:g}, {b:g}] "
            f"(error estimate {estimate:.3g})")


class StaircaseError(ValueError):
    """Invalid staircase specification."""


def adaptive_simpson(fn: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 40) -> float:
    """Integrate fn from a to b by adaptive Simpson subdivision.

    The panel error estimate is |S_fine - S_coarse|/15; accepted panels get
    the Richardson correction.  Orientation follows the convention that
    integrating from a to b with b < a flips the sign.

    Raises QuadratureError if a panel's estimate is still above tolerance
    at max_depth.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(fn, b, a, tol, max_depth)

    def step(x0: float, x2: float, f0: float, f1: float, f2: float,
             whole: float, tol: float, depth: int) -> float:
        x1 = 0.5 * (x0 + x2)
        lm = 0.5 * (x0 + x1)
        rm = 0.5 * (x1 + x2)
        flm, frm = fn(lm), fn(rm)
        h6 = (x2 - x0) / 12.0
        left = h6 * (f0 + 4.0 * flm + f1)
        right = h6 * (f1 + 4.0 * frm + f2)
        est = (left + right - whole) / 15.0
        if abs(est) <= tol:
            return left + right + est
        if depth >= max_depth:
            raise QuadratureError(x0, x2, abs(est))
        half = 0.5 * tol
        return (step(x0, x1, f0, flm, f1, left, half, depth + 1)
                + step(x1, x2, f1, frm, f2, right, half, depth + 1))

    fa, fb = fn(a), fn(b)
    fm = fn(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return step(a, b, fa, fm, fb, whole, tol, 0)


def _integrate(fn: Callable[[float], float], a: float, b: float,
               breaks: Sequence[float], tol: float, max_depth: int = 40) -> float:
    """Integrate with the panel pre-split at any breakpoints inside (a, b),
    so Simpson never straddles a kink."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    cuts = [a]
    lo_idx = bisect.bisect_right(breaks, a)
    hi_idx = bisect.bisect_left(breaks, b)
    cuts.extend(breaks[lo_idx:hi_idx])
    cuts.append(b)
    pieces = len(cuts) - 1
    total = 0.0
    for i in range(pieces):
        total += adaptive_simpson(fn, cuts[i], cuts[i + 1], tol / pieces, max_depth)
    return sign * total


# ---------------------------------------------------------------------------
# Staircase rho

@dataclass(frozen=True)
class StaircaseSpec:
    """A continuous piecewise-linear monotone function: strict slopes
    separated by flats (the prescribed constancy intervals).

    slopes has one entry more than flats (before, between, after); all
    slope magnitudes must be positive.  direction "down" mirrors the whole
    profile.  The first flat carries anchor_value; with no flats the
    profile passes through (0, anchor_value).
    """

    flats: tuple[tuple[float, float], ...] = ()
    slopes: tuple[float, ...] = (1.0,)
    direction: str = "up"
    anchor_value: float = 0.0

    def __post_init__(self):
        if self.direction not in ("up", "down"):
            raise StaircaseError(f"direction must be 'up' or 'down', got {self.direction!r}")
        if len(self.slopes) != len(self.flats) + 1:
            raise StaircaseError(
                f"need {len(self.flats) + 1} slopes for {len(self.flats)} flats, "
                f"got {len(self.slopes)}")
        if any(s <= 0.0 for s in self.slopes):
            raise StaircaseError("slopes must be positive")
        prev_hi = -math.inf
        for lo, hi in self.flats:
            if hi <= lo:
                raise StaircaseError(f"flat ({lo}, {hi}) has non-positive length")
            if lo < prev_hi:
                raise StaircaseError("flats overlap or are out of order")
            prev_hi = hi

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(x for flat in self.flats for x in flat)

    def to_json_dict(self) -> dict:
        return {
            "flats": [list(f) for f in self.flats],
            "slopes": list(self.slopes),
            "direction": self.direction,
            "anchor_value": self.anchor_value,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StaircaseSpec":
        return cls(
            flats=tuple((float(lo), float(hi)) for lo, hi in data.get("flats", [])),
            slopes=tuple(float(s) for s in data.get("slopes", [1.0])),
            direction=data.get("direction", "up"),
            anchor_value=float(data.get("anchor_value", 0.0)),
        )


class StaircaseFn:
    """Evaluable staircase: constant exactly on each flat, linear between.

    At a breakpoint the reported derivative is the right-hand slope; rho
    only ever appears inside integrals and value comparisons, so the
    one-sided convention never leaks into results.
    """

    __slots__ = ("spec", "breakpoints", "_values", "_slopes", "label")

    def __init__(self, spec: StaircaseSpec):
        self.spec = spec
        sign = 1.0 if spec.direction == "up" else -1.0
        nodes = list(spec.breakpoints)
        # segment i spans [nodes[i-1], nodes[i]); slope per segment, value at nodes
        slopes: list[float] = []
        for i, s in enumerate(spec.slopes):
            slopes.append(sign * s)
            if i < len(spec.flats):
                slopes.append(0.0)
        # values at nodes, anchored on the first flat
        values = [0.0] * len(nodes)
        if nodes:
            values[0] = spec.anchor_value  # left edge of first flat
            for i in range(1, len(nodes)):
                seg_slope = slopes[i]  # segment between nodes[i-1] and nodes[i]
                values[i] = values[i - 1] + seg_slope * (nodes[i] - nodes[i - 1])
        self.breakpoints = tuple(nodes)
        self._values = values
        self._slopes = slopes
        self.label = f"staircase({len(spec.flats)} flats, {spec.direction})"

    def __call__(self, x: float) -> tuple[float, float]:
        nodes = self.breakpoints
        if not nodes:
            s = self._slopes[0]
            return self.spec.anchor_value + s * x, s
        i = bisect.bisect_right(nodes, x)  # segment index; right-hand rule at nodes
        s = self._slopes[i]
        if i == 0:
            return self._values[0] + s * (x - nodes[0]), s
        if s == 0.0:  # inside a flat: exactly the stored constant
            return self._values[i - 1], 0.0
        return self._values[i - 1] + s * (x - nodes[i - 1]), s

    def __repr__(self) -> str:
        return f"StaircaseFn({self.label})"


def make_staircase_rho(spec: StaircaseSpec) -> StaircaseFn:
    """Build the piecewise-linear monotone rho described by spec."""
    return StaircaseFn(spec)


# ---------------------------------------------------------------------------
# The constructor

class ConstructedFn:
    """f built as K*g(z) + cumulative integral of rho*g' from z.

    The cumulative integral is checkpointed on a dense node grid, so a
    query only integrates one partial panel.  The derivative is
    rho(x)*g'(x) by construction, not by differentiating the quadrature.
    """

    def __init__(self, g: DifferentiableFn, rho: DifferentiableFn, z: float,
                 K: float, window: Interval, quad_tol: float = 1e-10,
                 nodes: int = 1024):
        self.g = g
        self.rho = rho
        self.z = z
        self.K = K
        self.window = window
        self.quad_tol = quad_tol
        self._breaks = tuple(sorted(getattr(rho, "breakpoints", ())))
        self._lo = window.lo
        self._node_step = window.length / nodes
        self._node_xs = [window.lo + i * self._node_step for i in range(nodes + 1)]
        self._n_panels = nodes

        def integrand(u: float) -> float:
            return rho(u)[0] * g(u)[1]

        self._integrand = integrand
        cum = [0.0] * (nodes + 1)
        for i in range(nodes):
            cum[i + 1] = cum[i] + _integrate(integrand, self._node_xs[i],
                                             self._node_xs[i + 1], self._breaks,
                                             quad_tol)
        self._cum = cum
        self._base = K * g(z)[0]
        self._Fz = self._antideriv(z)
        self.label = f"stieltjes({getattr(rho, 'label', 'rho')}, {getattr(g, 'label', 'g')})"

    def _antideriv(self, x: float) -> float:
        k = int((x - self._lo) / self._node_step)
        k = min(max(k, 0), self._n_panels - 1)
        return self._cum[k] + _integrate(self._integrand, self._node_xs[k], x,
                                         self._breaks, self.quad_tol)

    def __call__(self, x: float) -> tuple[float, float]:
        rv, _ = self.rho(x)
        _, gd = self.g(x)
        return self._base + self._antideriv(x) - self._Fz, rv * gd

    def __repr__(self) -> str:
        return f"ConstructedFn({self.label})"


def _check_rho_monotone(rho: DifferentiableFn, window: Interval, n: int = 128) -> None:
    step = window.length / (n - 1)
    values = [rho(window.lo + i * step)[0] for i in range(n)]
    tol = 1e-12 * (1.0 + max(abs(v) for v in values))
    rising = any(values[i + 1] - values[i] > tol for i in range(n - 1))
    falling = any(values[i + 1] - values[i] < -tol for i in range(n - 1))
    if rising and falling:
        raise ValueError("rho must be monotone on the window")


def construct_f(g: DifferentiableFn, rho: DifferentiableFn, z: float, K: float,
                window: Interval, quad_tol: float = 1e-10) -> ConstructedFn:
    """Construct f with f'/g' = rho and f(z) = K*g(z).

    For the ratio f/g to be constant on a chosen flat of rho, K must equal
    rho's value there (i.e. K = rho(z) with z inside the flat); any other K
    still satisfies f'/g' = rho but leaves f/g without constancy intervals.
    """
    if not window.contains(z):
        raise ValueError(f"z = {z:g} is outside the window {window}")
    check_g_assumptions(g, window, 256)
    _check_rho_monotone(rho, window)
    return ConstructedFn(g, rho, z, K, window, quad_tol)


# ---------------------------------------------------------------------------
# g-template catalog (all four sign combinations of g' and g*g')

def _exp_pos(x: float) -> tuple[float, float]:
    e = math.exp(x)
    return e, e


def _exp_neg(x: float) -> tuple[float, float]:
    e = math.exp(x)
    return -e, -e


def _dexp_pos(x: float) -> tuple[float, float]:
    e = math.exp(-x)
    return e, -e


def _dexp_neg(x: float) -> tuple[float, float]:
    e = math.exp(-x)
    return -e, e


def _affine_pos(x: float) -> tuple[float, float]:
    return x + 3.0, 1.0


def _affine_neg(x: float) -> tuple[float, float]:
    return -x - 3.0, -1.0


def _recip_pos(x: float) -> tuple[float, float]:
    v = 1.0 / (x + 4.0)
    return v, -v * v


def _recip_neg(x: float) -> tuple[float, float]:
    v = 1.0 / (x + 4.0)
    return -v, v * v


for _fn, _name in ((_exp_pos, "exp(x)"), (_exp_neg, "-exp(x)"),
                   (_dexp_pos, "exp(-x)"), (_dexp_neg, "-exp(-x)"),
                   (_affine_pos, "x + 3"), (_affine_neg, "-x - 3"),
                   (_recip_pos, "1/(x + 4)"), (_recip_neg, "-1/(x + 4)")):
    _fn.label = _name

# keyed by the sign of g*g'; each list spans both signs of g'
G_TEMPLATES = {
    1: (_exp_pos, _exp_neg, _affine_pos, _affine_neg),
    -1: (_dexp_pos, _dexp_neg, _recip_pos, _recip_neg),
}

# stratification order: one table row per residue of the seed mod 4
_ROWS = ((True, 1), (False, 1), (True, -1), (False, -1))  # (rho rises?, sign gg')


@dataclass(frozen=True)
class GeneratorConfig:
    windows: tuple[tuple[float, float], ...] = (
        (-2.0, 2.0), (-1.8, 2.2), (-2.4, 1.6), (-1.5, 2.5))
    n_flats: tuple[int, int] = (0, 3)
    flat_len: tuple[float, float] = (0.3, 0.7)
    min_gap: float = 0.25
    edge_margin_frac: float = 0.12
    slope_range: tuple[float, float] = (0.8, 2.5)
    anchor_range: tuple[float, float] = (-1.5, 1.5)
    grid_n: int = 2048
    quad_tol: float = 1e-10


def _draw_flats(rng: random.Random, window: Interval,
                config: GeneratorConfig, n_flats: int) -> tuple[tuple[float, float], ...]:
    margin = config.edge_margin_frac * window.length
    usable_lo = window.lo + margin
    usable_len = window.length - 2.0 * margin
    while n_flats > 0:
        lengths = [rng.uniform(*config.flat_len) for _ in range(n_flats)]
        free = usable_len - sum(lengths) - config.min_gap * (n_flats - 1)
        if free >= 0.0:
            cuts = sorted(rng.uniform(0.0, free) for _ in range(n_flats))
            flats = []
            consumed = 0.0
            for i, length in enumerate(lengths):
                start = usable_lo + cuts[i] + consumed
                flats.append((start, start + length))
                consumed += length + config.min_gap
            return tuple(flats)
        n_flats -= 1
    return ()


def random_pair(seed: int, config: GeneratorConfig | None = None
                ) -> tuple[FunctionPair, StaircaseSpec, Interval]:
    """Deterministically generate a (pair, staircase spec, chosen interval)
    triple from a seed.

    The seed's residue mod 4 picks the rule-table row (rho direction and
    sign of g*g'), so any contiguous sweep of >= 4 seeds covers all rows.
    The constructed pair uses z at the chosen flat's midpoint and
    K = rho(z), so the chosen flat is exactly the prescribed constancy
    interval of f/g; with zero flats the choice degenerates to the point z.
    """
    config = config or GeneratorConfig()
    rng = random.Random(seed)
    rho_up, sign_gg = _ROWS[seed % 4]

    g = rng.choice(G_TEMPLATES[sign_gg])
    window = Interval(*rng.choice(config.windows))
    n_flats = rng.randint(*config.n_flats)
    flats = _draw_flats(rng, window, config, n_flats)
    slopes = tuple(rng.uniform(*config.slope_range) for _ in range(len(flats) + 1))
    spec = StaircaseSpec(flats=flats, slopes=slopes,
                         direction="up" if rho_up else "down",
                         anchor_value=rng.uniform(*config.anchor_range))
    rho = make_staircase_rho(spec)

    if flats:
        chosen = Interval(*flats[rng.randrange(len(flats))])
        z = chosen.midpoint
    else:
        span = window.length
        z = rng.uniform(window.lo + 0.3 * span, window.hi - 0.3 * span)
        chosen = Interval(z, z)
    K = rho(z)[0]

    f = construct_f(g, rho, z, K, window, config.quad_tol)
    pair = make_pair(f, g, window, config.grid_n)
    return pair, spec, chosen
