"""Executable monotonicity rule tables and the full pair-analysis pipeline.

The rules: with sign(g*g') constant, a monotone derivative ratio rho
forces the ratio r = f/g into a one-switch family --

    rho rises,  g*g' > 0  ->  r falls-then-rises (DownUp family)
    rho falls,  g*g' > 0  ->  r rises-then-falls (UpDown family)
    rho rises,  g*g' < 0  ->  r rises-then-falls
    rho falls,  g*g' < 0  ->  r falls-then-rises

-- with the switch sitting on the flat [c, d] where rho-tilde vanishes.
rho-tilde's own direction matches rho's when g*g' > 0 and mirrors it when
g*g' < 0.  check_pair measures all of this on a concrete pair and compares
observation against prediction.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from enum import Enum

from .intervals import Interval
from .patterns import (MicSet, NonInterval, Pattern, PatternKind, Unclassifiable,
                       detect_mics, detect_pattern, level0_set)
from .ratio import (FunctionPair, SampleTable, make_pair, median_abs, mirrored,
                    negated, ratio_at, rho_at, rho_tilde_at, sample_table)


class Direction(str, Enum):
    UP = "Up"
    DOWN = "Down"


class Family(str, Enum):
    DOWN_UP = "DownUp"
    UP_DOWN = "UpDown"

    def mirrored(self) -> "Family":
        return Family.UP_DOWN if self is Family.DOWN_UP else Family.DOWN_UP


def predict_r_family(rho_dir: Direction, sign_gg: int) -> Family:
    """Predicted one-switch family of r from rho's direction and sign(gg')."""
    if (rho_dir is Direction.UP) == (sign_gg > 0):
        return Family.DOWN_UP
    return Family.UP_DOWN


def predict_rho_tilde_dir(rho_dir: Direction, sign_gg: int) -> Direction:
    """rho-tilde runs with rho when g*g' > 0, against it when g*g' < 0."""
    if sign_gg > 0:
        return rho_dir
    return Direction.DOWN if rho_dir is Direction.UP else Direction.UP


@dataclass(frozen=True)
class RuleRow:
    rho_dir: Direction
    sign_gg: int
    r_family: Family
    rho_tilde_dir: Direction


RULE_ROWS: tuple[RuleRow, ...] = tuple(
    RuleRow(d, s, predict_r_family(d, s), predict_rho_tilde_dir(d, s))
    for d, s in ((Direction.UP, 1), (Direction.DOWN, 1),
                 (Direction.UP, -1), (Direction.DOWN, -1)))


# membership: the composite kind plus its degenerate placements
_FAMILY_KINDS = {
    Family.DOWN_UP: (PatternKind.DOWN_UP, PatternKind.INCREASING,
                     PatternKind.DECREASING, PatternKind.CONSTANT),
    Family.UP_DOWN: (PatternKind.UP_DOWN, PatternKind.INCREASING,
                     PatternKind.DECREASING, PatternKind.CONSTANT),
}


@dataclass(frozen=True)
class Tolerances:
    """Every tolerance the pipeline uses, echoed into reports.

    tol_flat is deliberately much tighter than tol_zero: a ratio leaves
    its constancy value quadratically, so a detected flat edge moves like
    sqrt(tolerance), and localizing endpoints to ~1e-3 needs a flatness
    band around 1e-9.  The quantities are constant to ~1e-12 relative on
    true flats, leaving three orders of headroom.
    """

    tol_zero: float = 1e-7        # zero band of rho-tilde, relative to median
    tol_flat: float = 1e-9        # constancy band for m.i.c. detection
    min_ic_steps: float = 3.0     # shortest constancy run, in grid steps
    switch_tol: float = 1e-3      # switch vs level-0 endpoint agreement, in x
    mic_match_steps: float = 2.0  # r-mic vs rho-mic agreement, in grid steps
    residual_tol: float = 1e-6    # r - (K1 + C/g) residual on rho's flats
    c_tol: float = 1e-6           # |C| below this counts as zero
    fd_shrink: float = 16.0       # sign-check FD step = grid step / fd_shrink

    def as_dict(self) -> dict:
        return {
            "tol_zero": self.tol_zero,
            "tol_flat": self.tol_flat,
            "min_ic_steps": self.min_ic_steps,
            "switch_tol": self.switch_tol,
            "mic_match_steps": self.mic_match_steps,
            "residual_tol": self.residual_tol,
            "c_tol": self.c_tol,
            "fd_shrink": self.fd_shrink,
        }


@dataclass(frozen=True)
class MicFit:
    """Least-squares fit of r = K1 + C/g on one constancy interval of rho."""

    interval: Interval
    k1: float
    c: float
    residual: float
    is_r_mic: bool


@dataclass(frozen=True)
class AnalysisReport:
    f_label: str
    g_label: str
    window: Interval
    grid_n: int
    sign_gg: int
    rho_pattern: Pattern | None
    rho_dir: Direction | None
    constant_rho: bool
    predicted_family: Family | None
    predicted_rho_tilde_dir: Direction | None
    observed_pattern: Pattern | None
    rho_tilde_pattern: Pattern | None
    level0: Interval | None
    mics_r: MicSet
    mics_rho: MicSet
    mics_rho_tilde: MicSet
    mic_fits: tuple[MicFit, ...]
    prop1_ok: bool
    prop2_ok: bool
    uniqueness_ok: bool
    sign_identity_ok: bool
    sign_violations: int
    failure: str | None
    tolerances: Tolerances

    @property
    def all_ok(self) -> bool:
        return (self.failure is None and self.prop1_ok and self.prop2_ok
                and self.uniqueness_ok and self.sign_identity_ok)

    def to_dict(self) -> dict:
        def iv(interval: Interval | None):
            return None if interval is None else [interval.lo, interval.hi]

        def mics(mic_set: MicSet):
            return [[m.lo, m.hi] for m in mic_set]

        return {
            "pair": {"f": self.f_label, "g": self.g_label},
            "window": [self.window.lo, self.window.hi],
            "grid_n": self.grid_n,
            "sign_gg": self.sign_gg,
            "rho_pattern": self.rho_pattern.kind.value if self.rho_pattern else None,
            "constant_rho": self.constant_rho,
            "predicted_family": self.predicted_family.value if self.predicted_family else None,
            "predicted_rho_tilde": (self.predicted_rho_tilde_dir.value
                                    if self.predicted_rho_tilde_dir else None),
            "observed_pattern": self.observed_pattern.kind.value if self.observed_pattern else None,
            "rho_tilde_pattern": self.rho_tilde_pattern.kind.value if self.rho_tilde_pattern else None,
            "switch": iv(self.observed_pattern.switch) if self.observed_pattern else None,
            "level0": iv(self.level0),
            "mics": {
                "r": mics(self.mics_r),
                "rho": mics(self.mics_rho),
                "rho_tilde": mics(self.mics_rho_tilde),
            },
            "checks": {
                "prop1": self.prop1_ok,
                "prop2": self.prop2_ok,
                "uniqueness": self.uniqueness_ok,
                "sign_identity": self.sign_identity_ok,
            },
            "sign_violations": self.sign_violations,
            "failure": self.failure,
            "tolerances": self.tolerances.as_dict(),
        }


def _check_prop1(observed: Pattern | None, family: Family | None,
                 constant_rho: bool, level0: Interval | None,
                 switch_tol: float) -> bool:
    if observed is None or family is None:
        return False
    kind = observed.kind
    if kind not in _FAMILY_KINDS[family]:
        return False
    if constant_rho and kind in (PatternKind.DOWN_UP, PatternKind.UP_DOWN):
        # constant rho makes r = K1 + C/g, which is monotone or constant
        return False
    if level0 is None:
        return kind in (PatternKind.INCREASING, PatternKind.DECREASING)
    switch = observed.switch
    return (abs(switch.lo - level0.lo) <= switch_tol
            and abs(switch.hi - level0.hi) <= switch_tol)


def _fit_on_interval(table: SampleTable, interval: Interval) -> tuple[float, float, float] | None:
    """Fit r = K1 + C/g over the samples inside the interval; returns
    (K1, C, max residual) or None if too few samples land inside."""
    idx = [i for i, x in enumerate(table.xs) if interval.lo <= x <= interval.hi]
    if len(idx) < 4:
        return None
    k1 = statistics.median(table.rho[i] for i in idx)
    errors = [table.r[i] - k1 for i in idx]
    weights = [1.0 / table.g_values[i] for i in idx]
    denom = sum(w * w for w in weights)
    c = sum(e * w for e, w in zip(errors, weights)) / denom
    residual = max(abs(e - c * w) for e, w in zip(errors, weights))
    return k1, c, residual


def _check_prop2(table: SampleTable, mics_r: MicSet, mics_rho: MicSet,
                 tol: Tolerances) -> tuple[bool, tuple[MicFit, ...]]:
    """r's constancy interval (if any) must coincide with one of rho's, and
    on every flat of rho, r = K1 + C/g must hold with C vanishing exactly
    on the flat that is r's constancy interval."""
    match_tol = tol.mic_match_steps * table.step
    mic_r = mics_r[0] if len(mics_r) == 1 else None
    ok = len(mics_r) <= 1
    fits = []
    matched = False
    for j in mics_rho:
        fit = _fit_on_interval(table, j)
        if fit is None:
            continue
        k1, c, residual = fit
        scale = 1.0 + median_abs([table.r[i] for i, x in enumerate(table.xs)
                                  if j.lo <= x <= j.hi])
        is_r_mic = (mic_r is not None
                    and abs(j.lo - mic_r.lo) <= match_tol
                    and abs(j.hi - mic_r.hi) <= match_tol)
        matched = matched or is_r_mic
        fits.append(MicFit(j, k1, c, residual, is_r_mic))
        if residual > tol.residual_tol * scale:
            ok = False
        if is_r_mic != (abs(c) <= tol.c_tol * scale):
            ok = False
    if mic_r is not None and not matched:
        ok = False
    return ok, tuple(fits)


def _check_sign_identity(pair: FunctionPair, table: SampleTable, tol_abs: float,
                         fd_step: float) -> tuple[bool, int]:
    """sign(r') = sign(rho-tilde) wherever rho-tilde is clear of zero; r' is
    probed by a central finite difference with a step well below the grid
    spacing, so curvature near a crossing cannot flip the compared sign."""
    violations = 0
    for x, rt in zip(table.xs, table.rho_tilde):
        if abs(rt) <= tol_abs:
            continue
        fd = (ratio_at(pair, x + fd_step) - ratio_at(pair, x - fd_step)) / (2.0 * fd_step)
        if fd == 0.0 or (fd > 0.0) != (rt > 0.0):
            violations += 1
    return violations == 0, violations


def check_pair(pair: FunctionPair, tol: Tolerances | None = None) -> AnalysisReport:
    """Run the full analysis pipeline on a validated pair.

    Requires rho monotone on the window; if it is not, the report carries
    the failure and every check flag stays False.  A failed check is never
    silently passed; the report records exactly what was measured.
    """
    tol = tol or Tolerances()
    table = sample_table(pair, pair.grid_n)
    xs = table.xs
    step = table.step
    window = pair.window
    failure = None

    tol_rho = tol.tol_zero * (1.0 + median_abs(table.rho))
    tol_rt = tol.tol_zero * (1.0 + median_abs(table.rho_tilde))
    min_ic_len = tol.min_ic_steps * step

    rho_pattern = None
    try:
        rho_pattern = detect_pattern(list(zip(xs, table.rho)), tol_rho,
                                     mode="diffs", window=window)
    except Unclassifiable as err:
        failure = f"rho unclassifiable: {err}"

    constant_rho = rho_pattern is not None and rho_pattern.kind is PatternKind.CONSTANT
    if rho_pattern is not None and rho_pattern.kind in (
            PatternKind.INCREASING, PatternKind.CONSTANT):
        rho_dir = Direction.UP  # a constant rho counts as both; Up + flag
    elif rho_pattern is not None and rho_pattern.kind is PatternKind.DECREASING:
        rho_dir = Direction.DOWN
    else:
        rho_dir = None
        failure = failure or "rho is not monotone on the window"

    predicted_family = predicted_rt_dir = None
    if rho_dir is not None:
        predicted_family = predict_r_family(rho_dir, pair.sign_gg)
        predicted_rt_dir = predict_rho_tilde_dir(rho_dir, pair.sign_gg)

    observed = rt_pattern = None
    try:
        observed = detect_pattern(list(zip(xs, table.rho_tilde)), tol_rt,
                                  mode="values", window=window,
                                  probe=lambda t: rho_tilde_at(pair, t))
    except Unclassifiable as err:
        failure = failure or f"r pattern unclassifiable from rho-tilde signs: {err}"
    try:
        rt_pattern = detect_pattern(list(zip(xs, table.rho_tilde)), tol_rt,
                                    mode="diffs", window=window)
    except Unclassifiable as err:
        failure = failure or f"rho-tilde unclassifiable: {err}"

    level0 = None
    try:
        level0 = level0_set(pair, tol.tol_zero, _table=table)
    except NonInterval as err:
        failure = failure or str(err)

    mics_r = detect_mics(list(zip(xs, table.r)), tol.tol_flat, min_ic_len,
                         probe=lambda t: ratio_at(pair, t))
    mics_rho = detect_mics(list(zip(xs, table.rho)), tol.tol_flat, min_ic_len,
                           probe=lambda t: rho_at(pair, t))
    mics_rt = detect_mics(list(zip(xs, table.rho_tilde)), tol.tol_flat, min_ic_len,
                          probe=lambda t: rho_tilde_at(pair, t))

    prop1 = failure is None and _check_prop1(observed, predicted_family,
                                             constant_rho, level0, tol.switch_tol)
    prop2, fits = _check_prop2(table, mics_r, mics_rho, tol)
    prop2 = prop2 and failure is None
    uniqueness = len(mics_r) <= 1
    sign_ok, violations = _check_sign_identity(pair, table, tol_rt,
                                               step / tol.fd_shrink)

    return AnalysisReport(
        f_label=getattr(pair.f, "label", "f"),
        g_label=getattr(pair.g, "label", "g"),
        window=window,
        grid_n=pair.grid_n,
        sign_gg=pair.sign_gg,
        rho_pattern=rho_pattern,
        rho_dir=rho_dir,
        constant_rho=constant_rho,
        predicted_family=predicted_family,
        predicted_rho_tilde_dir=predicted_rt_dir,
        observed_pattern=observed,
        rho_tilde_pattern=rt_pattern,
        level0=level0,
        mics_r=mics_r,
        mics_rho=mics_rho,
        mics_rho_tilde=mics_rt,
        mic_fits=fits,
        prop1_ok=prop1,
        prop2_ok=prop2,
        uniqueness_ok=uniqueness,
        sign_identity_ok=sign_ok,
        sign_violations=violations,
        failure=failure,
        tolerances=tol,
    )


def reflect(pair: FunctionPair, axis: str) -> FunctionPair:
    """Reflect a pair vertically (f -> -f) or horizontally (x -> -x, window
    mirrored).  The result is re-validated from scratch."""
    if axis == "vertical":
        return make_pair(negated(pair.f), pair.g, pair.window, pair.grid_n)
    if axis == "horizontal":
        return make_pair(mirrored(pair.f), mirrored(pair.g),
                         pair.window.mirrored(), pair.grid_n)
    raise ValueError(f"axis must be 'vertical' or 'horizontal', got {axis!r}")
