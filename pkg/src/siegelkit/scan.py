"""Parameter-space experiments: radius scans, quantitative probes, and the
inductive smooth-boundary construction driver.

Scan grids hold exact values only (rationals or quadratic irrationals); the
float column of every row is derived from the exact text.  Rows are pure
functions of (family, alpha, params), so worker processes can compute them in
any arrangement and the merged output stays bit-identical.

The construction driver substitutes numerical radius estimates for the exact
conformal radius, so each stage emits machine-checkable certificates (interval
nesting and lengths in exact rational arithmetic, measured derivative gaps
against their 2^-(n+j) ladder) instead of asserting the limit theorem.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bounds import ConstantConfig, DEFAULT_CONFIG, const_C, const_Cprime, is_bounded_type
from .cf import (
    LONG_FORM,
    SHORT_FORM,
    cf_of_exact,
    cf_of_rational,
    format_exact,
    special_sequence_main,
)
from .errors import (
    FamilyUnsuitable,
    OverflowGuard,
    SiegelError,
    SmallDivisorBlowup,
    StageFailed,
    TargetAboveRadius,
)
from .germs import GermFamily
from .linearize import (
    EscapeParams,
    LinearizationSeries,
    RadiusEstimate,
    escape_radius,
    hadamard_radius,
    linearization_coeffs,
)
from .surd import ExactReal, exact_cmp, floor_exact, to_float

__all__ = [
    "ScanRow",
    "ScanParams",
    "ConstructionState",
    "scan_r",
    "radius_rows",
    "estimate_radius",
    "condition_bdd_search",
    "main_lemma_probe",
    "degenerate_probe",
    "smooth_disk_driver",
    "check_construction_invariants",
]


@dataclass(frozen=True)
class ScanRow:
    alpha_text: str
    alpha_float: float
    r_lower: float
    r_upper: float
    method: str
    iterations: int
    wall_time_ms: int


@dataclass(frozen=True)
class ScanParams:
    order: int = 64                 # germ truncation
    lin_order: int = 128            # linearization truncation
    window: int = 64                # hadamard window
    escape: EscapeParams = EscapeParams()
    estimators: Tuple[str, ...] = ("escape",)
    measure_time: bool = False      # off by default: scan outputs are byte-stable


DEFAULT_SCAN = ScanParams()


def _phi_or_none(fam: GermFamily, alpha, p: ScanParams):
    """Germ plus its full linearization series, or the partial series up to
    the first pole/overflow (the residual test then rules at that parameter)."""
    germ = fam.at(alpha, p.order)
    try:
        phi = linearization_coeffs(germ, p.lin_order, allow_rational=True)
        full = True
    except (SmallDivisorBlowup, OverflowGuard):
        phi = linearization_coeffs(germ, p.lin_order, allow_rational=True,
                                   on_failure="truncate")
        full = False
    return germ, phi, full


def estimate_radius(fam: GermFamily, alpha: ExactReal,
                    p: ScanParams = DEFAULT_SCAN) -> RadiusEstimate:
    """Escape estimate through the (possibly partial) linearization chart."""
    germ, phi, _ = _phi_or_none(fam, alpha, p)
    return escape_radius(germ, phi, p.escape)


def radius_rows(fam: GermFamily, alpha: ExactReal,
                p: ScanParams = DEFAULT_SCAN) -> List[ScanRow]:
    """All estimator rows for one exact parameter; failures become row tags."""
    text = format_exact(alpha)
    afloat = to_float(alpha)
    t0 = time.monotonic()
    try:
        germ, phi, full = _phi_or_none(fam, alpha, p)
        prep_error = None
    except SiegelError as exc:
        prep_error = exc
    rows: List[ScanRow] = []
    for method in p.estimators:
        try:
            if prep_error is not None:
                raise prep_error
            if method == "escape":
                est = escape_radius(germ, phi, p.escape)
                iters = p.escape.max_iter
            elif method == "hadamard":
                if not full:
                    raise SmallDivisorBlowup("no full linearization series here")
                est = hadamard_radius(phi, p.window)
                iters = p.lin_order
            else:
                raise ValueError(f"unknown estimator {method!r}")
            lower, upper, tag = est.lower, est.upper, method
        except SiegelError as exc:
            lower, upper, tag, iters = 0.0, math.inf, f"{method}:error:{type(exc).__name__}", 0
        ms = int(1000 * (time.monotonic() - t0)) if p.measure_time else 0
        rows.append(ScanRow(alpha_text=text, alpha_float=afloat, r_lower=lower,
                            r_upper=upper, method=tag, iterations=iters,
                            wall_time_ms=ms))
    return rows


def _scan_chunk(args) -> List[ScanRow]:
    fam, alphas, p = args
    out: List[ScanRow] = []
    for a in alphas:
        out.extend(radius_rows(fam, a, p))
    return out


def scan_r(fam: GermFamily, alphas: Sequence[ExactReal],
           p: ScanParams = DEFAULT_SCAN, workers: int = 1) -> List[ScanRow]:
    """One row per (alpha, estimator), ordered by input index then estimator.

    Row values do not depend on the worker count; chunks preserve order.
    """
    alphas = list(alphas)
    if workers <= 1 or len(alphas) <= 1:
        return _scan_chunk((fam, alphas, p))
    chunk = max(1, math.ceil(len(alphas) / (4 * workers)))
    tasks = [(fam, alphas[i:i + chunk], p) for i in range(0, len(alphas), chunk)]
    out: List[ScanRow] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for rows in pool.map(_scan_chunk, tasks):
            out.extend(rows)
    return out


# ---------------------------------------------------------------------------
# probes
# ---------------------------------------------------------------------------


def _nearest_fraction_below(alpha: ExactReal, qmax: int) -> Fraction:
    """Largest p/q < alpha with q <= qmax (exact arithmetic)."""
    best: Optional[Fraction] = None
    for q in range(1, qmax + 1):
        p = floor_exact(q * alpha)
        cand = Fraction(p, q)
        if exact_cmp(cand, alpha) >= 0:
            cand = Fraction(p - 1, q)
        if best is None or cand > best:
            best = cand
    return best


def condition_bdd_search(fam: GermFamily, alpha: ExactReal, rho: float,
                         qmax: int = 8, grid_points: int = 16,
                         seq_indices: Sequence[int] = (0, 1, 2, 3),
                         p: ScanParams = DEFAULT_SCAN,
                         K_est: float = 6.3,
                         cfg: ConstantConfig = DEFAULT_CONFIG) -> dict:
    """Left cut point c = grid-inf{x in [b, alpha] : r_est(x) >= rho} and the
    bounded-type sequence it emits, with the quantitative band both ways.

    b is the nearest fraction below alpha with denominator <= qmax (the
    strongest non-linearizability signal at desk scale); the cut is located at
    grid resolution and every emitted value is exact and bounded type.
    """
    r_alpha = estimate_radius(fam, alpha, p)
    if rho >= r_alpha.lower:
        raise TargetAboveRadius(f"rho = {rho} >= r_est.lower = {r_alpha.lower}")
    b = _nearest_fraction_below(alpha, qmax)
    r_b = estimate_radius(fam, b, p)
    if r_b.lower >= rho:
        return {"verdict": "FamilyLooksDegenerate",
                "b": str(b), "r_b_lower": r_b.lower, "rho": rho,
                "r_alpha_lower": r_alpha.lower, "cut": None, "sequence": []}
    # rational grid points (a close rational stand-in for alpha keeps the cut
    # point rational, so the quantitative band has a denominator to use)
    from .surd import bracket as _bracket
    alpha_lo = _bracket(alpha, 96)[0]
    gap = alpha_lo - b
    grid: List[ExactReal] = [b + gap * Fraction(j, grid_points)
                             for j in range(1, grid_points + 1)]
    grid.append(alpha)
    cut = None
    cut_r = None
    left_neighbor_r = r_b.lower
    for x in grid:
        est = estimate_radius(fam, x, p)
        if est.lower >= rho:
            cut, cut_r = x, est
            break
        left_neighbor_r = est.lower
    assert cut is not None  # alpha itself passes
    cf_c = cf_of_exact(cut)
    q_c = Fraction(cut).denominator if isinstance(cut, (int, Fraction)) else None
    if cf_c.is_finite:
        # choose the expansion variant whose special sequence sits below c
        for variant in (SHORT_FORM, LONG_FORM):
            cf_try = cf_of_rational(Fraction(cut), variant)
            if exact_cmp(special_sequence_main(cf_try, 0), cut) < 0:
                cf_c = cf_try
                break
    seq = []
    for n in seq_indices:
        idx = 2 * n if not cf_c.is_finite else n  # even indices approach from below
        val = special_sequence_main(cf_c, idx)
        est = estimate_radius(fam, val, p)
        e = cf_of_exact(val)
        bt_bound = max(list(e.partials) + list(e.period))
        seq.append({"n": idx, "alpha_text": format_exact(val),
                    "alpha_float": to_float(val),
                    "r_lower": est.lower, "r_upper": est.upper,
                    "bounded_type": bool(is_bounded_type(e, bt_bound)),
                    "bt_bound": bt_bound})
    cprime = const_Cprime(K_est, q_c, cfg) if q_c else None
    band = sorted([rho * math.exp(-cprime), rho]) if cprime else None
    return {
        "verdict": "ok",
        "rho": rho,
        "b": str(b),
        "r_b_lower": r_b.lower,
        "cut": format_exact(cut),
        "cut_float": to_float(cut),
        "cut_r_lower": cut_r.lower,
        "left_neighbor_r_lower": left_neighbor_r,
        "cut_denominator": q_c,
        "Cprime": cprime,
        "band_endpoints": band,  # printed both ways; orientation left open
        "sequence": seq,
    }


def main_lemma_probe(fam: GermFamily, pq: Fraction, variant: str, N: int,
                     K_est: float, p: ScanParams = DEFAULT_SCAN,
                     cfg: ConstantConfig = DEFAULT_CONFIG,
                     tail_window: int = 4) -> dict:
    """Radius estimates along the special sequence at a rational parameter.

    Reports the tail minimum against exp(-C(K, q)) and exp(-C'(K, q)) for the
    configured constants; a trend report, not a certified bound.
    """
    pq = Fraction(pq)
    cf = cf_of_rational(pq, variant)
    q = pq.denominator
    values = []
    for n in range(1, N + 1):
        a_n = special_sequence_main(cf, n)
        est = estimate_radius(fam, a_n, p)
        values.append({"n": n, "alpha_float": to_float(a_n),
                       "alpha_text": format_exact(a_n),
                       "r_lower": est.lower, "r_upper": est.upper})
    tail = values[-tail_window:]
    tail_min = min(v["r_lower"] for v in tail)
    return {
        "pq": str(pq), "q": q, "variant": variant,
        "values": values, "tail_min": tail_min,
        "bound_C": math.exp(-const_C(K_est, q, cfg)),
        "bound_Cprime": math.exp(-const_Cprime(K_est, q, cfg)),
        "weak_h_bound": math.log(10.0 * K_est * math.sqrt(2)) / (2 * math.pi),
        "K_est": K_est,
    }


def degenerate_probe(fam: GermFamily, t_samples: Sequence[ExactReal],
                     p: ScanParams = DEFAULT_SCAN,
                     spread_tol: float = 0.05) -> dict:
    """Relative spread of r_est over irrational parameters; small spread flags
    degenerate-type behaviour (the linearization domain ignores t)."""
    rows = []
    for t in t_samples:
        est = estimate_radius(fam, t, p)
        rows.append({"t": format_exact(t), "t_float": to_float(t),
                     "r_lower": est.lower, "r_upper": est.upper})
    lows = [r["r_lower"] for r in rows]
    mean = sum(lows) / len(lows)
    spread = (max(lows) - min(lows)) / mean if mean > 0 else math.inf
    return {"rows": rows, "spread": spread,
            "degenerate_flag": bool(spread < spread_tol), "spread_tol": spread_tol}


# ---------------------------------------------------------------------------
# smooth-boundary construction driver
# ---------------------------------------------------------------------------


@dataclass
class ConstructionState:
    stage: int
    theta: ExactReal
    rho: float                       # measured r_est(theta_n), stands in for rho_n
    rho_sched: float                 # scheduled target rho_n (strictly decreasing)
    rho_target: float                # the global target rho
    interval: Tuple[Fraction, Fraction]
    deriv_gaps: List[float]          # sup |phi_n^(j) - phi_{n-1}^(j)| on rho*closed disk
    thresholds: List[float]
    k_chosen: int
    diagnostics: str = ""


def _interval_around(theta: ExactReal, stage: int,
                     parent: Optional[Tuple[Fraction, Fraction]]) -> Tuple[Fraction, Fraction]:
    """Open rational interval around theta: length <= 2^-stage, inside the
    parent, closure off (1/stage) Z; width shrinks until all hold exactly."""
    w = Fraction(1, 2 ** (stage + 1))
    for _ in range(200):
        lo_f, hi_f = (theta - w), (theta + w)
        # rational endpoints bracketing theta strictly
        lo = _rational_below(lo_f)
        hi = _rational_above(hi_f)
        ok = (hi - lo) <= Fraction(1, 2 ** stage)
        if ok and parent is not None:
            ok = lo > parent[0] and hi < parent[1]
        if ok:
            mlo = floor_exact(lo * stage)
            mhi = floor_exact(hi * stage)
            ok = (mlo == mhi) and exact_cmp(Fraction(mlo, stage), lo) < 0 \
                and exact_cmp(Fraction(mhi + 1, stage), hi) > 0
        if ok and exact_cmp(lo, theta) < 0 and exact_cmp(theta, hi) < 0:
            return lo, hi
        w /= 2
    raise StageFailed("could not fit an interval certificate")


def _rational_below(x: ExactReal, bits: int = 80) -> Fraction:
    from .surd import bracket
    lo, _ = bracket(x, bits)
    return lo if exact_cmp(lo, x) < 0 else lo - Fraction(1, 2 ** bits)


def _rational_above(x: ExactReal, bits: int = 80) -> Fraction:
    from .surd import bracket
    _, hi = bracket(x, bits)
    return hi if exact_cmp(hi, x) > 0 else hi + Fraction(1, 2 ** bits)


def smooth_disk_driver(fam: GermFamily, theta0: ExactReal, rho_target: float,
                       stages: int, p: Optional[ScanParams] = None,
                       k_range: Sequence[int] = tuple(range(2, 13)),
                       cap_margin: float = 1e-3) -> List[ConstructionState]:
    """Inductive stand-in for the smooth-boundary construction.

    Stage n schedules a strictly decreasing target rho_n, picks theta_n from
    theta_{n-1}'s special sequence subject to the 2^-(n+j) derivative ladder
    on the closed target disk and to parent-interval membership, then pins
    theta_n inside an exact interval certificate.  The measured radius of
    theta_n stands in for rho_n (recorded, tolerance-stamped: the true dips
    along the special sequences shrink below any fixed estimator resolution,
    so nearness to the schedule is reported rather than gated).

    Raises :class:`FamilyUnsuitable` when the start radius already sits at
    the estimator's domain cap (rho tracking meaningless, the rotation-like
    degenerate case) and :class:`StageFailed` when no candidate passes.
    """
    if p is None:
        p = ScanParams(order=32, lin_order=256,
                       escape=EscapeParams(max_iter=10_000, circle_samples=32,
                                           bisect_tol=5e-4))
    est0 = estimate_radius(fam, theta0, p)
    if est0.lower >= p.escape.cap - cap_margin:
        raise FamilyUnsuitable(
            f"r_est(theta0) = {est0.lower} sits at the domain cap; "
            "radius tracking needs a non-degenerate family")
    if rho_target >= est0.lower:
        raise TargetAboveRadius(f"rho = {rho_target} >= r_est(theta0) = {est0.lower}")
    germ0, phi0, full0 = _phi_or_none(fam, theta0, p)
    if not full0:
        raise StageFailed("no full linearization series at theta0")
    states: List[ConstructionState] = []
    theta_prev, phi_prev, rho_prev = theta0, phi0, est0.lower
    interval_prev: Optional[Tuple[Fraction, Fraction]] = None
    for stage in range(1, stages + 1):
        rho_sched = rho_target + (est0.lower - rho_target) * 2.0 ** -stage
        cf_prev = cf_of_exact(theta_prev)
        thresholds = [2.0 ** -(stage + j) for j in range(stage + 1)]
        chosen = None
        diag_parts = []
        for k in k_range:
            cand = special_sequence_main(cf_prev, k)
            if interval_prev is not None and not (
                    exact_cmp(interval_prev[0], cand) < 0
                    and exact_cmp(cand, interval_prev[1]) < 0):
                diag_parts.append(f"k={k}: outside parent interval")
                continue
            germ_c, phi_c, full_c = _phi_or_none(fam, cand, p)
            if not full_c:
                diag_parts.append(f"k={k}: no full series")
                continue
            gaps = _deriv_gaps(phi_c, phi_prev, rho_target, stage)
            if any(g > t for g, t in zip(gaps, thresholds)):
                diag_parts.append(f"k={k}: ladder failed {gaps}")
                continue
            est = escape_radius(germ_c, phi_c, p.escape)
            if est.lower <= rho_target:
                diag_parts.append(f"k={k}: r {est.lower:.4f} at or below target")
                continue
            chosen = (k, cand, phi_c, est, gaps)
            break
        if chosen is None:
            raise StageFailed(f"stage {stage}: {'; '.join(diag_parts)}")
        k, theta_n, phi_n, est_n, gaps = chosen
        interval_n = _interval_around(theta_n, stage, interval_prev)
        states.append(ConstructionState(
            stage=stage, theta=theta_n, rho=est_n.lower, rho_sched=rho_sched,
            rho_target=rho_target, interval=interval_n, deriv_gaps=gaps,
            thresholds=thresholds, k_chosen=k,
            diagnostics=(f"k={k}; |r_est - rho_sched| = "
                         f"{abs(est_n.lower - rho_sched):.4f}; "
                         f"tried: {'; '.join(diag_parts) or 'none'}")))
        theta_prev, phi_prev, rho_prev, interval_prev = theta_n, phi_n, est_n.lower, interval_n
    return states


def _deriv_gaps(phi_new: LinearizationSeries, phi_old: LinearizationSeries,
                rho: float, stage: int, samples: int = 128) -> List[float]:
    """sup-norms of the j-th derivative differences on |z| = rho, j = 0..stage."""
    from . import series as _s
    n = min(phi_new.order, phi_old.order)
    diff = phi_new.coeff_array()[: n + 1] - phi_old.coeff_array()[: n + 1]
    ring = rho * np.exp(2j * math.pi * np.arange(samples) / samples)
    out = []
    cur = diff
    for _ in range(stage + 1):
        out.append(float(np.max(np.abs(_s.polyval_vec(cur, ring)))))
        cur = _s.derivative(cur)
    return out


def check_construction_invariants(states: Sequence[ConstructionState],
                                  rho_target: float) -> None:
    """Machine-check every stored certificate from the exact data; raises on
    violation.  Interval arithmetic is exact; gaps compare as floats."""
    prev_interval = None
    prev_sched = math.inf
    for st in states:
        lo, hi = st.interval
        if not (hi - lo) <= Fraction(1, 2 ** st.stage):
            raise AssertionError(f"stage {st.stage}: interval too long")
        if not (exact_cmp(lo, st.theta) < 0 and exact_cmp(st.theta, hi) < 0):
            raise AssertionError(f"stage {st.stage}: theta outside interval")
        if prev_interval is not None:
            if not (lo > prev_interval[0] and hi < prev_interval[1]):
                raise AssertionError(f"stage {st.stage}: not nested")
        mlo = floor_exact(lo * st.stage)
        mhi = floor_exact(hi * st.stage)
        if mlo != mhi or Fraction(mlo, st.stage) == lo or Fraction(mhi + 1, st.stage) == hi:
            raise AssertionError(f"stage {st.stage}: closure meets (1/n)Z")
        for j, (g, t) in enumerate(zip(st.deriv_gaps, st.thresholds)):
            if g > t:
                raise AssertionError(f"stage {st.stage}: gap j={j} {g} > {t}")
        if not st.rho > rho_target:
            raise AssertionError(f"stage {st.stage}: measured rho at or below target")
        if not rho_target < st.rho_sched < prev_sched:
            raise AssertionError(f"stage {st.stage}: schedule not strictly decreasing")
        prev_interval, prev_sched = st.interval, st.rho_sched
