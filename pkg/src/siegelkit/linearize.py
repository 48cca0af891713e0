"""Formal linearization of indifferent germs and conformal-radius estimators.

The linearizing series phi(z) = z + sum a_n z^n solves phi(rho z) = f(phi(z))
coefficient by coefficient: (rho^n - rho) a_n equals a polynomial in the
earlier coefficients.  The divisor rho^n - rho vanishes exactly when the
multiplier is a root of unity of order dividing n-1; everything downstream
(pole probes, radius estimators) watches that divisor.

Two radius estimators are provided.  The Cauchy-Hadamard regression is an
upper-side indicator only (the series may converge beyond the disk the germ
owns); the escape estimator brackets the radius from both sides and its
verdicts are tolerance-stamped, never absolute.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import series
from .errors import (
    DomainError,
    OverflowGuard,
    RadiusTooLarge,
    SmallDivisorBlowup,
)
from .germs import Germ, GermFamily, alpha_frac_float
from .surd import ExactReal, floor_exact, to_float

__all__ = [
    "LinearizationSeries",
    "RadiusEstimate",
    "EscapeParams",
    "linearization_coeffs",
    "compose_check",
    "pole_cancellation_probe",
    "hadamard_radius",
    "escape_radius",
    "boundary_derivative_norms",
]

TWO_PI_I = 2j * math.pi

DIVISOR_FLOOR = 1e-13     # below this, rho^n - rho is treated as exactly zero
NUMERATOR_FLOOR = 1e-12   # |P| above this over a zero divisor is a genuine pole
MAG_CAP = 1e250


@dataclass
class LinearizationSeries:
    """Coefficients a_1..a_N (a[0] unused, a_1 = 1) plus divisor diagnostics."""

    alpha: Union[ExactReal, float]
    a: np.ndarray
    small_divisor_log: np.ndarray     # log |rho^n - rho| per index (-inf at poles)
    numerators: np.ndarray            # |P_{b,n}| per index, for pole probes

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def coeff_array(self) -> np.ndarray:
        """Series array [0, 1, a_2, ..., a_N] suitable for evaluation."""
        out = self.a.copy()
        out[0] = 0.0
        return out


@dataclass
class RadiusEstimate:
    lower: float
    upper: float
    method: str
    params: Dict[str, float] = field(default_factory=dict)
    diagnostics: str = ""


def _rational_parts(alpha) -> Optional[Tuple[int, int]]:
    """(p, q) when alpha is exactly rational, else None."""
    if isinstance(alpha, int):
        return alpha, 1
    if isinstance(alpha, Fraction):
        return alpha.numerator, alpha.denominator
    return None


def _divisor(alpha, n: int) -> complex:
    """rho^n - rho = rho (e^{2 pi i (n-1) alpha} - 1) with the phase reduced
    exactly before leaving exact arithmetic (small divisors need the care)."""
    if isinstance(alpha, float):
        m = ((n - 1) * alpha) % 1.0
        rho = cmath.exp(TWO_PI_I * (alpha % 1.0))
    else:
        x = (n - 1) * alpha
        m = to_float(x - floor_exact(x))
        rho = cmath.exp(TWO_PI_I * alpha_frac_float(alpha))
    # e^{i theta} - 1 = 2 i sin(theta/2) e^{i theta/2}
    half = math.pi * m
    return rho * (2j * math.sin(half) * cmath.exp(1j * half))


def linearization_coeffs(g: Germ, N: int, allow_rational: bool = False,
                         divisor_floor: float = DIVISOR_FLOOR,
                         mag_cap: float = MAG_CAP,
                         on_failure: str = "raise") -> LinearizationSeries:
    """Solve the linearization recursion up to order N.

    For exactly rational alpha = p/q the divisor vanishes exactly at every
    n > 1 with q | (n-1); those indices either cancel (numerator below floor,
    coefficient set to 0, any value solves the equation) or raise
    :class:`SmallDivisorBlowup`.  Rational handles must opt in via
    ``allow_rational`` since blowup is then expected.

    ``on_failure="truncate"`` returns the partial series up to (not including)
    the first pole or overflow index instead of raising; the escape estimator
    feeds on such partial series at non-linearizable parameters, where the
    conjugacy residual then enforces the order-(q+1) mismatch.
    """
    if on_failure not in ("raise", "truncate"):
        raise DomainError("on_failure must be 'raise' or 'truncate'")
    pq = None if isinstance(g.alpha, float) else _rational_parts(g.alpha)
    if pq is not None and not allow_rational:
        raise DomainError("rational alpha: pass allow_rational=True to accept poles")
    M = g.order
    b = np.zeros(M + 1, dtype=np.complex128)
    b[2:] = g.coeffs
    a = np.zeros(N + 1, dtype=np.complex128)
    a[1] = 1.0
    sdlog = np.full(N + 1, np.nan)
    numer = np.zeros(N + 1)
    # pow_tab[m, n] = [z^n] (sum a_i z^i)^m, filled column by column
    mm = min(M, N)
    pow_tab = np.zeros((mm + 1, N + 1), dtype=np.complex128)
    if mm >= 1:
        pow_tab[1, 1] = 1.0
    for n in range(2, N + 1):
        if mm >= 2:
            top = min(mm, n)
            # [z^n] phi^m = sum_j a_j [z^{n-j}] phi^{m-1}
            block = pow_tab[1:top, n - 1:0:-1]
            pow_tab[2:top + 1, n] = np.einsum(
                "ij,j->i", block, a[1:n], optimize=False)
        Pn = complex(np.einsum("i,i->", b[2:mm + 1], pow_tab[2:mm + 1, n],
                               optimize=False)) if mm >= 2 else 0.0
        numer[n] = abs(Pn)
        div = _divisor(g.alpha, n)
        exact_zero = (pq is not None and (n - 1) % pq[1] == 0) or abs(div) < divisor_floor
        if exact_zero:
            sdlog[n] = -math.inf
            if abs(Pn) > NUMERATOR_FLOOR:
                if on_failure == "truncate":
                    return LinearizationSeries(
                        alpha=g.alpha, a=a[:n], small_divisor_log=sdlog[:n],
                        numerators=numer[:n])
                raise SmallDivisorBlowup(
                    f"pole at n={n}: divisor 0, |P|={abs(Pn):.3e}")
            a[n] = 0.0
        else:
            sdlog[n] = math.log(abs(div))
            a[n] = Pn / div
            if abs(a[n]) > mag_cap:
                if on_failure == "truncate":
                    return LinearizationSeries(
                        alpha=g.alpha, a=a[:n], small_divisor_log=sdlog[:n],
                        numerators=numer[:n])
                raise OverflowGuard(f"|a_{n}| = {abs(a[n]):.3e} exceeds cap")
        if mm >= 1 and n <= N:
            pow_tab[1, n] = a[n]
    return LinearizationSeries(alpha=g.alpha, a=a, small_divisor_log=sdlog,
                               numerators=numer)


def compose_check(g: Germ, phi: LinearizationSeries, N: Optional[int] = None) -> float:
    """max_n |[z^n](phi o R_alpha - f o phi)| via truncated composition."""
    if N is None:
        N = phi.order
    N = min(N, phi.order)
    coeffs = series.trim(phi.coeff_array(), N)
    rho_pows = np.empty(N + 1, dtype=np.complex128)
    for n in range(N + 1):
        if isinstance(g.alpha, float):
            m = (n * g.alpha) % 1.0
        else:
            x = n * g.alpha
            m = to_float(x - floor_exact(x))
        rho_pows[n] = cmath.exp(TWO_PI_I * m)
    lhs = coeffs * rho_pows
    rhs = series.compose(series.trim(g.full_coeffs(), N), coeffs, N)
    return float(np.max(np.abs(lhs - rhs)))


def pole_cancellation_probe(fam: GermFamily, p: int, q: int, n: int,
                            approach_seq: Optional[Sequence[Fraction]] = None,
                            order: Optional[int] = None) -> dict:
    """Track |P_{b,n}| along alpha = p/q + eps for shrinking exact eps.

    A vanishing limit certifies cancellation (the family linearizes at p/q at
    this index, degenerate-type behaviour); a nonzero limit is a pole and the
    matching a_n blows up like 1/|rho^n - rho|.
    """
    if n < 2 or (n - 1) % q != 0:
        raise DomainError("need n >= 2 with q | (n - 1)")
    if approach_seq is None:
        approach_seq = [Fraction(1, 10 ** j) for j in range(1, 9)]
    base = Fraction(p, q)
    ord_n = order or max(n, 8)
    rows = []
    for eps in approach_seq:
        alpha = base + Fraction(eps)
        germ = fam.at(alpha, ord_n)
        lin = linearization_coeffs(germ, n, allow_rational=True)
        rows.append({
            "eps": float(eps),
            "alpha": str(alpha),
            "P_abs": float(lin.numerators[n]),
            "a_abs": float(abs(lin.a[n])),
            "divisor_abs": float(math.exp(lin.small_divisor_log[n]))
            if math.isfinite(lin.small_divisor_log[n]) else 0.0,
        })
    first, last = rows[0]["P_abs"], rows[-1]["P_abs"]
    scale = max(first, 1e-30)
    verdict = "cancellation" if last < 1e-3 * scale or last < 1e-12 else "pole"
    return {"p": p, "q": q, "n": n, "rows": rows, "verdict": verdict}


def hadamard_radius(phi: LinearizationSeries, window: int = 128) -> RadiusEstimate:
    """1 / limsup |a_n|^{1/n} by regressing log|a_n| over the trailing window.

    Upper-side indicator for the restricted germ's radius; the series may
    converge beyond it, which the diagnostics spell out.  An all-zero window
    (rotation case) reports upper = +inf instead of raising.
    """
    N = phi.order
    if window < 16 or N < window:
        raise DomainError("need N >= window >= 16")
    idx = np.arange(N - window + 1, N + 1)
    mags = np.abs(phi.a[idx])
    mask = mags > 0
    if int(mask.sum()) < max(8, window // 8):
        return RadiusEstimate(lower=0.0, upper=math.inf, method="hadamard",
                              params={"window": window},
                              diagnostics="degenerate-window: too few nonzero coefficients")
    x = idx[mask].astype(np.float64)
    y = np.log(mags[mask])
    # closed-form least squares (keeps the estimate bit-reproducible)
    xm, ym = x.mean(), y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    radius = math.exp(-slope)
    return RadiusEstimate(lower=0.0, upper=radius, method="hadamard",
                          params={"window": window},
                          diagnostics="upper-side indicator; the formal series "
                                      "can converge beyond the germ's own disk")


@dataclass(frozen=True)
class EscapeParams:
    max_iter: int = 10_000
    circle_samples: int = 64
    bisect_tol: float = 1e-3
    residual_tol: float = 1e-8
    cap: float = 0.999999


def _orbit_stays(g: Germ, w: np.ndarray, max_iter: int) -> bool:
    coeffs = g.full_coeffs()
    if np.max(np.abs(w)) >= 1.0:
        return False
    for _ in range(max_iter):
        w = series.polyval_vec(coeffs, w)
        if np.max(np.abs(w)) >= 1.0:
            return False
    return True


def escape_radius(g: Germ, phi: Optional[LinearizationSeries],
                  params: EscapeParams = EscapeParams()) -> RadiusEstimate:
    """Bisection bracket of the largest radius that looks linearizable.

    VALID(rho) requires the truncated conjugacy residual on |z| = rho to stay
    below ``residual_tol`` and every orbit started from phi(rho * samples) to
    stay in the unit disk for ``max_iter`` steps.  With ``phi=None`` (the
    identity chart, e.g. at rationals where no series exists) only the orbit
    condition applies and the bracket reads as an in-disk escape radius.
    """
    S = params.circle_samples
    ring = np.exp(TWO_PI_I * np.arange(S) / S)
    rho_mult = g.multiplier()
    phi_arr = None if phi is None else phi.coeff_array()

    def valid(r: float) -> bool:
        z = r * ring
        if phi_arr is None:
            w = z
        else:
            w = series.polyval_vec(phi_arr, z)
            fz = series.polyval_vec(phi_arr, rho_mult * z)
            if np.max(np.abs(w)) >= 1.0:
                return False
            resid = np.max(np.abs(fz - series.polyval_vec(g.full_coeffs(), w)))
            if resid >= params.residual_tol:
                return False
        return _orbit_stays(g, w, params.max_iter)

    hi = params.cap
    if valid(hi):
        return RadiusEstimate(lower=hi, upper=1.0, method="escape",
                              params=_escape_params_dict(params),
                              diagnostics="valid up to the cap")
    lo = 0.0
    while hi - lo > params.bisect_tol:
        mid = 0.5 * (lo + hi)
        if valid(mid):
            lo = mid
        else:
            hi = mid
    diag = "bracket from bisection"
    if lo == 0.0:
        diag = "NoValidRadius: non-linearizable at tolerance"
    return RadiusEstimate(lower=lo, upper=hi, method="escape",
                          params=_escape_params_dict(params), diagnostics=diag)


def _escape_params_dict(p: EscapeParams) -> Dict[str, float]:
    return {"max_iter": p.max_iter, "circle_samples": p.circle_samples,
            "bisect_tol": p.bisect_tol, "residual_tol": p.residual_tol}


def boundary_derivative_norms(phi: LinearizationSeries, rho: float, order: int,
                              samples: int = 256) -> List[float]:
    """sup_{|z| = rho} |phi^{(j)}(z)| for j = 0..order, by circle sampling.

    Refuses radii where the stored truncation visibly has not converged.
    """
    coeffs = phi.coeff_array()
    N = phi.order
    top = abs(coeffs[N]) * rho ** N
    scale = max(1.0, float(np.max(np.abs(coeffs[: N // 2 + 1])) * rho ** 2))
    if not math.isfinite(top) or top > 1e-8 * scale:
        raise RadiusTooLarge(f"tail term |a_N| rho^N = {top:.3e} too large at rho = {rho}")
    ring = rho * np.exp(TWO_PI_I * np.arange(samples) / samples)
    out = []
    cur = coeffs
    for _ in range(order + 1):
        out.append(float(np.max(np.abs(series.polyval_vec(cur, ring)))))
        cur = series.derivative(cur)
    return out
