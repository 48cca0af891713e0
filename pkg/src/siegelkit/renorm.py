"""Half-plane lift dynamics and direct sector renormalization.

Given a lift F with rotation number alpha and convergents p_{k-1}/q_{k-1},
p_k/q_k, the pair

    J = T^{-p_{k-1}} o F^{q_{k-1}}      (jump,  rotation number beta')
    H = T^{-p_k}     o F^{q_k}          (hop,   rotation number beta)

acts on a fundamental strip bounded by the vertical ray above i y0 and its
H-image.  The first-return map J-then-H-hops, read in the rescaled coordinate
lambda(Z) = (Z - i y0)/beta (conjugated when beta < 0), has rotation number
beta'/beta.  The conformal straightening is not built numerically: at the
measurement heights used here the glued surface is translation-like and the
lambda coordinate stands in for it, with the additive constant reported as an
estimate only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import ConstantConfig, DEFAULT_CONFIG
from .cf import cf_of_exact
from .errors import (
    BudgetExceeded,
    ConditionsNeverMet,
    DomainError,
    InsufficientDepth,
    NoAdmissibleHeight,
    UndefinedReturn,
)
from .germs import LiftMap
from .surd import ExactReal, exact_sign, to_float

__all__ = [
    "RenormSetup",
    "ReturnSample",
    "RenormReport",
    "HParams",
    "iterate_lift",
    "h_of_lift",
    "translation_lift",
    "build_HJ",
    "find_y0",
    "gluing_map_G",
    "return_map",
    "verify_single_pass",
    "extended_trace",
    "renormalized_rotation_number",
]

TWO_PI_I = 2j * math.pi
TAN_THETA = math.tan(math.asin(0.1))  # cone half-angle of the 1/10-conditions


def translation_lift(alpha: ExactReal) -> LiftMap:
    """The exact translation T_alpha as a lift (h = 0)."""
    return LiftMap(alpha=to_float(alpha), h_coeffs=np.zeros(0),
                   alpha_exact=None if isinstance(alpha, float) else alpha)


# ---------------------------------------------------------------------------
# orbit iteration and h(F)
# ---------------------------------------------------------------------------


def iterate_lift(F: LiftMap, Z: complex, steps: int,
                 keep_trace: bool = False) -> Tuple[complex, bool, Optional[List[complex]]]:
    """Iterate while the orbit stays in the upper half-plane.

    The real part is reduced mod 1 (F commutes with the unit translation),
    which keeps the exponential evaluation accurate on long orbits.
    """
    if Z.imag <= 0:
        raise DomainError("start in the open upper half-plane")
    trace = [Z] if keep_trace else None
    for _ in range(steps):
        Z = F(complex(Z.real % 1.0, Z.imag))
        if keep_trace:
            trace.append(Z)
        if Z.imag <= 0:
            return Z, True, trace
    return Z, False, trace


@dataclass(frozen=True)
class HParams:
    max_iter: int = 10_000
    re_samples: int = 16
    im_bisect: float = 0.01
    ceiling: float = 6.0


def _heights_admissible(F: LiftMap, h: float, p: HParams) -> bool:
    full = np.zeros(len(F.h_coeffs) + 1, dtype=np.complex128)
    full[1:] = F.h_coeffs
    from . import series as _s
    Z = np.arange(p.re_samples) / p.re_samples + 1j * h
    for _ in range(p.max_iter):
        Z = Z - np.floor(Z.real)
        w = np.exp(TWO_PI_I * Z)
        Z = Z + F.alpha + _s.polyval_vec(full, w)
        if float(np.min(Z.imag)) <= 0.0:
            return False
    return True


def h_of_lift(F: LiftMap, params: HParams = HParams()) -> float:
    """Smallest sampled admissible height (an upper-flavored estimate of h(F)).

    A height is admissible when every orbit started on a Re-grid at that
    height stays in the half-plane for ``max_iter`` steps; escape can only be
    detected, never undone, so estimates shrink as budgets shrink.
    """
    if len(F.h_coeffs) == 0 or not np.any(F.h_coeffs):
        return 0.0  # exact translation: every height is admissible
    hi = max(4 * params.im_bisect, 0.05)
    while not _heights_admissible(F, hi, params):
        hi *= 2.0
        if hi > params.ceiling:
            raise NoAdmissibleHeight(f"no admissible height below {params.ceiling}")
    lo = 0.0
    while hi - lo > params.im_bisect:
        mid = 0.5 * (lo + hi)
        if _heights_admissible(F, mid, params):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# renormalization setup
# ---------------------------------------------------------------------------


@dataclass
class RenormSetup:
    """Hop/jump pair of order k+1 with exact rotation-number bookkeeping."""

    F: LiftMap
    k: int
    p_prev: int
    q_prev: int
    p_k: int
    q_k: int
    beta_exact: ExactReal
    beta_prime_exact: ExactReal
    beta: float
    beta_prime: float
    y0: Optional[float] = None
    y0_analytic: Optional[float] = None

    # -- exact facts ---------------------------------------------------------

    def expected_alpha_prime(self) -> float:
        """beta'/beta, exactly = -[a_{k+1}; a_{k+2}, ...]."""
        return to_float(self.beta_prime_exact / self.beta_exact)

    # -- evaluators ----------------------------------------------------------

    def H(self, Z: complex) -> complex:
        for _ in range(self.q_k):
            Z = self.F(Z)
        return Z - self.p_k

    def J(self, Z: complex) -> complex:
        for _ in range(self.q_prev):
            Z = self.F(Z)
        return Z - self.p_prev

    def _with_deriv(self, Z: complex, q: int, p: int) -> Tuple[complex, complex]:
        der = 1.0 + 0j
        for _ in range(q):
            Z, d = self.F.with_derivative(Z)
            der *= d
        return Z - p, der

    def H_with_deriv(self, Z: complex) -> Tuple[complex, complex]:
        return self._with_deriv(Z, self.q_k, self.p_k)

    def J_with_deriv(self, Z: complex) -> Tuple[complex, complex]:
        return self._with_deriv(Z, self.q_prev, self.p_prev)

    # -- rescaled coordinate --------------------------------------------------

    def lam(self, Z: complex) -> complex:
        if self.y0 is None:
            raise DomainError("y0 not set")
        W = Z - 1j * self.y0
        if self.beta < 0:
            W = W.conjugate()
        return W / self.beta

    def lam_inv(self, W: complex) -> complex:
        Z = W * self.beta
        if self.beta < 0:
            Z = Z.conjugate()
        return Z + 1j * self.y0

    def hop_rescaled(self) -> Callable[[complex], complex]:
        """H in lambda coordinates (rotation number 1)."""
        def hop(W: complex) -> complex:
            return self.lam(self.H(self.lam_inv(W)))
        return hop

    def in_fundamental_domain(self, Z: complex) -> bool:
        """Membership in l u U via the lambda strip; left edge in, right edge out."""
        if self.y0 is None:
            raise DomainError("y0 not set")
        if Z.imag <= self.y0:
            return False
        x = Z.real / self.beta
        if x < 0.0:
            return False
        return x < self.H(1j * Z.imag).real / self.beta

    def default_budget(self) -> int:
        # twice the asymptotic hop bound 3 (1 + |beta'/beta|)
        return int(math.ceil(6.0 * (1.0 + abs(self.beta_prime / self.beta))))


def build_HJ(F: LiftMap, k: int) -> RenormSetup:
    """Order k+1 setup from the lift's exact rotation-number handle."""
    if F.alpha_exact is None:
        raise InsufficientDepth("lift carries no exact rotation-number handle")
    alpha = F.alpha_exact
    cf = cf_of_exact(alpha)
    if cf.is_finite and k + 1 > len(cf.partials):
        raise InsufficientDepth(f"rational expansion has {len(cf.partials)} quotients")
    ck = cf.convergent(k)
    cprev = cf.convergent(k - 1)
    beta_exact = ck.q * alpha - ck.p
    if exact_sign(beta_exact) == 0:
        raise InsufficientDepth("alpha equals its k-th convergent; beta = 0")
    beta_prime_exact = cprev.q * alpha - cprev.p
    setup = RenormSetup(
        F=F, k=k, p_prev=cprev.p, q_prev=cprev.q, p_k=ck.p, q_k=ck.q,
        beta_exact=beta_exact, beta_prime_exact=beta_prime_exact,
        beta=to_float(beta_exact), beta_prime=to_float(beta_prime_exact))
    if k >= 1 and exact_sign(beta_exact) * exact_sign(beta_prime_exact) >= 0:
        raise InsufficientDepth("beta and beta' must have opposite signs")
    return setup


# ---------------------------------------------------------------------------
# admissible height for the pair (H, J)
# ---------------------------------------------------------------------------


def find_y0(setup: RenormSetup,
            re_samples: int = 8,
            height_offsets: Sequence[float] = (0.01, 0.05, 0.2, 1.0),
            candidates: Optional[Sequence[float]] = None,
            ceiling: float = 6.0) -> float:
    """Smallest sampled height above which the 1/10-closeness conditions hold.

    Grid test of |H - Z - beta| <= |beta|/10, |J - Z - beta'| <= |beta|/10
    (the hop's beta on the right-hand side in both), and both derivatives
    within 1/10 of 1, derivatives taken by the chain rule through the lift.
    Stores the height on the setup together with the analytic-style
    prediction max(0, href + log(10 M / |beta|)/(2 pi)) and returns it.
    """
    if candidates is None:
        candidates = [0.0] + list(np.geomspace(0.01, ceiling, 48))
    tol = abs(setup.beta) / 10.0
    res = np.arange(re_samples) / re_samples

    def conditions_hold(y: float) -> bool:
        for dy in height_offsets:
            for x in res:
                Z = complex(x, y + dy)
                try:
                    hz, hd = setup.H_with_deriv(Z)
                    jz, jd = setup.J_with_deriv(Z)
                except (OverflowError, ValueError):
                    return False
                if abs(hz - Z - setup.beta) > tol or abs(hd - 1.0) > 0.1:
                    return False
                if abs(jz - Z - setup.beta_prime) > tol or abs(jd - 1.0) > 0.1:
                    return False
        return True

    for y in candidates:
        if conditions_hold(float(y)):
            setup.y0 = float(y)
            setup.y0_analytic = y0_analytic_prediction(setup)
            return setup.y0
    raise ConditionsNeverMet(f"1/10-conditions fail below height {ceiling}")


def y0_analytic_prediction(setup: RenormSetup, ref_height: float = 0.5,
                           re_samples: int = 8) -> float:
    """Paper-style prediction: measure sup|H - Z - beta| at a reference height
    and solve for the height where the exponential decay meets |beta|/10."""
    res = np.arange(re_samples) / re_samples
    m = max(abs(setup.H(complex(x, ref_height)) - complex(x, ref_height) - setup.beta)
            for x in res)
    if m == 0:
        return 0.0
    y = ref_height + math.log(10.0 * m / abs(setup.beta)) / (2 * math.pi)
    return max(0.0, y)


# ---------------------------------------------------------------------------
# gluing interpolation (diagnostic)
# ---------------------------------------------------------------------------


def gluing_map_G(hop_rescaled: Callable[[complex], complex], W: complex) -> complex:
    """Linear interpolation G(X + iY) = (1 - X) iY + X hop(iY) on [0,1]x(0,inf)."""
    X, Y = W.real, W.imag
    if not (0.0 <= X <= 1.0) or Y <= 0.0:
        raise DomainError("W must lie in the closed unit-width strip above 0")
    return (1.0 - X) * (1j * Y) + X * hop_rescaled(1j * Y)


# ---------------------------------------------------------------------------
# return map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReturnSample:
    Z: complex
    hops: int
    RZ: complex
    path_min_im: float


def return_map(setup: RenormSetup, Z: complex,
               budget: Optional[int] = None,
               keep_trace: bool = False) -> Tuple[ReturnSample, Optional[List[complex]]]:
    """One jump then hops until the first landing back in the strip.

    Intermediate points must stay above y0 (otherwise the return is undefined,
    mirroring the partial domain of the first-return map); exceeding the hop
    budget is an accepted-run failure and raises.
    """
    if budget is None:
        budget = setup.default_budget()
    if not setup.in_fundamental_domain(Z):
        raise DomainError("start must lie in the fundamental strip")
    W = setup.J(Z)
    trace = [Z, W] if keep_trace else None
    path_min = W.imag
    m = 0
    while not setup.in_fundamental_domain(W):
        if W.imag <= setup.y0:
            raise UndefinedReturn(f"orbit dipped to Im = {W.imag:.6f} <= y0")
        if m >= budget:
            raise BudgetExceeded(f"hop budget {budget} exhausted")
        W = setup.H(W)
        m += 1
        path_min = min(path_min, W.imag)
        if keep_trace:
            trace.append(W)
    return ReturnSample(Z=Z, hops=m, RZ=W, path_min_im=path_min), trace


def extended_trace(setup: RenormSetup, Z: complex, extra_hops: int = 4,
                   budget: Optional[int] = None) -> List[complex]:
    """Return trace continued ``extra_hops`` past the first landing (while the
    orbit stays above y0); food for the single-pass check."""
    sample, trace = return_map(setup, Z, budget=budget, keep_trace=True)
    W = sample.RZ
    for _ in range(extra_hops):
        W = setup.H(W)
        if W.imag <= setup.y0:
            break
        trace.append(W)
    return trace


def verify_single_pass(setup: RenormSetup, trace: Sequence[complex]) -> bool:
    """True iff at most one trace point (past the start) lies in the strip."""
    hits = sum(1 for W in trace[1:] if setup.in_fundamental_domain(W))
    return hits <= 1


# ---------------------------------------------------------------------------
# measured renormalized rotation number
# ---------------------------------------------------------------------------


@dataclass
class RenormReport:
    measured_alpha_prime: float
    expected_alpha_prime: float
    error: float
    y0: float
    y1: float
    y2: float
    H0_estimate: float
    single_pass_violations: int
    budget_violations: int = 0
    undefined_returns: int = 0
    n_returns: int = 0
    im_drift: float = 0.0
    diagnostics: str = ""


def _estimate_H0(setup: RenormSetup, top_height: float, re_points: int = 4,
                 levels: int = 8) -> float:
    """Lowest sampled height with the return defined across a Re-grid,
    reported in lambda units above y0 (additive-constant estimate only)."""
    lowest_ok = top_height
    for h in np.linspace(top_height, setup.y0 + 0.15 * abs(setup.beta), levels):
        ok = True
        for x in np.linspace(0.0, 0.9, re_points):
            Z = complex(x * setup.beta, h)
            if not setup.in_fundamental_domain(Z):
                continue
            try:
                return_map(setup, Z)
            except (UndefinedReturn, BudgetExceeded):
                ok = False
                break
        if ok:
            lowest_ok = h
        else:
            break
    return (lowest_ok - setup.y0) / abs(setup.beta)


def renormalized_rotation_number(setup: RenormSetup, height: float,
                                 n_returns: int,
                                 budget: Optional[int] = None,
                                 cfg: ConstantConfig = DEFAULT_CONFIG,
                                 check_single_pass: bool = True) -> RenormReport:
    """Iterate the return map and average the lambda-displacement per return.

    Each return contributes lam(R(Z)) - lam(Z) - m (the hop count m plays the
    role of the deck bookkeeping); the mean tends to beta'/beta as the height
    grows.  Undefined returns or budget hits abort with a partial report.
    """
    if setup.y0 is None:
        raise DomainError("run find_y0 first")
    absb = abs(setup.beta)
    y1 = setup.y0 + 0.3 * absb + (abs(setup.beta_prime) + 0.1 * absb) * TAN_THETA
    y2 = y1 + (cfg.A * max(cfg.C_sqrt2, cfg.C1_glue) + cfg.C1_glue + 0.1) * absb
    expected = setup.expected_alpha_prime()
    Z = complex(0.0, height)
    if not setup.in_fundamental_domain(Z):
        raise DomainError("measurement height must place the start in the strip")
    disp_sum = 0.0 + 0.0j
    done = 0
    violations = 0
    budget_viol = 0
    undefined = 0
    diag = ""
    for _ in range(n_returns):
        try:
            sample, trace = return_map(setup, Z, budget=budget,
                                       keep_trace=check_single_pass)
        except UndefinedReturn as exc:
            undefined += 1
            diag = f"aborted: {exc}"
            break
        except BudgetExceeded as exc:
            budget_viol += 1
            diag = f"aborted: {exc}"
            break
        disp_sum += setup.lam(sample.RZ) - setup.lam(Z) - sample.hops
        if check_single_pass:
            ext = list(trace)
            W = sample.RZ
            for _ in range(3):
                W = setup.H(W)
                if W.imag <= setup.y0:
                    break
                ext.append(W)
            if not verify_single_pass(setup, ext):
                violations += 1
        Z = sample.RZ
        done += 1
    measured = (disp_sum / done).real if done else math.nan
    drift = (disp_sum / done).imag if done else math.nan
    h0 = _estimate_H0(setup, height)
    return RenormReport(
        measured_alpha_prime=measured,
        expected_alpha_prime=expected,
        error=abs(measured - expected) if done else math.inf,
        y0=setup.y0, y1=y1, y2=y2,
        H0_estimate=h0,
        single_pass_violations=violations,
        budget_violations=budget_viol,
        undefined_returns=undefined,
        n_returns=done,
        im_drift=drift,
        diagnostics=diag,
    )
