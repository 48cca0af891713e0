"""Analytic germ families on the unit disk and their half-plane lifts.

A germ is f(z) = e^{2 pi i alpha} z + sum_{m>=2} b_m z^m truncated at order N,
with a bound on the discarded tail.  The parameter handle stays exact
(Fraction / QuadraticIrrational) whenever the caller has one; floats are
derived output.  Lifting moves a germ to F(Z) = Z + alpha + h(e^{2 pi i Z})
on the upper half-plane via the exponential cover.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from . import series
from .errors import DomainError, FactorizationError
from .surd import ExactReal, QuadraticIrrational, floor_exact, to_float

__all__ = [
    "AlphaHandle",
    "Germ",
    "GermFamily",
    "RotationFamily",
    "QuadraticFamily",
    "PolynomialFamily",
    "FlowFamily",
    "LiftMap",
    "DEFAULT_ORDER",
    "alpha_float",
    "alpha_frac_float",
    "multiplier",
    "family_at",
    "eval_germ",
    "eval_germ_bounded",
    "flow_time_map",
    "lipschitz_estimate",
    "lift_of_germ",
    "compose_germ_coeffs",
]

AlphaHandle = Union[int, Fraction, QuadraticIrrational, float]

DEFAULT_ORDER = 256

TWO_PI_I = 2j * math.pi


def alpha_float(alpha: AlphaHandle) -> float:
    return to_float(alpha)


def alpha_frac_float(alpha: AlphaHandle) -> float:
    """float of frac(alpha), reducing exactly first when possible."""
    if isinstance(alpha, float):
        return alpha - math.floor(alpha)
    return to_float(alpha - floor_exact(alpha))


def _multiplier_of(alpha: AlphaHandle) -> complex:
    return cmath.exp(TWO_PI_I * alpha_frac_float(alpha))


@dataclass
class Germ:
    """Truncated disk germ; ``coeffs`` holds b_2 .. b_N."""

    alpha: AlphaHandle
    coeffs: np.ndarray
    tail_bound: float = 0.0
    _full: Optional[list] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)

    @property
    def order(self) -> int:
        return len(self.coeffs) + 1

    def multiplier(self) -> complex:
        return _multiplier_of(self.alpha)

    def full_coeffs(self) -> np.ndarray:
        """[0, e^{2 pi i alpha}, b_2, ..., b_N]."""
        out = np.zeros(self.order + 1, dtype=np.complex128)
        out[1] = self.multiplier()
        out[2:] = self.coeffs
        return out

    def _full_list(self) -> list:
        if self._full is None:
            self._full = self.full_coeffs().tolist()
        return self._full

    def eval_vec(self, z: np.ndarray) -> np.ndarray:
        return series.polyval_vec(self.full_coeffs(), z)


def multiplier(g: Germ) -> complex:
    return g.multiplier()


def eval_germ(g: Germ, z: complex) -> complex:
    """Horner evaluation of the truncation; domain is the open unit disk."""
    if abs(z) >= 1:
        raise DomainError("germ evaluation requires |z| < 1")
    return series.polyval_scalar(g._full_list(), z)


def eval_germ_bounded(g: Germ, z: complex) -> Tuple[complex, float]:
    """Value plus the absolute error bound induced by the stored tail bound."""
    return eval_germ(g, z), g.tail_bound * abs(z) ** (g.order + 1)


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


class GermFamily:
    """Family alpha -> germ on a working interval; subclasses stay picklable."""

    kind = "abstract"
    restriction_radius = 1.0

    def at(self, alpha: AlphaHandle, order: int = DEFAULT_ORDER) -> Germ:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "restriction_radius": self.restriction_radius}


class RotationFamily(GermFamily):
    kind = "rotation"

    def at(self, alpha, order: int = DEFAULT_ORDER) -> Germ:
        return Germ(alpha, np.zeros(0, dtype=np.complex128))


class QuadraticFamily(GermFamily):
    """e^{2 pi i alpha} z + z^2 conjugated by z -> z/s onto the unit disk."""

    kind = "quadratic"

    def __init__(self, restriction_radius: float = 1.0):
        if not 0 < restriction_radius <= 1:
            raise DomainError("restriction_radius in (0, 1] required")
        self.restriction_radius = float(restriction_radius)

    def at(self, alpha, order: int = DEFAULT_ORDER) -> Germ:
        return Germ(alpha, np.array([self.restriction_radius], dtype=np.complex128))

    def describe(self) -> dict:
        return {"kind": self.kind, "restriction_radius": self.restriction_radius}


class PolynomialFamily(GermFamily):
    """Custom coefficient rule b(alpha); the rule gets (alpha, order)."""

    kind = "polynomial"

    def __init__(self, coeff_rule: Callable[[AlphaHandle, int], Sequence[complex]],
                 restriction_radius: float = 1.0):
        self.coeff_rule = coeff_rule
        self.restriction_radius = float(restriction_radius)

    def at(self, alpha, order: int = DEFAULT_ORDER) -> Germ:
        return Germ(alpha, np.asarray(self.coeff_rule(alpha, order), dtype=np.complex128))


class FlowFamily(GermFamily):
    """Time-t maps of dz/dt = chi(z), chi = 2 pi i z + sum c_m z^m.

    ``chi`` lists c_2, c_3, ...; the field is linearized once (no small
    divisors arise for vector fields) and each germ is one composition.
    The restriction radius conjugates by z -> z/s so the germ lives on the
    unit disk even when the flow is incomplete near the boundary.
    """

    kind = "flow"

    def __init__(self, chi: Sequence[complex], restriction_radius: float = 0.5):
        self.chi = tuple(complex(c) for c in chi)
        self.restriction_radius = float(restriction_radius)
        self._cache: dict = {}

    def __getstate__(self):
        return {"chi": self.chi, "restriction_radius": self.restriction_radius}

    def __setstate__(self, state):
        self.chi = state["chi"]
        self.restriction_radius = state["restriction_radius"]
        self._cache = {}

    def _linearizer(self, order: int) -> Tuple[np.ndarray, np.ndarray]:
        """psi with psi' * chi = 2 pi i psi, psi = z + O(z^2), and its inverse."""
        key = order
        if key not in self._cache:
            s = self.restriction_radius
            c = np.zeros(order + 1, dtype=np.complex128)
            c[1] = TWO_PI_I
            for j, cj in enumerate(self.chi, start=2):
                if j <= order:
                    c[j] = cj * s ** (j - 1)  # conjugated field chi(sz)/s
            psi = np.zeros(order + 1, dtype=np.complex128)
            psi[1] = 1.0
            for n in range(2, order + 1):
                acc = 0j
                for j in range(2, n + 1):
                    if c[j] != 0:
                        acc += (n + 1 - j) * psi[n + 1 - j] * c[j]
                psi[n] = -acc / (TWO_PI_I * (n - 1))
            self._cache[key] = (psi, series.reversion(psi, order))
        return self._cache[key]

    def at(self, alpha, order: int = DEFAULT_ORDER) -> Germ:
        psi, psi_inv = self._linearizer(order)
        u = _multiplier_of(alpha)
        ft = series.compose(psi_inv, u * psi, order)
        tail = _tail_estimate(ft)
        return Germ(alpha, ft[2:], tail_bound=tail)

    def describe(self) -> dict:
        return {"kind": self.kind, "restriction_radius": self.restriction_radius,
                "chi": [[c.real, c.imag] for c in self.chi]}


def _tail_estimate(coeffs: np.ndarray) -> float:
    """Crude geometric extrapolation of the dropped tail at radius 1."""
    mags = np.abs(coeffs)
    n = len(mags) - 1
    if n < 8 or mags[n] == 0:
        return 0.0
    half = mags[n // 2] if mags[n // 2] > 0 else mags[n]
    ratio = (mags[n] / half) ** (2.0 / n) if half > 0 else 1.0
    if ratio >= 1.0:
        return math.inf
    return float(mags[n] * ratio / (1.0 - ratio))


def family_at(fam: GermFamily, alpha: AlphaHandle, order: int = DEFAULT_ORDER) -> Germ:
    return fam.at(alpha, order)


def flow_time_map(chi: Sequence[complex], t: AlphaHandle, order: int = DEFAULT_ORDER) -> Germ:
    """Time-t map of dz/dt = 2 pi i z + sum_{m>=2} chi[m-2] z^m (no rescaling)."""
    return FlowFamily(chi, restriction_radius=1.0).at(t, order)


def compose_germ_coeffs(outer: Germ, inner: Germ, order: int) -> np.ndarray:
    """Coefficients of outer(inner(z)) truncated at ``order`` (tail ignored)."""
    return series.compose(outer.full_coeffs(), inner.full_coeffs(), order)


# ---------------------------------------------------------------------------
# Lipschitz constant of a family
# ---------------------------------------------------------------------------


def lipschitz_estimate(fam: GermFamily, interval: Tuple[float, float],
                       n_pairs: int = 64, n_circle: int = 64,
                       seed: int = 0, order: int = 64) -> float:
    """Empirical sup of |f_a(z) - f_a'(z)| / |a - a'| over samples, |z| <= 0.999.

    A lower estimate of the true constant; includes near-diagonal pairs so the
    small-gap slope is represented.
    """
    if n_pairs <= 0 or n_circle <= 0:
        raise DomainError("positive sampling budgets required")
    rng = np.random.default_rng(seed)
    lo, hi = float(interval[0]), float(interval[1])
    zs = 0.999 * np.exp(TWO_PI_I * np.arange(n_circle) / n_circle)
    best = 0.0
    for _ in range(n_pairs):
        a = rng.uniform(lo, hi)
        mode = rng.integers(0, 2)
        b = rng.uniform(lo, hi) if mode == 0 else a + rng.uniform(1e-7, 1e-5)
        if b == a:
            continue
        fa = fam.at(float(a), order)
        fb = fam.at(float(b), order)
        gap = np.max(np.abs(fa.eval_vec(zs) - fb.eval_vec(zs)))
        best = max(best, float(gap) / abs(b - a))
    return best


# ---------------------------------------------------------------------------
# lifts
# ---------------------------------------------------------------------------


@dataclass
class LiftMap:
    """F(Z) = Z + alpha + h(e^{2 pi i Z}); commutes with Z -> Z + 1."""

    alpha: float
    h_coeffs: np.ndarray              # h_1 .. h_M (w-powers; h(0) = 0)
    alpha_exact: Optional[ExactReal] = None
    source: Optional[Germ] = None
    _hlist: Optional[list] = field(default=None, repr=False, compare=False)
    _dlist: Optional[list] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.h_coeffs = np.asarray(self.h_coeffs, dtype=np.complex128)

    def _lists(self):
        if self._hlist is None:
            full = np.zeros(len(self.h_coeffs) + 1, dtype=np.complex128)
            full[1:] = self.h_coeffs
            self._hlist = full.tolist()
            self._dlist = series.derivative(full).tolist()
        return self._hlist, self._dlist

    def __call__(self, Z: complex) -> complex:
        hl, _ = self._lists()
        w = cmath.exp(TWO_PI_I * Z)
        return Z + self.alpha + series.polyval_scalar(hl, w)

    def with_derivative(self, Z: complex) -> Tuple[complex, complex]:
        hl, dl = self._lists()
        w = cmath.exp(TWO_PI_I * Z)
        val = Z + self.alpha + series.polyval_scalar(hl, w)
        der = 1.0 + TWO_PI_I * w * series.polyval_scalar(dl, w)
        return val, der

    def eval_vec(self, Z: np.ndarray) -> np.ndarray:
        full = np.zeros(len(self.h_coeffs) + 1, dtype=np.complex128)
        full[1:] = self.h_coeffs
        w = np.exp(TWO_PI_I * np.asarray(Z, dtype=np.complex128))
        return Z + self.alpha + series.polyval_vec(full, w)


def lift_of_germ(g: Germ, order: int = DEFAULT_ORDER,
                 check_height: float = 0.2, check_samples: int = 128) -> LiftMap:
    """Lift through E(z) = e^{2 pi i z}, normalizing the log branch by 1/(2 pi i).

    Requires f(z) = e^{2 pi i alpha} z g(z) with |g - 1| < 1 on the sample
    circle |w| = e^{-2 pi check_height}, so the principal log is defined.
    """
    rho = g.multiplier()
    u = np.zeros(order + 1, dtype=np.complex128)
    m_top = min(g.order, order + 1)
    for m in range(2, m_top + 1):
        u[m - 1] = g.coeffs[m - 2] / rho
    r_check = math.exp(-2 * math.pi * check_height)
    ws = r_check * np.exp(TWO_PI_I * np.arange(check_samples) / check_samples)
    gm1 = np.abs(series.polyval_vec(u, ws))
    if float(np.max(gm1)) >= 1.0:
        raise FactorizationError(
            f"|g - 1| reaches {float(np.max(gm1)):.3f} on |w| = {r_check:.3f}")
    h = series.log1p_series(u, order) / TWO_PI_I
    return LiftMap(alpha=alpha_float(g.alpha), h_coeffs=h[1:],
                   alpha_exact=g.alpha if not isinstance(g.alpha, float) else None,
                   source=g)
