"""Brjuno-type sums, arithmetic-class predicates and explicit constants.

The Brjuno sum implemented here is the standard B(alpha) = sum log(q_{n+1})/q_n
over the continued-fraction denominators.  Other common variants of the sum
differ from it by a bounded amount, which is irrelevant for the
convergence/divergence classifications this package needs.

The universal constants entering the quantitative bounds are not pinned by
theory, only proved to exist; :class:`ConstantConfig` makes them explicit and
overridable so every probe reports its results parametrically.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Optional

from .cf import CFExpansion
from .errors import DomainError

__all__ = [
    "BrjunoValue",
    "ConstantConfig",
    "DomainError",
    "brjuno_sum",
    "is_bounded_type",
    "const_C",
    "const_Cprime",
    "const_Cprime_numeric",
    "const_Cdoubleprime",
    "cdoubleprime_relation_gap",
    "load_config",
    "config_from_mapping",
    "format_config",
]




@dataclass(frozen=True)
class BrjunoValue:
    value: float          # +inf for rationals
    depth_used: int
    converged: bool       # tail bound below tolerance at the reported depth


@dataclass(frozen=True)
class ConstantConfig:
    """Calibration of the universal constants; defaults are placeholders."""

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    C0: float = 1.0
    D: float = 2.0
    C_sqrt2: float = 1.0
    A: float = 2.0
    C1_glue: float = 1.0
    B_slope: float = 2.0  # B(M) = B_slope * (1 + M)
    seed: int = 0

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "C0", "C_sqrt2", "C1_glue", "B_slope"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.D <= 1 or self.A <= 1:
            raise DomainError("D and A must exceed 1")

    def B_of_M(self, M: float) -> float:
        if M < 0:
            raise DomainError("M >= 0 required")
        return self.B_slope * (1.0 + M)


DEFAULT_CONFIG = ConstantConfig()

_CONFIG_KEYS = ("c1", "c2", "c3", "C0", "D", "C_sqrt2", "A", "C1_glue", "B_slope", "seed")


def config_from_mapping(data: Dict[str, str], base: Optional[ConstantConfig] = None) -> ConstantConfig:
    cfg = base or DEFAULT_CONFIG
    kwargs = {}
    for key, raw in data.items():
        if key not in _CONFIG_KEYS:
            raise DomainError(f"unknown config key {key!r}")
        kwargs[key] = int(raw) if key == "seed" else float(raw)
    return replace(cfg, **kwargs)


def load_config(path: Optional[str] = None, env: Optional[Dict[str, str]] = None) -> ConstantConfig:
    """Key-value file ("key = value" lines, # comments) plus SIEGEL_* overrides."""
    data: Dict[str, str] = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise DomainError(f"bad config line: {line!r}")
                key, val = (t.strip() for t in line.split("=", 1))
                data[key] = val
    environ = os.environ if env is None else env
    for key in _CONFIG_KEYS:
        for candidate in (f"SIEGEL_{key}", f"SIEGEL_{key.upper()}"):
            if candidate in environ:
                data[key] = environ[candidate]
                break
    return config_from_mapping(data)


def format_config(cfg: ConstantConfig) -> str:
    return " ".join(f"{k}={getattr(cfg, k)}" for k in _CONFIG_KEYS)


# ---------------------------------------------------------------------------
# Brjuno sum and bounded type
# ---------------------------------------------------------------------------


def brjuno_sum(alpha: CFExpansion, depth: int = 60, tol: float = 1e-12) -> BrjunoValue:
    """Partial sum of log(q_{n+1})/q_n with a geometric tail certificate.

    Rational input (full finite expansion) diverges by convention and returns
    +inf.  A finite expansion cut off by ``depth`` is treated as a prefix of an
    unknown number: the partial value is returned unconverged.
    """
    if alpha.is_finite and depth >= len(alpha.partials):
        return BrjunoValue(math.inf, len(alpha.partials), True)
    total = 0.0
    n = 0
    while n < depth:
        qn = alpha.convergent(n).q
        qn1 = alpha.convergent(n + 1).q
        total += math.log(qn1) / qn
        n += 1
    converged = False
    if not alpha.is_finite:
        # period quotients bounded by M:  log q_{n+1} <= log q_n + log(M+1),
        # and q_{n+j} >= q_n * phi^(j-1); both give a closed geometric bound.
        M = max(alpha.period)
        qd = alpha.convergent(depth).q
        lq = math.log(alpha.convergent(depth).q)
        phi = (1 + math.sqrt(5)) / 2
        lm = math.log(M + 1)
        # sum_{j>=0} (lq + (j+1) lm) / (qd phi^(j-1))
        s_geo = phi / (phi - 1)
        s_lin = phi / (phi - 1) ** 2 + phi / (phi - 1)
        tail = (lq * s_geo + lm * s_lin) / qd
        converged = tail < tol
    return BrjunoValue(total, depth, converged)


def is_bounded_type(alpha: CFExpansion, bound: int) -> bool:
    """True iff alpha is irrational with all partial quotients <= bound."""
    if alpha.is_finite:
        return False
    if any(a > bound for a in alpha.partials):
        return False
    return all(a <= bound for a in alpha.period)


# ---------------------------------------------------------------------------
# explicit constants
# ---------------------------------------------------------------------------


def _check_Kq(K: float, q: int) -> None:
    if K < 1:
        raise DomainError("K >= 1 required")
    if q < 1:
        raise DomainError("q >= 1 required")


def const_C(K: float, q: int, cfg: ConstantConfig = DEFAULT_CONFIG) -> float:
    """(log q + log K + c1) / q."""
    _check_Kq(K, q)
    return (math.log(q) + math.log(K) + cfg.c1) / q


def _cprime_objective(eps: float, K: float, q: int, cfg: ConstantConfig) -> float:
    return -math.log1p(-eps) + const_C(9.0 * K / eps**3, q, cfg)


def const_Cprime(K: float, q: int, cfg: ConstantConfig = DEFAULT_CONFIG) -> float:
    """inf over eps in (0,1) of -log(1-eps) + C(9K/eps^3, q).

    The objective is strictly convex with infinite boundary limits and a
    unique interior minimum at eps = 1/(1 + q/3); this is the closed form.
    """
    _check_Kq(K, q)
    eps = 1.0 / (1.0 + q / 3.0)
    return _cprime_objective(eps, K, q, cfg)


def const_Cprime_numeric(K: float, q: int, cfg: ConstantConfig = DEFAULT_CONFIG,
                         tol: float = 1e-12) -> float:
    """Golden-section minimization of the same objective, for cross-checks."""
    _check_Kq(K, q)
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = 1e-12, 1.0 - 1e-12
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = _cprime_objective(c, K, q, cfg)
    fd = _cprime_objective(d, K, q, cfg)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = _cprime_objective(c, K, q, cfg)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = _cprime_objective(d, K, q, cfg)
    return min(fc, fd)


def const_Cdoubleprime(K: float, q: int, cfg: ConstantConfig = DEFAULT_CONFIG) -> float:
    """log(Kq) / (2 pi q) + c3 / q."""
    _check_Kq(K, q)
    return math.log(K * q) / (2 * math.pi * q) + cfg.c3 / q


def cdoubleprime_relation_gap(K: float, q: int, cfg: ConstantConfig = DEFAULT_CONFIG) -> float:
    """2*pi*C''(2K+1, q) - (log(Kq) + c1)/q; <= 0 when the configured c1 absorbs
    the lift-vs-germ constant transfer (needs c1 >= log(2 + 1/K) + 2*pi*c3)."""
    _check_Kq(K, q)
    return 2 * math.pi * const_Cdoubleprime(2 * K + 1, q, cfg) - (math.log(K * q) + cfg.c1) / q
