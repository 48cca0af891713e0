import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from siegelkit.errors import (
    BudgetExceeded,
    ConditionsNeverMet,
    DomainError,
    InsufficientDepth,
    UndefinedReturn,
)
from siegelkit.germs import LiftMap, QuadraticFamily, lift_of_germ
from siegelkit.renorm import (
    HParams,
    build_HJ,
    extended_trace,
    find_y0,
    gluing_map_G,
    h_of_lift,
    iterate_lift,
    renormalized_rotation_number,
    return_map,
    translation_lift,
    verify_single_pass,
    y0_analytic_prediction,
)
from siegelkit.surd import QuadraticIrrational, to_float

GOLDEN = QuadraticIrrational(-1, 1, 2, 5)
S2M1 = QuadraticIrrational(0, 1, 1, 2) - 1


def golden_quadratic_lift(order=128):
    return lift_of_germ(QuadraticFamily().at(GOLDEN, 8), order=order)


# -- iterate_lift / h_of_lift --------------------------------------------------


def test_translation_never_escapes():
    F = translation_lift(GOLDEN)
    Z, escaped, _ = iterate_lift(F, 0.3 + 0.5j, 500)
    assert not escaped
    assert abs(Z.imag - 0.5) < 1e-12


def test_displacement_bounded_by_h_norm():
    F = golden_quadratic_lift()
    bound = float(np.sum(np.abs(F.h_coeffs) *
                         np.exp(-2 * math.pi * np.arange(1, len(F.h_coeffs) + 1) * 1.5)))
    for re in (0.0, 0.3, 0.7):
        Z = complex(re, 1.5)
        assert abs(F(Z) - Z - F.alpha) <= bound * 1.0001


def test_parabolic_lift_escapes_low():
    g = QuadraticFamily().at(Fraction(1, 2), 8)
    F = lift_of_germ(g, order=128)
    escaped_any = False
    for re in np.linspace(0, 1, 8, endpoint=False):
        _, escaped, _ = iterate_lift(F, complex(re, 0.02), 10_000)
        escaped_any = escaped_any or escaped
    assert escaped_any


def test_h_of_translation_zero():
    assert h_of_lift(translation_lift(GOLDEN)) == 0.0


def test_h_golden_quadratic_stable():
    F = golden_quadratic_lift()
    h1 = h_of_lift(F, HParams(max_iter=10_000))
    h2 = h_of_lift(F, HParams(max_iter=40_000))
    assert math.isfinite(h1) and h1 > 0
    assert abs(h1 - h2) <= 0.05


def test_h_estimates_shrink_with_budget():
    # escape can only be detected, never undone: fewer iterations, lower h
    F = golden_quadratic_lift()
    h_small = h_of_lift(F, HParams(max_iter=300))
    h_big = h_of_lift(F, HParams(max_iter=20_000))
    assert h_small <= h_big + 1e-12


def test_r_h_consistency_single():
    from siegelkit.linearize import EscapeParams, escape_radius, linearization_coeffs
    g = QuadraticFamily().at(GOLDEN, 8)
    lin = linearization_coeffs(g, 256)
    r_est = escape_radius(g, lin, EscapeParams(max_iter=4000)).lower
    h_est = h_of_lift(golden_quadratic_lift(), HParams(max_iter=4000))
    assert r_est >= math.exp(-2 * math.pi * h_est) - 1e-2


# -- build_HJ -------------------------------------------------------------------


def test_translation_setup_exact():
    F = translation_lift(GOLDEN)
    for k in (0, 1, 2, 3):
        s = build_HJ(F, k)
        Z = 0.1 + 0.8j
        assert abs(s.H(Z) - Z - s.beta) < 1e-12
        assert abs(s.J(Z) - Z - s.beta_prime) < 1e-12
        beta_direct = s.q_k * to_float(GOLDEN) - s.p_k
        assert abs(s.beta - beta_direct) < 1e-12


def test_order_one_renormalization_shape():
    # k = 0: J = T^{-1}, H = T^{-a0} o F
    F = translation_lift(GOLDEN)  # a0 = 0
    s = build_HJ(F, 0)
    assert s.p_prev == 1 and s.q_prev == 0 and s.q_k == 1
    Z = 0.4 + 1.1j
    assert abs(s.J(Z) - (Z - 1)) < 1e-15
    assert abs(s.H(Z) - F(Z)) < 1e-15


def test_beta_signs_alternate():
    F = translation_lift(GOLDEN)
    for k in (1, 2, 3, 4):
        s = build_HJ(F, k)
        assert s.beta * s.beta_prime < 0
        assert (s.beta > 0) == (k % 2 == 0)


def test_beta_bracket_identity():
    # 1/2 <= q_{k+1} |beta| <= 1, checked exactly
    from siegelkit.cf import cf_of_exact
    from siegelkit.surd import exact_cmp, exact_sign
    cf = cf_of_exact(GOLDEN)
    F = translation_lift(GOLDEN)
    for k in (0, 1, 2, 5):
        s = build_HJ(F, k)
        q_next = cf.convergent(k + 1).q
        gap = s.beta_exact if exact_sign(s.beta_exact) > 0 else -s.beta_exact
        val = q_next * gap
        assert exact_cmp(val, Fraction(1, 2)) >= 0
        assert exact_cmp(val, 1) <= 0


def test_insufficient_depth_guards():
    F = translation_lift(Fraction(2, 5))  # [0;2,2]: two quotients
    with pytest.raises(InsufficientDepth):
        build_HJ(F, 2)
    with pytest.raises(InsufficientDepth):
        build_HJ(F, 2 - 1 + 1)
    s = build_HJ(F, 1)
    assert s.q_k == 2
    with pytest.raises(InsufficientDepth):
        build_HJ(LiftMap(alpha=0.5, h_coeffs=np.zeros(0)), 1)  # no exact handle


def test_beta_zero_guard():
    F = translation_lift(Fraction(2, 5))
    # k = 2 would have alpha equal to its own convergent; depth guard fires first
    with pytest.raises(InsufficientDepth):
        build_HJ(F, 2)


# -- find_y0 --------------------------------------------------------------------


def test_find_y0_translation_zero():
    F = translation_lift(GOLDEN)
    s = build_HJ(F, 1)
    assert find_y0(s) == 0.0


def test_find_y0_golden_quadratic_and_recheck():
    F = golden_quadratic_lift()
    s = build_HJ(F, 3)
    y0 = find_y0(s)
    assert 0 < y0 < 3
    # post-hoc re-verification on a finer grid
    tol = abs(s.beta) / 10
    for x in np.linspace(0, 1, 16, endpoint=False):
        for dy in (0.005, 0.11, 0.45):
            Z = complex(x, y0 + dy)
            hz, hd = s.H_with_deriv(Z)
            jz, jd = s.J_with_deriv(Z)
            assert abs(hz - Z - s.beta) <= tol * 1.05
            assert abs(hd - 1) <= 0.1 * 1.05
            assert abs(jz - Z - s.beta_prime) <= tol * 1.05
            assert abs(jd - 1) <= 0.1 * 1.05


def test_jump_condition_uses_hop_beta_on_the_right():
    # craft a lift whose jump error sits between |beta|/10 and |beta'|/10:
    # conditions must fail (the right-hand side uses the hop's beta)
    F = golden_quadratic_lift()
    s = build_HJ(F, 3)  # |beta| = 0.1459, |beta'| = 0.2361
    y0 = find_y0(s)
    tol_beta = abs(s.beta) / 10
    tol_beta_prime = abs(s.beta_prime) / 10
    assert tol_beta < tol_beta_prime
    probe = complex(0.2, y0 + 0.01)
    jz, _ = s.J_with_deriv(probe)
    assert abs(jz - probe - s.beta_prime) <= tol_beta  # the strict form held


def test_y0_analytic_prediction_reported():
    F = golden_quadratic_lift()
    s = build_HJ(F, 2)
    pred = y0_analytic_prediction(s)
    assert pred >= 0.0 and math.isfinite(pred)
    find_y0(s)
    assert s.y0_analytic is not None and s.y0_analytic >= 0.0


def test_conditions_never_met():
    # a germ so rough that no sampled height below the tiny ceiling works
    g = QuadraticFamily().at(GOLDEN, 8)
    F = lift_of_germ(g, order=64)
    s = build_HJ(F, 3)
    with pytest.raises(ConditionsNeverMet):
        find_y0(s, ceiling=1e-4, candidates=[0.0, 1e-5])


# -- gluing ---------------------------------------------------------------------


def test_gluing_identity_for_unit_translation():
    hop = lambda W: W + 1
    for Y in (0.2, 1.0, 3.0):
        for X in (0.0, 0.4, 1.0):
            W = complex(X, Y)
            assert gluing_map_G(hop, W) == W


def test_gluing_boundary_compatibility():
    F = golden_quadratic_lift()
    s = build_HJ(F, 2)
    find_y0(s)
    hop = s.hop_rescaled()
    for Y in (0.5, 1.5, 4.0):
        lhs = gluing_map_G(hop, complex(1.0, Y))
        assert abs(lhs - hop(1j * Y)) < 1e-12


def test_gluing_displacement_bound():
    # hop displacement within delta of the unit translation gives |G(W)-W| <= delta
    delta = 0.05
    hop = lambda W: W + 1 + delta * cmath.exp(2j * math.pi * W) / 2
    for Y in (0.1, 0.7):
        for X in (0.0, 0.2, 0.9, 1.0):
            W = complex(X, Y)
            assert abs(gluing_map_G(hop, W) - W) <= delta + 1e-12


def test_gluing_domain_error():
    with pytest.raises(DomainError):
        gluing_map_G(lambda W: W + 1, complex(1.5, 1.0))
    with pytest.raises(DomainError):
        gluing_map_G(lambda W: W + 1, complex(0.5, -1.0))


# -- return map -------------------------------------------------------------------


def test_return_map_translation_closed_form():
    F = translation_lift(GOLDEN)
    for k in (1, 2, 3):
        s = build_HJ(F, k)
        find_y0(s)
        Z = complex(0.0, 1.0)
        sample, _ = return_map(s, Z)
        disp = sample.RZ - Z
        expected = s.beta_prime + sample.hops * s.beta
        assert abs(disp - expected) < 1e-12
        # hops is minimal: one fewer hop would not land in the strip
        assert not s.in_fundamental_domain(Z + s.beta_prime + (sample.hops - 1) * s.beta) \
            or sample.hops == 0


def test_return_map_requires_strip_start():
    F = translation_lift(GOLDEN)
    s = build_HJ(F, 1)
    find_y0(s)
    with pytest.raises(DomainError):
        return_map(s, complex(0.9, 5.0))  # outside the fundamental strip


def test_return_map_high_points_within_budget():
    F = golden_quadratic_lift()
    s = build_HJ(F, 2)
    y0 = find_y0(s)
    budget = s.default_budget()
    for j in range(40):
        Z = complex(0.0, y0 + 5 * abs(s.beta) + 0.04 * j)
        sample, _ = return_map(s, Z)
        assert sample.hops <= budget


def test_return_map_undefined_near_floor():
    # with y0 forced below the 1/10-condition height the map is wild there and
    # low starts drop out of the domain; high starts keep working
    F = golden_quadratic_lift()
    s = build_HJ(F, 3)
    y0_legit = find_y0(s)
    s.y0 = 0.1
    undefined = 0
    for re in np.linspace(0, 0.9, 12):
        Z = complex(re * s.beta, 0.11)
        if not s.in_fundamental_domain(Z):
            continue
        try:
            return_map(s, Z)
        except UndefinedReturn:
            undefined += 1
        except BudgetExceeded:
            pass
    assert undefined > 0
    s.y0 = y0_legit
    high = complex(0.0, y0_legit + 10 * abs(s.beta))
    sample, _ = return_map(s, high)  # defined for high enough starts
    assert sample.hops >= 0


def test_budget_exceeded_raises():
    F = translation_lift(GOLDEN)
    s = build_HJ(F, 2)
    find_y0(s)
    with pytest.raises(BudgetExceeded):
        return_map(s, complex(0.0, 2.0), budget=0)


# -- single pass -------------------------------------------------------------------


def test_single_pass_translations():
    F = translation_lift(GOLDEN)
    s = build_HJ(F, 2)
    find_y0(s)
    for j in range(10):
        trace = extended_trace(s, complex(0.0, 1.0 + 0.3 * j))
        assert verify_single_pass(s, trace)


def test_single_pass_many_quadratic_starts():
    F = golden_quadratic_lift()
    s = build_HJ(F, 2)
    y0 = find_y0(s)
    violations = 0
    for j in range(200):
        Z = complex(0.0, y0 + 2 * abs(s.beta) + 0.013 * j)
        try:
            trace = extended_trace(s, Z)
        except (UndefinedReturn, BudgetExceeded):
            continue
        if not verify_single_pass(s, trace):
            violations += 1
    assert violations == 0


def test_single_pass_detects_synthetic_violation():
    F = translation_lift(GOLDEN)
    s = build_HJ(F, 1)
    find_y0(s)
    inside = complex(0.1 * s.beta, 1.0)
    assert s.in_fundamental_domain(inside)
    fake_trace = [inside, inside + s.beta_prime, inside, inside]
    assert not verify_single_pass(s, fake_trace)


def test_cone_property_on_hops():
    # above y0 each hop advances Re by >= 9|beta|/10 and moves Im by <= |beta|/10
    F = golden_quadratic_lift()
    s = build_HJ(F, 2)
    y0 = find_y0(s)
    Z = complex(0.0, y0 + 10 * abs(s.beta))
    _, trace = return_map(s, Z, keep_trace=True)
    hops = trace[1:]
    for A, B in zip(hops, hops[1:]):
        d = B - A
        assert d.real * math.copysign(1, s.beta) >= 0.9 * abs(s.beta) - 1e-12
        assert abs(d.imag) <= abs(s.beta) / 10 + 1e-12


# -- iterates and rescalings -------------------------------------------------------


def test_iterate_rotation_number_scaling():
    F = golden_quadratic_lift()
    alpha = F.alpha
    K_samples = []
    ref = alpha + 0.01
    zs = [complex(x, 1.2) for x in np.linspace(0, 1, 8, endpoint=False)]
    M = max(abs(F(Z) - Z - alpha) for Z in zs)
    K = M / abs(alpha - ref)
    for k_pow in (2, 3, 5):
        disp = []
        for Z in zs:
            W = Z
            for _ in range(k_pow):
                W = F(W)
            disp.append(abs(W - Z - k_pow * alpha))
        assert max(disp) <= K * abs(k_pow * alpha - k_pow * ref) + 1e-12


def test_rescaling_rotation_number():
    F = golden_quadratic_lift()
    b, a = 2.5, 0.3 + 0.1j
    lam = lambda Z: b * Z + a
    lam_inv = lambda W: (W - a) / b
    G = lambda W: lam(F(lam_inv(W)))
    W = lam(complex(0.2, 6.0))
    assert abs((G(W) - W) - b * F.alpha) < 1e-8


# -- renormalized rotation number ---------------------------------------------------


def test_rotnum_translation_exact():
    for alpha in (GOLDEN, S2M1):
        F = translation_lift(alpha)
        for k in (1, 2, 3):
            s = build_HJ(F, k)
            find_y0(s)
            rep = renormalized_rotation_number(s, height=1.0, n_returns=300)
            assert rep.error < 1e-12
            assert rep.single_pass_violations == 0
            assert rep.budget_violations == 0
            # expected equals -[a_{k+1}; a_{k+2}, ...] by the tail identity
            from siegelkit.cf import cf_of_exact, eval_cf
            cf = cf_of_exact(alpha)
            tail = -(cf.convergent(k - 1).q * alpha - cf.convergent(k - 1).p) / \
                (cf.convergent(k).q * alpha - cf.convergent(k).p)
            assert abs(rep.expected_alpha_prime - (-to_float(tail))) < 1e-12


def test_rotnum_golden_quadratic():
    F = golden_quadratic_lift()
    for k in (1, 2, 3):
        s = build_HJ(F, k)
        y0 = find_y0(s)
        rep = renormalized_rotation_number(s, height=y0 + 20 * abs(s.beta), n_returns=400)
        assert rep.error < 1e-3
        assert rep.single_pass_violations == 0 and rep.budget_violations == 0
        assert rep.y2 > rep.y1 > rep.y0


def test_rotnum_error_improves_with_height():
    F = golden_quadratic_lift()
    s = build_HJ(F, 2)
    y0 = find_y0(s)
    e1 = renormalized_rotation_number(s, height=y0 + 6 * abs(s.beta), n_returns=200).error
    e2 = renormalized_rotation_number(s, height=y0 + 12 * abs(s.beta), n_returns=200).error
    assert e2 <= e1 + 1e-9


def test_rotnum_h0_estimate_small_for_translation():
    F = translation_lift(GOLDEN)
    s = build_HJ(F, 1)
    find_y0(s)
    rep = renormalized_rotation_number(s, height=1.0, n_returns=50)
    assert rep.H0_estimate <= 0.5
