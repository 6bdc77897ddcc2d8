"""Equilibrium-layer checks: dielectric closed forms vs quadrature, Penrose
sweeps, bifurcation tables, the Green function of the cubic family, and the
linearized elliptic spectrum along the bifurcation curve."""

import numpy as np
import pytest

from bgklab import equilibria as eq
from bgklab.equilibria import EnergyDistribution as ED


# ------------------------------------------------------------ distributions
def test_catalog_mass_is_one():
    members = [
        ED.poisson2(0.3),
        ED.poisson3(-0.8, 0.25),
        ED.lorentz2(1.5),
        ED.gauss2(0.8, 0.25),
    ]
    for F in members:
        assert F.mass() == pytest.approx(1.0, abs=1e-8)


def test_rescaling_preserves_mass_and_scales_moments():
    F = ED.poisson2(0.4)
    R = F.rescaled(1.7)
    assert R.mass() == pytest.approx(1.0, abs=1e-8)
    for n in (1, 2, 3):
        assert R.moment_dG(n) == pytest.approx(1.7 ** (2 * n) * F.moment_dG(n), rel=1e-12)


def test_poisson_domain_guard():
    F = ED.poisson2(0.2)
    with pytest.raises(ValueError):
        F(np.array([-0.6]))


def test_derivatives_match_finite_differences():
    # chain of orders 1..4 against central differences, all families
    rng = np.random.default_rng(7)
    members = [ED.poisson2(0.35), ED.poisson3(-0.5, 0.2), ED.lorentz2(0.9), ED.gauss2(0.7, 0.3)]
    for F in members:
        for a in range(1, 5):
            e0 = rng.uniform(0.0, 4.0, size=8)
            h = 1e-5 * np.maximum(1.0, e0)
            fd = (F(e0 + h, a - 1) - F(e0 - h, a - 1)) / (2 * h)
            an = F(e0, a)
            assert np.allclose(fd, an, rtol=2e-5, atol=1e-12 * np.max(np.abs(an)))


def test_gauss2_series_closed_branch_seam():
    # the evaluator switches from power series to half-exponential closed
    # forms at b e = 36; values must be smooth across the seam
    F = ED.gauss2(0.8, 0.25)
    b = 2.0 * 0.8**2 / 0.25**4
    e_seam = 36.0 / b
    e = np.linspace(0.9 * e_seam, 1.1 * e_seam, 101)
    for a in range(5):
        vals = F(e, a)
        second = np.diff(vals, 2)
        assert np.max(np.abs(second)) < 1e-4 * max(1.0, np.max(np.abs(vals)))


def test_tabulated_wraps_callable():
    # F(e) = exp(-2e)/sqrt(pi) gives mu(v) = exp(-v^2)/sqrt(pi), unit mass
    F = ED.tabulated(lambda e: np.exp(-2.0 * e) / np.sqrt(np.pi))
    assert F.mass() == pytest.approx(1.0, rel=1e-9)


def test_nonnegativity_flag():
    assert ED.poisson2(0.45).nonnegative
    assert ED.lorentz2(1.5).nonnegative
    signed = ED.tabulated(lambda e: np.exp(-e) * (1.0 - 2.0 * e))
    assert not signed.nonnegative


def test_ed_norm_finite():
    for F in (ED.poisson2(0.3), ED.gauss2(0.8, 0.25)):
        n = F.ed_norm()
        assert np.isfinite(n) and n > 0


# --------------------------------------------------------------- dielectric
def test_dielectric_input_validation():
    F = ED.poisson2(0.3)
    with pytest.raises(ValueError):
        eq.dielectric(F, 0, -1j)
    with pytest.raises(ValueError):
        eq.dielectric(F, 1, 0.5 + 0.1j)


def test_poisson2_closed_vs_quadrature_grid():
    # 20 x 20 sweep of mode number and complex frequency
    F = ED.poisson2(0.3)
    ps = [p for p in range(-10, 11) if p != 0]
    thetas = [
        complex(re, im)
        for re in np.linspace(-2.0, 2.0, 5)
        for im in (-2.0, -0.5, -0.05, 0.0)
    ]
    worst = 0.0
    for p in ps:
        for th in thetas:
            a = eq.dielectric(F, p, th).value
            b = eq.dielectric_closed(F, p, th).value
            worst = max(worst, abs(a - b))
    assert worst < 1e-8


def test_lorentz2_closed_anchors():
    F = ED.lorentz2(0.6)
    got = eq.dielectric_closed(F, 1, 0.4 - 0.7j).K
    assert got == pytest.approx(0.22843914389244885 - 0.072739535829999868j, abs=1e-14)
    got = eq.dielectric_closed(F, 2, -1.3 - 0.2j).K
    assert got == pytest.approx(0.096935396722959769 + 0.054072521071223144j, abs=1e-14)
    # exact rational point: K(1, -i) at alpha = 3/2 equals 28/625
    got = eq.dielectric_closed(ED.lorentz2(1.5), 1, -1j).K
    assert got == pytest.approx(28.0 / 625.0, abs=1e-14)


def test_lorentz2_quadrature_matches_closed():
    F = ED.lorentz2(0.6)
    for p, th in [(1, 0.4 - 0.7j), (2, -1.3 - 0.2j), (1, 0.3), (3, -2.0)]:
        a = eq.dielectric(F, p, th).value
        b = eq.dielectric_closed(F, p, th).value
        assert abs(a - b) < 1e-10


def test_gauss2_dielectric_anchors():
    # frozen from an independent adaptive-quadrature oracle
    F = ED.gauss2(0.8, 0.25)
    got = eq.dielectric(F, 1, 0.3 - 0.5j).K
    assert got == pytest.approx(0.064985309547611544 + 0.55361508842952534j, abs=1e-9)
    got = eq.dielectric(F, 2, -0.9 - 0.15j).K
    assert got == pytest.approx(-0.031885175328675117 - 0.95987251391622197j, abs=1e-9)


def test_dielectric_conjugate_symmetry():
    # K(p, -conj theta) = conj K(p, theta) for even profiles
    rng = np.random.default_rng(11)
    members = [ED.poisson2(0.35), ED.lorentz2(0.8), ED.gauss2(0.6, 0.3)]
    for _ in range(6):
        F = members[rng.integers(len(members))]
        p = int(rng.integers(1, 4))
        th = complex(rng.uniform(-2, 2), -rng.uniform(0.05, 2))
        a = eq.dielectric(F, p, -np.conj(th)).K
        b = np.conj(eq.dielectric(F, p, th).K)
        assert abs(a - b) < 1e-10


def test_dielectric_static_point_is_moment():
    # K(p, 0) = partial_y G(0) / p^2
    F = ED.poisson2(0.3)
    g1 = F.moment_dG(1)
    for p in (1, 2, 5):
        got = eq.dielectric(F, p, 0.0).K
        assert got == pytest.approx(g1 / p**2, abs=1e-10)


def test_dielectric_large_p_decay():
    F = ED.gauss2(0.8, 0.25)
    g1 = F.moment_dG(1)
    got = eq.dielectric(F, 40, 0.0).K
    assert got * 1600.0 == pytest.approx(g1, rel=1e-6)


def test_rescaled_dielectric_identity():
    # K_lam(p, theta) = lam^2 K(p, lam theta), both routes
    F = ED.poisson3(-0.8, 0.25)
    lam = F.marginal_rescaling()
    R = F.rescaled(lam)
    th = 0.4 - 0.3j
    a = eq.dielectric(R, 1, th).value
    b = eq.dielectric_closed(R, 1, th).value
    c = 1.0 + lam**2 * eq.dielectric_closed(F, 1, lam * th).K
    assert abs(a - b) < 1e-10
    assert abs(b - c) < 1e-14


def test_dielectric_scan_columns():
    F = ED.poisson2(0.3)
    cols = eq.dielectric_scan(F, [1, 2], [0.0, -0.5j])
    assert len(cols) == 5 and len(cols[0]) == 4
    s = eq.dielectric(F, 2, -0.5j)
    assert cols[3][3] == pytest.approx(s.value.real, abs=1e-12)


# ------------------------------------------------------------------ Penrose
def test_penrose_poisson2_margin_closed():
    # margin equals partial_y G(0) = (1 - 3 alpha)/(1 - alpha)
    for a in (0.28, 0.38, 0.45):
        r = eq.penrose_unstable(ED.poisson2(a))
        assert r.margin == pytest.approx((1 - 3 * a) / (1 - a), abs=1e-7)
        assert r.unstable == (a > 1 / 3)


def test_penrose_lorentz2_margin_closed():
    # margin = (1 - alpha^2)/(1 + alpha^2)^2
    for a in (0.6, 0.9, 1.2, 1.5):
        r = eq.penrose_unstable(ED.lorentz2(a))
        assert r.margin == pytest.approx((1 - a * a) / (1 + a * a) ** 2, abs=5e-9)
        assert r.unstable == (a > 1.0)


def test_penrose_gauss2_margins_frozen():
    # frozen from a high-precision -int mu'/v oracle
    cases = [
        ((0.2, 0.25), 7.6887611385644013, False),
        ((0.8, 0.25), -2.4350423465679137, True),
        ((1.0, 0.3), -1.5131506377977593, True),
    ]
    for (a, d), margin, unstable in cases:
        r = eq.penrose_unstable(ED.gauss2(a, d))
        assert r.margin == pytest.approx(margin, rel=5e-8)
        assert r.unstable == unstable


def test_penrose_monotone_is_stable():
    r = eq.penrose_unstable(ED.gauss2(0.0, 1.0))
    assert not r.unstable and not r.m_shaped
    assert r.margin == pytest.approx(1.0, rel=1e-8)


def test_penrose_shape_validation():
    wavy = ED.tabulated(lambda e: np.exp(-e) * (1 + np.cos(6 * np.sqrt(2 * np.maximum(e, 0)))))
    with pytest.raises(ValueError):
        eq.penrose_unstable(wavy)


def test_penrose_single_flip_and_bisection():
    # each family sweep flips exactly once; the bisected transition is
    # stable under grid refinement
    def flip_point(make, lo, hi):
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if eq.penrose_unstable(make(mid)).unstable:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    a_star = flip_point(lambda a: ED.poisson2(a), 0.28, 0.45)
    assert a_star == pytest.approx(1.0 / 3.0, abs=1e-6)
    a_star = flip_point(lambda a: ED.lorentz2(a), 0.7, 1.4)
    assert a_star == pytest.approx(1.0, abs=1e-6)
    # gauss2 transition sits between the frozen stable and unstable anchors
    a_star = flip_point(lambda a: ED.gauss2(a, 0.25), 0.2, 0.8)
    assert 0.2 < a_star < 0.8
    r_lo = eq.penrose_unstable(ED.gauss2(a_star - 1e-3, 0.25))
    r_hi = eq.penrose_unstable(ED.gauss2(a_star + 1e-3, 0.25))
    assert not r_lo.unstable and r_hi.unstable


# ----------------------------------------------------------- marginal check
def test_marginal_check_rescaled_poisson2():
    F = ED.poisson2(0.45)
    lam = F.marginal_rescaling()
    assert lam**2 == pytest.approx(11.0 / 7.0, rel=1e-12)
    flags = eq.marginal_check(F.rescaled(lam))
    assert flags.ok
    assert flags.residual < 1e-8
    assert flags.min_ratio > 0.05
    assert flags.min_off >= 0.5


def test_marginal_check_rescaled_poisson3():
    F = ED.poisson3(-0.8, 0.25)
    flags = eq.marginal_check(F.rescaled(F.marginal_rescaling()))
    assert flags.ok


def test_marginal_check_reports_failing_clause():
    flags = eq.marginal_check(ED.poisson2(0.2))
    assert not flags.resonance
    # 1 + K(1,0) = 1 + (1 - 3 alpha)/(1 - alpha) = 3/2 at alpha = 1/5
    assert flags.residual == pytest.approx(1.5, abs=1e-10)
    assert not flags.ok


def test_marginal_rescaling_requires_negative_response():
    with pytest.raises(ValueError):
        ED.poisson2(0.2).marginal_rescaling()


# -------------------------------------------------------------- bifurcation
def test_bifurcation_constants_poisson2_tables():
    c = eq.bifurcation_constants(ED.poisson2(1.0 / 3.0))
    assert c.dG1 == pytest.approx(0.0, abs=1e-14)
    assert c.dG2 == pytest.approx(-3.0, rel=1e-12)
    assert c.dG3 == pytest.approx(-30.0, rel=1e-12)
    assert c.c2 == pytest.approx(0.25, rel=1e-12)
    assert c.a2 == pytest.approx(-33.0 / 4.0, rel=1e-12)

    c = eq.bifurcation_constants(ED.poisson2(0.5))
    assert (c.dG1, c.dG2, c.dG3) == pytest.approx((-1.0, -9.0, -75.0), rel=1e-12)
    assert c.c2 == pytest.approx(0.75, rel=1e-12)
    assert c.a2 == pytest.approx(-25.5, rel=1e-12)


def test_bifurcation_constants_poisson3_rescaled():
    F = ED.poisson3(-0.8, 0.25)
    c = eq.bifurcation_constants(F)
    assert (c.dG1, c.dG2, c.dG3) == pytest.approx((-1.0 / 3.0, -5.0 / 9.0, 65.0 / 3.0), rel=1e-12)
    lam = F.marginal_rescaling()
    assert lam**2 == pytest.approx(3.0, rel=1e-12)
    cr = eq.bifurcation_constants(F.rescaled(lam))
    assert (cr.dG1, cr.dG2, cr.dG3) == pytest.approx((-1.0, -5.0, 585.0), rel=1e-11)
    assert cr.a2 == pytest.approx(0.25 * (585.0 - 25.0 / 3.0), rel=1e-11)
    assert cr.a2 > 0


def test_poisson2_a2_never_positive_when_unstable():
    # over the rescalable branch the quartic correction stays negative
    for a in np.linspace(0.34, 0.5, 9):
        F = ED.poisson2(a)
        c = eq.bifurcation_constants(F.rescaled(F.marginal_rescaling()))
        assert c.a2 < 0


def test_gauss2_moment_routes_agree():
    # quadrature moment vs the Penrose margin route
    F = ED.gauss2(0.8, 0.25)
    assert F.moment_dG(1) == pytest.approx(eq.penrose_unstable(F).margin, abs=1e-7)


def test_poisson_dG_at_matches_finite_difference():
    F = ED.poisson3(-0.5, 0.2)
    y = np.array([-0.2, 0.0, 0.1, 0.3])
    h = 1e-6
    for n in (1, 2, 3):
        fd = (F.dG_at(y + h, n) - F.dG_at(y - h, n)) / (2 * h)
        assert np.allclose(fd, F.dG_at(y, n + 1), rtol=1e-7)


def test_lorentz2_dG_at_matches_quadrature_margin():
    F = ED.lorentz2(0.6)
    assert F.dG_at(0.0, 1) == pytest.approx((1 - 0.36) / 1.36**2, rel=1e-13)


# ------------------------------------------------------------ Green function
def test_green_reference_values():
    # frozen against a split-root oracle cross-checked by an inverse
    # Fourier transform of 1/(1+K) in the decaying regime
    got = eq.green_poisson2(0.25, 1.0, 2.0)
    assert got == pytest.approx(-0.028869731685952898, rel=1e-12)
    got = eq.green_poisson2(0.45, 0.5, 3.0)
    assert got == pytest.approx(0.17120141350186635, rel=1e-12)


def test_green_alpha_zero_is_damped_sine():
    # at alpha = 0 the cubic roots are 0, +-i and the sum collapses
    tau = np.linspace(0.1, 6.0, 23)
    got = eq.green_poisson2(0.0, 1.0, tau)
    assert np.allclose(got, -np.sin(tau) * np.exp(-tau), atol=1e-14)
    got = eq.green_poisson2(0.0, 2.5, tau)
    assert np.allclose(got, -np.sin(tau) * np.exp(-2.5 * tau), atol=1e-14)


def test_green_roots_and_decay_flag():
    two_rho, kappa, decays = eq.green_poisson2_roots(0.3, 1.0)
    assert two_rho**3 + two_rho == pytest.approx(2 * 0.3 / 0.7, rel=1e-14)
    assert kappa == pytest.approx(np.sqrt(1 + 0.75 * two_rho**2), rel=1e-14)
    assert decays
    # growth appears for alpha above 1/3 at small wavenumber
    assert not eq.green_poisson2_roots(0.35, 0.1)[2]
    assert eq.green_poisson2_roots(0.4, 1.0)[2]


def test_green_domain_validation():
    with pytest.raises(ValueError):
        eq.green_poisson2(0.6, 1.0, 1.0)
    with pytest.raises(ValueError):
        eq.green_poisson2(0.3, 0.0, 1.0)
    with pytest.raises(ValueError):
        eq.green_poisson2(0.3, 1.0, -2.0)


# -------------------------------------------------- linearized elliptic part
def test_lepsilon_requires_p16():
    with pytest.raises(ValueError):
        eq.lepsilon_spectrum(ED.poisson2(0.5), 1e-2, P=8)


def test_lepsilon_flat_limit():
    # eps = 0: diagonal p^2 + partial_y G(0); marginal profile has a double
    # zero at |k| = 1
    r = eq.lepsilon_spectrum(ED.poisson2(0.5), 0.0, P=24)
    assert np.allclose(r.eigenvalues[:4], [0.0, 0.0, 3.0, 3.0], atol=1e-12)


def test_lepsilon_bottom_scales_like_a2():
    F = ED.poisson2(0.5)
    r = eq.lepsilon_spectrum(F, 2.5e-3, P=24)
    assert r.a2 == pytest.approx(-25.5, rel=1e-12)
    assert r.evals_cos[0] / 2.5e-3**2 == pytest.approx(r.a2, rel=5e-3)
    # quadratic in eps: slope of the bottom eigenvalue on an eps-halving
    lo = eq.lepsilon_spectrum(F, 5e-3, P=24).evals_cos[0]
    hi = eq.lepsilon_spectrum(F, 1e-2, P=24).evals_cos[0]
    slope = np.log2(hi / lo)
    assert abs(slope - 2.0) < 0.1


def test_lepsilon_kernel_structure():
    F = ED.poisson2(0.5)
    for epsv in (1e-2, 5e-3):
        r = eq.lepsilon_spectrum(F, epsv, P=24)
        # translation mode: sine-block eigenvalue at O(eps^3), eigenvector
        # aligned with d phi/dx; cosine partner is its Hilbert transform
        assert abs(r.evals_sin[0]) < 5 * epsv**3
        assert r.kernel_overlap > 1.0 - 1e-6
        assert r.emin_overlap > 1.0 - 1e-6
        # rest of the spectrum stays above 1/2
        assert np.sort(r.eigenvalues)[2] > 0.45


def test_lepsilon_truncation_invariance():
    F = ED.poisson2(0.5)
    r24 = eq.lepsilon_spectrum(F, 1e-2, P=24)
    r48 = eq.lepsilon_spectrum(F, 1e-2, P=48)
    assert np.max(np.abs(r24.evals_cos[:5] - r48.evals_cos[:5])) < 1e-9
    assert np.max(np.abs(r24.evals_sin[:5] - r48.evals_sin[:5])) < 1e-9
