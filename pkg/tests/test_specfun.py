"""Checks for the elliptic-function layer.

Reference values were produced by an independent script (AGM recoded from
scratch, quadrature for the incomplete integrals, RK4 on the amplitude ODE
for the Jacobi functions) and are frozen here as literals.
"""

import numpy as np
import pytest

from bgklab import specfun


def test_complete_K_reference():
    assert specfun.ellip_K(0.5) == pytest.approx(1.685750354812596, abs=1e-14)


def test_complete_E_reference():
    assert specfun.ellip_E(0.5) == pytest.approx(1.4674622093394272, abs=1e-14)


def test_complete_at_zero():
    assert specfun.ellip_K(0.0) == pytest.approx(np.pi / 2, abs=1e-15)
    assert specfun.ellip_E(0.0) == pytest.approx(np.pi / 2, abs=1e-15)
    assert specfun.ellip_E(1.0) == pytest.approx(1.0, abs=1e-15)


def test_K_small_modulus_series():
    # K = (pi/2)(1 + k^2/4 + 9 k^4/64) + O(k^6), next coefficient 25 pi/512
    for k in (1e-3, 1e-2, 0.05):
        series = 0.5 * np.pi * (1 + k ** 2 / 4 + 9 * k ** 4 / 64)
        assert specfun.ellip_K(k) == pytest.approx(series, abs=0.5 * k ** 6 + 1e-15)


def test_E_small_modulus_series():
    for k in (1e-3, 1e-2, 0.05):
        series = 0.5 * np.pi * (1 - k ** 2 / 4 - 3 * k ** 4 / 64)
        assert specfun.ellip_E(k) == pytest.approx(series, abs=0.5 * k ** 6 + 1e-14)


def test_K_log_blowup_near_one():
    # K(sqrt(1-b^2)) = ln(4/b) + (b^2/4)(ln(4/b) - 1) + O(b^4 ln b); passing
    # the complementary modulus exactly avoids the 1 - k^2 cancellation
    for b in (1e-2, 1e-3, 1e-4, 1e-6):
        k = np.sqrt(1.0 - b * b)
        lead = np.log(4.0 / b)
        ref = lead + 0.25 * b * b * (lead - 1.0)
        assert specfun.ellip_K(k, kp=b) == pytest.approx(
            ref, abs=5.0 * b ** 4 * abs(np.log(b)) + 1e-13
        )


def test_K_near_one_without_kp_degrades_gracefully():
    # forming 1 - k^2 in double precision costs ~eps/b^2 absolute error
    for b in (1e-2, 1e-3):
        k = np.sqrt(1.0 - b * b)
        assert specfun.ellip_K(k) == pytest.approx(
            specfun.ellip_K(k, kp=b), abs=1e-15 / b ** 2
        )


def test_legendre_relation():
    # E K' + E' K - K K' = pi/2 for every modulus pair (k, k')
    rng = np.random.default_rng(7)
    for k in rng.uniform(0.05, 0.95, size=20):
        kp = np.sqrt(1.0 - k * k)
        lhs = (
            specfun.ellip_E(k) * specfun.ellip_K(kp)
            + specfun.ellip_E(kp) * specfun.ellip_K(k)
            - specfun.ellip_K(k) * specfun.ellip_K(kp)
        )
        assert lhs == pytest.approx(np.pi / 2, abs=1e-13)


def test_incomplete_reference():
    assert specfun.ellip_F_incomplete(np.pi / 4, 0.3) == pytest.approx(
        0.7919586904869262, abs=1e-13
    )
    assert specfun.ellip_E_incomplete(np.pi / 4, 0.3) == pytest.approx(
        0.7789308656365166, abs=1e-13
    )


def test_incomplete_reduces_to_complete():
    for k in (0.1, 0.6, 0.9):
        assert specfun.ellip_F_incomplete(np.pi / 2, k) == pytest.approx(
            specfun.ellip_K(k), abs=1e-12
        )
        assert specfun.ellip_E_incomplete(np.pi / 2, k) == pytest.approx(
            specfun.ellip_E(k), abs=1e-12
        )


def test_incomplete_quasi_periodicity():
    # F(phi + n pi, k) = F(phi, k) + 2 n K(k)
    k, phi = 0.7, 0.4
    base = specfun.ellip_F_incomplete(phi, k)
    for n in (1, 3, -2):
        assert specfun.ellip_F_incomplete(phi + n * np.pi, k) == pytest.approx(
            base + 2 * n * specfun.ellip_K(k), abs=1e-11
        )


def test_nome_reference():
    assert specfun.nome(0.9) == pytest.approx(0.10235242351354437, abs=1e-15)
    assert specfun.nome(0.0) == 0.0


def test_nome_small_modulus():
    # q = (k/4)^2 (1 + k^2/2 + O(k^4))
    for k in (1e-2, 1e-3):
        assert specfun.nome(k) == pytest.approx((k / 4) ** 2, rel=1e-4)


def test_jacobi_reference():
    am, sn, cn, dn = specfun.jacobi(0.7, 0.6)
    assert am == pytest.approx(0.6814464878851606, abs=1e-12)
    assert sn == pytest.approx(0.6299171153234896, abs=1e-12)
    assert cn == pytest.approx(0.7766623641084545, abs=1e-12)
    assert dn == pytest.approx(0.9258258983286826, abs=1e-12)


def test_jacobi_degenerate_moduli():
    u = np.linspace(-3, 7, 11)
    am, sn, cn, dn = specfun.jacobi(u, 0.0)
    assert np.allclose(am, u, atol=1e-14)
    assert np.allclose(sn, np.sin(u), atol=1e-14)
    assert np.allclose(cn, np.cos(u), atol=1e-14)
    assert np.allclose(dn, 1.0, atol=1e-14)


def test_jacobi_identities():
    rng = np.random.default_rng(11)
    for _ in range(40):
        k = rng.uniform(0.02, 0.997)
        u = rng.uniform(-12.0, 12.0)
        am, sn, cn, dn = specfun.jacobi(u, k)
        assert sn ** 2 + cn ** 2 == pytest.approx(1.0, abs=1e-12)
        assert dn ** 2 + (k * sn) ** 2 == pytest.approx(1.0, abs=1e-12)
        assert sn == pytest.approx(np.sin(am), abs=1e-12)


def test_jacobi_periodicity_and_winding():
    # sn has period 4K and am gains exactly pi per 2K
    k = 0.8
    K = specfun.ellip_K(k)
    u = np.linspace(0.0, 2.0, 9)
    am0, sn0, _, _ = specfun.jacobi(u, k)
    am1, sn1, _, _ = specfun.jacobi(u + 4 * K, k)
    assert np.allclose(sn1, sn0, atol=1e-11)
    assert np.allclose(am1 - am0, 2 * np.pi, atol=1e-11)


def test_jacobi_landen_branch_joins_smoothly():
    # values must agree across the series/Landen switch at k = 0.98
    u = np.linspace(-4, 4, 17)
    lo = specfun.jacobi(u, 0.9799999)
    hi = specfun.jacobi(u, 0.9800001)
    for a, b in zip(lo, hi):
        assert np.allclose(a, b, atol=5e-6)


def test_sn2_series_matches_jacobi():
    rng = np.random.default_rng(3)
    for k in (0.3, 0.7, 0.95):
        u = rng.uniform(-8, 8, size=12)
        _, sn, _, _ = specfun.jacobi(u, k)
        assert np.allclose(sn2_vals(u, k), sn ** 2, atol=1e-12)


def sn2_vals(u, k):
    return specfun.sn2_series(u, k)


def test_sn2_series_mean():
    k = 0.6
    K, E = specfun.ellip_K(k), specfun.ellip_E(k)
    _, mean = specfun.sn2_series(0.0, k, also_mean=True)
    assert mean == pytest.approx((1 - E / K) / k ** 2, abs=1e-14)


def test_sncn_series_matches_jacobi():
    rng = np.random.default_rng(5)
    for k in (0.3, 0.7, 0.95):
        u = rng.uniform(-8, 8, size=12)
        _, sn, cn, _ = specfun.jacobi(u, k)
        assert np.allclose(specfun.sncn_series(u, k), sn * cn, atol=1e-12)


def test_domain_errors():
    with pytest.raises(ValueError):
        specfun.ellip_K(1.0)
    with pytest.raises(ValueError):
        specfun.ellip_K(-0.1)
    with pytest.raises(ValueError):
        specfun.nome(1.0)
    with pytest.raises(ValueError):
        specfun.jacobi(0.5, 1.2)
