"""Elliptic integrals, Jacobi elliptic functions, and their Fourier (nome) series.

Complete integrals are computed by the arithmetic-geometric mean, the Jacobi
amplitude by its nome series with a descending Landen step for moduli close
to 1.  Everything takes the modulus k (not the parameter m = k^2) and is
vectorized over numpy arrays.
"""

import numpy as np
from scipy.special import ellipeinc, ellipkinc

__all__ = [
    "ellip_K",
    "ellip_E",
    "ellip_F_incomplete",
    "ellip_E_incomplete",
    "nome",
    "jacobi",
    "sn2_series",
    "sncn_series",
]

# Nome series keep terms down to this relative size.
_SERIES_EPS = 1e-16

# Above this modulus the q-series for am degrades; descend by Landen first.
_LANDEN_K = 0.98


def _check_modulus(k, allow_one=False):
    k = np.asarray(k, dtype=float)
    hi_ok = np.all(k <= 1.0) if allow_one else np.all(k < 1.0)
    if not (np.all(k >= 0.0) and hi_ok):
        raise ValueError("modulus k must satisfy 0 <= k < 1")
    return k


def _agm(k, kp=None):
    """AGM tables for modulus k: returns (a_final, sum 2^{n-1} c_n^2).

    Forming 1 - k^2 cancels badly when k is close to 1, so callers that know
    the complementary modulus exactly pass it as kp.
    """
    a = np.ones_like(k)
    b = np.sqrt((1.0 - k) * (1.0 + k)) if kp is None else np.broadcast_to(kp, k.shape).astype(float)
    csum = 0.5 * k * k
    fac = 0.5
    for _ in range(60):
        c = 0.5 * (a - b)
        if np.all(np.abs(c) < 1e-18):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        fac *= 2.0
        csum = csum + fac * c * c
    return a, csum


def ellip_K(k, kp=None):
    """Complete elliptic integral of the first kind,

        K(k) = int_0^{pi/2} (1 - k^2 sin^2 t)^{-1/2} dt,

    by the arithmetic-geometric mean: K = pi / (2 agm(1, k')).  Passing the
    complementary modulus kp explicitly preserves accuracy for k near 1.
    """
    k = _check_modulus(k)
    a, _ = _agm(k, kp)
    out = np.pi / (2.0 * a)
    return out if out.ndim else float(out)


def ellip_E(k, kp=None):
    """Complete elliptic integral of the second kind,

        E(k) = int_0^{pi/2} (1 - k^2 sin^2 t)^{1/2} dt,

    from the same AGM tables: E = K (1 - sum_n 2^{n-1} c_n^2), c_0 = k.
    """
    k = _check_modulus(k, allow_one=True)
    one = k == 1.0
    kk = np.where(one, 0.0, k)
    a, csum = _agm(kk, kp if kp is None else np.where(one, 1.0, kp))
    out = np.pi / (2.0 * a) * (1.0 - csum)
    out = np.where(one, 1.0, out)
    return out if out.ndim else float(out)


def ellip_F_incomplete(phi, k):
    """Incomplete elliptic integral of the first kind F(phi, k).

    Thin wrapper translating our modulus convention to scipy's parameter
    m = k^2; phi may wind over many periods.
    """
    k = _check_modulus(k)
    return ellipkinc(phi, k * k)


def ellip_E_incomplete(phi, k):
    """Incomplete elliptic integral of the second kind E(phi, k)."""
    k = _check_modulus(k)
    return ellipeinc(phi, k * k)


def nome(k, kp=None):
    """Elliptic nome q = exp(-pi K(k') / K(k)), with k' the complementary modulus."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0.0) or np.any(k >= 1.0):
        raise ValueError("nome needs 0 <= k < 1")
    zero = k == 0.0
    kk = np.where(zero, 0.5, k)
    kkp = np.sqrt((1.0 - kk) * (1.0 + kk)) if kp is None else np.where(zero, 1.0, kp)
    q = np.exp(-np.pi * ellip_K(kkp) / ellip_K(kk, kkp))
    out = np.where(zero, 0.0, q)
    return out if out.ndim else float(out)


def _series_terms(q):
    """Number of nome-series terms needed for q^n < eps."""
    if q <= 0.0:
        return 1
    return max(4, int(np.ceil(np.log(_SERIES_EPS) / np.log(q))) + 2)


def _am_series(u, k):
    """Jacobi amplitude from its nome series,

        am(u, k) = pi u / (2K) + 2 sum_{n>=1} q^n / (n (1 + q^{2n})) sin(n pi u / K).

    The linear term carries the winding, so no period folding is needed.
    """
    K = ellip_K(k)
    q = nome(k)
    z = np.pi * np.asarray(u, dtype=float) / K
    out = 0.5 * z
    qn = 1.0
    for n in range(1, _series_terms(q) + 1):
        qn *= q
        out = out + (2.0 * qn / (n * (1.0 + qn * qn))) * np.sin(n * z)
    return out


def jacobi(u, k):
    """Jacobi elliptic functions for real argument: returns (am, sn, cn, dn).

    For k <= 0.98 the amplitude series is used directly.  Larger moduli first
    take a descending Landen transformation,

        k1 = (1 - k') / (1 + k'),   sn(u, k) = (1 + k1) s / (1 + k1 s^2),

    with s = sn(u / (1 + k1), k1), and the amplitude is rebuilt from
    atan2(sn, cn) plus the winding count inferred from pi u / (2K).
    """
    u = np.asarray(u, dtype=float)
    k = float(np.asarray(k, dtype=float))
    _check_modulus(np.array(k))
    if k <= _LANDEN_K:
        am = _am_series(u, k)
        sn = np.sin(am)
        cn = np.cos(am)
    else:
        kp = np.sqrt(1.0 - k * k)
        k1 = (1.0 - kp) / (1.0 + kp)
        _, s, c, _ = jacobi(u / (1.0 + k1), k1)
        sn = (1.0 + k1) * s / (1.0 + k1 * s * s)
        # cn(u,k) = c * d / (1 + k1 s^2) with d = dn(u/(1+k1), k1)
        d = np.sqrt(1.0 - (k1 * s) ** 2)
        cn = c * d / (1.0 + k1 * s * s)
        wrapped = np.arctan2(sn, cn)
        anchor = np.pi * u / (2.0 * ellip_K(k))
        am = wrapped + 2.0 * np.pi * np.round((anchor - wrapped) / (2.0 * np.pi))
    dn = np.sqrt(np.maximum(1.0 - (k * sn) ** 2, 0.0))
    if am.ndim == 0:
        return float(am), float(sn), float(cn), float(dn)
    return am, sn, cn, dn


def sn2_series(u, k, also_mean=False):
    """Fourier series of sn^2(u, k),

        sn^2 = (1 - E/K)/k^2 - (2 pi^2 / (k^2 K^2)) sum_{n>=1} n q^n/(1-q^{2n}) cos(n pi u / K).

    With also_mean=True returns (values, mean) where mean = (1 - E/K)/k^2.
    """
    k = float(k)
    _check_modulus(np.array(k))
    K, E, q = ellip_K(k), ellip_E(k), nome(k)
    z = np.pi * np.asarray(u, dtype=float) / K
    mean = (1.0 - E / K) / (k * k)
    out = np.zeros_like(z)
    qn = 1.0
    for n in range(1, _series_terms(q) + 1):
        qn *= q
        out = out + (n * qn / (1.0 - qn * qn)) * np.cos(n * z)
    out = mean - (2.0 * np.pi ** 2 / (k * K) ** 2) * out
    if also_mean:
        return out, mean
    return out


def sncn_series(u, k):
    """Fourier series of sn(u, k) cn(u, k),

        sn cn = (2 pi^2 / (k^2 K^2)) sum_{n>=1} n q^n/(1+q^{2n}) sin(n pi u / K).
    """
    k = float(k)
    _check_modulus(np.array(k))
    K, q = ellip_K(k), nome(k)
    z = np.pi * np.asarray(u, dtype=float) / K
    out = np.zeros_like(z)
    qn = 1.0
    for n in range(1, _series_terms(q) + 1):
        qn *= q
        out = out + (n * qn / (1.0 + qn * qn)) * np.sin(n * z)
    return (2.0 * np.pi ** 2 / (k * K) ** 2) * out
