"""Action-angle geometry of a particle in a one-well periodic potential.

The well psi lives on the torus [-pi, pi), has its single maximum at x = 0
and vanishes at x = pi; particle energy is H = v^2/2 - psi(x).  Trapped
orbits (-2 eps < H < 0, eps = psi(0)/2) oscillate around x = 0, free orbits
(H > 0) circulate.  For the model well eps (1 + cos x) everything reduces to
elliptic integrals with argument

    a = sqrt(1 + H / (2 eps)),

trapped orbits using modulus a, free ones 1/a.  General wells are handled by
the same substitutions with a smooth correction ratio under the integral, so
the model case is reproduced with zero quadrature error.

All trigonometric-polynomial manipulation happens in the Chebyshev basis:
with c = cos x,

    psi(x)   = (1 + c) R(c),      psi'(x)  = -sin x Q(c),
    psi'''(x) = sin x P(c),        W := psi'''/psi' = -P(c)/Q(c),

where Q = sum k c_k U_{k-1} and P = sum k^3 c_k U_{k-1}.  The sin x factors
cancel exactly, so W and the derived profile derivatives are regular at the
well top and bottom without any limiting procedure.
"""

import json
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb

from . import specfun
from ._util import chebseries_from_u, gl_nodes

__all__ = [
    "OneWellPotential",
    "EnergyPoint",
    "AngleEnergyChart",
    "xmax",
    "omega_model",
    "omega_general",
    "angle_map",
    "model_angle",
    "inverse_angle",
    "density_D",
    "fourier_mean_cos",
    "fourier_coeff",
]


def _cheb_dd(coeffs, x, y):
    """Divided difference sum_k coeffs[k] (T_k(x) - T_k(y)) / (x - y).

    Evaluated by the stable recurrence

        DD_{k+1} = 2 x DD_k + 2 T_k(y) - DD_{k-1},

    vectorized over x with y scalar; exact where x == y.
    """
    x = np.asarray(x, dtype=float)
    t_prev, t_cur = 1.0, float(y)  # T_k(y)
    dd_prev = np.zeros_like(x)
    dd_cur = np.ones_like(x)
    out = coeffs[1] * dd_cur if len(coeffs) > 1 else np.zeros_like(x)
    for k in range(1, len(coeffs) - 1):
        dd_prev, dd_cur = dd_cur, 2.0 * x * dd_cur + 2.0 * t_cur - dd_prev
        t_prev, t_cur = t_cur, 2.0 * y * t_cur - t_prev
        out += coeffs[k + 1] * dd_cur
    return out


class OneWellPotential:
    """Trigonometric-polynomial well psi(x) = sum_k c_k cos(kx), psi(pi) = 0.

    coeffs lists c_0..c_K.  The constructor enforces psi(pi) = 0 to roundoff,
    a strict maximum at x = 0, and monotonicity on (0, pi), which together
    make the well single.
    """

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or len(c) < 2:
            raise ValueError("need cosine coefficients c_0..c_K, K >= 1")
        if abs(np.sum(c * (-1.0) ** np.arange(len(c)))) > 1e-12 * max(1.0, np.abs(c).sum()):
            raise ValueError("potential must vanish at x = pi")
        self.coeffs = c
        k = np.arange(len(c), dtype=float)
        # R: psi = (1+c) R(c); built from T_k(c) - T_k(-1) divided differences
        r = np.zeros(max(len(c) - 1, 1))
        dd_prev = np.zeros(max(len(c) - 1, 1))
        dd_cur = np.zeros(max(len(c) - 1, 1))
        dd_cur[0] = 1.0
        t_prev, t_cur = 1.0, -1.0
        r += c[1] * dd_cur if len(c) > 1 else 0.0
        for kk in range(1, len(c) - 1):
            grown = 2.0 * _cheb.chebmulx(dd_cur)[: len(r)]  # chebmulx trims zeros
            nxt = -dd_prev.copy()
            nxt[: len(grown)] += grown
            nxt[0] += 2.0 * t_cur
            dd_prev, dd_cur = dd_cur, nxt
            t_prev, t_cur = t_cur, -2.0 * t_cur - t_prev
            r += c[kk + 1] * dd_cur
        self._r = r
        self._q = chebseries_from_u(k[1:] * c[1:])          # psi'  = -sin x Q(c)
        self._p = chebseries_from_u(k[1:] ** 3 * c[1:])     # psi''' = sin x P(c)
        self._d2 = -(k ** 2) * c                            # psi'' = sum of T_k
        self._d4 = k ** 4 * c
        self._validate()

    def _validate(self):
        grid = np.cos(np.linspace(0.0, np.pi, 512))
        if np.any(_cheb.chebval(grid, self._q) <= 0.0):
            raise ValueError("well is not single: psi must be strictly monotone on (0, pi)")
        if np.any(_cheb.chebval(grid[1:], self._r) <= 0.0):
            raise ValueError("well is not single: psi must stay positive on (-pi, pi)")

    @property
    def eps(self):
        """Half depth psi(0)/2, the natural amplitude parameter."""
        return float(_cheb.chebval(1.0, self._r))

    def __call__(self, x):
        c = np.cos(x)
        out = (1.0 + c) * _cheb.chebval(c, self._r)
        return out if np.ndim(out) else float(out)

    def d1(self, x):
        out = -np.sin(x) * _cheb.chebval(np.cos(x), self._q)
        return out if np.ndim(out) else float(out)

    def d2(self, x):
        out = _cheb.chebval(np.cos(x), self._d2)
        return out if np.ndim(out) else float(out)

    def d3(self, x):
        out = np.sin(x) * _cheb.chebval(np.cos(x), self._p)
        return out if np.ndim(out) else float(out)

    def d4(self, x):
        out = _cheb.chebval(np.cos(x), self._d4)
        return out if np.ndim(out) else float(out)

    def w_ratio(self, x):
        """W = psi'''(x)/psi'(x) = -P(c)/Q(c), regular on the whole torus."""
        c = np.cos(x)
        out = -_cheb.chebval(c, self._p) / _cheb.chebval(c, self._q)
        return out if np.ndim(out) else float(out)

    def w_prime_over_d1(self, x):
        """W'(x)/psi'(x) = -(P'Q - PQ')/Q^3 at c = cos x; the sin x factors cancel."""
        c = np.cos(x)
        q = _cheb.chebval(c, self._q)
        p = _cheb.chebval(c, self._p)
        qd = _cheb.chebval(c, _cheb.chebder(self._q))
        pd = _cheb.chebval(c, _cheb.chebder(self._p))
        out = -(pd * q - p * qd) / q ** 3
        return out if np.ndim(out) else float(out)

    def dd_ratio(self, cy, cm):
        """sum_k c_k (T_k(cy) - T_k(cm)) / (cy - cm), the exact-cancellation core
        of the orbit-period correction ratio."""
        return _cheb_dd(self.coeffs, cy, cm)

    def inverse_on_branch(self, y):
        """x in [0, pi] with psi(x) = y, for y in [0, 2 eps] (psi decreasing there)."""
        y = np.asarray(y, dtype=float)
        two_eps = 2.0 * self.eps
        if np.any(y < -1e-15) or np.any(y > two_eps * (1 + 1e-12)):
            raise ValueError("inverse argument outside [0, psi(0)]")
        yc = np.clip(y, 0.0, two_eps)
        lo = np.zeros_like(yc)
        hi = np.full_like(yc, np.pi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = self(mid) > yc
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        x = 0.5 * (lo + hi)
        for _ in range(3):  # Newton polish; psi' < 0 on the branch interior
            d = self.d1(x)
            step = np.where(np.abs(d) > 1e-14, (self(x) - yc) / np.where(d == 0, 1.0, d), 0.0)
            x = np.clip(x - step, 0.0, np.pi)
        out = x
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class EnergyPoint:
    """One orbit: energy, branch, model argument a, frequency, turning point."""

    H: float
    branch: str
    a: float
    omega: float
    xmax: float


def _check_H(H, eps):
    H = np.asarray(H, dtype=float)
    if np.any(H <= -2.0 * eps) or np.any(H == 0.0):
        raise ValueError("energy must lie in (-2 eps, 0) or (0, inf)")
    return H


def xmax(pot, H):
    """Turning point of a trapped orbit: the root of psi(x) = -H on (0, pi)."""
    H = np.asarray(H, dtype=float)
    if np.any(H >= 0.0) or np.any(H <= -2.0 * pot.eps):
        raise ValueError("turning points exist for -2 eps < H < 0 only")
    out = pot.inverse_on_branch(-H)
    return out if np.ndim(out) else float(out)


def _model_moduli(H, eps):
    """(a, k, kp) for the model chart; kp is exact in H to dodge 1-k^2 loss."""
    H = np.asarray(H, dtype=float)
    a = np.sqrt(1.0 + H / (2.0 * eps))
    trapped = H < 0.0
    k = np.where(trapped, a, 1.0 / np.where(a == 0.0, 1.0, a))
    kp = np.where(
        trapped,
        np.sqrt(np.maximum(-H, 0.0) / (2.0 * eps)),
        np.sqrt(np.maximum(H, 0.0) / (2.0 * eps)) / np.where(a == 0.0, 1.0, a),
    )
    return a, k, kp


def omega_model(H, eps):
    """Orbit frequency in the model well eps (1 + cos x):

        trapped:  omega = sqrt(eps) (pi/2) / K(a)
        free:     omega = sqrt(eps) pi a / K(1/a).
    """
    H = _check_H(H, eps)
    a, k, kp = _model_moduli(H, eps)
    K = specfun.ellip_K(np.asarray(k), kp=kp)
    out = np.where(H < 0, np.sqrt(eps) * 0.5 * np.pi / K, np.sqrt(eps) * np.pi * a / K)
    return out if out.ndim else float(out)


def _trapped_ratio_nodes(pot, H, n):
    """Nodes and data for the trapped-orbit quadrature at energy H (scalar).

    Substituting sin(y/2) = a sin u and then u = am(t, a) flattens the
    integrand to A(y)^{-1/2} on [0, K(a)], smooth up to the turning point.
    """
    eps = pot.eps
    xm = xmax(pot, H)
    a = np.sin(0.5 * xm)
    kp = np.cos(0.5 * xm)
    K = specfun.ellip_K(a, kp=kp)
    t, w = gl_nodes(0.0, K, n)
    _, sn, _, _ = specfun.jacobi(t, a)
    y = 2.0 * np.arcsin(np.clip(a * sn, -1.0, 1.0))  # sin(y/2) = a sin(am(t, a))
    ratio = pot.dd_ratio(np.cos(y), np.cos(xm)) / eps
    return y, ratio, w, a, K, xm


def _free_ratio_nodes(pot, H, n):
    """Same for a free orbit: u = y/2 then u = am(t, 1/a) on [0, K(1/a)]."""
    eps = pot.eps
    a = np.sqrt(1.0 + H / (2.0 * eps))
    k = 1.0 / a
    kp = np.sqrt(H / (2.0 * eps)) / a
    K = specfun.ellip_K(k, kp=kp)
    t, w = gl_nodes(0.0, K, n)
    u, _, _, _ = specfun.jacobi(t, k)
    cu = np.cos(u)
    # psi(2u) = 2 cos^2(u) R(cos 2u) and a^2 - sin^2 u = (a^2 - 1) + cos^2 u:
    # both sides stay exact near the separatrix where a -> 1, u -> pi/2
    psi_y = 2.0 * cu * cu * _cheb.chebval(np.cos(2.0 * u), pot._r)
    ratio = (H + psi_y) / (2.0 * eps * (H / (2.0 * eps) + cu * cu))
    return u, ratio, w, a, K


def omega_general(pot, H, n=128):
    """Orbit frequency for an arbitrary one-well potential.

    The model substitutions leave the correction A^{-1/2} under a plain
    integral over [0, K]; for the model well A = 1 identically and the
    quadrature is exact.
    """
    eps = pot.eps
    Harr = np.atleast_1d(_check_H(H, eps))
    out = np.empty_like(Harr)
    for i, Hi in enumerate(Harr):
        if Hi < 0.0:
            _, ratio, w, _, _, _ = _trapped_ratio_nodes(pot, Hi, n)
            T = (4.0 / np.sqrt(eps)) * np.dot(w, ratio ** -0.5)
        else:
            _, ratio, w, a, _ = _free_ratio_nodes(pot, Hi, n)
            T = (2.0 / (a * np.sqrt(eps))) * np.dot(w, ratio ** -0.5)
        out[i] = 2.0 * np.pi / T
    return out if np.ndim(H) else float(out[0])


def model_angle(a, phi, branch, eps):
    """Closed-form angle parameterization of model orbits, X(phi):

        free:     X = 2 am(K(1/a) phi / pi, 1/a)
        trapped:  X = 2 arcsin(a sn(2 K(a) phi / pi, a))

    Returns (X, V) with V = dX/dt = omega dX/dphi.
    """
    phi = np.asarray(phi, dtype=float)
    if branch == "free":
        k = 1.0 / a
        K = specfun.ellip_K(k)
        am, sn, cn, dn = specfun.jacobi(K * phi / np.pi, k)
        X = 2.0 * am
        # v = sqrt(2(H + psi)) = 2 a sqrt(eps) dn
        V = 2.0 * a * np.sqrt(eps) * dn
    elif branch == "trapped":
        K = specfun.ellip_K(a)
        _, sn, cn, dn = specfun.jacobi(2.0 * K * phi / np.pi, a)
        X = 2.0 * np.arcsin(a * sn)
        V = 2.0 * a * np.sqrt(eps) * cn
    else:
        raise ValueError("branch must be 'free' or 'trapped'")
    return X, V


def angle_map(pot, H, n_phi=1024, omega=None, n_sub=None):
    """Sample orbits X(phi), V(phi) on the uniform angle grid phi_j = 2 pi j / n_phi.

    Fourth-order Runge-Kutta on

        dX/dphi = V / omega,   dV/dphi = psi'(X) / omega,

    started at the well top crossing X(0) = 0, V(0) = sqrt(2(H + psi(0))) > 0,
    vectorized over an array of energies.  Returns (phi, X, V).

    Near the separatrix the orbit crosses the well within an angle fraction
    ~1/K, K the effective quarter-period scale, so each output step is cut
    into n_sub Runge-Kutta substeps; the default grows with the largest K in
    the batch to keep the local error (h K)^4 in check.
    """
    Harr = np.atleast_1d(_check_H(H, pot.eps))
    eps = pot.eps
    om = np.atleast_1d(omega_general(pot, Harr) if omega is None else np.asarray(omega, dtype=float))
    if n_sub is None:
        a = np.sqrt(1.0 + Harr / (2.0 * eps))
        K_eff = np.where(
            Harr < 0, np.sqrt(eps) * 0.5 * np.pi / om, np.sqrt(eps) * np.pi * a / om
        )
        n_sub = int(np.clip(np.ceil(2.0 * np.max(K_eff)) + 2, 2, 64))
    h = 2.0 * np.pi / (n_phi * n_sub)
    X = np.zeros((len(Harr), n_phi))
    V = np.zeros((len(Harr), n_phi))
    x = np.zeros(len(Harr))
    v = np.sqrt(2.0 * (Harr + pot(0.0)))
    for j in range(n_phi):
        X[:, j] = x
        V[:, j] = v
        for _ in range(n_sub):
            k1x, k1v = v / om, pot.d1(x) / om
            k2x, k2v = (v + 0.5 * h * k1v) / om, pot.d1(x + 0.5 * h * k1x) / om
            k3x, k3v = (v + 0.5 * h * k2v) / om, pot.d1(x + 0.5 * h * k2x) / om
            k4x, k4v = (v + h * k3v) / om, pot.d1(x + h * k3x) / om
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    phi = (2.0 * np.pi / n_phi) * np.arange(n_phi)
    return phi, X, V


def inverse_angle(pot, H, x, n=128):
    """Angle of the orbit point at position x (first quarter period),

        Theta(x, H) = omega int_0^x dy / sqrt(2 (H + psi(y))),

    via the same substitutions as the period integrals, the upper limit
    becoming an incomplete elliptic integral of the first kind.
    """
    eps = pot.eps
    H = float(H)
    _check_H(H, eps)
    omega = omega_general(pot, H)
    if H < 0.0:
        xm = xmax(pot, H)
        if not 0.0 <= x <= xm:
            raise ValueError("trapped orbits reach |x| <= xmax only")
        a = np.sin(0.5 * xm)
        kp = np.cos(0.5 * xm)
        u_up = np.arcsin(np.clip(np.sin(0.5 * x) / a, -1.0, 1.0))
        t_up = specfun.ellip_F_incomplete(u_up, a)
        t, w = gl_nodes(0.0, t_up, n)
        _, sn, _, _ = specfun.jacobi(t, a)
        y = 2.0 * np.arcsin(np.clip(a * sn, -1.0, 1.0))
        ratio = pot.dd_ratio(np.cos(y), np.cos(xm)) / eps
        return float(omega / np.sqrt(eps) * np.dot(w, ratio ** -0.5))
    if not 0.0 <= x <= np.pi:
        raise ValueError("free-orbit angles are defined on 0 <= x <= pi here")
    a = np.sqrt(1.0 + H / (2.0 * eps))
    k = 1.0 / a
    kp = np.sqrt(H / (2.0 * eps)) / a
    t_up = specfun.ellip_F_incomplete(0.5 * x, k)
    t, w = gl_nodes(0.0, t_up, n)
    am, _, _, _ = specfun.jacobi(t, k)
    cu = np.cos(am)
    psi_y = 2.0 * cu * cu * _cheb.chebval(np.cos(2.0 * am), pot._r)
    ratio = (H + psi_y) / (2.0 * eps * (a * a - np.sin(am) ** 2))
    return float(omega / (a * np.sqrt(eps)) * np.dot(w, ratio ** -0.5))


def _dK_dk(k, kp=None):
    """dK/dk = (E - (1-k^2) K) / (k (1-k^2)).

    The numerator cancels to O(k^2) as k -> 0, so tiny moduli switch to the
    series dK/dk = (pi/4) k (1 + 9 k^2/8 + O(k^4)).
    """
    k = np.asarray(k, dtype=float)
    kp2 = (1.0 - k) * (1.0 + k) if kp is None else np.asarray(kp) ** 2
    small = k < 1e-4
    ksafe = np.where(small, 0.5, k)
    kp2safe = np.where(small, 0.75, kp2)
    exact = (
        specfun.ellip_E(ksafe, kp=np.sqrt(kp2safe))
        - kp2safe * specfun.ellip_K(ksafe, kp=np.sqrt(kp2safe))
    ) / (ksafe * kp2safe)
    series = 0.25 * np.pi * k * (1.0 + 1.125 * k * k)
    out = np.where(small, series, exact)
    return out if out.ndim else float(out)


def density_D(H, eps=None, pot=None):
    """Energy density of orbits against frequency,

        D(H) = (1/omega) dH/domega,

    positive on the free branch (D -> 1 as H -> inf), negative on the trapped
    branch (D -> -8 at the well bottom).  Model wells use the closed elliptic
    derivatives; a general potential is differenced at fourth order.
    """
    if (eps is None) == (pot is None):
        raise ValueError("give exactly one of eps (model) or pot (general)")
    if pot is not None:
        Harr = np.atleast_1d(_check_H(H, pot.eps))
        out = np.empty_like(Harr)
        for i, Hi in enumerate(Harr):
            scale = max(abs(Hi), 1e-3 * pot.eps)
            h = 1e-4 * scale
            if Hi < 0:
                h = min(h, 0.2 * (Hi + 2 * pot.eps), 0.2 * abs(Hi))
            else:
                h = min(h, 0.2 * Hi)
            Hs = Hi + h * np.array([-2, -1, 1, 2])
            om = omega_general(pot, Hs)
            dom = (om[0] - 8 * om[1] + 8 * om[2] - om[3]) / (12 * h)
            out[i] = 1.0 / (omega_general(pot, Hi) * dom)
        return out if np.ndim(H) else float(out[0])
    Harr = np.atleast_1d(_check_H(H, eps))
    a, k, kp = _model_moduli(Harr, eps)
    K = specfun.ellip_K(np.asarray(k), kp=kp)
    dK = _dK_dk(np.asarray(k), kp=kp)
    root = np.sqrt(eps)
    trapped = Harr < 0
    # omega'(a): trapped -root (pi/2) K'/K^2; free root pi (1/K + K'(1/a)/(a K^2))
    dom_da = np.where(
        trapped,
        -root * 0.5 * np.pi * dK / K ** 2,
        root * np.pi * (1.0 / K + dK / (np.where(trapped, 1.0, a) * K ** 2)),
    )
    omega = np.where(trapped, root * 0.5 * np.pi / K, root * np.pi * a / K)
    out = 4.0 * eps * a / (omega * dom_da)
    return out if np.ndim(H) else float(out[0])


def fourier_mean_cos(a, branch):
    """Orbit average of cos X on the model chart:

        free:     1 + 2 a^2 (E(1/a)/K(1/a) - 1)
        trapped:  2 E(a)/K(a) - 1.
    """
    a = np.asarray(a, dtype=float)
    if branch == "free":
        k = 1.0 / a
        out = 1.0 + 2.0 * a * a * (specfun.ellip_E(k) / specfun.ellip_K(k) - 1.0)
    elif branch == "trapped":
        out = 2.0 * specfun.ellip_E(a) / specfun.ellip_K(a) - 1.0
    else:
        raise ValueError("branch must be 'free' or 'trapped'")
    out = np.asarray(out)
    return out if out.ndim else float(out)


def fourier_coeff(a, n, branch, kind):
    """Coefficient of cos(n phi) or sin(n phi) in cos X(phi), sin X(phi) on model orbits.

    Free orbits carry every harmonic; trapped cos X has even harmonics only
    and trapped sin X odd ones, the opposite parities vanishing identically:

        free cos:    a^2 (4 pi^2/K^2) n q^n / (1 - q^{2n})
        free sin:    a^2 (4 pi^2/K^2) n q^n / (1 + q^{2n})
        trap cos:    (4 pi^2/K^2) m q^m / (1 - q^{2m}),       n = 2m
        trap sin:    (2 pi^2/K^2) n q^{n/2} / (1 + q^n),      n odd

    with K and the nome q taken at modulus 1/a (free) or a (trapped).
    """
    if n < 1:
        raise ValueError("harmonic index must be >= 1")
    if kind not in ("cos", "sin"):
        raise ValueError("kind must be 'cos' or 'sin'")
    a = float(a)
    if branch == "free":
        k = 1.0 / a
        K, q = specfun.ellip_K(k), specfun.nome(k)
        base = a * a * 4.0 * np.pi ** 2 / K ** 2 * n
        return base * q ** n / ((1.0 - q ** (2 * n)) if kind == "cos" else (1.0 + q ** (2 * n)))
    if branch != "trapped":
        raise ValueError("branch must be 'free' or 'trapped'")
    K, q = specfun.ellip_K(a), specfun.nome(a)
    if kind == "cos":
        if n % 2 == 1:
            return 0.0
        m = n // 2
        return 4.0 * np.pi ** 2 / K ** 2 * m * q ** m / (1.0 - q ** (2 * m))
    if n % 2 == 0:
        return 0.0
    return 2.0 * np.pi ** 2 / K ** 2 * n * q ** (0.5 * n) / (1.0 + q ** n)


class AngleEnergyChart:
    """Tabulated action-angle data for one potential on clustered energy grids.

    Each branch carries nodes H_i with frequency, model argument, orbit
    density D, and quadrature weights wH such that

        sum_i f(H_i) wH_i ~ int f(H) dH

    over that branch (free-branch velocity-sign doubling is left to callers).
    Grids cluster geometrically toward the separatrix on both sides.  X(phi)
    samples are regenerated on demand rather than stored.
    """

    VERSION = 1

    def __init__(self, pot, eps, model, branches):
        self.pot = pot
        self.eps = eps
        self.model = model
        self.branches = branches

    @classmethod
    def build(cls, pot=None, eps=None, n_nodes=400, delta_min=1e-10, a_max=None,
              n_quad=128):
        """Chart a model well (eps given) or a general potential."""
        if (eps is None) == (pot is None):
            raise ValueError("give exactly one of eps (model) or pot (general)")
        model = pot is None
        eps_val = eps if model else pot.eps
        if a_max is None:
            a_max = max(40.0, 40.0 / np.sqrt(eps_val))
        half = n_nodes // 2

        branches = {}
        # free branch: delta = a - 1 geometric near the separatrix, then log in a
        lam1, w1 = gl_nodes(np.log(delta_min), np.log(1.0), half)
        a_near = 1.0 + np.exp(lam1)
        wa_near = np.exp(lam1) * w1
        lam2, w2 = gl_nodes(np.log(2.0), np.log(a_max), n_nodes - half)
        a_far = np.exp(lam2)
        wa_far = np.exp(lam2) * w2
        a_free = np.concatenate([a_near, a_far])
        wa_free = np.concatenate([wa_near, wa_far])
        H_free = 2.0 * eps_val * (a_free ** 2 - 1.0)
        wH_free = 4.0 * eps_val * a_free * wa_free
        branches["free"] = cls._branch_data(pot, eps_val, model, H_free, a_free, wH_free, n_quad)

        # trapped branch: regular panel plus geometric clustering toward a = 1
        lam3, w3 = gl_nodes(0.0, 0.9, half)
        a_mid, wa_mid = lam3, w3
        lam4, w4 = gl_nodes(np.log(delta_min), np.log(0.1), n_nodes - half)
        a_sep = 1.0 - np.exp(lam4)
        wa_sep = np.exp(lam4) * w4
        a_tr = np.concatenate([a_mid, a_sep])
        wa_tr = np.concatenate([wa_mid, wa_sep])
        order = np.argsort(a_tr)
        a_tr, wa_tr = a_tr[order], wa_tr[order]
        H_tr = 2.0 * eps_val * (a_tr ** 2 - 1.0)
        wH_tr = 4.0 * eps_val * a_tr * wa_tr
        branches["trapped"] = cls._branch_data(pot, eps_val, model, H_tr, a_tr, wH_tr, n_quad)

        return cls(pot, eps_val, model, branches)

    @staticmethod
    def _branch_data(pot, eps, model, H, a, wH, n_quad):
        if model:
            omega = omega_model(H, eps)
            D = density_D(H, eps=eps)
        else:
            omega = np.array([omega_general(pot, Hi, n=n_quad) for Hi in H])
            D = density_D(H, pot=pot)
        return {"H": H, "a": a, "omega": omega, "D": D, "wH": wH}

    def point(self, branch, i):
        """Node i of a branch as an EnergyPoint."""
        data = self.branches[branch]
        H = float(data["H"][i])
        xm = np.pi
        if branch == "trapped":
            xm = xmax(self.pot, H) if not self.model else 2.0 * np.arcsin(float(data["a"][i]))
        return EnergyPoint(
            H=H,
            branch=branch,
            a=float(data["a"][i]),
            omega=float(data["omega"][i]),
            xmax=float(xm),
        )

    def angle_samples(self, branch, n_phi=1024):
        """(phi, X, V) for every node of the branch; closed forms for model charts."""
        data = self.branches[branch]
        if self.model:
            phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
            X = np.empty((len(data["H"]), n_phi))
            V = np.empty_like(X)
            for i, ai in enumerate(data["a"]):
                X[i], V[i] = model_angle(ai, phi, branch, self.eps)
            return phi, X, V
        return angle_map(self.pot, data["H"], n_phi=n_phi, omega=data["omega"])

    def dump(self, path):
        doc = {
            "version": self.VERSION,
            "model": self.model,
            "eps": self.eps,
            "coeffs": None if self.model else self.pot.coeffs.tolist(),
            "branches": {
                name: {key: val.tolist() for key, val in data.items()}
                for name, data in self.branches.items()
            },
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("version") != cls.VERSION:
            raise ValueError(f"chart version {doc.get('version')!r} not supported")
        pot = None if doc["model"] else OneWellPotential(doc["coeffs"])
        branches = {
            name: {key: np.asarray(val) for key, val in data.items()}
            for name, data in doc["branches"].items()
        }
        return cls(pot, doc["eps"], doc["model"], branches)
