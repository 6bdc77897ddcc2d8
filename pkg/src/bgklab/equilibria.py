"""Homogeneous equilibria of the periodic Vlasov-Poisson system.

A spatially uniform state is described by an even velocity profile
mu(v) = F(v^2/2) built from an energy distribution F.  This module collects
the linear-theory toolbox around such states:

  * the dielectric function

        K(p, theta) = -(1/p^2) int p/(p v - theta) dmu/dv dv,   Im theta < 0,

    extended to real theta by the Plemelj formula,
  * the Penrose criterion and its stability margin,
  * marginal-stability diagnostics (1 + K(1,0) = 0 plus off-resonance
    lower bounds),
  * bifurcation constants of the density response G(y) = int F(v^2/2-y) dv,
  * the closed-form Green function of the two-kernel Poisson family,
  * the spectrum of the linearized elliptic operator along the small-wave
    bifurcation curve.

The catalog families are combinations of generalized Poisson kernels

    M_j(e) = c_j (1+2e)^{-j},   c_1 = 1/pi, c_2 = 2/pi, c_3 = 8/(3 pi),

a pair of unit-width Lorentzians centered at +-alpha, and a pair of
Gaussians of standard deviation delta centered at +-alpha.  All carry unit
mass.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._util import leggauss

__all__ = [
    "EnergyDistribution",
    "DielectricSample",
    "BifurcationConstants",
    "PenroseResult",
    "MarginalFlags",
    "LepsilonResult",
    "dielectric",
    "dielectric_closed",
    "dielectric_scan",
    "penrose_unstable",
    "marginal_check",
    "bifurcation_constants",
    "green_poisson2",
    "green_poisson2_roots",
    "lepsilon_spectrum",
]

_POISSON_C = (1.0 / np.pi, 2.0 / np.pi, 8.0 / (3.0 * np.pi))


def _poisson_kernel(e, j, a=0):
    """a-th energy derivative of M_j(e) = c_j (1+2e)^{-j}."""
    e = np.asarray(e, dtype=float)
    if np.any(1.0 + 2.0 * e <= 0.0):
        raise ValueError("Poisson kernels are defined for e > -1/2")
    pref = _POISSON_C[j - 1]
    for i in range(a):
        pref *= -2.0 * (j + i)
    return pref * (1.0 + 2.0 * e) ** (-(j + a))


def _coshsqrt_series(z, a):
    """d^a/dz^a cosh(sqrt(z)) by power series, entire in z, 0 <= a <= 4.

    sum_k z^k (k+a)! / (k! (2k+2a)!); accurate to machine precision for
    |z| < 36 with 40 terms.
    """
    z = np.asarray(z, dtype=float)
    term = np.full_like(z, math.factorial(a) / math.factorial(2 * a))
    acc = term.copy()
    for k in range(1, 40):
        term = term * z * (k + a) / (k * (2 * k + 2 * a) * (2 * k + 2 * a - 1))
        acc += term
    return acc


# split of d^a/dz^a cosh(sqrt(z)) = [P(s) e^s + Q(s) e^{-s}] / (2^{a+1} s^{2a-1+2})
# into half-exponential parts, s = sqrt(z); used with the Gaussian factor
# folded in so the product never overflows
_COSH_PQ = (
    (lambda s: np.ones_like(s), lambda s: np.ones_like(s), 0),
    (lambda s: np.ones_like(s), lambda s: -np.ones_like(s), 1),
    (lambda s: s - 1.0, lambda s: s + 1.0, 3),
    (lambda s: s * s - 3.0 * s + 3.0, lambda s: -(s * s + 3.0 * s + 3.0), 5),
    (
        lambda s: s**3 - 6.0 * s * s + 15.0 * s - 15.0,
        lambda s: s**3 + 6.0 * s * s + 15.0 * s + 15.0,
        7,
    ),
)


class EnergyDistribution:
    """Even equilibrium profile expressed through its energy distribution.

    Instances evaluate F(e) and its energy derivatives up to order four,
    the velocity profile mu(v) = F(v^2/2) with d mu/dv = v F'(v^2/2), the
    density-response derivatives partial_y^n G(0) with

        G(y) = int_R F(v^2/2 - y) dv,

    and carry the family tag plus parameters used to build them.
    """

    def __init__(self, family, params, evaluator, dfuncs=None):
        self.family = family
        self.params = dict(params)
        self._eval = evaluator
        self._dfuncs = dfuncs
        self._base = None
        self._lam = 1.0

    # ------------------------------------------------------------ catalog
    @classmethod
    def poisson2(cls, alpha):
        """(M_1 - alpha M_2)/(1 - alpha); marginally stable at alpha = 1/2."""
        if not alpha < 1.0:
            raise ValueError("poisson2 requires alpha < 1")

        def ev(e, a=0):
            return (_poisson_kernel(e, 1, a) - alpha * _poisson_kernel(e, 2, a)) / (1.0 - alpha)

        return cls("poisson2", {"alpha": float(alpha)}, ev)

    @classmethod
    def poisson3(cls, alpha, beta):
        """(M_1 + alpha M_2 + beta M_3)/(1 + alpha + beta)."""
        norm = 1.0 + alpha + beta
        if norm == 0.0:
            raise ValueError("poisson3 requires 1 + alpha + beta != 0")

        def ev(e, a=0):
            return (
                _poisson_kernel(e, 1, a)
                + alpha * _poisson_kernel(e, 2, a)
                + beta * _poisson_kernel(e, 3, a)
            ) / norm

        return cls("poisson3", {"alpha": float(alpha), "beta": float(beta)}, ev)

    @classmethod
    def lorentz2(cls, alpha):
        """Unit-width Lorentzian pair at +-alpha.

        In the variable w = 2e the profile is a real part of a simple pole,

            F(e) = (2/pi) Re[ A / (w - w0) ],  A = (1-i alpha)/2,
            w0 = -(1-i alpha)^2,

        so every energy derivative is closed form.
        """
        A = 0.5 * (1.0 - 1j * alpha)
        w0 = -((1.0 - 1j * alpha) ** 2)

        def ev(e, a=0):
            w = 2.0 * np.asarray(e, dtype=float)
            pref = A * (-2.0) ** a * math.factorial(a)
            return (2.0 / np.pi) * (pref / (w - w0) ** (a + 1)).real

        return cls("lorentz2", {"alpha": float(alpha)}, ev)

    @classmethod
    def gauss2(cls, alpha, delta):
        """Gaussian pair of standard deviation delta at +-alpha.

        Using cosh(sqrt(.)) the even combination extends to an entire
        function of the energy,

            F(e) = A exp(-e/delta^2) cosh(sqrt(b e)),
            A = exp(-alpha^2/(2 delta^2)) / (delta sqrt(2 pi)),
            b = 2 alpha^2 / delta^4.
        """
        if delta <= 0:
            raise ValueError("gauss2 requires delta > 0")
        la = -(alpha**2) / (2 * delta**2) - math.log(delta * math.sqrt(2 * math.pi))
        b = 2.0 * alpha**2 / delta**4
        r = 1.0 / delta**2

        def ev(e, a=0):
            # A e^{-r e} d^m/dz^m cosh(sqrt(z)) at z = b e, summed over the
            # product rule; for large z the exponentials are combined first
            # (the exponents are <= -(v -+ alpha)^2/(2 delta^2) when
            # e = v^2/2, so each half stays bounded)
            e = np.asarray(e, dtype=float)
            z = b * e
            small = z < 36.0
            out = np.zeros_like(e)
            for m in range(a + 1):
                cm = np.zeros_like(e)
                if np.any(small):
                    gauss = np.exp(la - r * e[small])
                    cm[small] = gauss * _coshsqrt_series(z[small], m)
                if np.any(~small):
                    s = np.sqrt(z[~small])
                    P, Q, pw = _COSH_PQ[m]
                    ep = np.exp(la + s - r * e[~small])
                    em = np.exp(la - s - r * e[~small])
                    cm[~small] = (P(s) * ep + Q(s) * em) / (2.0 ** (m + 1) * s**pw)
                out += math.comb(a, m) * (-r) ** (a - m) * b**m * cm
            return out

        return cls("gauss2", {"alpha": float(alpha), "delta": float(delta)}, ev)

    @classmethod
    def tabulated(cls, fn, dfns=None, name="tabulated"):
        """Wrap a vectorized evaluator F(e); derivatives fall back to
        central differences when dfns (tuple of callables for a = 1..4) is
        not supplied."""

        def ev(e, a=0):
            e = np.asarray(e, dtype=float)
            if a == 0:
                return np.asarray(fn(e), dtype=float)
            if dfns is not None and len(dfns) >= a:
                return np.asarray(dfns[a - 1](e), dtype=float)
            h = 1e-3
            prev = lambda x: ev(x, a - 1)
            return (prev(e + h) - prev(e - h)) / (2 * h)

        return cls(name, {}, ev)

    # --------------------------------------------------------- evaluation
    def __call__(self, e, a=0):
        """F and derivatives: d^a F / de^a, 0 <= a <= 4."""
        if not 0 <= a <= 4:
            raise ValueError("derivative order must satisfy 0 <= a <= 4")
        return self._eval(e, a)

    def mu(self, v):
        """Velocity profile mu(v) = F(v^2/2)."""
        v = np.asarray(v, dtype=float)
        return self._eval(0.5 * v * v, 0)

    def dmu(self, v):
        """d mu / dv = v F'(v^2/2)."""
        v = np.asarray(v, dtype=float)
        return v * self._eval(0.5 * v * v, 1)

    def rescaled(self, lam):
        """Mass-preserving rescaling F_lam(e) = lam F(lam^2 e)."""
        lam = float(lam)
        if lam <= 0:
            raise ValueError("rescaling factor must be positive")
        base = self

        def ev(e, a=0):
            return lam ** (1 + 2 * a) * base._eval(lam * lam * np.asarray(e, dtype=float), a)

        out = EnergyDistribution(
            "rescaled-" + base.family, dict(base.params, lam=lam), ev
        )
        out._base = base
        out._lam = lam
        return out

    def marginal_rescaling(self):
        """The unique lam > 0 with partial_y G[F_lam](0) = -1.

        Rescaling multiplies partial_y G(0) by lam^2, so lam exists exactly
        when the unscaled value is negative.
        """
        g1 = self.moment_dG(1)
        if g1 >= 0:
            raise ValueError("profile has partial_y G(0) >= 0; no marginal rescaling")
        return (-1.0 / g1) ** 0.5

    # ----------------------------------------------------------- moments
    def moment_dG(self, n):
        """partial_y^n G(0) = (-1)^n int d^n F/de^n (v^2/2) dv.

        Closed double-factorial tables for the Poisson and Lorentzian
        families, quadrature otherwise.
        """
        fam, p = self.family, self.params
        if self._base is not None:
            return self._lam ** (2 * n) * self._base.moment_dG(n)
        if fam == "poisson2":
            a = p["alpha"]
            return _dfact(2 * n - 1) * (1.0 - a * (2 * n + 1)) / (1.0 - a)
        if fam == "poisson3":
            a, b = p["alpha"], p["beta"]
            num = _dfact(2 * n - 1) + a * _dfact(2 * n + 1) + b * _dfact(2 * n + 3) / 3.0
            return num / (1.0 + a + b)
        if fam == "lorentz2":
            return float(self.dG_at(0.0, n))
        if n > 4:
            raise ValueError("quadrature moments available for n <= 4 only")
        return _integrate_line(lambda v: (-1.0) ** n * self._eval(0.5 * v * v, n))

    def dG_at(self, y, n=1):
        """partial_y^n G evaluated at potential level y (vectorized).

        Poisson families:  sum_j w_j (1-2y)^{1/2-j-n} prod_i (2j-1+2i).
        Lorentzian pair:   2 Re[ A (2n-1)!! B(y)^{-n-1/2} ],
                           B(y) = (1-i alpha)^2 - 2y.
        Other families fall back to quadrature in v.
        """
        y = np.asarray(y, dtype=float)
        if self._base is not None:
            lam = self._lam
            return lam ** (2 * n) * self._base.dG_at(lam * lam * y, n)
        fam, p = self.family, self.params
        if fam in ("poisson2", "poisson3"):
            if fam == "poisson2":
                w = np.array([1.0, -p["alpha"], 0.0]) / (1.0 - p["alpha"])
            else:
                w = np.array([1.0, p["alpha"], p["beta"]]) / (1.0 + p["alpha"] + p["beta"])
            out = np.zeros_like(y)
            for j in (1, 2, 3):
                pref = 1.0
                for i in range(n):
                    pref *= 2 * j - 1 + 2 * i
                out += w[j - 1] * pref * (1.0 - 2.0 * y) ** (0.5 - j - n)
            return out
        if fam == "lorentz2":
            al = p["alpha"]
            A = 0.5 * (1.0 - 1j * al)
            B = (1.0 - 1j * al) ** 2 - 2.0 * y.astype(complex)
            return 2.0 * (A * _dfact(2 * n - 1) * B ** (-(n + 0.5))).real
        scalar = y.ndim == 0
        ys = np.atleast_1d(y)
        out = np.array(
            [
                _integrate_line(lambda v, yy=yy: (-1.0) ** n * self._eval(0.5 * v * v - yy, n))
                for yy in ys
            ]
        )
        return out[0] if scalar else out

    # ------------------------------------------------------- diagnostics
    def mass(self):
        """int mu dv, quadrature; unity for all catalog families."""
        return _integrate_line(lambda v: self._eval(0.5 * v * v, 0))

    def ed_norm(self, e_max=60.0, n=2001):
        """sup over a <= 4 of (1+e^2) |d^a F/de^a| on the half-line e >= 0,
        sampled on a grid; the extension to negative energies belongs to
        the reconstruction layer."""
        e = np.concatenate([np.linspace(0.0, 1.0, n // 2), np.geomspace(1.0, e_max, n // 2)])
        wgt = 1.0 + e * e
        return max(float(np.max(wgt * np.abs(self._eval(e, a)))) for a in range(5))

    @property
    def nonnegative(self):
        """True when F >= 0 on the sampled half-line e >= 0."""
        e = np.linspace(0.0, 60.0, 4001)
        vals = self._eval(e, 0)
        return bool(np.min(vals) >= -1e-12 * max(1.0, float(np.max(np.abs(vals)))))


def _dfact(n):
    """(n)!! with (-1)!! = 1."""
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


# -------------------------------------------------------------- quadrature
def _panels(lo, hi, f, n=64):
    x, w = leggauss(n)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return half * np.sum(w * f(mid + half * x))


def _integrate_line(f, B=16.0, n=64):
    """int_R f dv for |f| <~ v^{-2} at infinity.

    Panels on [-B, B] doubling away from the origin, then the exact change
    of variables v = 1/u maps each tail onto a finite smooth integral.
    """
    pts = [0.0]
    step = 1.0
    while pts[-1] < B:
        pts.append(min(pts[-1] + step, B))
        step *= 2.0
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += _panels(lo, hi, f, n)
        total += _panels(-hi, -lo, f, n)
    tail = lambda u: np.where(u != 0.0, f(1.0 / np.where(u != 0.0, u, 1.0)) / u**2, 0.0)
    total += _panels(0.0, 1.0 / B, tail, n)
    total += _panels(-1.0 / B, 0.0, tail, n)
    return float(total)


def _cauchy_line(g, w, is_real):
    """int_R g(v)/(v - w) dv with the pole value subtracted.

    For real w the principal value is returned; for Im w < 0 the plain
    integral.  The identity

        int g/(v-w) = int [g(v) - g(wr)]/(v-w) dv + g(wr) int dv/(v-w)

    over [-B, B] keeps the integrand bounded, with the log factor exact;
    panels refine geometrically toward Re w until the |Im w| scale is
    resolved, and the tails use v = 1/u.
    """
    wr = w.real if not is_real else float(w)
    B = max(16.0, 4.0 * (1.0 + abs(w)))
    gw = float(g(np.array([wr]))[0])

    brk = {-B, B}
    for d in (0.5, 2.0, 8.0, 32.0, 128.0, 512.0):
        for s in (-1.0, 1.0):
            v = wr + s * d
            if -B < v < B:
                brk.add(v)
    # on the axis the subtracted quotient is analytic, so stop refining at
    # the profile's own scale; off the axis resolve down to |Im w|
    scale = 1e-2 if is_real else max(abs(w.imag), 1e-12)
    d = 0.5
    while d > scale:
        d *= 0.5
        for s in (-1.0, 1.0):
            v = wr + s * d
            if -B < v < B:
                brk.add(v)
    brk.add(wr)
    pts = np.array(sorted(brk))

    def h(v):
        return (g(v) - gw) / (v - w)

    total = 0.0 + 0.0j
    x, wq = leggauss(48)
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        total += half * np.sum(wq * h(mid + half * x))
    # exact pole integral over [-B, B]; B > |w| holds by construction
    if is_real:
        total += gw * math.log((B - wr) / (B + wr))
    else:
        total += gw * np.log((B - w) / (-B - w))
    # tails: v = 1/u, int_{|v|>B} g/(v-w) = int g(1/u) / (u (1 - w u)) du
    def tail(u):
        safe = np.where(u != 0.0, u, 1.0)
        val = g(1.0 / safe) / (safe * (1.0 - w * safe))
        return np.where(u != 0.0, val, 0.0)

    for lo, hi in ((0.0, 1.0 / B), (-1.0 / B, 0.0)):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        total += half * np.sum(wq * tail(mid + half * x))
    return total


# -------------------------------------------------------------- dielectric
@dataclass(frozen=True)
class DielectricSample:
    """One evaluation of the dispersion function 1 + K(p, theta)."""

    p: int
    theta: complex
    value: complex

    @property
    def K(self):
        return self.value - 1.0


def dielectric(F, p, theta):
    """1 + K(p, theta) for Im theta <= 0 by contour-safe quadrature.

    Strictly below the real axis

        K(p,theta) = -(1/p^2) int dmu/dv / (v - theta/p) dv,

    while on the axis the Plemelj formula applies,

        K(p,theta) = -(1/p^2) p.v. int dmu/dv / (v - theta/p) dv
                     + i pi/p^2 (dmu/dv)(theta/p).
    """
    p = int(p)
    if p == 0:
        raise ValueError("p must be a nonzero integer")
    theta = complex(theta)
    if theta.imag > 0:
        raise ValueError("dielectric requires Im theta <= 0")
    q = abs(p)
    w = theta / q
    if theta.imag == 0.0:
        val = _cauchy_line(F.dmu, w.real, is_real=True)
        K = -val / q**2 + 1j * math.pi / q**2 * float(F.dmu(np.array([w.real]))[0])
    else:
        K = -_cauchy_line(F.dmu, w, is_real=False) / q**2
    return DielectricSample(p=p, theta=theta, value=1.0 + K)


def dielectric_closed(F, p, theta):
    """Closed-form 1 + K for the rational catalog families.

    With zeta = |p| + i theta the Poisson kernels give

        K_{M_1} = zeta^{-2},
        K_{M_2} = zeta^{-2} + 2|p| zeta^{-3},
        K_{M_3} = zeta^{-2} + 2|p| zeta^{-3} + 2 p^2 zeta^{-4},

    and the Lorentzian pair, with w = theta/|p|,

        K = -(1/(2 p^2)) [ (alpha + i - w)^{-2} + (-alpha + i - w)^{-2} ].

    Rescaled profiles use K_lam(p, theta) = lam^2 K(p, lam theta).
    """
    p = int(p)
    if p == 0:
        raise ValueError("p must be a nonzero integer")
    theta = complex(theta)
    base = F
    lam = 1.0
    while base._base is not None:
        lam *= base._lam
        base = base._base
    th = lam * theta
    q = abs(p)
    fam, prm = base.family, base.params
    if fam in ("poisson2", "poisson3"):
        zeta = q + 1j * th
        k1 = zeta**-2.0
        k2 = k1 + 2.0 * q * zeta**-3.0
        k3 = k2 + 2.0 * q * q * zeta**-4.0
        if fam == "poisson2":
            a = prm["alpha"]
            K = (k1 - a * k2) / (1.0 - a)
        else:
            a, b = prm["alpha"], prm["beta"]
            K = (k1 + a * k2 + b * k3) / (1.0 + a + b)
    elif fam == "lorentz2":
        al = prm["alpha"]
        w = th / q
        K = -(0.5 / q**2) * ((al + 1j - w) ** -2.0 + (-al + 1j - w) ** -2.0)
    else:
        raise ValueError(f"no closed-form dielectric for family {fam!r}")
    return DielectricSample(p=p, theta=theta, value=1.0 + lam**2 * K)


def dielectric_scan(F, ps, thetas):
    """Row-major scan; returns columns (p, Re theta, Im theta, Re, Im of 1+K)."""
    rows = []
    for p in ps:
        for th in thetas:
            s = dielectric(F, p, th)
            rows.append((p, th.real, complex(th).imag, s.value.real, s.value.imag))
    cols = np.array(rows, dtype=float).T
    return tuple(cols)


# ----------------------------------------------------------------- Penrose
@dataclass(frozen=True)
class PenroseResult:
    unstable: bool
    margin: float
    m_shaped: bool


def penrose_unstable(F, v_hi=40.0):
    """Penrose criterion for an even profile with at most one interior dip.

    The margin is int (mu(0) - mu(v))/v^2 dv; the profile is spectrally
    unstable on the line exactly when it is negative.  The removable
    singularity is handled by subtracting the quadratic Taylor term
    -(1/2) mu''(0) v^2 = -(1/2) F'(0) v^2 on |v| < 1e-2.
    """
    grid = np.linspace(1e-4, v_hi, 8192)
    sign = np.sign(F.dmu(grid))
    sign = sign[sign != 0.0]
    flips = int(np.sum(sign[1:] != sign[:-1]))
    if flips == 0 and sign[0] < 0:
        m_shaped = False
    elif flips == 1 and sign[0] > 0:
        m_shaped = True
    else:
        raise ValueError("profile is neither decreasing nor M-shaped on v > 0")

    r, V = 1e-2, 1e5
    mu0 = float(F.mu(np.array([0.0]))[0])
    d2mu0 = float(F(np.array([0.0]), 1)[0])
    inner = _panels(
        0.0, r, lambda v: (mu0 - F.mu(v) + 0.5 * d2mu0 * v * v) / v**2, n=64
    )
    outer = 0.0
    lo = r
    for hi in (1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0, V):
        outer += _panels(lo, hi, lambda v: (mu0 - F.mu(v)) / v**2, n=96)
        lo = hi
    margin = 2.0 * (inner + outer) - d2mu0 * r + 2.0 * mu0 / V
    return PenroseResult(unstable=bool(margin < 0.0), margin=float(margin), m_shaped=m_shaped)


# ---------------------------------------------------------- marginal check
@dataclass(frozen=True)
class MarginalFlags:
    resonance: bool
    real_line: bool
    off_resonance: bool
    residual: float
    min_ratio: float
    min_off: float

    @property
    def ok(self):
        return self.resonance and self.real_line and self.off_resonance


def marginal_check(F, tol=1e-8, ratio_floor=0.05, off_floor=0.5):
    """Three marginal-stability clauses for the profile F.

    1. resonance:      |1 + K(1, 0)| <= tol,
    2. real_line:      |1 + K(1, theta)| >= ratio_floor min(theta^2, 1)
                       on a real-theta grid,
    3. off_resonance:  |1 + K(p, theta)| >= off_floor for 2 <= |p|,
                       on a (p, theta) grid.
    """
    res = abs(dielectric(F, 1, 0.0).value)
    thetas = np.linspace(-6.0, 6.0, 49)
    thetas = thetas[thetas != 0.0]
    ratios = [
        abs(dielectric(F, 1, t).value) / min(t * t, 1.0) for t in thetas
    ]
    min_ratio = float(min(ratios))
    off = [
        abs(dielectric(F, p, t).value)
        for p in (2, 3, 4)
        for t in np.linspace(-8.0, 8.0, 17)
    ]
    min_off = float(min(off))
    return MarginalFlags(
        resonance=bool(res <= tol),
        real_line=bool(min_ratio >= ratio_floor),
        off_resonance=bool(min_off >= off_floor),
        residual=float(res),
        min_ratio=min_ratio,
        min_off=min_off,
    )


# ------------------------------------------------------------- bifurcation
@dataclass(frozen=True)
class BifurcationConstants:
    """Taylor data of the density response at the marginal point.

    c2 feeds the second harmonic of the bifurcating potential and a2 sets
    the bottom of the linearized elliptic spectrum:

        c2 = -(1/12) partial_y^2 G(0,0),
        a2 = (1/4) [ partial_y^3 G(0,0) - (1/3)(partial_y^2 G(0,0))^2 ].
    """

    dG1: float
    dG2: float
    dG3: float
    c2: float
    a2: float


def bifurcation_constants(F):
    """Assemble BifurcationConstants from the first three G-derivatives."""
    g1 = F.moment_dG(1)
    g2 = F.moment_dG(2)
    g3 = F.moment_dG(3)
    return BifurcationConstants(
        dG1=float(g1),
        dG2=float(g2),
        dG3=float(g3),
        c2=float(-g2 / 12.0),
        a2=float(0.25 * (g3 - g2 * g2 / 3.0)),
    )


# ---------------------------------------------------------- Green function
def green_poisson2_roots(alpha, xi):
    """Roots of Q(z) = z^3 + z - c, c = 2 alpha |xi| / (1 - alpha).

    Returns (two_rho, kappa, decays): the real root 2 rho >= 0, the
    imaginary part kappa = sqrt(1 + 3 rho^2) of the conjugate pair at
    -rho +- i kappa, and the decay flag 2 rho < |xi|.
    """
    if not 0.0 <= alpha <= 0.5:
        raise ValueError("green_poisson2 requires 0 <= alpha <= 1/2")
    if xi == 0:
        raise ValueError("xi must be nonzero")
    c = 2.0 * alpha * abs(xi) / (1.0 - alpha)
    # Cardano for the unique real root of the depressed cubic, then polish
    t = 0.5 * c
    s = math.sqrt(t * t + 1.0 / 27.0)
    z = np.cbrt(t + s) + np.cbrt(t - s)
    for _ in range(3):
        z -= (z**3 + z - c) / (3 * z * z + 1.0)
    two_rho = float(z)
    rho = 0.5 * two_rho
    kappa = math.sqrt(1.0 + 3.0 * rho * rho)
    if not kappa > 0.0:
        raise ValueError("degenerate root configuration")
    return two_rho, kappa, bool(two_rho < abs(xi))


def green_poisson2(alpha, xi, tau):
    """Regular part of the Green function of the poisson2 family.

    Summing e^{(z - |xi|) tau} (c - z)/(3 z^2 + 1) over the three roots of
    Q(z) = z^3 + z - c gives

        G_reg(tau) = 8 rho^3/(1 + 12 rho^2) e^{(2 rho - |xi|) tau}
                     + 2 Re[ e^{(z0 - |xi|) tau} (c - z0)/(3 z0^2 + 1) ],

    z0 = -rho + i kappa.  The delta_0(tau) singular part is not included.
    The sign of the real-root term and the factor 2 on the conjugate-pair
    term were fixed against a numerical inverse Fourier transform of
    1/(1 + K); at alpha = 0 the sum collapses to -sin(tau) e^{-|xi| tau}.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0.0):
        raise ValueError("tau must be positive")
    two_rho, kappa, _ = green_poisson2_roots(alpha, xi)
    c = 2.0 * alpha * abs(xi) / (1.0 - alpha)
    rho = 0.5 * two_rho
    out = (
        8.0 * rho**3 / (1.0 + 12.0 * rho * rho) * np.exp((two_rho - abs(xi)) * tau)
    )
    z0 = -rho + 1j * kappa
    out = out + 2.0 * (
        np.exp((z0 - abs(xi)) * tau) * (c - z0) / (3.0 * z0 * z0 + 1.0)
    ).real
    return out if out.ndim else float(out)


# ------------------------------------------------------- elliptic spectrum
@dataclass
class LepsilonResult:
    """Parity-split spectrum of the linearized elliptic operator."""

    eps: float
    P: int
    evals_cos: np.ndarray
    evecs_cos: np.ndarray
    evals_sin: np.ndarray
    evecs_sin: np.ndarray
    c2: float
    a2: float
    kernel_overlap: float
    emin_overlap: float

    @property
    def eigenvalues(self):
        return np.sort(np.concatenate([self.evals_cos, self.evals_sin]))


def lepsilon_spectrum(F, eps, P=24):
    """Spectrum of -d^2/dx^2 + Pi_{>=1} (partial_y G)(phi_eps(x), eps).

    The potential of the operator is sampled along the bifurcation profile

        phi_eps(x) = eps cos x + eps^2 c2 cos 2x,

    and the explicit eps-dependence of the response along the wave curve
    contributes the constant tilt

        (partial_y G)(0, eps) = -1 - (a2/2) eps^2 + O(eps^3),

    which is forced by solvability of the elliptic equation at third
    order; without it the odd-block kernel element would be lost.  Fourier
    blocks of the even potential W: the cosine block carries
    W_{|p-q|} + W_{p+q} and the sine block W_{|p-q|} - W_{p+q}.
    """
    if P < 16:
        raise ValueError("truncation requires P >= 16")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    cst = bifurcation_constants(F)
    N = max(256, 8 * P)
    x = 2.0 * np.pi * np.arange(N) / N
    phi = eps * np.cos(x) + eps * eps * cst.c2 * np.cos(2.0 * x)
    W = F.dG_at(phi) - 0.5 * cst.a2 * eps * eps
    what = np.fft.rfft(W).real / N

    def wk(k):
        return what[k] if k < len(what) else 0.0

    pq = np.arange(1, P + 1, dtype=float)
    Ac = np.diag(pq**2)
    As = np.diag(pq**2)
    for i in range(P):
        for j in range(P):
            s, d = wk(i + j + 2), wk(abs(i - j))
            Ac[i, j] += d + s
            As[i, j] += d - s
    evals_cos, evecs_cos = np.linalg.eigh(Ac)
    evals_sin, evecs_sin = np.linalg.eigh(As)

    for name, vecs in (("cos", evecs_cos), ("sin", evecs_sin)):
        if np.max(np.abs(vecs[-1, :2])) > 1e-8:
            warnings.warn(
                f"truncation P={P} leaves weight on the last {name} mode",
                stacklevel=2,
            )

    # predicted kernel d phi_eps/dx (sine block) and its Hilbert transform
    # (cosine block), both normalized
    dphi = np.zeros(P)
    dphi[0] = -eps
    dphi[1] = -2.0 * eps * eps * cst.c2
    if eps > 0.0:
        dphi /= np.linalg.norm(dphi)
        kernel_overlap = float(abs(evecs_sin[:, 0] @ dphi))
        emin_overlap = float(abs(evecs_cos[:, 0] @ dphi))
    else:
        kernel_overlap = emin_overlap = 1.0
    return LepsilonResult(
        eps=float(eps),
        P=int(P),
        evals_cos=evals_cos,
        evecs_cos=evecs_cos,
        evals_sin=evals_sin,
        evecs_sin=evecs_sin,
        c2=cst.c2,
        a2=cst.a2,
        kernel_overlap=kernel_overlap,
        emin_overlap=emin_overlap,
    )
