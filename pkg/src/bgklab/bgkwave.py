"""BGK waves of the one-well Vlasov-Poisson system: build, invert, probe.

A wave pairs an energy profile F with a single-well potential so that

    mu(x, v) = F(v^2/2 - psi(x)),      psi'' = int_R mu dv - 1,

with the trough pinned at psi(pi) = 0 and the crest at psi(0) = 2 eps.  Free
orbits e = v^2/2 - psi >= 0 only see the trough slice m_F(v^2/2) = mu(pi, v),
so a wave is determined by the pair (m_F, psi); the Poisson identity then
forces the trapped branch.  With N(y) = 1 + psi''(psi^{-1}(y)) on [0, 2 eps]
the trapped values follow from the half-order Abel transforms of module abel,

    F(e)    = m_F(0)  + (2 pi)^{-1/2} I[N'  + J[m_F'] ](-e),        e < 0,
    d_eF(e) = m_F'(0) - (2 pi)^{-1/2} I[N'' - J[m_F'']](-e)
              - C1 / (pi sqrt(-2 e)),

where the separatrix matching scalars

    C0 = 1 + psi''(pi) - int m_F(v^2/2) dv,
    C1 = psi''''(pi)/psi''(pi) + int m_F'(v^2/2) dv

control boundedness: C0 != 0 would put a (-e)^{-1/2} divergence into F
itself, so reconstruction requires C0 = 0, while C1 != 0 only costs the
energy derivative at the separatrix.

The second half of the module measures how a wave sits inside its family:
orbit averages over the angle-energy chart, the trough-pinned Rayleigh
solve, the quadratic form of the condition operator (whose sign pattern
encodes solvability of the family equations), the well-prepared pairing
defect of initial data, and the frame pairing

    I = iint (1 - d_x Theta(x, v)) mu dx dv,

Theta the angle coordinate, whose non-vanishing rules out a degenerate
parameterization of the two-parameter wave family.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Chebyshev

from . import abel, pendulum, specfun
from ._util import gl_nodes
from .equilibria import EnergyDistribution, _integrate_line

__all__ = [
    "BGKWave",
    "TangentElement",
    "RayleighSolution",
    "FramePairing",
    "compat",
    "compatible_profile",
    "reconstruct",
    "inverse",
    "InverseResult",
    "rayleigh_solve",
    "trajectory_average",
    "tcond_quadratic",
    "tcond_bracket",
    "well_prepared_residual",
    "frame_pairing",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------- matching
def compat(m_F, pot):
    """Separatrix matching scalars (C0, C1) of a profile/potential pair.

        C0 = 1 + psi''(pi) - int m_F(v^2/2) dv,
        C1 = psi''''(pi)/psi''(pi) + int m_F'(v^2/2) dv.

    The curvature ratio stands in for the psi'''/psi' limit at the trough;
    for cosine series the two agree exactly.  pot = None means the
    homogeneous state psi = 0, where both curvature terms drop.
    """
    mass = float(_integrate_line(lambda v: m_F(0.5 * v * v)))
    dmass = float(_integrate_line(lambda v: m_F(0.5 * v * v, 1)))
    if pot is None:
        return 1.0 - mass, dmass
    C0 = 1.0 + float(pot.d2(np.pi)) - mass
    C1 = float(pot.d4(np.pi)) / float(pot.d2(np.pi)) + dmass
    return C0, C1


def compatible_profile(F0, pot):
    """Adjust F0 by mass and energy scalings until it matches pot.

    The two knobs m_F(e) = s lam F0(lam^2 e) move the matching scalars
    independently: the mass factor s sets C0 = 0 through

        s = 1 + psi''(pi),

    and since int m_F'(v^2/2) dv = s lam^2 g with g = -d_yG[F0](0), the
    rescaling

        lam^2 = -psi''''(pi) / (s g psi''(pi))

    sets C1 = 0.  Requires g > 0 (profiles capable of a marginal
    rescaling), which makes lam^2 > 0 for a single well.
    """
    g = -float(F0.moment_dG(1))
    if g <= 0:
        raise ValueError("profile has d_yG(0) >= 0; no energy rescaling fixes C1")
    d2 = float(pot.d2(np.pi))
    s = 1.0 + d2
    if s <= 0:
        raise ValueError("trough curvature below -1; no positive mass scaling")
    lam2 = -float(pot.d4(np.pi)) / (s * g * d2)
    if lam2 <= 0:
        raise ValueError("no positive energy rescaling fixes C1 for this pair")
    lam = math.sqrt(lam2)
    base = F0.rescaled(lam)

    def ev(e, a=0):
        return s * base(e, a)

    params = dict(F0.params, s=s, lam_c=lam)
    return EnergyDistribution("compat-" + F0.family, params, ev)


# ----------------------------------------------------------- construction
def _trap_caches(m_F, pot, n_cheb):
    """Chebyshev interpolants of the Abel sources h1 = N' + J[m_F'] and
    h2 = N'' - J[m_F''] on y in [0, 2 eps].

    Both are analytic up to the closed endpoints: the cosine series is even
    about x = 0 and x = pi, so psi^{-1} composes to analytic functions of y
    at crest and trough, and the ratio forms of the potential remove the
    0/0 at the trough.
    """
    depth = 2.0 * pot.eps
    t = np.polynomial.chebyshev.chebpts1(n_cheb)
    y = 0.5 * depth * (t + 1.0)
    x = pot.inverse_on_branch(y)
    h1 = pot.w_ratio(x) + abel.transform_J(lambda e: m_F(e, 1), y)
    h2 = pot.w_prime_over_d1(x) - abel.transform_J(lambda e: m_F(e, 2), y)
    h1c = Chebyshev.fit(y, h1, deg=n_cheb - 1, domain=[0.0, depth])
    h2c = Chebyshev.fit(y, h2, deg=n_cheb - 1, domain=[0.0, depth])
    return h1c, h2c


def _extended_profile(m_F, pot, h1c, h2c, C1, n_abel=160, deg_fit=256):
    """Evaluator of the trapped extension; free side delegates to m_F.

    The half-order transforms carry a sqrt(-e) factor, so their values are
    smooth functions of u = sqrt(-e); they are fitted once as Chebyshev
    interpolants in u, and trapped evaluation on arbitrarily large
    phase-space grids stays O(size).  The C1 singular term is kept
    analytic outside the fit.
    """
    depth = 2.0 * pot.eps
    mF0 = float(m_F(0.0))
    mF1 = float(m_F(0.0, 1))
    u_hi = np.sqrt(depth)
    uu = 0.5 * u_hi * (1.0 - np.cos(np.pi * np.linspace(0.0, 1.0, 4 * deg_fit)))
    g0 = Chebyshev.fit(
        uu, abel.transform_I(h1c, uu * uu, n=n_abel), deg=deg_fit, domain=[0.0, u_hi]
    )
    g1 = Chebyshev.fit(
        uu, abel.transform_I(h2c, uu * uu, n=n_abel), deg=deg_fit, domain=[0.0, u_hi]
    )

    def ev(e, a=0):
        e = np.asarray(e, dtype=float)
        scalar = e.ndim == 0
        e = np.atleast_1d(e)
        if np.any(e < -depth * (1.0 + 1e-10) - 1e-300):
            raise ValueError("energy below the well bottom -psi(0)")
        out = np.empty(e.shape, dtype=float)
        neg = e < 0.0
        if np.any(~neg):
            out[~neg] = np.asarray(m_F(e[~neg], a), dtype=float)
        if np.any(neg):
            u = np.sqrt(np.clip(-e[neg], 0.0, depth))
            if a == 0:
                out[neg] = mF0 + _INV_SQRT_2PI * g0(u)
            elif a == 1:
                vals = mF1 - _INV_SQRT_2PI * g1(u)
                out[neg] = vals - C1 / (np.pi * np.sqrt(2.0) * np.maximum(u, 1e-300))
            else:
                raise ValueError(
                    "trapped branch provides derivatives up to first order only"
                )
        out = out.reshape(np.shape(e))
        return out.item() if scalar else out

    return EnergyDistribution("extended-" + m_F.family, dict(m_F.params), ev)


class BGKWave:
    """A reconstructed equilibrium: extended profile, potential, density data.

    Immutable after construction; the angle-energy chart and orbit samples
    are cached lazily, so sharing one instance across probes amortizes the
    chart build.  `density_residual` stores the constructed wave's defect
    sup_x |rho - 1 - psi''| on a half-period grid; `is_pdf` flags signed
    profiles, which are legitimate waves but not probability densities.
    """

    def __init__(self, m_F, pot, C0, C1, h1c=None, h2c=None, n_grid=1024,
                 n_x=96, n_quad=128, chart_nodes=400):
        self.m_F = m_F
        self.pot = pot
        self.C0 = float(C0)
        self.C1 = float(C1)
        self._h1c = h1c
        self._h2c = h2c
        self._chart = None
        self._chart_nodes = chart_nodes
        self._angles = {}
        if pot is None:
            self.depth = 0.0
            self.F = m_F
            self.y_grid = np.zeros(0)
            self.F_grid = np.zeros(0)
            trapped_min = np.inf
        else:
            self.depth = 2.0 * pot.eps
            self.F = _extended_profile(m_F, pot, h1c, h2c, self.C1)
            t = np.linspace(0.0, 1.0, n_grid)
            self.y_grid = 0.5 * self.depth * (1.0 - np.cos(np.pi * t))
            self.F_grid = self.F(-self.y_grid)
            trapped_min = float(np.min(self.F_grid))
        x = np.linspace(0.0, np.pi, n_x)
        rho = self.rho(x, n=n_quad)
        curv = pot.d2(x) if pot is not None else np.zeros_like(x)
        self.x_grid = x
        self.rho_grid = rho
        self.density_residual = float(np.max(np.abs(rho - 1.0 - curv)))
        self.is_pdf = bool(m_F.nonnegative and trapped_min >= -1e-12)

    # -------------------------------------------------------- evaluation
    def mu(self, x, v):
        """Phase-space density mu(x, v) = F(v^2/2 - psi(x))."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        psi = self.pot(x) if self.pot is not None else np.zeros(np.shape(x))
        return self.F(0.5 * v * v - psi)

    def rho(self, x, n=128):
        """Spatial density rho(x) = int mu(x, v) dv = G[F](psi(x))."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        psi = self.pot(np.atleast_1d(x)) if self.pot is not None else np.zeros(
            np.atleast_1d(x).shape
        )
        out = abel.transform_G(self.F, psi, n=n)
        out = np.atleast_1d(out)
        return float(out[0]) if scalar else out

    @property
    def chart(self):
        """Angle-energy chart of the potential (built on first use)."""
        if self.pot is None:
            raise ValueError("homogeneous state carries no angle-energy chart")
        if self._chart is None:
            self._chart = pendulum.AngleEnergyChart.build(
                pot=self.pot, n_nodes=self._chart_nodes
            )
        return self._chart

    def angle_samples(self, branch, n_phi=512):
        """Cached (phi, X, V) orbit samples at the chart nodes of a branch."""
        key = (branch, n_phi)
        if key not in self._angles:
            self._angles[key] = self.chart.angle_samples(branch, n_phi=n_phi)
        return self._angles[key]

    # ------------------------------------------------------ serialization
    def to_dict(self):
        doc = {
            "version": 1,
            "C0": self.C0,
            "C1": self.C1,
            "psi_coeffs": None if self.pot is None else [float(c) for c in self.pot.coeffs],
            "profile": _profile_meta(self.m_F),
        }
        if self.pot is not None:
            doc["trapped"] = {
                "depth": self.depth,
                "h1": self._h1c.coef.tolist(),
                "h2": self._h2c.coef.tolist(),
            }
            doc["grid"] = {"y": self.y_grid.tolist(), "F": self.F_grid.tolist()}
        return doc

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc, **kwargs):
        if doc.get("version") != 1:
            raise ValueError(f"wave version {doc.get('version')!r} not supported")
        m_F = _profile_from_meta(doc["profile"])
        if doc["psi_coeffs"] is None:
            return cls(m_F, None, doc["C0"], doc["C1"], **kwargs)
        pot = pendulum.OneWellPotential(doc["psi_coeffs"])
        depth = doc["trapped"]["depth"]
        h1c = Chebyshev(np.asarray(doc["trapped"]["h1"]), domain=[0.0, depth])
        h2c = Chebyshev(np.asarray(doc["trapped"]["h2"]), domain=[0.0, depth])
        return cls(m_F, pot, doc["C0"], doc["C1"], h1c=h1c, h2c=h2c, **kwargs)

    @classmethod
    def load(cls, path, **kwargs):
        with open(path) as fh:
            return cls.from_dict(json.load(fh), **kwargs)


def _profile_meta(ed):
    """Serializable description of an energy profile.

    Catalog families (with their rescaled/compat wrappers) round-trip by
    name; anything else is sampled in the compactified variable
    t = arctan(sqrt(e)), which keeps the decay tail on a finite grid.
    """
    base = ed.family
    for prefix in ("compat-", "rescaled-", "scaled-", "extended-"):
        while base.startswith(prefix):
            base = base[len(prefix):]
    if base in ("poisson2", "poisson3", "lorentz2", "gauss2"):
        return {"family": ed.family, "params": {k: float(v) for k, v in ed.params.items()}}
    t = np.linspace(0.0, 0.5 * np.pi, 801)
    e = np.tan(t[:-1]) ** 2
    vals = np.concatenate([np.asarray(ed(e), dtype=float), [0.0]])
    return {"family": "tabulated", "t": t.tolist(), "values": vals.tolist()}


def _profile_from_meta(meta):
    family = meta["family"]
    if family == "tabulated":
        from scipy.interpolate import CubicSpline

        spl = CubicSpline(np.asarray(meta["t"]), np.asarray(meta["values"]))

        def fn(e):
            e = np.asarray(e, dtype=float)
            return spl(np.arctan(np.sqrt(np.maximum(e, 0.0))))

        return EnergyDistribution.tabulated(fn)
    params = dict(meta["params"])
    if family.startswith("compat-"):
        s = params.pop("s")
        lam = params.pop("lam_c")
        base = _profile_from_meta({"family": family[len("compat-"):], "params": params})
        rb = base.rescaled(lam)
        return EnergyDistribution("compat-" + base.family, dict(base.params, s=s, lam_c=lam),
                                  lambda e, a=0: s * rb(e, a))
    if family.startswith("rescaled-"):
        lam = params.pop("lam")
        base = _profile_from_meta({"family": family[len("rescaled-"):], "params": params})
        return base.rescaled(lam)
    ctor = getattr(EnergyDistribution, family, None)
    if ctor is None:
        raise ValueError(f"unknown profile family {family!r}")
    return ctor(**params)


def reconstruct(m_F, pot, tol=1e-8, n_cheb=160, n_grid=1024, **kwargs):
    """Extend a free profile through the trapped region of a potential well.

    Gate: the pair must satisfy |C0| <= tol, else the extension diverges
    like (-e)^{-1/2} at the separatrix and no bounded wave exists.  C1 is
    not gated; a nonzero value is carried into the exact derivative
    formula.  pot = None builds the homogeneous state (empty trapped
    branch), which requires unit mass through the same gate.
    """
    C0, C1 = compat(m_F, pot)
    if abs(C0) > tol:
        raise ValueError(
            f"profile/potential pair mismatched at the separatrix: C0 = {C0:.3e} "
            f"exceeds tolerance {tol:.1e}"
        )
    if pot is None:
        return BGKWave(m_F, None, C0, C1, **kwargs)
    h1c, h2c = _trap_caches(m_F, pot, n_cheb)
    return BGKWave(m_F, pot, C0, C1, h1c=h1c, h2c=h2c, n_grid=n_grid, **kwargs)


# -------------------------------------------------------------- inversion
@dataclass(frozen=True)
class InverseResult:
    """Profile/potential pair recovered from a phase-space density, with the
    recomputed matching scalars and the mean defect |rho_hat(0) - 1|."""

    m_F: object
    pot: object
    C0: float
    C1: float
    mean_defect: float


def inverse(mu, n_x=256, n_modes=32, flat_tol=1e-10, trough_tol=1e-3):
    """Recover (m_F, psi) from a wave's phase-space density.

    The trough slice fixes the free profile, m_F(v^2/2) = mu(pi, v), and
    psi comes from double integration of the Poisson identity: the Fourier
    modes of rho - 1 divided by -k^2, with the constant pinned by
    psi(pi) = 0.  A density whose potential troughs away from pi (or has
    odd content) is rejected.  BGKWave input short-circuits the slice to
    the stored free profile, which makes the round trip exact up to the
    Fourier solve.
    """
    if isinstance(mu, BGKWave):
        mu_fn = mu.mu
        m_F = mu.m_F
    else:
        mu_fn = mu

        def slice_fn(e):
            e = np.asarray(e, dtype=float)
            return mu_fn(np.pi, np.sqrt(2.0 * np.maximum(e, 0.0)))

        m_F = EnergyDistribution.tabulated(slice_fn, name="trough-slice")
    xg = 2.0 * np.pi * np.arange(n_x) / n_x
    rho = np.array([float(_integrate_line(lambda v, xx=xx: mu_fn(xx, v))) for xx in xg])
    rhohat = np.fft.rfft(rho) / n_x
    mean_defect = float(abs(rhohat[0].real - 1.0))
    k = np.arange(1, n_modes + 1)
    ck = -2.0 * rhohat[k].real / k.astype(float) ** 2
    odd = float(np.max(np.abs(rhohat[k].imag))) if n_modes else 0.0
    if np.max(np.abs(ck)) < flat_tol and odd < flat_tol:
        C0, C1 = compat(m_F, None)
        return InverseResult(m_F, None, C0, C1, mean_defect)
    coeffs = np.concatenate([[-np.sum(ck * (-1.0) ** k)], ck])
    xf = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    psif = np.polynomial.chebyshev.chebval(np.cos(xf), coeffs)
    xmin = xf[int(np.argmin(psif))]
    if abs(xmin - np.pi) > trough_tol or odd > 1e3 * flat_tol:
        raise ValueError(
            f"potential trough at x = {xmin:.6f}, not at pi; density is not a "
            "trough-centered even well"
        )
    pot = pendulum.OneWellPotential(coeffs)
    C0, C1 = compat(m_F, pot)
    return InverseResult(m_F, pot, C0, C1, mean_defect)


# --------------------------------------------------------------- Rayleigh
@dataclass(frozen=True)
class RayleighSolution:
    """Even solution of the trough-pinned Rayleigh problem in the basis
    b_k = cos(kx) - (-1)^k, so U(pi) = 0 holds identically.

    Pinning costs one direction of the range: W = psi'''/psi' is the image
    of the constant function, and a constant response is exactly what the
    pinning forbids.  `shift` is the constant split off the (uniquely
    solvable) unpinned even problem, so that U satisfies

        -U'' + W U = rhs - shift * W

    exactly; `residual` is measured against this equation.  Nothing is
    lost: W = -G[dF/de] o psi (the differentiated density identity), so a
    constant c in the potential is the same tangent direction as the
    profile perturbation -c dF/de, and callers whose right side came from
    a profile regauge it with `shift` (see TangentElement)."""

    coeffs: np.ndarray
    cond: float
    residual: float
    shift: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(1, len(self.coeffs) + 1)
        out = np.cos(np.multiply.outer(x, k)) - (-1.0) ** k
        out = out @ self.coeffs
        return out if out.ndim else float(out)


def rayleigh_solve(pot, rhs, n_modes=48, cond_max=1e10):
    """Solve -U'' + (psi'''/psi') U = rhs with U even and U(pi) = 0.

    Parity-restricted Fourier collocation on the full even basis cos(kx),
    k = 0..n_modes, at interior nodes (a Chebyshev-Vandermonde system,
    nonsingular for distinct nodes).  The unpinned even problem has a
    unique solution; its trough value is split off as the gauge constant
    `shift` so the returned U vanishes at pi, see RayleighSolution.  The
    ratio potential W = psi'''/psi' is evaluated by the series-ratio form,
    regular on the whole circle (W -> -1 uniformly as the well shallows).
    """
    P = int(n_modes)
    xj = np.pi * np.arange(1, P + 2) / (P + 2.0)
    W = pot.w_ratio(xj)
    k = np.arange(0, P + 1)
    ck = np.cos(np.outer(xj, k))
    A = (k * k) * ck + W[:, None] * ck
    cond = float(np.linalg.cond(A))
    if cond > cond_max:
        raise ValueError(
            f"Rayleigh collocation system near-singular: condition number "
            f"{cond:.3e} exceeds {cond_max:.1e}"
        )
    avec = np.linalg.solve(A, np.asarray(rhs(xj), dtype=float))
    shift = float(np.sum(avec * (-1.0) ** k))
    # Pinned representation: dropping a_0 and subtracting the alternating
    # sum of the higher modes reproduces the shifted constant exactly.
    cvec = avec[1:]
    kk = k[1:]
    xf = np.linspace(0.0, np.pi, 768)
    Uf = np.cos(np.outer(xf, kk)) @ cvec - np.sum(cvec * (-1.0) ** kk)
    Uff = -np.cos(np.outer(xf, kk)) @ (kk * kk * cvec)
    Wf = pot.w_ratio(xf)
    res = float(np.max(np.abs(-Uff + Wf * Uf - (rhs(xf) - shift * Wf))))
    return RayleighSolution(coeffs=cvec, cond=cond, residual=res, shift=shift)


@dataclass(frozen=True)
class TangentElement:
    """Direction along the wave family: a profile perturbation f(e) paired
    with the potential response it induces,

        U = -L_psi^{-1} ( G[f] o psi ),

    L_psi the trough-pinned Rayleigh operator, so U is even with U(pi) = 0.
    The stored f is regauged by -shift * dF/de (a constant added to the
    potential equals an energy shift of the profile), after which the pair
    satisfies the displayed equation pointwise."""

    f: object
    U: RayleighSolution

    @classmethod
    def from_profile(cls, wave, f, n_modes=48, n_quad=1024):
        pot = wave.pot

        # n_quad well above the transform default: the marginal direction
        # amplifies right-side noise by the near-resonant 1/lambda_min.
        def rhs(x):
            return -abel.transform_G(f, pot(np.asarray(x, dtype=float)), n=n_quad)

        U = rayleigh_solve(pot, rhs, n_modes=n_modes)
        s = U.shift

        def regauged(e):
            return np.asarray(f(e), dtype=float) - s * wave.F(e, 1)

        return cls(f=regauged, U=U)


# ----------------------------------------------------------- orbit probes
def trajectory_average(wave, g, H=None, v_sign=1, n_phi=512):
    """Orbit average <g>(H) = (1/2 pi) int_0^{2 pi} g(X, V) dphi.

    Accepts a wave or a bare potential.  Trapped loops cover both velocity
    signs in one period; on the free branch v_sign selects the right- or
    left-moving orbit (the default +1 samples v > 0).  With H = None
    returns the averaging function itself.
    """
    pot = wave.pot if isinstance(wave, BGKWave) else wave

    def avg(H, v_sign=v_sign):
        Harr = np.atleast_1d(np.asarray(H, dtype=float))
        _, X, V = pendulum.angle_map(pot, Harr, n_phi=n_phi)
        out = np.asarray(g(X, v_sign * V), dtype=float).mean(axis=1)
        return float(out[0]) if np.ndim(H) == 0 else out

    return avg if H is None else avg(H)


def _fold(U, Upi):
    def f(x):
        return np.asarray(U(x), dtype=float) - Upi
    return f


def tcond_quadratic(wave, U, V=None, n_phi=512, n_x=2048):
    """Quadratic (or polarized) form of the condition operator,

        Q(U, V) = -int_T ( Ubar (-Vbar'') + W Ubar Vbar ) dx
                  - 2 pi sum_br int F'(H) <Ubar>(H) <Vbar>(H) dH/omega,

    with Ubar = U - U(pi): inputs are pinned at the trough first, so
    constants map to zero (they span the pinned kernel; this is the
    boundary convention that lets U = cos x stand for cos x + 1).  W is
    the ratio potential psi'''/psi' and the free branch is doubled for
    the two velocity signs; orbit averages of even functions agree on
    both, so one angle chart serves.

    On the small-wave family at amplitude delta the value for U = cos x
    collapses to -16 sqrt(delta) (d_eF)(0) [B_f + B_t] + o(sqrt delta)
    with the elliptic-integral bracket of tcond_bracket, about
    -4.8 sqrt(delta) (d_eF)(0) at delta = 1e-3.
    """
    Ub = _fold(U, float(U(np.pi)))
    Vb = Ub if V is None else _fold(V, float(V(np.pi)))
    x = 2.0 * np.pi * np.arange(n_x) / n_x
    u = Ub(x)
    v = u if V is None else Vb(x)
    vhat = np.fft.rfft(v)
    kx = np.arange(len(vhat), dtype=float)
    vpp = np.fft.irfft(-(kx * kx) * vhat, n=n_x)
    W = wave.pot.w_ratio(x)
    loc = (2.0 * np.pi / n_x) * float(np.sum(u * (-vpp) + W * u * v))

    kin = 0.0
    for branch, mult in (("trapped", 1.0), ("free", 2.0)):
        data = wave.chart.branches[branch]
        _, X, _ = wave.angle_samples(branch, n_phi=n_phi)
        aU = np.asarray(Ub(X), dtype=float).mean(axis=1)
        aV = aU if V is None else np.asarray(Vb(X), dtype=float).mean(axis=1)
        Fp = wave.F(data["H"], 1)
        kin += mult * 2.0 * np.pi * float(
            np.sum(Fp * aU * aV * data["wH"] / data["omega"])
        )
    return -loc - kin


def _cf_free(k):
    """Free orbit average of cos x at modulus k = 1/a,

        c_f = 1 + 2 (E/K - 1) / k^2,

    evaluated through the exact cancellation of the hypergeometric series
    for k <= 1/2 (the direct form loses the leading digits) and through
    scipy's E, K above.
    """
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k <= 0.5
    if np.any(small):
        # c = sum_{n>=1} e_n k^{2n} / sum_{n>=0} K_n k^{2n} with
        # K_n = ((2n-1)!!/(2^n n!))^2 and e_n = K_n - 2 K_{n+1}(2n+2)/(2n+1):
        # the k^0 cancellation is done symbolically, so no digits are lost.
        ks = k[small] ** 2
        Kn = 1.0
        num = np.zeros_like(ks)
        den = np.ones_like(ks)
        p = np.ones_like(ks)
        for n in range(1, 40):
            Kcur = Kn * ((2 * n - 1) / (2.0 * n)) ** 2
            Knext = Kcur * ((2 * n + 1) / (2.0 * n + 2.0)) ** 2
            p = p * ks
            num += (Kcur - 2.0 * Knext * (2.0 * n + 2.0) / (2.0 * n + 1.0)) * p
            den += Kcur * p
            Kn = Kcur
        out[small] = num / den
    if np.any(~small):
        kb = k[~small]
        E = specfun.ellip_E(kb)
        K = specfun.ellip_K(kb)
        out[~small] = 1.0 + 2.0 * (E / K - 1.0) / kb ** 2
    return out


def tcond_bracket(n_gl=64):
    """Elliptic-integral constant of the small-well quadratic form.

    Orbit averages of cos x enter Q(cos) through c_f = 1 + 2 a^2 (E/K - 1)
    (free, moduli 1/a) and c_t = 2E/K - 1 (trapped, moduli a); both branch
    measures reduce to the same prefactor 8 sqrt(delta)/pi, leaving

        B_f = int_0^1 c_f (2 + c_f) K(k) k^{-2} dk      (k = 1/a),
        B_t = int_0^1 ((2E/K)^2 - 1) a K(a) da.

    Returns a dict with both integrals and the two candidate combinations
    16 (B_f + B_t) and 16 B_f B_t.  The shared measure forces the additive
    combination; only the sum lands near the 4.8 constant that the
    quadratic form itself produces (the product is negative), which is the
    arbitration recorded in `reading`.
    """
    edges = np.concatenate([[0.0], 1.0 - np.geomspace(0.5, 1e-14, 30)])
    Bf = 0.0
    Bt = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        kk, w = gl_nodes(lo, hi, n_gl)
        c = _cf_free(kk)
        Bf += float(np.sum(c * (2.0 + c) / kk ** 2 * specfun.ellip_K(kk) * w))
        r = 2.0 * specfun.ellip_E(kk) / specfun.ellip_K(kk)
        Bt += float(np.sum((r * r - 1.0) * kk * specfun.ellip_K(kk) * w))
    return {
        "free": Bf,
        "trapped": Bt,
        "sum": 16.0 * (Bf + Bt),
        "product": 16.0 * Bf * Bt,
        "reading": "sum",
    }


def well_prepared_residual(wave, f0, g_family=None, n_phi=512):
    """Largest pairing of initial data against trajectory invariants,

        r = max_j | iint f0 g_j(v^2/2 - psi) dx dv |
          = max_j | 2 pi sum_br int <f0>(H) g_j(H) dH/omega |,

    free branch summed over both velocity signs.  Vanishing r means f0
    carries no secular content along the wave: angle derivatives and the
    translation mode pair to zero, while genuine functions of the energy
    do not.  Default test family g_j(H) = exp(-j H / 2), j = 1..5.
    """
    if g_family is None:
        g_family = [lambda H, j=j: np.exp(-0.5 * j * H) for j in range(1, 6)]
    pair = np.zeros(len(g_family))
    for branch in ("trapped", "free"):
        data = wave.chart.branches[branch]
        _, X, V = wave.angle_samples(branch, n_phi=n_phi)
        av = np.asarray(f0(X, V), dtype=float).mean(axis=1)
        if branch == "free":
            av = av + np.asarray(f0(X, -V), dtype=float).mean(axis=1)
        base = 2.0 * np.pi * av * data["wH"] / data["omega"]
        for j, gj in enumerate(g_family):
            pair[j] += float(np.sum(base * gj(data["H"])))
    return float(np.max(np.abs(pair)))


# ------------------------------------------------------------ frame pairing
@dataclass(frozen=True)
class FramePairing:
    """Pieces of the frame pairing I = iint (1 - d_x Theta) mu dx dv.

    `trapped` is the pocket moment

        I_t = iint_{H<0} (F(H) - F(0)) dx dv = 2 pi int (F - F(0)) dH/omega

    (the angle average of d_x Theta drops out of radial integrands on
    closed loops, so the two forms are identical);  `trapped_xv` recomputes
    it as a plain (x, v) quadrature.  `free_series` is the free-branch
    harmonic (nome) series of the small-amplitude expansion,

        I_f = -64 pi^2 eps^{3/2} F'(0) sum_n int a^2 q^{2n} (1+q^{2n})^{-2} / K da,

    which carries the oscillatory part of the free orbits after the secular
    terms cancel against the trapped pocket.  Both pieces scale like
    eps^{3/2} with sign -F'(0)."""

    value: float
    trapped: float
    trapped_xv: float
    free_series: float


def _trapped_pairing_xv(wave, n_x=96, n_v=96):
    """iint_{v^2 < 2 psi} (F(H) - F(0)) dx dv by direct quadrature."""
    pot = wave.pot
    F0 = float(wave.F(0.0))
    xs, wx = gl_nodes(0.0, np.pi, n_x)
    t, wt = gl_nodes(0.0, 1.0, n_v)
    psi = pot(xs)
    vmax = np.sqrt(2.0 * psi)
    vv = vmax[:, None] * t[None, :]
    e = 0.5 * vv * vv - psi[:, None]
    vals = wave.F(np.minimum(e.ravel(), 0.0)).reshape(e.shape) - F0
    inner = (vals @ wt) * vmax
    return 4.0 * float(inner @ wx)


def _free_wake_sum(normalized=True, a_hi=256.0, n_terms=200, n_gl=48):
    """S = sum_{n>=1} int_1^inf a^2 q^{2n} (1 + q^{2n})^{-2} [/K(1/a)] da,

    q the nome at modulus 1/a.  The normalized variant carries the 1/K
    factor that the verified angle Fourier coefficients produce (weight
    4 pi^2 a^2/K^2 against measure K da); dropping it is the plausible
    alternative reading and roughly doubles the sum.  The q ~ (16 a^2)^{-1}
    tail beyond a_hi is added in closed form.
    """
    edges = np.concatenate([1.0 + np.geomspace(1e-14, 1.0, 25), np.geomspace(2.5, a_hi, 12)])
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        aa, w = gl_nodes(lo, hi, n_gl)
        k = 1.0 / aa
        K = specfun.ellip_K(k)
        Kp = specfun.ellip_K(np.sqrt(np.maximum(1.0 - k * k, 0.0)))
        q = np.exp(-np.pi * Kp / K)
        q2 = q * q
        p = np.ones_like(q)
        s = np.zeros_like(q)
        for _ in range(n_terms):
            p = p * q2
            s += p / (1.0 + p) ** 2
            if float(np.max(p)) < 1e-18:
                break
        integrand = aa * aa * s
        if normalized:
            integrand = integrand / K
        total += float(np.sum(integrand * w))
    total += 1.0 / (128.0 * np.pi * a_hi) if normalized else 1.0 / (256.0 * a_hi)
    return total


def frame_pairing(wave):
    """The pairing I = iint (1 - d_x Theta) mu dx dv of a wave.

    The trapped part is computed exactly (in both coordinate systems, see
    FramePairing), the free part through the harmonic series of the
    small-amplitude expansion.  For F'(0) > 0 the total is negative and
    vanishes like eps^{3/2} as the well closes, which is the
    non-degeneracy sign of the wave family.
    The trapped piece is reported relative to the separatrix value,
    I_t = 2 pi int (F - F(0)) dH/omega = iint_{H<0} (F - F(0)) dx dv, and
    the free complement I - I_t absorbs F(0) times the pocket area; the
    complement scales like eps^{3/2} while the two pieces separately carry
    O(sqrt eps) parts that cancel.  For F'(0) > 0 both pieces are negative
    for small wells, which is the non-degeneracy sign of the family.
    """
    ch = wave.chart
    F0 = float(wave.F(0.0))
    F1 = float(wave.F(0.0, 1))
    tr = ch.branches["trapped"]
    trapped = 2.0 * np.pi * float(np.sum((wave.F(tr["H"]) - F0) * tr["wH"] / tr["omega"]))
    eps = wave.pot.eps
    series = -64.0 * np.pi ** 2 * eps ** 1.5 * F1 * _free_wake_sum(normalized=True)
    return FramePairing(
        value=trapped + series,
        trapped=trapped,
        trapped_xv=_trapped_pairing_xv(wave),
        free_series=series,
    )
