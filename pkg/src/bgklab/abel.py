"""Abel-type fractional integrals on the half line.

The three transforms used throughout the equilibrium inverse problem:

    I[f](x) = pi^{-1/2} int_0^x f(u) (x-u)^{-1/2} du
    J[f](y) = 2^{1/2}   int_0^inf f(e) (y+e)^{-1/2} de
    A[f](x) = (2 pi)^{-1/2} ( I[f'](x) + f(0) / (pi x)^{1/2} )

and the half-line composition G[F](y) = J[F 1_{e>0}](y) + (2 pi)^{1/2} I[F(-.)](y),
which is the density integral int F(v^2/2 - y) dv written in energy variables.

Quadratures substitute away the kernel endpoints: u = x sin^2(t) turns I into
a smooth integral over [0, pi/2] (also absorbing an integrable u^{-1/2}
singularity of f at the origin), and e = tan^2(t) compactifies J.
"""

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._util import gl_nodes

__all__ = [
    "HalfLineFunction",
    "transform_I",
    "transform_J",
    "operator_A",
    "transform_G",
]


class HalfLineFunction:
    """Scalar function on [0, inf), either an analytic closure or sampled data.

    Samples are interpolated shape-preservingly (PCHIP).  The tail tag says
    what happens beyond the last sample: 'zero' pads with zeros (profiles
    with compact numerical support), 'hold' freezes the last value.
    """

    def __init__(self, fn=None, grid=None, values=None, tail="zero"):
        if (fn is None) == (grid is None):
            raise ValueError("give either an analytic closure or sample arrays")
        if tail not in ("zero", "hold"):
            raise ValueError("tail must be 'zero' or 'hold'")
        self.tail = tail
        if fn is not None:
            self._fn = fn
            self._interp = None
            self._hi = np.inf
            self._last = None
        else:
            grid = np.asarray(grid, dtype=float)
            values = np.asarray(values, dtype=float)
            if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 4:
                raise ValueError("need matching 1-d sample arrays, at least 4 points")
            if grid[0] < 0.0 or np.any(np.diff(grid) <= 0.0):
                raise ValueError("grid must be increasing and nonnegative")
            self._fn = None
            self._interp = PchipInterpolator(grid, values, extrapolate=False)
            self._hi = grid[-1]
            self._last = values[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self._fn is not None:
            out = np.asarray(self._fn(x), dtype=float)
        else:
            out = self._interp(np.clip(x, None, self._hi))
            fill = 0.0 if self.tail == "zero" else self._last
            out = np.where(x > self._hi, fill, out)
        return out if out.ndim else float(out)

    def derivative(self):
        """Derivative as a new HalfLineFunction (sampled form only)."""
        if self._interp is None:
            raise ValueError("analytic closures differentiate themselves")
        d = self._interp.derivative()
        hlf = HalfLineFunction(grid=self._interp.x, values=d(self._interp.x), tail="zero")
        hlf._interp = d
        return hlf


def transform_I(f, x, n=256):
    """Abel fractional integral of order 1/2,

        I[f](x) = pi^{-1/2} int_0^x f(u) (x-u)^{-1/2} du
                = (2 sqrt(x/pi)) int_0^{pi/2} f(x sin^2 t) sin t dt.

    Vectorized over x >= 0; f may behave like u^{-1/2} at the origin.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("transform_I needs x >= 0")
    t, w = gl_nodes(0.0, 0.5 * np.pi, n)
    s = np.sin(t)
    xs = np.multiply.outer(x, s * s)
    vals = np.asarray(f(xs), dtype=float)
    out = (2.0 / np.sqrt(np.pi)) * np.sqrt(x) * (vals @ (w * s))
    return out if out.ndim else float(out)


def transform_J(f, y, n=256):
    """Half-line Abel companion,

        J[f](y) = 2^{1/2} int_0^inf f(e) (y+e)^{-1/2} de,

    computed with e = tan^2 t, which maps [0, inf) to [0, pi/2) and leaves a
    bounded integrand whenever f decays faster than e^{-3/2}.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise ValueError("transform_J needs y >= 0")
    t, w = gl_nodes(0.0, 0.5 * np.pi, n)
    tn = np.tan(t)
    e = tn * tn
    jac = 2.0 * tn / np.cos(t) ** 2
    vals = np.asarray(f(e), dtype=float)
    denom = np.sqrt(np.add.outer(y, e))
    out = np.sqrt(2.0) * ((vals * jac) / denom) @ w
    return out if out.ndim else float(out)


def operator_A(f, x, df=None, f0=None, n=256):
    """The boundary-corrected half transform

        A[f](x) = (2 pi)^{-1/2} ( I[f'](x) + f(0) / sqrt(pi x) ).

    f' is taken from df when given, else from f.derivative() for sampled
    HalfLineFunction input.  f(0) likewise from f0 if supplied.
    """
    if df is None:
        if isinstance(f, HalfLineFunction):
            df = f.derivative()
        else:
            raise ValueError("need df for a plain callable")
    if f0 is None:
        f0 = float(np.asarray(f(0.0)))
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("operator_A needs x > 0")
    out = (transform_I(df, x, n=n) + f0 / np.sqrt(np.pi * x)) / np.sqrt(2.0 * np.pi)
    return out if out.ndim else float(out)


def transform_G(F, y, n=256):
    """Spatial density of an energy profile,

        G[F](y) = int_R F(v^2/2 - y) dv
                = J[F 1_{e>0}](y) + (2 pi)^{1/2} I[F(-.)](y),

    where the I part collects trapped energies -y < e < 0 and the J part the
    free ones.  F must be defined on [-max(y), inf).
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise ValueError("transform_G needs y >= 0")
    free = transform_J(F, y, n=n)
    trapped = np.sqrt(2.0 * np.pi) * transform_I(lambda s: F(-s), y, n=n)
    out = free + trapped
    return out if out.ndim else float(out)
