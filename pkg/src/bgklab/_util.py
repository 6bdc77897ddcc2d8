"""Shared numerical helpers: cached quadrature nodes, Chebyshev tools, canonical I/O."""

import functools
import hashlib
import json

import numpy as np


@functools.lru_cache(maxsize=32)
def leggauss(n):
    """Gauss-Legendre nodes and weights on [-1, 1], cached per order."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_nodes(lo, hi, n):
    """Affinely mapped Gauss-Legendre rule on [lo, hi]: returns (nodes, weights)."""
    x, w = leggauss(n)
    half = 0.5 * (hi - lo)
    return half * x + 0.5 * (hi + lo), half * w


def gl_integrate(f, lo, hi, n=256, rtol=None):
    """Integrate f on [lo, hi] by Gauss-Legendre of order n.

    With rtol set, the order is doubled until two consecutive estimates agree
    to rtol (relative to the larger magnitude) or order exceeds 8n.
    """
    t, w = gl_nodes(lo, hi, n)
    val = np.dot(w, f(t))
    if rtol is None:
        return val
    m = n
    while m <= 8 * n:
        m *= 2
        t, w = gl_nodes(lo, hi, m)
        new = np.dot(w, f(t))
        if abs(new - val) <= rtol * max(1.0, abs(new)):
            return new
        val = new
    return val


def chebu_in_t(n):
    """T-basis coefficients of the Chebyshev polynomial U_{n-1}.

    Uses U_{n-1} = 2(T_{n-1} + T_{n-3} + ...), with the trailing T_0 term
    (n odd) counted once.  Returns an array of length n; n >= 1.
    """
    c = np.zeros(n)
    c[n - 1 :: -2] = 2.0
    if n % 2 == 1:
        c[0] = 1.0
    return c


def chebseries_from_u(weights):
    """Convert sum_n weights[n-1] U_{n-1} (n = 1..N) into a T-basis coefficient array."""
    n_max = len(weights)
    out = np.zeros(n_max)
    for n, w_n in enumerate(weights, start=1):
        if w_n != 0.0:
            out[:n] += w_n * chebu_in_t(n)
    return out


def config_sha256(obj):
    """SHA-256 hex digest of an object's canonical JSON rendering."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)!r}")


def dump_json(path, obj, config=None):
    """Write obj as sorted-key JSON; a config dict is folded in under 'config' with its hash."""
    doc = dict(obj)
    if config is not None:
        doc["config"] = config
        doc["config_sha256"] = config_sha256(config)
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")


def dump_csv(path, names, columns, config=None):
    """Write named columns as CSV with 17 significant digits.

    The first line is a comment carrying the config hash so that reruns can be
    compared byte for byte.
    """
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0])
    with open(path, "w") as fh:
        sha = config_sha256(config if config is not None else {})
        fh.write(f"# config_sha256={sha}\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt_cell(c[i]) for c in columns) + "\n")


def _fmt_cell(v):
    if isinstance(v, (str, bytes)):
        return str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    if float(v) == int(v) and abs(float(v)) < 1e15 and isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"
