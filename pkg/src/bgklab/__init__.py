"""bgklab: one-well BGK equilibria of 1-D Vlasov-Poisson and their spectral stability."""

import os

# Thread pinning must happen before numpy loads its BLAS. Respect an explicit
# BGKLAB_THREADS but never override variables the user already set.
_threads = os.environ.get("BGKLAB_THREADS")
if _threads is not None:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)
del _threads, os

__version__ = "0.1.0"

__all__ = [
    "specfun",
    "abel",
    "pendulum",
    "equilibria",
    "bgkwave",
    "dispersion",
    "cli",
]
