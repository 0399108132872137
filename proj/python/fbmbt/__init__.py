"""Power variations of fractional Brownian motion in Brownian time.

Exact crossing statistics for the iterated process Z = X(Y), the constants
and simulators of both limit laws, and a Monte Carlo verification harness.
All randomness is seed-keyed and bit-reproducible across runs and worker
counts.
"""

try:
    # Installed layout: the extension lives inside this package.
    from ._fbmbt import *  # noqa: F401,F403
    from . import _fbmbt as _impl
except ImportError:
    # Build-tree layout: the extension sits on sys.path next to the package.
    from _fbmbt import *  # noqa: F401,F403
    import _fbmbt as _impl

__version__ = "1.0.0"
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
del _impl
