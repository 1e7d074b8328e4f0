"""Shallow-network Gram spectra, fits, training dynamics and Rashomon sets."""

try:
    # Wheel layout: the extension lives inside this package.
    from ._gramlab import *  # noqa: F401,F403
    from ._gramlab import __version__  # noqa: F401
except ImportError:
    # Build-tree layout: the extension sits directly on sys.path.
    from _gramlab import *  # noqa: F401,F403
    from _gramlab import __version__  # noqa: F401
