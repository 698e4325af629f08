"""locsk: simulation and numerical-verification lab for a Fourier-localized
Sherrington-Kirkpatrick spin glass.

Subpackages: lattice geometry and kernels, the replica-symmetric analytic
layer, exact enumeration and two-replica heat-bath sampling, the stochastic
interpolation path, and an experiment harness with a `locsk` CLI.  Hot
kernels run on a compiled extension when available (see locsk.backend).
"""

from . import backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
