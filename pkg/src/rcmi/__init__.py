"""Renyi conditional mutual information toolkit.

Dense-matrix implementations of entropies, relative entropies and Renyi
conditional mutual informations of finite-dimensional quantum states, with
derivative-free optimizers for the optimized definitions, recoverability
bounds and seeded Monte-Carlo sweeps of the derivative in the Renyi order.

The most used names are re-exported here; see the submodules for the rest:
:mod:`rcmi.linalg`, :mod:`rcmi.states`, :mod:`rcmi.divergences`,
:mod:`rcmi.cmi`, :mod:`rcmi.optimize`, :mod:`rcmi.conjecture`,
:mod:`rcmi.recovery`, :mod:`rcmi.io`, :mod:`rcmi.verify` and :mod:`rcmi.cli`.
"""

__version__ = "0.1.0"

from .cmi import *  # noqa: E402,F401,F403
from .conjecture import *  # noqa: E402,F401,F403
from .divergences import *  # noqa: E402,F401,F403
from .errors import *  # noqa: E402,F401,F403
from .linalg import *  # noqa: E402,F401,F403
from .optimize import *  # noqa: E402,F401,F403
from .partition import *  # noqa: E402,F401,F403
from .recovery import *  # noqa: E402,F401,F403
from .states import *  # noqa: E402,F401,F403
