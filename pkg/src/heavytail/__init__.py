"""Second-order refined peaks-over-threshold inference for heavy-tailed data.

The Extended Pareto Distribution (EPD), bias-reduced estimators of the extreme
value index and of tail probabilities, Hill and GPD baselines, and a Monte
Carlo harness for comparing them.
"""

from ._errors import *  # noqa: F401,F403
from ._errors import __all__ as _errors_all
from .asymptotics import *  # noqa: F401,F403
from .asymptotics import __all__ as _asym_all
from .distributions import *  # noqa: F401,F403
from .distributions import __all__ as _dist_all
from .estimators import *  # noqa: F401,F403
from .estimators import __all__ as _est_all
from .simulation import *  # noqa: F401,F403
from .simulation import __all__ as _sim_all
from .tail_inference import *  # noqa: F401,F403
from .tail_inference import __all__ as _tail_all

__version__ = "0.1.0"

__all__ = [*_errors_all, *_dist_all, *_est_all, *_tail_all, *_asym_all, *_sim_all]
