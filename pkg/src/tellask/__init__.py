"""Concurrent-constraint programming over finite domains, with a timed layer.

Untimed programs combine tells, asks, parallel composition and local
variables over a shared store; the timed layer replays that per discrete
time unit and adds delays, replication, asynchronous emission and guarded
choice. A small S-expression dialect, a factor-oracle learner and a few
worked models sit on top.
"""

__version__ = "0.1.0"

from .errors import InconsistentUnit, TellaskError
from .factor_oracle import FactorOracle

__all__ = ["FactorOracle", "InconsistentUnit", "TellaskError", "__version__"]
