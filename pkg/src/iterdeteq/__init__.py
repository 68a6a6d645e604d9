"""Iterative deterministic equivalents for multi-hop relay and double-scattering MIMO channels.

The package has three layers:

* :mod:`iterdeteq.relay` and :mod:`iterdeteq.mac`: the deterministic
  equivalents (fixed-point solvers and closed forms).
* :mod:`iterdeteq.channels` and :mod:`iterdeteq.montecarlo`: exact
  finite-size channel realizations and a seeded ergodic averaging harness.
* :mod:`iterdeteq.experiments` and :mod:`iterdeteq.cli`: JSON-configured
  sweeps and the ``deteq`` command.
"""

from .errors import (
    DeteqError,
    InvalidConfig,
    NoRootInInterval,
    NonConvergence,
    NotCodiagonalizable,
    NotPositiveDefinite,
    NotPSD,
)
from .mac import (
    MacConfig,
    kronecker_deteq,
    mmse_sinr_deteq,
    rayleigh_product_closed_form,
    solve_fundamental,
    sum_rate_deteq,
    waterfill_optimal_Q,
)
from .mac import mutual_info_deteq as mac_mutual_info_deteq
from .montecarlo import McReport, ergodic_mc
from .relay import RelayConfig, ebar_k, jbar_k, mbar_k
from .relay import mutual_info_deteq as relay_mutual_info_deteq

__version__ = "0.1.0"
