"""How fast do the approximations become exact?

The deterministic approximations are exact only in the large-antenna
limit. This script scales every dimension of the four-antenna examples and
shows the Monte Carlo gap shrinking, which is how to tell a finite-size
bias from an implementation error.
"""

import numpy as np

from iterdeteq.channels import (
    mac_mmse_sinrs_exact,
    relay_mutual_info_exact,
    sample_double_scattering,
    sample_relay,
    stream_channels,
)
from iterdeteq.mac import fig4_config, mmse_sinr_deteq
from iterdeteq.montecarlo import ergodic_mc
from iterdeteq.relay import fig2_config, mutual_info_deteq

# %% Relay chain at 30 dB: gap per hop in units of the Monte Carlo standard error.
for scale in (1, 2, 4):
    cfg = fig2_config(1000.0, scale=scale)
    det = np.array([mutual_info_deteq(k, cfg).ibar for k in range(1, 5)])

    def metric(rng, cfg=cfg):
        real = sample_relay(cfg, rng)
        return [relay_mutual_info_exact(real, k) for k in range(1, 5)]

    rep = ergodic_mc(metric, 2000 // scale, seed=4)
    print("relay x%d: gap/stderr per hop %s" % (scale, np.round((rep.mean - det) / rep.stderr, 1)))

# %% MMSE SINR on the correlated MAC at rho = 1: relative gap per stream.
for scale in (1, 2, 4):
    cfg = fig4_config(1.0, N=4 * scale, n=3 * scale, Nk=11 * scale)
    det = np.concatenate(mmse_sinr_deteq(cfg))

    def metric(rng, cfg=cfg):
        return np.concatenate(mac_mmse_sinrs_exact(stream_channels(sample_double_scattering(cfg, rng), cfg), cfg.rho))

    rep = ergodic_mc(metric, 2000 // scale, seed=5)
    # streams on near-null transmit eigenmodes carry no signal
    strong = det > 0.05 * det.max()
    rel = np.abs(rep.mean[strong] - det[strong]) / det[strong]
    print("MAC x%d: median relative SINR gap %.3f, max %.3f" % (scale, np.median(rel), rel.max()))
