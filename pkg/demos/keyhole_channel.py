"""Multi-keyhole channels: from rank one to Rayleigh fading.

A single-user channel ``H = W1 W2 / sqrt(N1 n)`` passes through ``N1``
scatterers. With one scatterer it has rank one; with many it behaves like
an i.i.d. Rayleigh channel.
"""

import numpy as np

from iterdeteq.channels import mac_mutual_info_exact, sample_double_scattering
from iterdeteq.experiments import keyhole_config
from iterdeteq.mac import mutual_info_deteq
from iterdeteq.montecarlo import ergodic_mc

# %% Deterministic approximation versus SNR for several scatterer counts.
snrs_db = np.arange(0, 31, 10)
print("N1   " + "  ".join("%6d dB" % d for d in snrs_db))
for n1 in (1, 2, 4, 100):
    row = [mutual_info_deteq(keyhole_config(n1, 10 ** (d / 10))) for d in snrs_db]
    print("%-4d " % n1 + "  ".join("%9.4f" % v for v in row))

# %% How good is the approximation with four antennas?
rho = 10 ** (20 / 10)
for n1 in (1, 4, 100):
    cfg = keyhole_config(n1, rho)
    rep = ergodic_mc(lambda g, cfg=cfg: mac_mutual_info_exact(sample_double_scattering(cfg, g), cfg.Q, rho), 2000, seed=2)
    det = mutual_info_deteq(cfg)
    print("N1=%-3d  deteq %.4f  mc %.4f +- %.4f" % (n1, det, rep.mean, rep.stderr))

# %% The residual gap is a finite-size effect: doubling every dimension
# shrinks it roughly fourfold.
for scale in (1, 2, 4):
    N = 4 * scale
    cfg = keyhole_config(4 * scale, rho, N=N)
    rep = ergodic_mc(lambda g, cfg=cfg: mac_mutual_info_exact(sample_double_scattering(cfg, g), cfg.Q, rho), 1000, seed=3)
    print("N=%-3d gap %.4f  (stderr %.4f)" % (N, rep.mean - mutual_info_deteq(cfg), rep.stderr))
