"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict (printed, and repeated in the pytest
terminal summary) before asserting, so a full run shows every criterion's
status even when some fail.
"""

import json
import pathlib
import time

import numpy as np

from iterdeteq import experiments
from iterdeteq.channels import sample_relay
from iterdeteq.linalg import make_rng, sample_standard_complex_gaussian, trial_rng
from iterdeteq.mac import (
    MacConfig,
    fig4_config,
    fundamental_residual,
    interference_map,
    kronecker_deteq,
    mmse_sinr_deteq,
    mutual_info_deteq,
    rayleigh_product_closed_form,
    rayleigh_product_config,
    sic_term,
    solve_fundamental,
    sum_rate_deteq,
    waterfill_optimal_Q,
)
from iterdeteq.channels import mac_mmse_sinrs_exact, sample_double_scattering, stream_channels
from iterdeteq.montecarlo import ergodic_mc
from iterdeteq.relay import RelayConfig, asymptotic_betas, ebar_k, ebar_residual, fig2_config

SPECS = pathlib.Path(__file__).resolve().parents[1] / "specs"
TRIALS = 10_000
SEED = 20240611


def test_01_relay_curves_match_simulation(acceptance_line):
    t0 = time.perf_counter()
    table = experiments.fig2_table(TRIALS, SEED)
    elapsed = time.perf_counter() - t0
    det = np.array(table.column("deteq"))
    gap = np.abs(np.array(table.column("mc_mean")) - det)
    se = np.array(table.column("mc_stderr"))
    within = np.mean(gap <= 3 * se)
    ok = within >= 0.95 and gap.max() <= 0.05 and elapsed <= 600
    acceptance_line(
        1,
        ok,
        "relay hops x SNR: %.0f%% of %d points within 3 stderr (need 95%%), max |gap| %.4f nats (need <= 0.05), %.0f s"
        % (100 * within, gap.size, gap.max(), elapsed),
    )
    assert gap.max() <= 0.05
    assert elapsed <= 600
    assert within >= 0.95


def test_02_normalizers_concentrate(acceptance_line):
    cfg = fig2_config(10.0, scale=64)
    ref = np.array(asymptotic_betas(cfg))
    worst = 0.0
    for t in range(100):
        real = sample_relay(cfg, trial_rng(SEED, t))
        worst = max(worst, np.max(np.abs(np.array(real.betas) - ref) / ref))
    ok = worst < 0.01
    acceptance_line(2, ok, "64x relay dims, 100 draws: max relative |beta - betabar| = %.4f (need < 0.01)" % worst)
    assert ok


def _random_relay(rng):
    K = int(rng.integers(1, 4))
    dims = tuple(int(n) for n in rng.integers(1, 13, K + 1))
    alphas = tuple(rng.uniform(0.3, 1.2, K))
    rhos = tuple(10 ** rng.uniform(-1, 2, K))
    return RelayConfig(dims=dims, alphas=alphas, rhos=rhos)


def test_03_relay_fixed_point_residual_and_uniqueness(acceptance_line):
    rng = make_rng(SEED)
    worst_res = worst_spread = 0.0
    for _ in range(200):
        cfg = _random_relay(rng)
        k = int(rng.integers(0, cfg.K))
        x = 10 ** rng.uniform(-1, 0.5)
        b = asymptotic_betas(cfg)
        e = ebar_k(k, x, b, cfg)
        worst_res = max(worst_res, ebar_residual(k, x, b, e, cfg))
        starts = [ebar_k(k, x, b, cfg, init=10 ** rng.uniform(-2, 2)) for _ in range(20)]
        worst_spread = max(worst_spread, np.max(np.abs(np.array(starts) - e)))
    ok = worst_res <= 1e-10 and worst_spread <= 1e-8
    acceptance_line(
        3, ok, "200 random draws: max residual %.1e (need <= 1e-10), multistart spread %.1e (need <= 1e-8)" % (worst_res, worst_spread)
    )
    assert ok


def test_04_mac_solver_and_interference_map(acceptance_line):
    rng = make_rng(SEED)
    worst_res = worst_spread = 0.0
    for rho in (0.1, 1.0, 10.0):
        cfg = fig4_config(rho)
        ref = solve_fundamental(cfg)
        worst_res = max(worst_res, fundamental_residual(cfg, ref.gbar, ref.g, ref.delta))
        for _ in range(100):
            sol = solve_fundamental(cfg, init=tuple(10 ** rng.uniform(-3, 3, (3, 3))))
            spread = max(np.max(np.abs(a - b)) for a, b in ((sol.g, ref.g), (sol.gbar, ref.gbar), (sol.delta, ref.delta)))
            worst_spread = max(worst_spread, spread)
    failures = 0
    cfgs = [fig4_config(rho) for rho in (0.1, 1.0, 10.0)]
    for i in range(1000):
        cfg = cfgs[i % 3]
        lo = rng.uniform(0.0, 3.0, 3)
        hi = lo + rng.uniform(1e-3, 1.0, 3)
        alpha = rng.uniform(1.01, 5.0)
        h_lo, h_hi = interference_map(cfg, lo), interference_map(cfg, hi)
        positive = np.all(h_lo > 0)
        monotone = np.all(h_hi > h_lo)
        scalable = np.all(alpha * h_lo > interference_map(cfg, alpha * lo))
        failures += not (positive and monotone and scalable)
    ok = worst_res <= 1e-10 and worst_spread <= 1e-8 and failures == 0
    acceptance_line(
        4,
        ok,
        "3K-equation residual %.1e, 100-start spread %.1e, interference-map failures %d/1000" % (worst_res, worst_spread, failures),
    )
    assert ok


def test_05_keyhole_curves_match_simulation(acceptance_line):
    table = experiments.fig3_table(TRIALS, SEED)
    gap = np.abs(np.array(table.column("mc_mean")) - np.array(table.column("deteq")))
    se = np.array(table.column("mc_stderr"))
    within = np.mean(gap <= 3 * se)
    ok = within >= 0.95
    acceptance_line(
        5,
        ok,
        "multi-keyhole N1 x SNR: %.0f%% of %d points within 3 stderr (need 95%%), max |gap| %.4f nats"
        % (100 * within, gap.size, gap.max()),
    )
    assert ok


def test_06_rayleigh_product_closed_form(acceptance_line):
    worst = 0.0
    inside = True
    for N in range(1, 9):
        for S in range(1, 9):
            for K in range(1, 9):
                for rho in (0.1, 1.0, 10.0, 100.0):
                    cf = rayleigh_product_closed_form(N, S, K, rho)
                    cfg = rayleigh_product_config(N, S, K, rho)
                    sol = solve_fundamental(cfg)
                    gamma = mmse_sinr_deteq(cfg, sol)[0][0]
                    worst = max(
                        worst,
                        abs(cf.gbar - sol.gbar[0]),
                        abs(cf.ibar - mutual_info_deteq(cfg, sol)),
                        abs(cf.gamma - gamma),
                    )
                    inside &= 1 - min(1 / K, S / N) <= cf.gbar < 1
    ok = worst <= 1e-6 and inside
    acceptance_line(6, ok, "2048 (N,S,K,rho) cases: max closed-form vs solver gap %.1e (need <= 1e-6), root interval %s" % (worst, "ok" if inside else "violated"))
    assert ok


def _random_diagonal(rng):
    K = int(rng.integers(1, 4))
    N = int(rng.integers(2, 7))
    R, s, T, Q = [], [], [], []
    for _ in range(K):
        n = int(rng.integers(1, 5))
        A = sample_standard_complex_gaussian(N, N, rng)
        R.append(A @ A.conj().T / N)
        s.append(rng.uniform(0.1, 2.0, int(rng.integers(1, 9))))
        T.append(np.diag(rng.uniform(0.0, 2.0, n)))
        Q.append(np.diag(rng.uniform(0.0, 1.5, n)))
    return MacConfig(R=R, s=s, T=T, Q=Q, rho=10 ** rng.uniform(-1, 2))


def test_07_sum_rate_identity(acceptance_line):
    rng = make_rng(SEED)
    worst, below = 0.0, True
    for _ in range(50):
        cfg = _random_diagonal(rng)
        sol = solve_fundamental(cfg)
        R = sum_rate_deteq(cfg, sol)
        worst = max(worst, abs(R - sic_term(cfg, sol)))
        below &= R <= mutual_info_deteq(cfg, sol)
    ok = worst <= 1e-12 and below
    acceptance_line(7, ok, "50 diagonal configs: |Rbar - SIC term| max %.1e (need <= 1e-12), Rbar <= Ibar %s" % (worst, below))
    assert ok


def test_08_water_filling(acceptance_line):
    budgets = [1 / 3] * 3
    worst_budget = worst_kkt = 0.0
    gain_ok, max_iter = True, 0
    for db in experiments.FIG4_GRID:
        cfg = fig4_config(10 ** (db / 10))
        res = waterfill_optimal_Q(cfg, budgets, eps=1e-8)
        max_iter = max(max_iter, res.iterations)
        for k in range(3):
            t = np.linalg.eigvalsh(cfg.T[k])
            p = res.powers[k]
            worst_budget = max(worst_budget, abs(p.mean() - budgets[k]))
            for pj, tj in zip(p, t):
                level = 1 / (res.g[k] * tj) if tj > 0 else np.inf
                if pj > 0:
                    worst_kkt = max(worst_kkt, abs(pj + level - res.mu[k]))
                elif res.mu[k] > level:
                    worst_kkt = max(worst_kkt, res.mu[k] - level)
        gain_ok &= mutual_info_deteq(res.config) >= mutual_info_deteq(cfg)
    ok = worst_budget <= 1e-10 and worst_kkt <= 1e-10 and gain_ok and max_iter <= 200
    acceptance_line(
        8,
        ok,
        "correlated MAC, %d SNRs: budget err %.1e, KKT err %.1e, optimal >= uniform %s, outer iterations <= %d"
        % (len(experiments.FIG4_GRID), worst_budget, worst_kkt, gain_ok, max_iter),
    )
    assert ok


def test_09_mmse_sinr_matches_simulation(acceptance_line):
    worst = {}
    for rho in (0.1, 1.0, 10.0):
        cfg = fig4_config(rho)
        det = np.concatenate(mmse_sinr_deteq(cfg))

        def metric(g, cfg=cfg):
            H = stream_channels(sample_double_scattering(cfg, g), cfg)
            return np.concatenate(mac_mmse_sinrs_exact(H, cfg.rho))

        rep = ergodic_mc(metric, TRIALS, SEED)
        worst[rho] = np.max(np.abs(rep.mean - det) / det)
    ok = worst[0.1] <= 0.05 and worst[1.0] <= 0.05 and worst[10.0] <= 0.15
    acceptance_line(
        9,
        ok,
        "per-stream MMSE SINR max relative gap: rho=0.1 %.1f%%, rho=1 %.1f%% (need <= 5%%), rho=10 %.1f%% (need <= 15%%)"
        % (100 * worst[0.1], 100 * worst[1.0], 100 * worst[10.0]),
    )
    assert ok


def test_10_kronecker_cross_check(acceptance_line):
    rho = 10.0
    cfg = fig4_config(rho, N=64, n=48, Nk=176)
    I = mutual_info_deteq(cfg)
    rel = []
    for d in range(10):
        rng = trial_rng(SEED, d)
        Z = [
            cfg.R_sqrt[k] @ sample_standard_complex_gaussian(cfg.N, cfg.N_k[k], rng) * np.sqrt(cfg.s[k]) / np.sqrt(cfg.N_k[k])
            for k in range(cfg.K)
        ]
        rel.append(abs(kronecker_deteq(Z, cfg.TQT, rho) - I) / I)
    good = sum(r <= 0.02 for r in rel)
    ok = good >= 9
    acceptance_line(10, ok, "N=64 conditional deteq: %d/10 draws within 2%% (need 9), worst %.2f%%" % (good, 100 * max(rel)))
    assert ok


def test_11_shipped_specs_are_deterministic(acceptance_line, tmp_path):
    same = []
    for path in sorted(SPECS.glob("*.json")):
        spec = experiments.parse_spec(json.loads(path.read_text()))
        outs = []
        for i in range(2):
            out = tmp_path / ("%s.%d" % (path.stem, i))
            experiments.write_table(experiments.run(spec), str(out), spec.output_format)
            outs.append(out.read_bytes())
        same.append(outs[0] == outs[1])
    ok = all(same)
    acceptance_line(11, ok, "%d shipped specs re-run with the same seed: %d byte-identical" % (len(same), sum(same)))
    assert ok
