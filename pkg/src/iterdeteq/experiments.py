"""JSON-configured sweeps over the deterministic equivalents, with optional Monte Carlo.

An experiment file looks like::

    {
      "model": "relay",
      "config": {"dims": [4, 8, 12, 8, 4], "alphas": [1, 0.7, 0.5, 0.7],
                 "rho_ratios": [1, 0.7, 0.5, 0.7]},
      "sweep": {"variable": "rho0_db", "start": -10, "stop": 30, "step": 5},
      "mc": {"trials": 1000, "seed": 7},
      "output": {"path": "relay.csv", "format": "csv"},
      "units": "nats"
    }

``model`` is one of ``relay``, ``mac`` or ``rayleigh-product``; see
:func:`validate_spec` for the full schema. Results are long-format tables,
one row per grid point and hop/metric.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import channels, mac, relay
from .errors import DeteqError, InvalidConfig, NonConvergence
from .montecarlo import ergodic_mc

__all__ = [
    "SpecError",
    "ExperimentError",
    "ExperimentSpec",
    "Table",
    "load_spec",
    "validate_spec",
    "parse_spec",
    "run",
    "write_table",
    "reproduce_figure",
    "FIGURES",
]

MODELS = ("relay", "mac", "rayleigh-product")
SWEEP_VARIABLE = {"relay": "rho0_db", "mac": "rho_db", "rayleigh-product": "rho_db"}
INFO_METRICS = {"mutual_info", "sum_rate", "mutual_info_opt", "sum_rate_opt"}
LN2 = math.log(2.0)


class SpecError(DeteqError):
    """Experiment file failed validation; ``problems`` lists every violation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


class ExperimentError(DeteqError):
    """A solver failed at a specific grid point."""


@dataclass
class ExperimentSpec:
    model: str
    config: dict
    grid: np.ndarray
    mc: dict = None
    waterfill: dict = None
    output_path: str = None
    output_format: str = "csv"
    units: str = "nats"
    built: object = None

    @property
    def variable(self):
        return SWEEP_VARIABLE[self.model]


@dataclass
class Table:
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)

    def column(self, name):
        return [r[name] for r in self.rows]


# loading and validation ------------------------------------------------------


def load_spec(path):
    """Read a JSON experiment file; syntax errors become :class:`SpecError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(["%s: cannot read file (%s)" % (path, exc.strerror)]) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            ["%s: line %d, column %d: invalid JSON (%s)" % (path, exc.lineno, exc.colno, exc.msg)]
        ) from exc


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _num_list(obj, key, where, errs, length=None, minimum=None):
    v = obj.get(key)
    if not isinstance(v, list) or not v:
        errs.append("%s.%s: expected a nonempty list of numbers" % (where, key))
        return None
    ok = True
    for i, x in enumerate(v):
        if not _num(x):
            errs.append("%s.%s[%d]: expected a finite number, got %r" % (where, key, i, x))
            ok = False
        elif minimum is not None and x < minimum:
            errs.append("%s.%s[%d]: must be >= %g, got %r" % (where, key, i, minimum, x))
            ok = False
    if length is not None and len(v) != length:
        errs.append("%s.%s: expected %d entries, got %d" % (where, key, length, len(v)))
        ok = False
    return [float(x) for x in v] if ok else None


def _grid(sweep, errs):
    if not isinstance(sweep, dict):
        errs.append("sweep: expected an object with 'variable' and a grid")
        return None
    if "grid" in sweep:
        vals = _num_list(sweep, "grid", "sweep", errs)
    elif all(k in sweep for k in ("start", "stop", "step")):
        a, b, h = sweep["start"], sweep["stop"], sweep["step"]
        if not (_num(a) and _num(b) and _num(h)) or h <= 0 or b < a:
            errs.append("sweep: need numeric start <= stop and step > 0")
            return None
        n = int(math.floor((b - a) / h + 1e-9)) + 1
        vals = [a + i * h for i in range(n)]
    else:
        errs.append("sweep: give either 'grid' or 'start'/'stop'/'step'")
        return None
    if vals is None:
        return None
    if any(y <= x for x, y in zip(vals, vals[1:])):
        errs.append("sweep.grid: values must be strictly increasing")
        return None
    return np.array(vals, dtype=float)


def _matrix(desc, where, errs):
    """Dense matrix from a descriptor; appends a diagnostic and returns None on failure."""
    scale = 1.0
    if isinstance(desc, dict):
        if "scale" in desc:
            if not _num(desc["scale"]):
                errs.append("%s.scale: expected a finite number" % where)
                return None
            scale = float(desc["scale"])
        kind = desc.get("type")
        if kind == "G":
            bad = [k for k in ("phi", "d") if not _num(desc.get(k))]
            if not _int(desc.get("n")) or desc.get("n", 0) < 1:
                bad.append("n")
            if bad:
                errs.append("%s: G descriptor needs numeric phi, d and integer n >= 1 (bad: %s)" % (where, ", ".join(bad)))
                return None
            return scale * channels.correlation_matrix_G(desc["phi"], desc["d"], desc["n"])
        if kind == "identity":
            if not _int(desc.get("n")) or desc["n"] < 1:
                errs.append("%s: identity descriptor needs integer n >= 1" % where)
                return None
            return scale * np.eye(desc["n"], dtype=complex)
        if kind == "diag":
            vals = _num_list(desc, "values", where, errs)
            return None if vals is None else scale * np.diag(np.array(vals, dtype=complex))
        if "re" in desc:
            re = _dense(desc["re"], where + ".re", errs)
            im = _dense(desc.get("im", None), where + ".im", errs) if "im" in desc else None
            if re is None or ("im" in desc and im is None):
                return None
            if im is not None and im.shape != re.shape:
                errs.append("%s: re is %dx%d but im is %dx%d" % ((where,) + re.shape + im.shape))
                return None
            m = re.astype(complex) if im is None else re + 1j * im
            return _square(scale * m, where, errs)
        errs.append("%s: unknown matrix descriptor (use type G/identity/diag or re/im)" % where)
        return None
    m = _dense(desc, where, errs)
    return None if m is None else _square(m.astype(complex), where, errs)


def _dense(rows, where, errs):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        errs.append("%s: expected a nonempty list of rows" % where)
        return None
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        errs.append("%s: rows have different lengths %s" % (where, sorted(widths)))
        return None
    if not all(_num(x) for r in rows for x in r):
        errs.append("%s: entries must be finite numbers" % where)
        return None
    return np.array(rows, dtype=float)


def _square(m, where, errs):
    if m.shape[0] != m.shape[1]:
        errs.append("%s: matrix is %dx%d, not square" % ((where,) + m.shape))
        return None
    return m


def _validate_relay(cfg, errs):
    dims = cfg.get("dims")
    if not isinstance(dims, list) or len(dims) < 2 or not all(_int(n) and n >= 1 for n in dims):
        errs.append("config.dims: expected a list n_0..n_K of positive integers with K >= 1")
        return None
    K = len(dims) - 1
    max_hops = cfg.get("max_hops", relay.DEFAULT_MAX_HOPS)
    if not _int(max_hops) or max_hops < 1:
        errs.append("config.max_hops: expected a positive integer")
        max_hops = relay.DEFAULT_MAX_HOPS
    if K > max_hops:
        errs.append(
            "config.dims: K=%d hops exceeds the recursion cap max_hops=%d "
            "(cost grows geometrically with K; raise config.max_hops to override)" % (K, max_hops)
        )
    alphas = _num_list(cfg, "alphas", "config", errs, length=K, minimum=0.0)
    ratios = cfg.get("rho_ratios", [1.0] * K)
    ratios = _num_list({"rho_ratios": ratios}, "rho_ratios", "config", errs, length=K, minimum=0.0)
    if ratios is not None and ratios[0] != 1.0:
        errs.append("config.rho_ratios[0]: must be 1 (rho_0 is the swept SNR)")
    if alphas is None or ratios is None or K > max_hops:
        return None
    return {"dims": dims, "alphas": alphas, "ratios": ratios, "max_hops": max_hops}


def _validate_mac(cfg, errs):
    N = cfg.get("N")
    if not _int(N) or N < 1:
        errs.append("config.N: expected a positive integer")
        N = None
    txs = cfg.get("transmitters")
    if not isinstance(txs, list) or not txs:
        errs.append("config.transmitters: expected a nonempty list")
        return None
    R, S, T, Q, P = [], [], [], [], []
    for k, tx in enumerate(txs):
        where = "config.transmitters[%d]" % k
        if not isinstance(tx, dict):
            errs.append("%s: expected an object" % where)
            continue
        n0 = len(errs)
        r = _matrix(tx.get("R"), where + ".R", errs) if "R" in tx else None
        if "R" not in tx:
            errs.append("%s.R: missing" % where)
        s = _matrix(tx.get("S"), where + ".S", errs) if "S" in tx else None
        if "S" not in tx:
            errs.append("%s.S: missing" % where)
        t = _matrix(tx.get("T"), where + ".T", errs) if "T" in tx else None
        if "T" not in tx:
            errs.append("%s.T: missing" % where)
        p = tx.get("P")
        if p is not None and (not _num(p) or p <= 0):
            errs.append("%s.P: must be a positive number" % where)
        if "Q" in tx:
            q = _matrix(tx["Q"], where + ".Q", errs)
        elif p is not None and t is not None:
            q = p * np.eye(t.shape[0], dtype=complex)
        else:
            q = None
            errs.append("%s: give Q or a power budget P for uniform loading" % where)
        if r is not None and N is not None and r.shape[0] != N:
            errs.append("%s.R: is %dx%d, expected %dx%d (N)" % (where, r.shape[0], r.shape[0], N, N))
        if t is not None and q is not None and t.shape != q.shape:
            errs.append("%s.Q: is %dx%d but T is %dx%d" % (where, q.shape[0], q.shape[0], t.shape[0], t.shape[0]))
        if len(errs) == n0:
            R.append(r)
            S.append(s)
            T.append(t)
            Q.append(q)
            P.append(float(p) if p is not None else float(np.real(np.trace(q))) / q.shape[0])
    if len(R) != len(txs):
        return None
    try:
        base = mac.MacConfig.from_matrices(R, S, T, Q, rho=1.0)
    except InvalidConfig as exc:
        errs.append("config.transmitters: %s" % exc)
        return None
    return {"base": base, "P": P}


def _validate_rayleigh(cfg, errs):
    out = {}
    for key in ("N", "S", "K"):
        v = cfg.get(key)
        if not _int(v) or v < 1:
            errs.append("config.%s: expected a positive integer" % key)
            return None
        out[key] = v
    return out


def validate_spec(raw):
    """Every structural and semantic problem in ``raw``, as ``field: message`` lines."""
    errs = []
    _parse(raw, errs)
    return errs


def _parse(raw, errs):
    if not isinstance(raw, dict):
        errs.append("<root>: expected a JSON object")
        return None
    known = {"model", "config", "sweep", "mc", "waterfill", "output", "units", "description"}
    for key in sorted(set(raw) - known):
        errs.append("%s: unknown field" % key)
    model = raw.get("model")
    if model not in MODELS:
        errs.append("model: expected one of %s, got %r" % (", ".join(MODELS), model))
    cfg = raw.get("config")
    built = None
    if not isinstance(cfg, dict):
        errs.append("config: expected an object")
    elif model == "relay":
        built = _validate_relay(cfg, errs)
    elif model == "mac":
        built = _validate_mac(cfg, errs)
    elif model == "rayleigh-product":
        built = _validate_rayleigh(cfg, errs)
    grid = _grid(raw.get("sweep"), errs) if "sweep" in raw else None
    if "sweep" not in raw:
        errs.append("sweep: missing")
    elif model in SWEEP_VARIABLE and isinstance(raw["sweep"], dict):
        var = raw["sweep"].get("variable", SWEEP_VARIABLE[model])
        if var != SWEEP_VARIABLE[model]:
            errs.append("sweep.variable: %s models sweep %r, got %r" % (model, SWEEP_VARIABLE[model], var))
    mc_block = raw.get("mc")
    if mc_block is not None:
        if not isinstance(mc_block, dict):
            errs.append("mc: expected an object with trials and seed")
        else:
            tr, sd = mc_block.get("trials"), mc_block.get("seed", 0)
            if not _int(tr) or tr < 2:
                errs.append("mc.trials: expected an integer >= 2")
            if not _int(sd) or not 0 <= sd < 2 ** 64:
                errs.append("mc.seed: expected an integer in [0, 2^64)")
    wf = raw.get("waterfill")
    if wf is not None:
        if model != "mac":
            errs.append("waterfill: only supported for the mac model")
        elif not isinstance(wf, dict):
            errs.append("waterfill: expected an object")
        else:
            if "budgets" in wf:
                ntx = len(cfg.get("transmitters", [])) if isinstance(cfg, dict) else None
                _num_list(wf, "budgets", "waterfill", errs, length=ntx)
                if isinstance(wf.get("budgets"), list) and any(_num(b) and b <= 0 for b in wf["budgets"]):
                    errs.append("waterfill.budgets: power budgets must be positive")
            eps = wf.get("eps", 1e-8)
            if not _num(eps) or eps <= 0:
                errs.append("waterfill.eps: expected a positive number")
    out = raw.get("output", {})
    if not isinstance(out, dict):
        errs.append("output: expected an object with path and format")
        out = {}
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        errs.append("output.format: expected csv or json, got %r" % (fmt,))
    if "path" in out and not isinstance(out["path"], str):
        errs.append("output.path: expected a string")
    units = raw.get("units", "nats")
    if units not in ("nats", "bits"):
        errs.append("units: expected nats or bits, got %r" % (units,))
    if errs:
        return None
    spec = ExperimentSpec(
        model=model,
        config=cfg,
        grid=grid,
        mc=None if mc_block is None else {"trials": mc_block["trials"], "seed": mc_block.get("seed", 0)},
        waterfill=None if wf is None else dict(wf),
        output_path=out.get("path"),
        output_format=fmt,
        units=units,
        built=built,
    )
    return spec


def parse_spec(raw):
    """Validated :class:`ExperimentSpec`; raises :class:`SpecError` listing all problems."""
    errs = []
    spec = _parse(raw, errs)
    if errs:
        raise SpecError(errs)
    return spec


# running ---------------------------------------------------------------------


def _db(x):
    return 10.0 ** (x / 10.0)


def _columns(first, mc):
    cols = list(first) + ["deteq"]
    if mc:
        cols += ["mc_mean", "mc_std", "mc_stderr", "trials"]
    return cols


def _row(keys, deteq, rep=None, idx=None):
    row = dict(keys)
    row["deteq"] = float(deteq)
    if rep is not None:
        pick = (lambda v: float(v)) if idx is None else (lambda v: float(np.asarray(v)[idx]))
        row["mc_mean"] = pick(rep.mean)
        row["mc_std"] = pick(rep.std)
        row["mc_stderr"] = pick(rep.stderr)
        row["trials"] = rep.trials
    return row


def _relay_config(built, rho0):
    return relay.RelayConfig(
        dims=built["dims"],
        alphas=built["alphas"],
        rhos=[r * rho0 for r in built["ratios"]],
        max_hops=built["max_hops"],
    )


def relay_normalized_deteq(cfg, tol=relay.DEFAULT_TOL, max_iter=relay.DEFAULT_MAX_ITER):
    """``(n_k / n_0) * Ibar_k`` for every hop ``k = 1..K``."""
    n0 = cfg.dims[0]
    return np.array(
        [cfg.dims[k] / n0 * relay.mutual_info_deteq(k, cfg, tol, max_iter).ibar for k in range(1, cfg.K + 1)]
    )


def relay_normalized_mc(cfg, trials, seed, workers=None):
    """Monte Carlo counterpart of :func:`relay_normalized_deteq` (all hops per trial)."""
    n0 = cfg.dims[0]
    scale = np.array(cfg.dims[1:]) / n0

    def metric(rng):
        real = channels.sample_relay(cfg, rng)
        return scale * np.array([channels.relay_mutual_info_exact(real, k) for k in range(1, cfg.K + 1)])

    return ergodic_mc(metric, trials, seed, workers)


def _run_relay(spec, tol, max_iter):
    rows = []
    for x in spec.grid:
        cfg = _relay_config(spec.built, _db(x))
        try:
            det = relay_normalized_deteq(cfg, tol, max_iter)
        except NonConvergence as exc:
            raise ExperimentError("rho0_db=%g: %s" % (x, exc)) from exc
        rep = None
        if spec.mc:
            rep = relay_normalized_mc(cfg, spec.mc["trials"], spec.mc["seed"])
        for k in range(cfg.K):
            rows.append(_row({"rho0_db": float(x), "hop": k + 1}, det[k], rep, k if rep else None))
    return Table(_columns(["rho0_db", "hop"], spec.mc), rows)


def mac_mc(cfg, trials, seed, sum_rate=True, workers=None):
    """Ergodic ``(I_N, R_N)`` (or just ``I_N``) for one MAC configuration."""

    def metric(rng):
        H = channels.sample_double_scattering(cfg, rng)
        I = channels.mac_mutual_info_exact(H, cfg.Q, cfg.rho)
        if not sum_rate:
            return I
        sinr = channels.mac_mmse_sinrs_exact(channels.stream_channels(H, cfg), cfg.rho)
        R = sum(np.sum(np.log1p(v)) for v in sinr) / cfg.N
        return np.array([I, R])

    return ergodic_mc(metric, trials, seed, workers)


def _codiagonal(cfg):
    try:
        for k in range(cfg.K):
            cfg.joint_basis(k)
    except DeteqError:
        return False
    return True


def _mac_point(cfg, spec, suffix, tol, max_iter, rows, x):
    sol = mac.solve_fundamental(cfg, tol=tol, max_iter=max_iter)
    det = {"mutual_info" + suffix: mac.mutual_info_deteq(cfg, sol)}
    has_rate = _codiagonal(cfg)
    if has_rate:
        det["sum_rate" + suffix] = mac.sum_rate_deteq(cfg, sol)
    rep = mac_mc(cfg, spec.mc["trials"], spec.mc["seed"], has_rate) if spec.mc else None
    for i, (name, val) in enumerate(det.items()):
        idx = (i if has_rate else None) if rep else None
        rows.append(_row({"rho_db": float(x), "metric": name}, val, rep, idx))
    return sol


def _run_mac(spec, tol, max_iter):
    base, P = spec.built["base"], spec.built["P"]
    wf = spec.waterfill
    budgets = np.array(wf.get("budgets", P), dtype=float) if wf else None
    rows, wf_log = [], []
    for x in spec.grid:
        cfg = base.with_rho(_db(x))
        try:
            _mac_point(cfg, spec, "", tol, max_iter, rows, x)
            if wf:
                res = mac.waterfill_optimal_Q(cfg, budgets, eps=wf.get("eps", 1e-8), tol=tol, max_iter=max_iter)
                _mac_point(res.config, spec, "_opt", tol, max_iter, rows, x)
                wf_log.append(
                    {
                        "rho_db": float(x),
                        "budgets": budgets.tolist(),
                        "power_sums": [float(np.mean(p)) for p in res.powers],
                        "powers": [p.tolist() for p in res.powers],
                        "mu": res.mu.tolist(),
                        "g": res.g.tolist(),
                        "iterations": res.iterations,
                    }
                )
        except NonConvergence as exc:
            raise ExperimentError("rho_db=%g: %s" % (x, exc)) from exc
    extra = {"waterfill": wf_log} if wf else {}
    return Table(_columns(["rho_db", "metric"], spec.mc), rows, extra)


def _run_rayleigh(spec, tol, max_iter):
    N, S, K = (spec.built[k] for k in ("N", "S", "K"))
    rows = []
    for x in spec.grid:
        rho = _db(x)
        cf = mac.rayleigh_product_closed_form(N, S, K, rho)
        rep = None
        if spec.mc:
            cfg = mac.rayleigh_product_config(N, S, K, rho)
            rep = mac_mc(cfg, spec.mc["trials"], spec.mc["seed"], sum_rate=False)
        keys = {"rho_db": float(x)}
        rows.append(_row(dict(keys, metric="gbar"), cf.gbar))
        rows.append(_row(dict(keys, metric="mutual_info"), cf.ibar, rep))
        rows.append(_row(dict(keys, metric="sinr"), cf.gamma))
    return Table(_columns(["rho_db", "metric"], spec.mc), rows)


def _to_bits(table):
    for row in table.rows:
        name = row.get("metric", "mutual_info")
        if name in INFO_METRICS:
            for col in ("deteq", "mc_mean", "mc_std", "mc_stderr"):
                if col in row:
                    row[col] = row[col] / LN2
    return table


def run(spec, tol=1e-12, max_iter=None, units=None):
    """Evaluate ``spec`` over its grid and return a :class:`Table`.

    Raises
    ------
    ExperimentError
        If a solver does not converge; the message names the grid point.
    """
    runner = {"relay": _run_relay, "mac": _run_mac, "rayleigh-product": _run_rayleigh}[spec.model]
    if max_iter is None:
        max_iter = relay.DEFAULT_MAX_ITER if spec.model == "relay" else 100_000
    table = runner(spec, tol, max_iter)
    if (units or spec.units) == "bits":
        _to_bits(table)
    table.extra["units"] = units or spec.units
    return table


# output ----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (int, np.integer)) or isinstance(v, str):
        return str(v)
    return format(float(v), ".12g")


def table_csv(table):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(row[c]) for c in table.columns])
    return buf.getvalue()


def table_json(table):
    doc = {"columns": table.columns, "rows": table.rows}
    doc.update(table.extra)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_table(table, path, fmt="csv"):
    """Write ``table`` as CSV (12 significant digits) or JSON."""
    text = table_csv(table) if fmt == "csv" else table_json(table)
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# figures ---------------------------------------------------------------------

FIG2_GRID = np.arange(-10.0, 30.0 + 1e-9, 5.0)
FIG3_GRID = np.arange(0.0, 30.0 + 1e-9, 5.0)
FIG3_SCATTERERS = (1, 2, 3, 4, 100)
FIG4_GRID = np.arange(-10.0, 30.0 + 1e-9, 5.0)
FIGURES = ("fig2", "fig3", "fig4")


def keyhole_config(n_scatterers, rho, N=4):
    """Single-user uncorrelated double-scattering channel with ``n_scatterers`` keyholes."""
    eye = np.eye(N)
    return mac.MacConfig(R=[eye], s=[np.ones(n_scatterers)], T=[eye], Q=[eye], rho=rho)


def fig2_table(trials, seed, tol=1e-12, max_iter=relay.DEFAULT_MAX_ITER):
    spec = parse_spec(
        {
            "model": "relay",
            "config": {
                "dims": [4, 8, 12, 8, 4],
                "alphas": [1.0, 0.7, 0.5, 0.7],
                "rho_ratios": [1.0, 0.7, 0.5, 0.7],
            },
            "sweep": {"variable": "rho0_db", "grid": FIG2_GRID.tolist()},
            "mc": {"trials": trials, "seed": seed} if trials else None,
        }
    )
    return run(spec, tol, max_iter)


def fig3_table(trials, seed, tol=1e-12, max_iter=100_000):
    rows = []
    for n1 in FIG3_SCATTERERS:
        for x in FIG3_GRID:
            cfg = keyhole_config(n1, _db(x))
            try:
                det = mac.mutual_info_deteq(cfg, tol=tol, max_iter=max_iter)
            except NonConvergence as exc:
                raise ExperimentError("n_scatterers=%d, rho_db=%g: %s" % (n1, x, exc)) from exc
            rep = mac_mc(cfg, trials, seed, sum_rate=False) if trials else None
            rows.append(_row({"n_scatterers": n1, "rho_db": float(x), "metric": "mutual_info"}, det, rep))
    return Table(_columns(["n_scatterers", "rho_db", "metric"], bool(trials)), rows)


def fig4_table(trials, seed, tol=1e-12, max_iter=100_000):
    n = 3
    budgets = [1.0 / n] * 3
    rows, wf_log = [], []
    spec = ExperimentSpec(model="mac", config={}, grid=FIG4_GRID, mc={"trials": trials, "seed": seed} if trials else None)
    for x in FIG4_GRID:
        cfg = mac.fig4_config(_db(x))
        try:
            _mac_point(cfg, spec, "", tol, max_iter, rows, x)
            res = mac.waterfill_optimal_Q(cfg, budgets, tol=tol, max_iter=max_iter)
            _mac_point(res.config, spec, "_opt", tol, max_iter, rows, x)
        except NonConvergence as exc:
            raise ExperimentError("rho_db=%g: %s" % (x, exc)) from exc
        wf_log.append(
            {
                "rho_db": float(x),
                "budgets": budgets,
                "power_sums": [float(np.mean(p)) for p in res.powers],
                "powers": [p.tolist() for p in res.powers],
                "mu": res.mu.tolist(),
                "iterations": res.iterations,
            }
        )
    return Table(_columns(["rho_db", "metric"], bool(trials)), rows, {"waterfill": wf_log})


def reproduce_figure(which, trials=10_000, seed=1, out=".", units="nats", tol=1e-12, max_iter=None):
    """Regenerate the data behind one of the figures and write ``<out>/<which>.csv``.

    ``fig4`` also writes ``<out>/fig4_waterfill.json`` with the optimal power
    loadings per SNR. Returns the list of written paths.
    """
    if which not in FIGURES:
        raise ValueError("unknown figure %r (choose from %s)" % (which, ", ".join(FIGURES)))
    kw = {"tol": tol}
    if max_iter is not None:
        kw["max_iter"] = max_iter
    table = {"fig2": fig2_table, "fig3": fig3_table, "fig4": fig4_table}[which](trials, seed, **kw)
    if units == "bits":
        _to_bits(table)
    paths = [write_table(table, os.path.join(out, which + ".csv"))]
    if which == "fig4":
        path = os.path.join(out, "fig4_waterfill.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(table.extra["waterfill"], fh, indent=2)
            fh.write("\n")
        paths.append(path)
    return paths
