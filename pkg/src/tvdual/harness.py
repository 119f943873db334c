"""
Experiment driver: ridge-regression instances, runs, metrics and CSV output.

An instance has ``n`` nodes, each observing ``b_i = H_i x_gen + eps_i`` through
a ``d x p`` matrix ``H_i``. Entries of ``x_gen`` are drawn from N(0, 10) and
entries of ``H_i`` and ``eps_i`` from N(0, 0.1); with the default
``convention="variance"`` the second parameter is a variance. Node ``i``
minimises ``(1/(2nd)) ||H_i x - b_i||^2 + (r/2) ||x||^2``.

The reference point of every metric is the exact minimiser of the summed
objective, not ``x_gen``.
"""

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import algorithms, diagnostics, graphs, rates
from .objectives import ObjectiveSet, OptimalPair, QuadraticLocalObjective, constants

#: Reference step sizes of the three standard regimes.
SCENARIOS = {
    "sparse": {"pi": 0.1, "r": 1e-3,
               "steps": {"dual_decomp": 9e-5, "panda": 5e-5, "diging": 0.06}},
    "ill_conditioned": {"pi": 0.5, "r": 1e-4,
                        "steps": {"dual_decomp": 3e-6, "panda": 9e-6, "diging": 0.09}},
    "well_conditioned": {"pi": 0.5, "r": 1.0,
                         "steps": {"dual_decomp": 0.03, "panda": 0.03, "diging": 0.09}},
}

TRACE_COLUMNS = ("k", "rel_error", "r_norm", "xperp_norm", "zperp_norm",
                 "dy_norm", "dxz_norm", "dx_norm")

GEN_MEAN_VAR = 10.0
NOISE_VAR = 0.1
MATRIX_VAR = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 10
    p: int = 3
    d: int = 5
    r: float = 1.0
    pi: float = 0.5
    seed: int = 0
    graph_seed: int = 0
    algorithm: str = "panda"
    step: float = 0.03
    iters: int = 2000
    B: int = 1

    def __post_init__(self):
        if min(self.n, self.p, self.d, self.B) < 1:
            raise ValueError("n, p, d and B must all be >= 1")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.iters < 0:
            raise ValueError("iters must be non-negative")
        if self.r < 0:
            raise ValueError("ridge weight must be non-negative")
        if self.algorithm not in algorithms.ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        return replace(self, **changes)


def scenario_config(name, algorithm="panda", **overrides):
    """Config for one of the standard regimes, using its reference step size."""
    sc = SCENARIOS[name]
    base = ExperimentConfig(pi=sc["pi"], r=sc["r"], algorithm=algorithm,
                            step=sc["steps"][algorithm])
    return base.replace(**overrides)


@dataclass(frozen=True)
class Instance:
    objectives: ObjectiveSet
    opt: OptimalPair
    consts: object
    spec: dict

    @property
    def x_star(self):
        return self.opt.x_star

    @property
    def y_star(self):
        return self.opt.y_star


def _build(H, b, n, d, r):
    scale = 1.0 / (n * d)
    objs = ObjectiveSet(QuadraticLocalObjective(H[i], b[i], r, scale) for i in range(n))
    return objs, OptimalPair.of(objs), constants(objs)


def generate_instance(n=10, p=3, d=5, r=1.0, seed=0, convention="variance"):
    """
    Draw a ridge-regression instance.

    Draw order from ``default_rng(seed)``: the generator vector, then for each
    node ``H_i`` followed by ``eps_i``.
    """
    if convention not in ("variance", "std"):
        raise ValueError("convention must be 'variance' or 'std'")
    spread = math.sqrt if convention == "variance" else (lambda v: v)
    rng = np.random.default_rng(seed)
    x_gen = rng.normal(0.0, spread(GEN_MEAN_VAR), size=p)
    H = np.empty((n, d, p))
    b = np.empty((n, d))
    for i in range(n):
        H[i] = rng.normal(0.0, spread(MATRIX_VAR), size=(d, p))
        b[i] = H[i] @ x_gen + rng.normal(0.0, spread(NOISE_VAR), size=d)
    objs, opt, consts = _build(H, b, n, d, r)
    spec = {"n": n, "p": p, "d": d, "r": r, "seed": seed, "convention": convention,
            "x_gen": x_gen.tolist()}
    return Instance(objs, opt, consts, spec)


def instance_from_config(config, convention="variance"):
    return generate_instance(config.n, config.p, config.d, config.r, config.seed, convention)


def save_instance(path, inst, explicit=False):
    data = {k: inst.spec[k] for k in ("n", "p", "d", "r", "seed", "convention")}
    if explicit:
        data["H"] = [o.H.tolist() for o in inst.objectives]
        data["b"] = [o.b.tolist() for o in inst.objectives]
    _atomic_write(path, json.dumps(data, indent=2) + "\n")


def load_instance(path):
    """Read an instance file; explicit ``H``/``b`` win over regeneration from the seed."""
    data = json.loads(Path(path).read_text())
    if "H" in data:
        H = np.asarray(data["H"], dtype=float)
        b = np.asarray(data["b"], dtype=float)
        objs, opt, consts = _build(H, b, data["n"], data["d"], data["r"])
        return Instance(objs, opt, consts, {k: v for k, v in data.items() if k not in ("H", "b")})
    return generate_instance(data["n"], data["p"], data["d"], data["r"], data["seed"],
                             data.get("convention", "variance"))


def relative_error(X, x_star):
    """
    ``||X - X*||_F / ||X*||_F`` with ``X*`` the optimum replicated on every node.

    ``X`` may be one ``(n, p)`` snapshot or a ``(T, n, p)`` history.
    """
    x_star = np.asarray(x_star, dtype=float)
    nrm = np.linalg.norm(x_star)
    if nrm == 0:
        raise ValueError("metric undefined: the optimum is zero")
    X = np.asarray(X, dtype=float)
    err = np.sqrt(np.sum((X - x_star) ** 2, axis=(-2, -1)))
    return err / (nrm * math.sqrt(X.shape[-2]))


def fit_linear_rate(metric, tail_fraction=0.5, floor=0.0):
    """
    Empirical linear rate of a decaying metric.

    The sequence is cut at its first entry ``<= floor``; a least-squares line
    is fitted to ``log(metric)`` over the last ``tail_fraction`` of what
    remains.

    Returns
    -------
    rate : float
        ``exp(slope)``.
    r_squared : float
        Coefficient of determination of the fit (1.0 for an exactly flat tail).
    """
    m = np.asarray(metric, dtype=float)
    bad = np.nonzero(~(m > floor))[0]
    if bad.size:
        m = m[:bad[0]]
    start = int(len(m) * (1.0 - tail_fraction))
    tail = m[start:]
    if len(tail) < 3:
        raise ValueError("need at least 3 positive points to fit a rate")
    k = np.arange(start, start + len(tail), dtype=float)
    logs = np.log(tail)
    slope, intercept = np.polyfit(k, logs, 1)
    ss_res = float(np.sum((logs - (slope * k + intercept)) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(math.exp(slope)), r2


def schedule_for(config):
    return graphs.GraphSchedule(n=config.n, pi=config.pi, seed=config.graph_seed)


@dataclass(frozen=True)
class RunResult:
    config: ExperimentConfig
    instance: Instance
    trace: algorithms.Trace
    rel_error: np.ndarray


def run_experiment(config, instance=None, convention="variance"):
    inst = instance_from_config(config, convention) if instance is None else instance
    trace = algorithms.run(config.algorithm, inst.objectives, schedule_for(config),
                           config.step, config.iters,
                           metadata={"config": config.to_dict(), "instance": inst.spec})
    return RunResult(config, inst, trace, relative_error(trace.x, inst.x_star))


def trace_table(trace, instance):
    """Per-iteration metric columns; entries that do not apply are NaN."""
    T = len(trace)
    nan = np.full(T, np.nan)
    cols = {"k": np.arange(T), "rel_error": relative_error(trace.x, instance.x_star)}
    xp = diagnostics.center(trace.x)
    cols["xperp_norm"] = diagnostics._norms(xp)
    dx = np.zeros(T)
    dx[1:] = diagnostics._norms(np.diff(trace.x, axis=0))
    cols["dx_norm"] = dx
    if trace.y is not None:
        cols["r_norm"] = diagnostics._norms(trace.y - instance.y_star)
        dy = np.zeros(T)
        dy[1:] = diagnostics._norms(np.diff(trace.y, axis=0))
        cols["dy_norm"] = dy
    if trace.z is not None:
        zp = diagnostics.center(trace.z)
        cols["zperp_norm"] = diagnostics._norms(zp)
        cols["dxz_norm"] = diagnostics._norms(xp - zp)
    return {c: cols.get(c, nan) for c in TRACE_COLUMNS}


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if math.isnan(v) else repr(float(v))


def table_to_csv(table, columns=None):
    columns = list(columns or table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in zip(*(table[c] for c in columns)):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def sidecar_path(csv_path):
    return Path(csv_path).with_suffix(".json")


def write_trace_csv(path, table, metadata=None):
    """Write the trace table and, if given, its JSON metadata sidecar."""
    _atomic_write(path, table_to_csv(table, TRACE_COLUMNS))
    if metadata is not None:
        _atomic_write(sidecar_path(path), json.dumps(metadata, indent=2, sort_keys=True) + "\n")


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace")
    return {c: np.array([float(r[c]) if r.get(c) not in (None, "") else np.nan for r in rows])
            for c in rows[0]}


def sequences_from_table(table):
    """Rebuild derived sequences from trace columns (PANDA traces only)."""
    need = ("r_norm", "xperp_norm", "zperp_norm", "dy_norm", "dxz_norm")
    missing = [c for c in need if c not in table or np.isnan(table[c]).any()]
    if missing:
        raise ValueError(f"trace lacks PANDA columns: {missing}")
    dx = table.get("dx_norm")
    if dx is not None and np.isnan(dx).any():
        dx = None
    return diagnostics.DerivedSequences(r=table["r_norm"], xperp=table["xperp_norm"],
                                        zperp=table["zperp_norm"], dy=table["dy_norm"],
                                        dxz=table["dxz_norm"], dx=dx)


def write_optimum(path, inst):
    data = {"x_star": inst.x_star.tolist(), "y_star": inst.y_star.tolist(),
            **inst.consts.to_dict()}
    _atomic_write(path, json.dumps(data, indent=2) + "\n")


def read_optimum(path):
    data = json.loads(Path(path).read_text())
    opt = OptimalPair(np.asarray(data["x_star"], float), np.asarray(data["y_star"], float))
    return opt, float(data["mu"]), float(data["L"])


class CertificateRefused(ValueError):
    pass


def certify(consts, schedule, mixing, B, c):
    """
    Rate certificate of a realised run.

    Every window of length ``B`` in the realised schedule must be connected;
    otherwise the certificate is refused. ``delta`` is measured on the
    realised mixing matrices.

    Returns
    -------
    (RateCertificate, graphs.ContractionEstimate)
    """
    horizon = len(mixing)
    for k in range(B - 1, horizon):
        if not graphs.window_connected(schedule, k, B):
            raise CertificateRefused(
                f"window of length {B} ending at k={k} is disconnected; no certificate")
    est = graphs.contraction_delta(mixing, B)
    if est.delta >= 1.0:
        raise CertificateRefused(f"measured delta={est.delta} is not below 1")
    cert = rates.certificate_for_step(c, consts.mu, consts.L, est.delta, B)
    return cert, est


def run_metadata(result):
    """JSON-ready metadata for a run: config, instance, constants and contraction."""
    trace, cfg = result.trace, result.config
    meta = dict(trace.metadata)
    meta["constants"] = result.instance.consts.to_dict()
    if trace.algorithm != "dual_decomp" and cfg.iters >= cfg.B:
        est = graphs.contraction_delta(trace.matrices, cfg.B)
        meta["contraction"] = {"delta": est.delta, "B": est.B, "k_range": list(est.k_range)}
    return meta


def sweep_one(config_dict):
    cfg = ExperimentConfig.from_dict(config_dict)
    res = run_experiment(cfg)
    err = res.rel_error
    try:
        rate, r2 = fit_linear_rate(err, floor=1e-13)
    except ValueError:
        rate, r2 = math.nan, math.nan
    return {"seed": cfg.seed, "graph_seed": cfg.graph_seed, "algorithm": cfg.algorithm,
            "final_rel_error": float(err[-1]), "min_rel_error": float(err.min()),
            "rate": rate, "r_squared": r2, "kappa": res.instance.consts.kappa}


def sweep(config, seeds, jobs=1):
    """
    Run ``config`` once per seed ``s``: instance seed ``s`` and graph seed
    ``config.graph_seed + s``.
    """
    cfgs = [config.replace(seed=s, graph_seed=config.graph_seed + s).to_dict() for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(sweep_one, cfgs))
    return [sweep_one(c) for c in cfgs]


def sweep_medians(rows):
    keys = ("final_rel_error", "min_rel_error", "rate", "r_squared", "kappa")
    return {k: float(np.nanmedian([r[k] for r in rows])) for k in keys}
