"""Seeded experiment grids and their CSV / JSON / gnuplot reports.

Each mode turns a config into a list of row tasks.  Rows run on a thread pool
and come back in grid order; all randomness comes from one Philox stream keyed
by the config seed, so identical configs give identical CSV files.
"""

from __future__ import annotations

import json
import math
import os
import platform
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .bounds import BoundQuery, dyadic_sigma_chain, lower_bound, rhs_main_theorem, rhs_sigma_theorem
from .certify import PhiSpec, certify_phi
from .counting import brute_count_M, sum_S, sum_S_star, sum_Sigma
from .errors import CapabilityError, DomainError
from .lattice import as_matrix
from .rng import uniform_alphas
from .scalar import clamped_log
from .schmidt import FAMILIES, exceptional_set_estimate, h1_slab_counts, moment_sum_check, tile_counts
from .tessellation import SlabDomainH2, tessellate_h2

GOLDEN = (1 + math.sqrt(5)) / 2
MODES = ("kruse", "bhv", "bhv-dual", "count-vs-bound", "sigma-vs-bound", "mean-count", "schmidt")

DEFAULT_GRIDS = {
    "kruse": {"alpha_samples": 5, "T": [1e3, 1e4, 1e5, 1e6]},
    "bhv": {"n": 2, "alpha_samples": 20, "T": [[10, 1e4], [1e2, 1e3], [1e3, 1e3]]},
    "bhv-dual": {"n": 2, "alpha_samples": 10, "T": [1e2, 1e3, 1e4]},
    "count-vs-bound": {"L": [[GOLDEN]], "phi": {"family": "const", "c": 0.38}, "R": [0.5, 1.0],
                       "eps_exponents": [1, 2, 3, 4, 5, 6], "T": [1e2, 1e3, 1e4], "qmax": 10000},
    "sigma-vs-bound": {"L": [[GOLDEN]], "phi": {"family": "const", "c": 0.38},
                       "T": [4, 10, 30, 100, 300, 1000], "qmax": 10000},
    "mean-count": {"n": [1, 2], "epsilon": 0.2, "R": 1.0, "levels": 2, "samples": 1000,
                   "h1": [{"n": 1, "epsilon": 0.01, "R": 0.5, "Tprime": 1000},
                          {"n": 2, "epsilon": 1e-4, "R": 0.5, "Tprime": 1000}]},
    "schmidt": {"family": "const", "s": [2, 3, 4, 5, 6], "eta": 0.5, "samples": 1000},
}

# Envelope used by the mean-count mode.
MEAN_COUNT_ENVELOPE = 5.0


@dataclass
class ExperimentConfig:
    mode: str
    seed: int
    grid: dict = field(default_factory=dict)
    workers: int = 1
    output: str = "results/run"

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.seed is None:
            raise DomainError("seed is mandatory")
        self.seed = int(self.seed)
        self.workers = max(1, int(self.workers))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"mode", "seed", "grid", "workers", "output"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def resolved_grid(self) -> dict:
        g = dict(DEFAULT_GRIDS[self.mode])
        g.update(self.grid)
        return g


@dataclass
class Row:
    m: int
    n: int
    T: tuple
    lhs: Optional[float]
    rhs: Optional[float]
    ratio: Optional[float]
    flags: tuple = ()
    extra: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    summary: dict
    environment: dict

    def to_dict(self) -> dict:
        return json.loads(json.dumps({
            "config": asdict(self.config),
            "rows": [_row_dict(r) for r in self.rows],
            "summary": self.summary,
            "environment": self.environment,
        }))


def _row_dict(r: Row) -> dict:
    return {"m": r.m, "n": r.n, "T": list(r.T), "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio,
            "flags": list(r.flags), "extra": r.extra}


def _ratio(lhs, rhs):
    return lhs / rhs if rhs else None


def _guarded(task: Callable[[], Row], m, n, T) -> Row:
    try:
        return task()
    except CapabilityError as exc:
        return Row(m, n, tuple(T), None, None, None, ("budget",), {"error": str(exc)})


def _require(values, name="grid"):
    if values is None or len(values) == 0:
        raise DomainError("empty grid")
    return values


# ------------------------------------------------------------------ modes


def _kruse_tasks(cfg, g):
    Ts = _require(g["T"])
    k = int(g["alpha_samples"])
    alphas = uniform_alphas(cfg.seed, _require(range(k)) and k, 1)
    tasks = []
    for i, a in enumerate(alphas):
        for T in Ts:
            def task(a=a, T=T, i=i):
                lhs = sum_S(a, [T])
                rhs = lower_bound("kruse", T)
                return Row(1, 1, (T,), lhs, rhs, _ratio(lhs, rhs), (), {"sample": i, "alpha1": float(a[0])})
            tasks.append((task, 1, 1, (T,)))
    return tasks


def _bhv_tasks(cfg, g, dual=False):
    n = int(g["n"])
    Ts = _require(g["T"])
    if not dual:
        Ts = [tuple(float(t) for t in T) for T in Ts]
        if any(len(T) != n for T in Ts):
            raise DomainError(f"every T tuple needs {n} entries")
        if n > 1 and not any(max(T) / min(T) >= 100 for T in Ts):
            raise DomainError("bhv grids must contain a skewed tuple with max T_i / min T_i >= 100")
    k = int(g["alpha_samples"])
    alphas = uniform_alphas(cfg.seed, k, n)
    tasks = []
    for i, a in enumerate(_require(list(alphas))):
        for T in Ts:
            def task(a=a, T=T, i=i):
                extra = {"sample": i, **{f"alpha{j + 1}": float(v) for j, v in enumerate(a)}}
                if dual:
                    lhs = sum_S_star(a, T)
                    rhs = clamped_log(T) ** (n + 1)
                    return Row(n, 1, (float(T),), lhs, rhs, _ratio(lhs, rhs), (), extra)
                lhs = sum_S(a, T)
                rhs = lower_bound("bhv", T)
                return Row(1, n, T, lhs, rhs, _ratio(lhs, rhs), (), extra)
            tasks.append((task, 1, n, T if not dual else (T,)))
    return tasks


def _phi(g):
    return PhiSpec(**g["phi"])


def _count_tasks(cfg, g):
    L = as_matrix(g["L"])
    m, n = L.shape
    phi = _phi(g)
    cert = certify_phi(L, phi, int(g["qmax"]))
    cflag = "certified" if cert.holds else "uncertified"
    tasks = []
    for R in _require(g["R"]):
        for j in _require(g["eps_exponents"]):
            for T in _require(g["T"]):
                Tt = tuple(float(t) for t in np.atleast_1d(T))
                eps = math.exp(-j) * R

                def task(R=R, eps=eps, Tt=Tt, j=j):
                    lhs = brute_count_M(L, eps, R, Tt)
                    rhs = rhs_main_theorem(BoundQuery(m, n, eps, R, Tt, phi))
                    return Row(m, n, Tt, float(lhs), rhs, _ratio(lhs, rhs), (cflag,),
                               {"epsilon": eps, "R": R, "eps_exponent": j})
                tasks.append((task, m, n, Tt))
    return tasks


def _sigma_tasks(cfg, g):
    L = as_matrix(g["L"])
    m, n = L.shape
    phi = _phi(g)
    cert = certify_phi(L, phi, int(g["qmax"]))
    cflag = "certified" if cert.holds else "uncertified"
    tasks = []
    for T in _require(g["T"]):
        Tt = tuple(float(t) for t in np.atleast_1d(T))
        if len(Tt) == 1 and n > 1:
            Tt = Tt * n

        def task(Tt=Tt):
            lhs = sum_Sigma(L, Tt)
            rhs = rhs_sigma_theorem(m, n, Tt, phi)
            chain = dyadic_sigma_chain(L, Tt, phi)
            flag = "chain_ok" if chain.value >= lhs else "chain_fail"
            return Row(m, n, Tt, lhs, rhs, _ratio(lhs, rhs), (cflag, flag),
                       {"chain": chain.value, "K": chain.K})
        tasks.append((task, m, n, Tt))
    return tasks


def _mean_count_tasks(cfg, g):
    samples = int(g["samples"])
    eps, R = float(g["epsilon"]), float(g["R"])
    levels = int(g["levels"])
    tasks = []
    for n in _require(g["n"]):
        alphas = uniform_alphas(cfg.seed, samples, n)
        T = (math.exp(levels),) * n
        family = tessellate_h2(SlabDomainH2(n, eps, R, T))
        for b, tag in family.indices:
            def task(b=b, tag=tag, n=n, alphas=alphas, T=T):
                c = tile_counts(alphas, b, eps, tag)
                mean = float(c.mean())
                se = float(c.std(ddof=1) / math.sqrt(c.size))
                ratio = mean / eps
                flag = "within" if ratio <= MEAN_COUNT_ENVELOPE else "outside"
                return Row(1, n, T, mean, eps, ratio, ("tile", flag),
                           {"stderr": se, "tile": f"{list(b)}{list(tag)}", "samples": samples})
            tasks.append((task, 1, n, T))
    for spec in g.get("h1", []):
        n, e, r, tp = int(spec["n"]), float(spec["epsilon"]), float(spec["R"]), int(spec["Tprime"])

        def task(n=n, e=e, r=r, tp=tp):
            alphas = uniform_alphas(cfg.seed, samples, n)
            c = h1_slab_counts(alphas, e, r, tp)
            mean = float(c.mean())
            se = float(c.std(ddof=1) / math.sqrt(c.size))
            rhs = math.log(r ** n / e) ** (n - 1) * e * tp
            ratio = mean / rhs
            flag = "within" if ratio <= MEAN_COUNT_ENVELOPE else "outside"
            return Row(n, 1, (float(tp),), mean, rhs, ratio, ("h1", flag),
                       {"stderr": se, "epsilon": e, "R": r, "samples": samples})
        tasks.append((task, n, 1, (float(tp),)))
    return tasks


def _schmidt_tasks(cfg, g):
    name = g["family"]
    if name not in FAMILIES:
        raise DomainError(f"unknown family {name!r}")
    fam = FAMILIES[name]()
    tasks = []
    for s in _require(g["s"]):
        def task(s=s):
            mr = moment_sum_check(fam, [s], int(g["samples"]), cfg.seed)
            ex = exceptional_set_estimate(fam, [s], float(g["eta"]), int(g["samples"]), cfg.seed)
            flags = ("within" if ex.within else "outside", "pointwise_ok" if ex.pointwise_ok else "pointwise_fail")
            return Row(1, 1, (float(2 ** s),), mr.lhs, mr.bound, mr.ratio, flags,
                       {"s": s, "stderr": mr.stderr, "exceptional_measure": ex.measure,
                        "exceptional_allowed": ex.allowed})
        tasks.append((task, 1, 1, (float(2 ** s),)))
    return tasks


_BUILDERS = {
    "kruse": _kruse_tasks,
    "bhv": _bhv_tasks,
    "bhv-dual": lambda c, g: _bhv_tasks(c, g, dual=True),
    "count-vs-bound": _count_tasks,
    "sigma-vs-bound": _sigma_tasks,
    "mean-count": _mean_count_tasks,
    "schmidt": _schmidt_tasks,
}


def _summary(mode, rows):
    ratios = [r.ratio for r in rows if r.ratio is not None]
    out = {"rows": len(rows), "budget_skipped": sum("budget" in r.flags for r in rows)}
    if ratios:
        out.update(max_ratio=max(ratios), min_ratio=min(ratios), median_ratio=statistics.median(ratios))
    if mode in ("kruse", "bhv", "bhv-dual"):
        per = {}
        for r in rows:
            if r.ratio is not None:
                per.setdefault(r.extra["sample"], []).append(r.ratio)
        out["spread_per_sample"] = {str(k): max(v) / min(v) for k, v in per.items()}
        out["samples_in_band"] = sum(all(0.2 <= x <= 20 for x in v) for v in per.values())
        out["samples"] = len(per)
    if mode == "mean-count":
        out["outside_envelope"] = sum("outside" in r.flags for r in rows)
    if mode == "sigma-vs-bound":
        out["chain_failures"] = sum("chain_fail" in r.flags for r in rows)
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    g = cfg.resolved_grid()
    tasks = _BUILDERS[cfg.mode](cfg, g)
    if not tasks:
        raise DomainError("empty grid")

    def run(t):
        task, m, n, T = t
        return _guarded(task, m, n, T)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]
    env = {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "workers": cfg.workers,
        "rng": "numpy Philox4x64",
        "elapsed_s": time.perf_counter() - start,
    }
    return ExperimentReport(cfg, rows, _summary(cfg.mode, rows), env)


# ----------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    s = str(v)
    return '"' + s.replace('"', '""') + '"' if ("," in s or '"' in s) else s


def csv_text(report: ExperimentReport) -> str:
    rows = report.rows
    k = max((len(r.T) for r in rows), default=1)
    extra_keys = []
    for r in rows:
        for key in r.extra:
            if key not in extra_keys:
                extra_keys.append(key)
    header = ["mode", "seed", "m", "n"] + [f"T{i + 1}" for i in range(k)] + ["lhs", "rhs", "ratio", "flags"] + extra_keys
    lines = [",".join(header)]
    for r in rows:
        T = list(r.T) + [None] * (k - len(r.T))
        vals = [report.config.mode, report.config.seed, r.m, r.n] + T + [r.lhs, r.rhs, r.ratio, ";".join(r.flags)]
        vals += [r.extra.get(key) for key in extra_keys]
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def gnuplot_text(report: ExperimentReport, csv_path: str) -> str:
    k = max((len(r.T) for r in report.rows), default=1)
    logs = "+".join(f"log(column('T{i + 1}'))" for i in range(k))
    return "\n".join([
        "set datafile separator ','",
        f"set title '{report.config.mode} (seed {report.config.seed})'",
        "set xlabel 'log Tbar'",
        "set ylabel 'lhs / rhs'",
        "set key off",
        f"plot '{os.path.basename(csv_path)}' using (({logs})/{k}):(column('ratio')) with points pt 7",
        "",
    ])


def emit_report(report: ExperimentReport, fmt: str, prefix: Optional[str] = None) -> str:
    """Write the report as csv, json or gnuplot; returns the written path."""
    prefix = prefix or report.config.output
    d = os.path.dirname(prefix)
    if d:
        os.makedirs(d, exist_ok=True)
    if fmt == "csv":
        path, text = prefix + ".csv", csv_text(report)
    elif fmt == "json":
        path, text = prefix + ".json", json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    elif fmt == "gnuplot":
        path, text = prefix + ".gp", gnuplot_text(report, prefix + ".csv")
    else:
        raise DomainError(f"unknown format {fmt!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path
