"""Replicated simulation studies: recovery accuracy and choice of K.

Replicate ``r`` of a run seeded with ``seed`` draws everything from
``SeedSequence(seed).spawn(replicates)[r]``, split once more into a
network stream and a fitting stream. Replicates are independent, so
running them on a process pool gives the same report as running them
in order.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import em, io, select, synth
from .errors import ConfigError, FitError, NumericalError
from .metrics import adjusted_rand_index, misclassification_rate

log = logging.getLogger(__name__)

SCENARIOS = ("table1", "table2", "table3")
VARIANTS = tuple(v.value for v in em.Variant)

NO_LOGISTIC_NOTE = (
    "without logistic: intercept-only design, so every node shares one "
    "fitted relevance probability; both arms start from the same pool of "
    "initial blocking vectors"
)


def _seed_int(ss) -> int:
    return int(ss.generate_state(1, np.uint32)[0])


def replicate_streams(seed, replicates):
    """``(network_stream, fit_seed)`` for each replicate."""
    out = []
    for child in np.random.SeedSequence(seed).spawn(replicates):
        net_ss, fit_ss = child.spawn(2)
        out.append((net_ss, _seed_int(fit_ss)))
    return out


def scenario_config(scenario, p11, beta0, background_link="constant", k_true=2):
    if scenario == "table1":
        return synth.scenario_table1(p11, beta0)
    if scenario == "table2":
        return synth.scenario_table2(p11, beta0, background_link=background_link)
    if scenario == "table3":
        return synth.scenario_table3(k_true, p11, background_link=background_link)
    raise ConfigError(f"scenario must be one of {SCENARIOS}")


def arm_name(variant, logistic) -> str:
    return f"{variant}+logistic" if logistic else f"{variant}-logistic"


@dataclass(frozen=True)
class SimulationSpec:
    scenario: str
    p11: float
    beta0: float
    replicates: int = 100
    variants: tuple = ("poisson",)
    logistic: tuple = (True, False)
    seed: int = 0
    restarts: int = 8
    background_link: str = "constant"

    def validate(self):
        if self.scenario not in ("table1", "table2"):
            raise ConfigError("recovery studies run on table1 or table2")
        scenario_config(self.scenario, self.p11, self.beta0, self.background_link)
        if self.replicates < 1:
            raise ConfigError("replicates must be positive")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise ConfigError(f"variants must be drawn from {VARIANTS}")
        if not self.logistic:
            raise ConfigError("choose at least one of with/without logistic")
        return self

    def to_dict(self):
        d = asdict(self)
        d["variants"] = list(self.variants)
        d["logistic"] = list(self.logistic)
        return d


def _fit_arm(sn, variant, logistic, fit_seed, restarts):
    X = sn.X if logistic else sn.X[:, :0]
    options = em.FitOptions(restarts=restarts, seed=fit_seed)
    res = em.fit(sn.net, X, sn.K, variant, options, init_X=sn.X)
    return {
        "ari": adjusted_rand_index(res.c_hat, sn.c_true),
        "misclassification": misclassification_rate(res.c_hat, sn.c_true, sn.K + 1),
        "beta": res.params.beta.tolist(),
        "stable": res.stable,
        "outer_iterations": res.outer_iterations,
        "restart_index": res.restart_index,
    }


def run_replicate(task):
    """One replicate: draw a network and fit every requested arm.

    Returns ``(result, seconds, network)``; failures are recorded in the
    result instead of raised.
    """
    spec, index, net_ss, fit_seed, keep_network = task
    t0 = time.perf_counter()
    cfg = scenario_config(spec.scenario, spec.p11, spec.beta0, spec.background_link)
    sn = synth.generate(cfg, np.random.Generator(np.random.PCG64(net_ss)))
    arms = {}
    for variant in spec.variants:
        for logistic in spec.logistic:
            name = arm_name(variant, logistic)
            try:
                arms[name] = {"status": "ok", **_fit_arm(sn, variant, logistic, fit_seed, spec.restarts)}
            except (FitError, NumericalError) as exc:
                arms[name] = {"status": "failed", "error": str(exc)}
    result = {
        "replicate": index,
        "fit_seed": fit_seed,
        "n_edges": sn.net.n_edges,
        "background_fraction": float(np.mean(sn.c_true == sn.K + 1)),
        "arms": arms,
    }
    return result, time.perf_counter() - t0, (sn if keep_network else None)


def _map(fn, tasks, workers):
    if workers is None or workers <= 1:
        yield from map(fn, tasks)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, tasks, chunksize=1)


def summarise(values):
    """Mean and empirical standard deviation (``ddof=1``) of ARI x 100."""
    a = 100.0 * np.asarray(values, dtype=float)
    if a.size == 0:
        return {"n": 0, "mean_ari_x100": None, "sd_ari_x100": None}
    sd = float(np.std(a, ddof=1)) if a.size > 1 else 0.0
    return {"n": int(a.size), "mean_ari_x100": float(np.mean(a)), "sd_ari_x100": sd}


def aggregate(replicates, arms):
    out = {}
    for name in arms:
        ok = [r["arms"][name]["ari"] for r in replicates if r["arms"][name]["status"] == "ok"]
        failed = sum(r["arms"][name]["status"] != "ok" for r in replicates)
        out[name] = {**summarise(ok), "failed": failed}
    return out


@dataclass
class RunReport:
    command: list
    spec: dict
    replicates: list
    aggregates: dict
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        """Everything except timings, which live in a sidecar file so the
        report itself is reproducible byte for byte."""
        return {
            "command": self.command,
            "spec": self.spec,
            "notes": self.notes,
            "aggregates": self.aggregates,
            "replicates": self.replicates,
            "outputs": self.outputs,
        }


def run_simulation(spec: SimulationSpec, workers=1, command=(), network_dir=None) -> RunReport:
    """Replicate a recovery study and aggregate ARI per arm."""
    spec.validate()
    streams = replicate_streams(spec.seed, spec.replicates)
    keep = network_dir is not None
    tasks = [(spec, r, ss, fs, keep) for r, (ss, fs) in enumerate(streams)]
    arms = [arm_name(v, lg) for v in spec.variants for lg in spec.logistic]
    results, timings = [], []
    t0 = time.perf_counter()
    for result, seconds, sn in _map(run_replicate, tasks, workers):
        results.append(result)
        timings.append(seconds)
        if sn is not None:
            io.save_synthetic(sn, network_dir, prefix=f"replicate{result['replicate']:04d}")
        log.info("replicate %d done in %.2fs", result["replicate"], seconds)
    return RunReport(
        command=list(command),
        spec=spec.to_dict(),
        replicates=results,
        aggregates=aggregate(results, arms),
        timings={"total_seconds": time.perf_counter() - t0, "replicate_seconds": timings,
                 "workers": workers},
        notes=[NO_LOGISTIC_NOTE,
               "ARI compares full label vectors, background included as group K+1"],
    )


@dataclass(frozen=True)
class SelectionSpec:
    k_true: int = 2
    p11: float = synth.SELECTION_P11
    replicates: int = 50
    k_min: int = 1
    k_max: int = 8
    variant: str = "robust"
    seed: int = 0
    restarts: int = 8
    background_link: str = "constant"

    def validate(self):
        scenario_config("table3", self.p11, 0.0, self.background_link, self.k_true)
        if self.replicates < 1:
            raise ConfigError("replicates must be positive")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError("need 1 <= k_min <= k_max")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}")
        return self

    def to_dict(self):
        return asdict(self)


def run_selection_replicate(task):
    spec, index, net_ss, fit_seed = task
    t0 = time.perf_counter()
    cfg = scenario_config("table3", spec.p11, 0.0, spec.background_link, spec.k_true)
    sn = synth.generate(cfg, np.random.Generator(np.random.PCG64(net_ss)))
    options = em.FitOptions(restarts=spec.restarts, seed=fit_seed)
    try:
        rep = select.select_k(sn.net, sn.X, range(spec.k_min, spec.k_max + 1), spec.variant, options)
        result = {"replicate": index, "status": "ok", "chosen_K_bic": rep.chosen_K_bic,
                  "chosen_K_icl": rep.chosen_K_icl,
                  "records": [r.to_dict() for r in rep.records],
                  "failures": {str(k): v for k, v in rep.failures.items()}}
    except select.SelectError as exc:
        result = {"replicate": index, "status": "failed", "error": str(exc)}
    return result, time.perf_counter() - t0


def selection_proportions(results, key, k_min, k_max):
    chosen = [r[key] for r in results if r["status"] == "ok"]
    total = max(len(chosen), 1)
    return {str(k): chosen.count(k) / total for k in range(k_min, k_max + 1)}


def run_selection_study(spec: SelectionSpec, workers=1, command=()) -> RunReport:
    """Replicate the K-selection study and tabulate chosen K."""
    spec.validate()
    streams = replicate_streams(spec.seed, spec.replicates)
    tasks = [(spec, r, ss, fs) for r, (ss, fs) in enumerate(streams)]
    results, timings = [], []
    t0 = time.perf_counter()
    for result, seconds in _map(run_selection_replicate, tasks, workers):
        results.append(result)
        timings.append(seconds)
    ok = [r for r in results if r["status"] == "ok"]
    aggregates = {
        "bic": selection_proportions(results, "chosen_K_bic", spec.k_min, spec.k_max),
        "icl": selection_proportions(results, "chosen_K_icl", spec.k_min, spec.k_max),
        "correct_bic": float(np.mean([r["chosen_K_bic"] == spec.k_true for r in ok])) if ok else None,
        "correct_icl": float(np.mean([r["chosen_K_icl"] == spec.k_true for r in ok])) if ok else None,
        "failed": len(results) - len(ok),
    }
    return RunReport(
        command=list(command),
        spec={"scenario": "table3", **spec.to_dict()},
        replicates=results,
        aggregates=aggregates,
        timings={"total_seconds": time.perf_counter() - t0, "replicate_seconds": timings,
                 "workers": workers},
        notes=["criteria use the blockmodel joint log-likelihood with P_kl = O_kl / n_kl "
               "for every block, background included"],
    )


def write_report(report: RunReport, directory):
    """Write ``report.json``, ``timings.json`` and a per-replicate CSV."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    csv_name = "selection.csv" if report.spec.get("scenario") == "table3" else "ari.csv"
    report.outputs = {"report": "report.json", "timings": "timings.json", "table": csv_name}
    io.write_json(d / "report.json", report.to_dict())
    io.write_json(d / "timings.json", report.timings)
    with open(d / csv_name, "w", encoding="utf-8") as fh:
        if csv_name == "ari.csv":
            fh.write("replicate,arm,status,ari,misclassification\n")
            for r in report.replicates:
                for name, arm in r["arms"].items():
                    ari = io.format_float(arm["ari"]) if arm["status"] == "ok" else ""
                    mis = io.format_float(arm["misclassification"]) if arm["status"] == "ok" else ""
                    fh.write(f"{r['replicate']},{name},{arm['status']},{ari},{mis}\n")
        else:
            fh.write("replicate,status,chosen_K_bic,chosen_K_icl\n")
            for r in report.replicates:
                fh.write(f"{r['replicate']},{r['status']},{r.get('chosen_K_bic', '')},"
                         f"{r.get('chosen_K_icl', '')}\n")
    return d / "report.json"
