"""Experiment harness: ``ifprocess <experiment> [flags]``.

Every experiment runs independent trials, each with its own generator derived
from ``(seed, trial index)``, so the outputs do not depend on the number of
worker processes. Results land in ``<out>/trials.csv`` and
``<out>/summary.json``; the exit code is 0 exactly when every verdict passes.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import __version__
from .errors import InvalidConfig, OutputUnwritable, ParseError, UnknownKey
from .rng import DEFAULT_SEED, trial_rng

EXPERIMENTS = ("process-early", "process-full", "r0dist", "matching", "kneser", "sampler-oracle")
CSV_SCHEMA = 1

# key -> parser; values are kept as strings in the resolved config
_KEYS = {
    "experiment": str,
    "n": int,
    "k": int,
    "c": Fraction,
    "w": Fraction,
    "b": int,
    "trials": int,
    "seed": int,
    "workers": int,
    "out": str,
    "exact": lambda s: {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}[s.lower()],
    "tolerance": float,
    "edges": str,
}
_RUN_ONLY = ("workers", "out")  # do not affect results, kept out of the summary


@dataclass
class ExperimentConfig:
    experiment: str
    n: int | None = None
    k: int | None = None
    c: Fraction | None = None
    w: Fraction = Fraction(1)
    b: int = 25
    trials: int = 1000
    seed: int = DEFAULT_SEED
    workers: int = 1
    out: str = "results"
    exact: bool = False
    tolerance: float | None = None
    edges: str | None = None
    extra: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        d = asdict(self)
        for key in _RUN_ONLY:
            d.pop(key)
        d.pop("extra")
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in d.items()}


def _parse_value(key, raw, where):
    if key not in _KEYS:
        raise UnknownKey(f"{where}: unknown key {key!r}")
    try:
        return _KEYS[key](raw.strip())
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: cannot parse {key}={raw!r}") from exc


def read_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value")
            key, raw = (s.strip() for s in line.split("=", 1))
            values[key] = _parse_value(key, raw, f"{path}:{lineno}")
    return values


def _icbrt(n: int) -> int | None:
    r = round(n ** (1 / 3))
    for x in (r - 1, r, r + 1):
        if x > 0 and x ** 3 == n:
            return x
    return None


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise InvalidConfig(f"unknown experiment {cfg.experiment!r}")
    if cfg.trials < 1:
        raise InvalidConfig("trials must be >= 1")
    if not 0 <= cfg.seed < 2 ** 64:
        raise InvalidConfig("seed must be a 64-bit value")
    if cfg.workers < 1:
        raise InvalidConfig("workers must be >= 1")
    if cfg.k is not None and cfg.c is not None:
        raise UnknownKey("give k or c, not both")
    e = cfg.experiment
    if e in ("process-early", "process-full", "r0dist", "kneser", "sampler-oracle"):
        if cfg.n is None:
            raise InvalidConfig(f"{e} needs n")
        if cfg.k is None and cfg.c is None:
            raise InvalidConfig(f"{e} needs k or c")
        if cfg.k is None:
            scale = cfg.n if e == "kneser" else cfg.n ** (1 / 3)
            cfg.k = max(1, round(float(cfg.c) * scale))
            cfg.c = None
        if not 1 <= cfg.k or 2 * cfg.k > cfg.n:
            raise InvalidConfig("need 1 <= k <= n/2")
        if e == "kneser" and 2 * cfg.k == cfg.n:
            raise InvalidConfig("kneser needs k < n/2")
    if e == "process-early" and not 0 <= cfg.b <= 25:
        raise InvalidConfig("b must be in [0, 25]")
    if cfg.w <= 0:
        raise InvalidConfig("w must be positive")
    return cfg


def parse_config(argv=None) -> ExperimentConfig:
    """Flags override values from ``--config``; unknown keys are rejected."""
    ap = build_parser()
    ns = ap.parse_args(argv)
    values = read_config_file(ns.config) if ns.config else {}
    if "experiment" in values and values["experiment"] != ns.experiment:
        raise InvalidConfig("config file names a different experiment")
    for key in _KEYS:
        raw = getattr(ns, key, None)
        if key == "experiment" or raw is None:
            continue
        values[key] = raw if key == "exact" else _parse_value(key, str(raw), f"--{key}")
    if ns.k is not None and ns.c is not None:
        raise UnknownKey("flags --k and --c conflict")
    if ns.k is not None:
        values.pop("c", None)
    if ns.c is not None:
        values.pop("k", None)
    values["experiment"] = ns.experiment
    return _validate(ExperimentConfig(**values))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ifprocess", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="flat key=value file; flags take precedence")
    for key in ("n", "k", "c", "w", "b", "trials", "seed", "workers", "out", "tolerance", "edges"):
        ap.add_argument(f"--{key}", default=None)
    ap.add_argument("--exact", action="store_const", const=True, default=None,
                    help="use exact computation where available")
    return ap


# ---------------------------------------------------------------- trials


@lru_cache(maxsize=2)
def _kneser_graph(n, k):
    from .kneser import build_kneser

    return build_kneser(n, k)


def _default_edges(n, k):
    from .setcore import make_kset

    base = [[1, 2, 3], [1, 4, 5]]
    return [make_kset(e[:k] if k < 3 else e + list(range(6, 6 + k - 3)), n) for e in base]


def _hypergraph(cfg):
    from .setcore import Hypergraph, KSet

    if cfg["edges"]:
        edges = [KSet.parse(e, cfg["n"]) for e in cfg["edges"].split(";") if e.strip()]
    else:
        edges = _default_edges(cfg["n"], cfg["k"])
    return Hypergraph(cfg["n"], cfg["k"], edges, check_intersecting=True)


def run_trial(cfg: dict, i: int) -> dict:
    """One trial as a flat record (keys are the CSV columns)."""
    from .counting import ProcessParams

    rng = trial_rng(cfg["seed"], i)
    e = cfg["experiment"]
    rec = {"trial": i}
    if e in ("process-early", "r0dist"):
        from .sampler import run_process_early
        from .structure import hitting_times

        p = ProcessParams(cfg["n"], cfg["k"])
        stop = "r0" if e == "r0dist" else "r1"
        tr = run_process_early(p, cfg["b"], rng, stop=stop, label=(e == "process-early"))
        st = hitting_times(tr)
        rec.update(r0=st.r0, r1=st.r1, steps=len(tr))
        if e == "process-early":
            from .structure import classify

            first_bad = next((r for r, q in enumerate(tr.quality, 1) if q != "Good"), None)
            rec.update(first_bad=first_bad,
                       n_stable=len(st.S_stable) if st.S_stable is not None else None,
                       tag=classify(st).tag if st.complete and st.S_stable else None)
    elif e == "process-full":
        from .sampler import run_process_full
        from .setcore import binom
        from .structure import build_bounds, classify, hitting_times, verify_containment

        p = ProcessParams(cfg["n"], cfg["k"])
        tr, fin = run_process_full(p, rng)
        st = hitting_times(tr)
        rec.update(r0=st.r0, r1=st.r1, size=len(fin), maximal=fin.maximal,
                   all_good=all(q == "Good" for q in tr.quality))
        if st.complete and st.S_stable:
            b = build_bounds(st)
            rep = verify_containment(b, fin)
            rec.update(tag=classify(st, fin).tag, lower_ok=rep.lower_ok, upper_ok=rep.upper_ok,
                       excess=rep.excess, deficit=rep.deficit,
                       ratio=len(fin) / binom(p.n, p.k) / b.asymptotic_density)
        else:
            rec.update(tag=None, lower_ok=False, upper_ok=False)
    elif e == "matching":
        from .matchproc import classify_matching_family, run_conditioned

        fam = run_conditioned(6, cfg["w"], rng)
        rec["tag"] = classify_matching_family(fam, 6)[0]
    elif e == "kneser":
        from .kneser import greedy_independent, kneser_params, trajectory_check

        G = _kneser_graph(cfg["n"], cfg["k"])
        tr = greedy_independent(G, rng)
        rep = trajectory_check(tr, kneser_params(cfg["n"], cfg["k"]))
        rec.update(size=tr.size, sup_V_dev=rep["sup_V_dev"], sup_D_dev=rep.get("sup_D_dev"),
                   max_C=rep.get("max_C"))
    elif e == "sampler-oracle":
        from .sampler import sample_open_edge_exact

        E = sample_open_edge_exact(_hypergraph(cfg), None, rng)
        rec["edge"] = str(E)
    return rec


def _run_chunk(args):
    cfg, idx = args
    return [run_trial(cfg, i) for i in idx]


def run_trials(cfg: dict, trials: int, workers: int = 1) -> list:
    chunk = max(1, min(500, trials // (4 * workers) or 1))
    chunks = [(cfg, range(s, min(s + chunk, trials))) for s in range(0, trials, chunk)]
    if workers == 1:
        out = [r for c in chunks for r in _run_chunk(c)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = [r for rs in pool.map(_run_chunk, chunks) for r in rs]
    return sorted(out, key=lambda r: r["trial"])


# ---------------------------------------------------------------- summaries


def _verdict(value, target, tol, ok=None):
    if ok is None:
        ok = abs(value - target) <= tol
    return {"value": value, "target": target, "tolerance": tol, "pass": bool(ok)}


def _rate(records, pred):
    from .r0dist import wilson_interval

    hits = sum(1 for r in records if pred(r))
    return {"estimate": hits / len(records), "count": hits, "ci95": list(wilson_interval(hits, len(records)))}


def _model_c(cfg):
    n, k = cfg["n"], cfg["k"]
    root = _icbrt(n)
    return Fraction(k, root) if root else k / n ** (1 / 3)


def summarize(cfg: dict, records: list) -> dict:
    e = cfg["experiment"]
    tol = cfg["tolerance"]
    s = {"trials": len(records)}
    verdicts = {}
    if e in ("process-early", "r0dist"):
        from .r0dist import empirical_r0, r0_pmf

        tol = 0.05 if tol is None else tol
        c = _model_c(cfg)
        table = r0_pmf(c, 60)
        resolved = [r for r in records if r["r0"] is not None]
        s["resolved"] = len(resolved)
        for r0 in (3, 4):
            s[f"p_r0_{r0}"] = _rate(records, lambda r, v=r0: r["r0"] == v)
            s[f"model_p_r0_{r0}"] = str(table.p(r0)) if isinstance(table.p(r0), Fraction) else table.p(r0)
            verdicts[f"p_r0_{r0}"] = _verdict(s[f"p_r0_{r0}"]["estimate"], float(table.p(r0)), tol)
        if resolved:
            rep = empirical_r0([r["r0"] for r in resolved], table)
            s["chi2"] = {k: rep[k] for k in ("chi2", "p_value", "dof") if k in rep}
            s["histogram"] = {str(k): v for k, v in rep["histogram"].items()}
        if e == "process-early":
            s["bad_label_rate"] = _rate(records, lambda r: r["first_bad"] is not None)
            s["r1_resolved"] = sum(1 for r in records if r["r1"] is not None)
    elif e == "process-full":
        thr = 0.84 if tol is None else tol
        s["sandwich_rate"] = _rate(records, lambda r: r["lower_ok"] and r["upper_ok"])
        good = [r for r in records if r["all_good"]]
        s["all_good_trials"] = len(good)
        ratios = [r["ratio"] for r in records if r.get("ratio")]
        med = statistics.median(ratios) if ratios else float("nan")
        s["median_density_ratio"] = med
        s["sd_log_density_ratio"] = statistics.pstdev(math.log(x) for x in ratios) if ratios else None
        verdicts["sandwich_rate"] = _verdict(s["sandwich_rate"]["estimate"], thr, None,
                                             s["sandwich_rate"]["estimate"] >= thr)
        verdicts["all_good_in_sandwich"] = _verdict(
            sum(1 for r in good if r["lower_ok"] and r["upper_ok"]), len(good), 0,
            all(r["lower_ok"] and r["upper_ok"] for r in good))
        verdicts["all_maximal"] = _verdict(sum(r["maximal"] for r in records), len(records), 0)
        verdicts["density_ratio_factor_2"] = _verdict(med, 1.0, None, 0.5 <= med <= 2)
    elif e == "matching":
        from .matchproc import STAR, TWO_OF_THREE, exact_stop_distribution

        tol = 0.01 if tol is None else tol
        star = _rate(records, lambda r: r["tag"] == STAR)
        s["star_rate"] = star
        s["two_of_three_rate"] = _rate(records, lambda r: r["tag"] == TWO_OF_THREE)
        target_star = Fraction(123, 128)
        if cfg["exact"]:
            ex = exact_stop_distribution(cfg["w"], 6)
            types = ex["types"][6]
            s["exact_t6"] = {k: str(v) for k, v in sorted(types.items())}
            s["exact_stop"] = {str(t): str(p) for t, p in ex["stop"].items()}
            verdicts["exact_star_equals_123_128"] = _verdict(
                s["exact_t6"].get(STAR), str(target_star), 0, types.get(STAR) == target_star)
            verdicts["mc_matches_exact"] = _verdict(star["estimate"], float(types.get(STAR, 0)), tol)
        if cfg["w"] == 1:
            verdicts["mc_star_vs_123_128"] = _verdict(star["estimate"], float(target_star), tol)
    elif e == "kneser":
        from .setcore import binom

        tol = 0.10 if tol is None else tol
        N, d = binom(cfg["n"], cfg["k"]), binom(cfg["n"] - cfg["k"], cfg["k"])
        sizes = [r["size"] for r in records]
        sups = [r["sup_V_dev"] for r in records]
        s.update(N=N, d=d, min_size=min(sizes), median_size=statistics.median(sizes),
                 median_sup_V_dev=statistics.median(sups))
        verdicts["size_above_trivial_bound"] = _verdict(min(sizes), N / (d + 1), None, min(sizes) > N / (d + 1))
        verdicts["median_sup_V_dev"] = _verdict(s["median_sup_V_dev"], 0.0, tol,
                                                s["median_sup_V_dev"] <= tol)
    elif e == "sampler-oracle":
        from scipy import stats

        from .sampler import oracle_step_distribution

        tol = 1e-3 if tol is None else tol
        H = _hypergraph(cfg)
        oracle = oracle_step_distribution(H)
        keys = sorted(str(k) for k in oracle)
        counts = {k: 0 for k in keys}
        for r in records:
            counts[r["edge"]] += 1
        res = stats.chisquare([counts[k] for k in keys])
        s.update(support=len(keys), chi2=float(res.statistic), p_value=float(res.pvalue))
        verdicts["chi_square_p"] = _verdict(float(res.pvalue), tol, None, res.pvalue >= tol)
    s["verdicts"] = verdicts
    s["pass"] = all(v["pass"] for v in verdicts.values())
    return s


def write_outputs(cfg: ExperimentConfig, records: list, summary: dict) -> None:
    try:
        os.makedirs(cfg.out, exist_ok=True)
        cols = []
        for r in records:
            cols.extend(k for k in r if k not in cols)
        with open(os.path.join(cfg.out, "trials.csv"), "w", newline="") as fh:
            fh.write(f"# ifprocess {__version__} {cfg.experiment} schema v{CSV_SCHEMA}\n")
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            w.writerows(records)
        doc = {"version": __version__, "config": cfg.resolved(), "summary": summary}
        with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        if cfg.experiment == "r0dist":
            from .r0dist import r0_pmf, write_table_csv

            write_table_csv(r0_pmf(_model_c(asdict(cfg)), 60), os.path.join(cfg.out, "hazard.csv"))
    except OSError as exc:
        raise OutputUnwritable(str(exc)) from exc


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run, write artifacts and return the summary."""
    d = asdict(cfg)
    records = run_trials(d, cfg.trials, cfg.workers)
    summary = summarize(d, records)
    write_outputs(cfg, records, summary)
    return summary


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        summary = run_experiment(cfg)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OutputUnwritable as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    for name, v in summary["verdicts"].items():
        print(f"{'PASS' if v['pass'] else 'FAIL'} {name}: {v['value']} (target {v['target']})")
    return 0 if summary["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
