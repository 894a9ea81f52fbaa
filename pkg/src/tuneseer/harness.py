"""Campaign orchestration: training runs, method comparisons, feature
tables, and report emission.

Outputs under the campaign directory:

    store.jsonl                    training records (one JSON object per line)
    store_after_compare.jsonl      store grown by the comparison's predictive runs
    suite.json                     function/domain listing of the campaign suite
    alpha.csv                      one score row per (test key, method)
    wilcoxon.csv                   one row per compared method pair
    features.csv                   feature table with cluster assignments
    curves/<function>_<dim>_<seed>.csv   improvement-only convergence rows

Every run is seeded from the campaign seed and its test key, so repeated
campaigns with the same configuration reproduce alpha.csv byte-identically.
Failed runs are kept as explicit rows, never dropped silently.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import cluster, de, predictor, shade
from .bench import (
    ObjectiveSpec,
    holdout_suite,
    make_instance,
    suite_listing,
    training_suite,
)
from .cluster import ClusterModel
from .errors import ContractError, PairingError
from .features import FeatureConfig, extract_features
from .metric import compute_alpha
from .predictor import TrainingStore, build_training_set, run_predictive
from .sampling import ControlParams, derive_seed
from .stats import PairedSample, wilcoxon

METHOD_LITERATURE = "literature"
METHOD_BEST = "best-of-training"
METHOD_SHADE = "shade"
METHOD_PREDICTIVE = "predictive"
METHOD_ORDER = (METHOD_PREDICTIVE, METHOD_BEST, METHOD_SHADE, METHOD_LITERATURE)

# Instance seeds used by comparisons are offset from the training ones unless
# the campaign explicitly mirrors the same-suite protocol.
COMPARE_INSTANCE_OFFSET = 100

ALPHA_COLUMNS = (
    "function_id",
    "dim",
    "instance_seed",
    "run_seed",
    "method",
    "p1",
    "p2",
    "p3",
    "alpha",
    "evals",
    "g_star",
    "status",
)


def default_out_dir() -> str:
    return os.environ.get("TUNESEER_DATA", "runs")


@dataclass(frozen=True)
class CampaignConfig:
    """Dataclass mirror of the JSON config file; CLI flags override keys."""

    suite: str = "training"
    dims: tuple = (2, 10, 20)
    instances: int = 3
    seeds: tuple = tuple(range(30))
    train_seeds: tuple = tuple(range(5))
    budget: int = 10_000
    sigma: int = 1000
    sigmas: Optional[tuple] = None  # features command only
    kappa: int = 10
    n_param_sets: int = 30
    methods: tuple = METHOD_ORDER
    out: str = field(default_factory=default_out_dir)
    store_path: Optional[str] = None
    workers: int = 1
    feature_scaling: bool = True
    retrain: str = "per-run"
    campaign_seed: int = 0
    paper_instances: bool = False

    def validate(self) -> "CampaignConfig":
        if self.suite not in ("training", "holdout"):
            raise ContractError(f"suite must be training|holdout, got {self.suite!r}")
        if not self.methods:
            raise ContractError("methods must not be empty")
        for m in self.methods:
            if m not in METHOD_ORDER:
                raise ContractError(f"unknown method {m!r}")
        if len(set(self.seeds)) != len(self.seeds):
            raise ContractError("seeds must be pairwise distinct")
        if self.retrain not in ("per-run", "per-batch"):
            raise ContractError(f"retrain must be per-run|per-batch, got {self.retrain!r}")
        if self.instances < 1:
            raise ContractError("instances must be >= 1")
        return self

    @classmethod
    def from_file(cls, path: str) -> "CampaignConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls().merged(raw)

    def merged(self, overrides: dict) -> "CampaignConfig":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ContractError(f"unknown config keys: {sorted(unknown)}")
        clean = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if isinstance(value, list):
                value = tuple(value)
            clean[key] = value
        return replace(self, **clean)

    def suite_specs(self) -> list[ObjectiveSpec]:
        maker = training_suite if self.suite == "training" else holdout_suite
        return maker(self.dims)

    def train_instance_seeds(self) -> tuple:
        return tuple(range(1, self.instances + 1))

    def compare_instance_seeds(self) -> tuple:
        if self.paper_instances:
            return self.train_instance_seeds()
        first = COMPARE_INSTANCE_OFFSET + 1
        return tuple(range(first, first + self.instances))

    def resolved_store_path(self) -> str:
        return self.store_path or os.path.join(self.out, "store.jsonl")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, columns, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _write_suite_json(out_dir: str, specs: list[ObjectiveSpec]) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "suite.json"), "w", encoding="utf-8") as fh:
        json.dump(suite_listing(specs), fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def cmd_train(config: CampaignConfig) -> str:
    """Run the off-line training campaign and persist the store."""
    config.validate()
    specs = config.suite_specs()
    store = build_training_set(
        specs,
        sigma=config.sigma,
        seeds=config.train_seeds,
        budget=config.budget,
        n_param_sets=config.n_param_sets,
        instance_seeds=config.train_instance_seeds(),
        campaign_seed=config.campaign_seed,
        workers=config.workers,
    )
    os.makedirs(config.out, exist_ok=True)
    path = config.resolved_store_path()
    store.save(path)
    _write_suite_json(config.out, specs)
    best = store.best_record()
    print(
        f"trained {len(store)} records -> {path}\n"
        f"best alpha {best.alpha!r} at p=({best.params.p1:.3f}, "
        f"{best.params.p2:.3f}, {best.params.p3}) "
        f"on {best.function_id} D={best.dim}"
    )
    return path


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _CompareItem:
    method: str
    function_id: str
    dim: int
    instance_seed: int
    run_seed: int
    budget: int
    sigma: int
    item_seed: int
    params: Optional[tuple] = None  # (p1, p2, p3) for fixed-parameter methods
    model_json: Optional[str] = None  # predictive, per-batch
    table: Optional[tuple] = None  # ((cluster, p1, p2, p3), ...)


@dataclass(frozen=True)
class _CompareResult:
    key: tuple  # (function_id, dim, instance_seed, run_seed)
    method: str
    status: str
    alpha: Optional[float] = None
    evals: Optional[int] = None
    g_star: Optional[int] = None
    params: Optional[tuple] = None
    beta: Optional[tuple] = None  # predictive runs carry their features
    curve: tuple = ()


def _improvement_rows(trace: de.RunTrace) -> tuple:
    rows = []
    best = None
    for gen, evals, value in trace.generations:
        if best is None or value < best:
            best = value
            rows.append((gen, evals, value))
    return tuple(rows)


def _run_compare_item(item: _CompareItem) -> _CompareResult:
    key = (item.function_id, item.dim, item.instance_seed, item.run_seed)
    try:
        spec = ObjectiveSpec(item.function_id, item.dim)
        instance = make_instance(spec, item.instance_seed)
        if item.method == METHOD_SHADE:
            trace = shade.optimize_shade(
                instance, de.RunConfig(budget=item.budget, seed=item.item_seed)
            )
            params_used = None
        elif item.method == METHOD_PREDICTIVE:
            beta = extract_features(
                instance, FeatureConfig(sigma=item.sigma, seed=item.item_seed)
            )
            model = ClusterModel.from_json(item.model_json)
            cluster_idx = model.classify(beta.as_array())
            table = {int(c): (p1, p2, int(p3)) for c, p1, p2, p3 in item.table}
            params_used = table[cluster_idx]
            trace = de.optimize(
                instance,
                ControlParams(*params_used),
                de.RunConfig(budget=item.budget - item.sigma, seed=item.item_seed),
            )
        else:
            params_used = item.params
            trace = de.optimize(
                instance,
                ControlParams(params_used[0], params_used[1], int(params_used[2])),
                de.RunConfig(budget=item.budget, seed=item.item_seed),
            )
        score = compute_alpha(trace)
        beta_out = None
        if item.method == METHOD_PREDICTIVE:
            beta_out = (beta.beta1, beta.beta2, beta.beta3)
        return _CompareResult(
            key=key,
            method=item.method,
            status="ok",
            alpha=score.alpha,
            evals=trace.evals_used,
            g_star=score.g_star,
            params=params_used,
            beta=beta_out,
            curve=_improvement_rows(trace),
        )
    except Exception as exc:  # failures become explicit report rows
        return _CompareResult(key=key, method=item.method, status=f"failed: {exc}")


@dataclass
class ComparisonReport:
    alpha_rows: list
    wilcoxon_rows: list
    out_dir: str
    n_failed: int = 0

    def wilcoxon_for(self, method_a: str, method_b: str):
        for row in self.wilcoxon_rows:
            if row["method_a"] == method_a and row["method_b"] == method_b:
                return row
        raise KeyError((method_a, method_b))


def _alpha_row(result: _CompareResult) -> dict:
    fid, dim, inst, seed = result.key
    p1 = p2 = p3 = None
    if result.params is not None:
        p1, p2, p3 = result.params
    return {
        "function_id": fid,
        "dim": dim,
        "instance_seed": inst,
        "run_seed": seed,
        "method": result.method,
        "p1": p1,
        "p2": p2,
        "p3": p3,
        "alpha": result.alpha,
        "evals": result.evals,
        "g_star": result.g_star,
        "status": result.status,
    }


def compute_wilcoxon_rows(alpha_rows: list, methods=None) -> list:
    """Pairwise signed-rank tests over rows sharing identical test keys."""
    by_method: dict[str, dict] = {}
    for row in alpha_rows:
        if row["status"] != "ok":
            continue
        key = (
            row["function_id"],
            int(row["dim"]),
            int(row["instance_seed"]),
            int(row["run_seed"]),
        )
        by_method.setdefault(row["method"], {})[key] = float(row["alpha"])
    present = [m for m in METHOD_ORDER if m in by_method]
    if methods is not None:
        present = [m for m in present if m in methods]
    out = []
    for i, method_a in enumerate(present):
        for method_b in present[i + 1 :]:
            keys = sorted(set(by_method[method_a]) & set(by_method[method_b]))
            if not keys:
                out.append(
                    {
                        "method_a": method_a,
                        "method_b": method_b,
                        "n": 0,
                        "W": None,
                        "p": None,
                    }
                )
                continue
            sample = PairedSample.from_score_maps(
                {k: by_method[method_a][k] for k in keys},
                {k: by_method[method_b][k] for k in keys},
            )
            result = wilcoxon(sample)
            out.append(
                {
                    "method_a": method_a,
                    "method_b": method_b,
                    "n": result.n,
                    "W": result.w,
                    "p": result.p,
                }
            )
    return out


def _write_curves(out_dir: str, results: list) -> None:
    groups: dict[tuple, list] = {}
    for res in results:
        if not res.curve:
            continue
        fid, dim, inst, seed = res.key
        groups.setdefault((fid, dim, seed), []).append(res)
    curve_dir = os.path.join(out_dir, "curves")
    os.makedirs(curve_dir, exist_ok=True)
    for (fid, dim, seed), members in sorted(groups.items()):
        path = os.path.join(curve_dir, f"{fid}_{dim}_{seed}.csv")
        rows = []
        for res in sorted(members, key=lambda r: (METHOD_ORDER.index(r.method), r.key)):
            for gen, evals, value in res.curve:
                rows.append(
                    {
                        "method": res.method,
                        "instance_seed": res.key[2],
                        "gen": gen,
                        "evals": evals,
                        "best": value,
                    }
                )
        _write_csv(path, ("method", "instance_seed", "gen", "evals", "best"), rows)


def cmd_compare(config: CampaignConfig) -> ComparisonReport:
    """Run every requested method on every test key with matched seeds and
    emit the score table, signed-rank table, and convergence curves."""
    config.validate()
    specs = config.suite_specs()
    needs_store = METHOD_PREDICTIVE in config.methods or METHOD_BEST in config.methods
    store = None
    if needs_store:
        path = config.resolved_store_path()
        if not os.path.exists(path):
            raise ContractError(
                f"methods {config.methods} need a training store; {path} not found"
            )
        store = TrainingStore.load(path)
        if not store.records:
            raise ContractError(f"training store {path} is empty")

    keys = [
        (spec, inst, seed)
        for spec in specs
        for inst in config.compare_instance_seeds()
        for seed in config.seeds
    ]

    def item_seed_for(spec, inst, seed):
        return derive_seed(
            config.campaign_seed,
            "compare",
            spec.function_id,
            spec.dimension,
            inst,
            seed,
        )

    pool_items: list[_CompareItem] = []
    for method in config.methods:
        if method == METHOD_PREDICTIVE:
            continue
        for spec, inst, seed in keys:
            params = None
            if method == METHOD_LITERATURE:
                params = (0.9, 0.5, 10 * spec.dimension)
            elif method == METHOD_BEST:
                best = store.best_record().params
                params = (best.p1, best.p2, best.p3)
            pool_items.append(
                _CompareItem(
                    method=method,
                    function_id=spec.function_id,
                    dim=spec.dimension,
                    instance_seed=inst,
                    run_seed=seed,
                    budget=config.budget,
                    sigma=config.sigma,
                    item_seed=item_seed_for(spec, inst, seed),
                    params=params,
                )
            )

    if METHOD_PREDICTIVE in config.methods and config.retrain == "per-batch":
        model, table = predictor.recommendation_table(
            store,
            config.kappa,
            seed=config.campaign_seed,
            scale=config.feature_scaling,
        )
        table_rows = tuple(
            (c, p.p1, p.p2, p.p3) for c, p in sorted(table.items())
        )
        model_json = model.to_json()
        for spec, inst, seed in keys:
            pool_items.append(
                _CompareItem(
                    method=METHOD_PREDICTIVE,
                    function_id=spec.function_id,
                    dim=spec.dimension,
                    instance_seed=inst,
                    run_seed=seed,
                    budget=config.budget,
                    sigma=config.sigma,
                    item_seed=item_seed_for(spec, inst, seed),
                    model_json=model_json,
                    table=table_rows,
                )
            )

    if config.workers > 1 and len(pool_items) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_compare_item, pool_items, chunksize=4))
    else:
        results = [_run_compare_item(item) for item in pool_items]

    new_records = []
    if METHOD_PREDICTIVE in config.methods and config.retrain == "per-run":
        for spec, inst, seed in keys:
            key = (spec.function_id, spec.dimension, inst, seed)
            item_seed = item_seed_for(spec, inst, seed)
            try:
                instance = make_instance(spec, inst)
                trace, score, record = run_predictive(
                    instance,
                    store,
                    kappa=config.kappa,
                    sigma=config.sigma,
                    budget=config.budget,
                    seed=item_seed,
                    scale=config.feature_scaling,
                    model_seed=config.campaign_seed,
                )
                predictor.append_and_retrain(
                    store,
                    record,
                    config.kappa,
                    seed=config.campaign_seed,
                    scale=config.feature_scaling,
                )
                new_records.append(record)
                results.append(
                    _CompareResult(
                        key=key,
                        method=METHOD_PREDICTIVE,
                        status="ok",
                        alpha=score.alpha,
                        evals=trace.evals_used,
                        g_star=score.g_star,
                        params=(record.params.p1, record.params.p2, record.params.p3),
                        curve=_improvement_rows(trace),
                    )
                )
            except Exception as exc:
                results.append(
                    _CompareResult(key=key, method=METHOD_PREDICTIVE, status=f"failed: {exc}")
                )
    elif METHOD_PREDICTIVE in config.methods:
        # per-batch: append all new observations as a single batch afterwards
        from .features import FeatureVector
        from .predictor import TrainingRecord, _utc_now

        for res in results:
            if res.method == METHOD_PREDICTIVE and res.status == "ok":
                fid, dim, inst, seed = res.key
                new_records.append(
                    TrainingRecord(
                        params=ControlParams(
                            res.params[0], res.params[1], int(res.params[2])
                        ),
                        features=FeatureVector(*res.beta),
                        alpha=res.alpha,
                        function_id=fid,
                        dim=dim,
                        instance_seed=inst,
                        run_seed=seed,
                        sigma=config.sigma,
                        timestamp=_utc_now(),
                    )
                )
        if new_records:
            store.append(new_records)

    alpha_rows = sorted(
        (_alpha_row(res) for res in results),
        key=lambda r: (
            r["function_id"],
            r["dim"],
            r["instance_seed"],
            r["run_seed"],
            METHOD_ORDER.index(r["method"]),
        ),
    )
    wilcoxon_rows = compute_wilcoxon_rows(alpha_rows, methods=config.methods)

    os.makedirs(config.out, exist_ok=True)
    _write_suite_json(config.out, specs)
    _write_csv(os.path.join(config.out, "alpha.csv"), ALPHA_COLUMNS, alpha_rows)
    _write_csv(
        os.path.join(config.out, "wilcoxon.csv"),
        ("method_a", "method_b", "n", "W", "p"),
        wilcoxon_rows,
    )
    _write_curves(config.out, results)
    if store is not None and new_records:
        store.save(os.path.join(config.out, "store_after_compare.jsonl"))

    n_failed = sum(1 for r in results if r.status != "ok")
    for row in wilcoxon_rows:
        print(
            f"wilcoxon {row['method_a']} vs {row['method_b']}: "
            f"n={row['n']} W={row['W']!r} p={row['p']!r}"
        )
    if n_failed:
        print(f"WARNING: {n_failed} runs failed; see status column in alpha.csv")
    return ComparisonReport(
        alpha_rows=alpha_rows,
        wilcoxon_rows=wilcoxon_rows,
        out_dir=config.out,
        n_failed=n_failed,
    )


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------


def cmd_features(config: CampaignConfig) -> str:
    """Emit the feature table with cluster assignments (the data behind the
    feature-space scatter)."""
    config.validate()
    specs = config.suite_specs()
    sigmas = config.sigmas or (config.sigma,)
    rows = []
    for sigma in sigmas:
        group = []
        for spec in specs:
            for inst in config.compare_instance_seeds():
                for seed in config.seeds:
                    item_seed = derive_seed(
                        config.campaign_seed,
                        "features-cmd",
                        spec.function_id,
                        spec.dimension,
                        inst,
                        seed,
                        sigma,
                    )
                    instance = make_instance(spec, inst)
                    beta = extract_features(
                        instance, FeatureConfig(sigma=sigma, seed=item_seed)
                    )
                    group.append(
                        {
                            "sigma": sigma,
                            "function_id": spec.function_id,
                            "dim": spec.dimension,
                            "instance_seed": inst,
                            "seed": seed,
                            "beta1": beta.beta1,
                            "beta2": beta.beta2,
                            "beta3": beta.beta3,
                        }
                    )
        points = np.array([[r["beta1"], r["beta2"], r["beta3"]] for r in group])
        kappa_eff = min(config.kappa, len(group))
        model = cluster.fit(
            points,
            kappa_eff,
            seed=config.campaign_seed,
            scale=config.feature_scaling,
        )
        labels = model.classify_all(points)
        for row, lab in zip(group, labels):
            row["cluster"] = int(lab)
        rows.extend(group)
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, "features.csv")
    _write_csv(
        path,
        (
            "sigma",
            "function_id",
            "dim",
            "instance_seed",
            "seed",
            "beta1",
            "beta2",
            "beta3",
            "cluster",
        ),
        rows,
    )
    print(f"wrote {len(rows)} feature rows -> {path}")
    return path


# ---------------------------------------------------------------------------
# recommend / report
# ---------------------------------------------------------------------------


def cmd_recommend(
    store_path: str,
    kappa: int,
    beta: Optional[tuple] = None,
    function_id: Optional[str] = None,
    dim: Optional[int] = None,
    instance_seed: int = 0,
    sigma: int = 1000,
    seed: int = 0,
    scale: bool = True,
) -> dict:
    """One-shot recommendation from a stored training set.

    Give either an explicit feature triple or a (function, dim, instance) to
    sample features from.
    """
    store = TrainingStore.load(store_path)
    if beta is not None:
        from .features import FeatureVector

        beta_vec = FeatureVector(*[float(b) for b in beta])
    else:
        if function_id is None or dim is None:
            raise ContractError("recommend needs either --beta or --function/--dim")
        instance = make_instance(ObjectiveSpec(function_id, dim), instance_seed)
        beta_vec = extract_features(instance, FeatureConfig(sigma=sigma, seed=seed))
    params, cluster_idx = predictor.recommend(store, kappa, beta_vec, scale=scale)
    result = {
        "p1": params.p1,
        "p2": params.p2,
        "p3": params.p3,
        "cluster": cluster_idx,
        "beta1": beta_vec.beta1,
        "beta2": beta_vec.beta2,
        "beta3": beta_vec.beta3,
    }
    print(json.dumps(result))
    return result


def read_alpha_csv(path: str) -> list:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for raw in csv.DictReader(fh):
            rows.append(raw)
    return rows


def cmd_report(out_dir: str) -> list:
    """Re-derive the method comparison table from a stored alpha.csv."""
    alpha_path = os.path.join(out_dir, "alpha.csv")
    if not os.path.exists(alpha_path):
        raise FileNotFoundError(alpha_path)
    rows = read_alpha_csv(alpha_path)
    wilcoxon_rows = compute_wilcoxon_rows(rows)
    _write_csv(
        os.path.join(out_dir, "wilcoxon.csv"),
        ("method_a", "method_b", "n", "W", "p"),
        wilcoxon_rows,
    )
    by_method: dict[str, list] = {}
    for row in rows:
        if row["status"] == "ok":
            by_method.setdefault(row["method"], []).append(float(row["alpha"]))
    for method in METHOD_ORDER:
        if method in by_method:
            vals = by_method[method]
            print(
                f"{method}: n={len(vals)} mean_alpha={np.mean(vals):.6g} "
                f"median_alpha={np.median(vals):.6g}"
            )
    for row in wilcoxon_rows:
        print(
            f"wilcoxon {row['method_a']} vs {row['method_b']}: "
            f"n={row['n']} W={row['W']!r} p={row['p']!r}"
        )
    return wilcoxon_rows
