"""Global memory of (params, features, score) records and the
recommendation engine mined from it.

Training campaigns append one record per optimization run.  To recommend
parameters for a new function, the stored feature vectors are clustered,
the new function's features are classified, and the mean parameter triple of
the top 10% of that cluster's records (ranked by score) is returned.  After a
predictive run, the fresh record is appended and the clustering is refit, so
the memory extends across the whole history of using the tool.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import cluster, de
from .bench import ObjectiveSpec, make_instance
from .errors import ContractError, NoDataError
from .features import FeatureConfig, FeatureVector, extract_features
from .metric import PerformanceScore, compute_alpha
from .sampling import (
    DEFAULT_PARAM_RANGES,
    ControlParams,
    derive_seed,
    lhs_params,
    substream,
)

log = logging.getLogger(__name__)

TOP_FRACTION = 0.1

# Serialized record field order; floats keep full round-trip precision.
RECORD_FIELDS = (
    "p1",
    "p2",
    "p3",
    "beta1",
    "beta2",
    "beta3",
    "alpha",
    "function_id",
    "dim",
    "instance_seed",
    "run_seed",
    "sigma",
    "timestamp",
)


@dataclass(frozen=True)
class TrainingRecord:
    params: ControlParams
    features: FeatureVector
    alpha: float
    function_id: str
    dim: int
    instance_seed: int
    run_seed: int
    sigma: int
    timestamp: str

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "p1": self.params.p1,
                "p2": self.params.p2,
                "p3": self.params.p3,
                "beta1": self.features.beta1,
                "beta2": self.features.beta2,
                "beta3": self.features.beta3,
                "alpha": self.alpha,
                "function_id": self.function_id,
                "dim": self.dim,
                "instance_seed": self.instance_seed,
                "run_seed": self.run_seed,
                "sigma": self.sigma,
                "timestamp": self.timestamp,
            }
        )

    @classmethod
    def from_json_line(cls, line: str) -> "TrainingRecord":
        raw = json.loads(line)
        return cls(
            params=ControlParams(
                p1=float(raw["p1"]), p2=float(raw["p2"]), p3=int(raw["p3"])
            ),
            features=FeatureVector(
                beta1=float(raw["beta1"]),
                beta2=float(raw["beta2"]),
                beta3=float(raw["beta3"]),
            ),
            alpha=float(raw["alpha"]),
            function_id=str(raw["function_id"]),
            dim=int(raw["dim"]),
            instance_seed=int(raw["instance_seed"]),
            run_seed=int(raw["run_seed"]),
            sigma=int(raw["sigma"]),
            timestamp=str(raw["timestamp"]),
        )


class TrainingStore:
    """Append-only record list with a batch version counter."""

    def __init__(self, records=None):
        self.records: list[TrainingRecord] = list(records or [])
        self.version: int = 1 if self.records else 0
        self._model_cache: dict = {}

    def __len__(self) -> int:
        return len(self.records)

    def append(self, batch) -> None:
        batch = list(batch)
        if not batch:
            return
        self.records.extend(batch)
        self.version += 1

    def features_array(self) -> np.ndarray:
        return np.array([r.features.as_array() for r in self.records])

    def best_record(self) -> TrainingRecord:
        if not self.records:
            raise NoDataError("store is empty")
        return max(self.records, key=lambda r: r.alpha)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(rec.to_json_line())
                fh.write("\n")

    @classmethod
    def load(cls, path) -> "TrainingStore":
        records = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(TrainingRecord.from_json_line(line))
        return cls(records)


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def top_set_size(m: int) -> int:
    """Size of the top-10% set for a cluster of m records (ceiling, min 1)."""
    return max(1, math.ceil(TOP_FRACTION * m))


def fit_model(
    store: TrainingStore, kappa: int, seed: int = 0, scale: bool = True
) -> cluster.ClusterModel:
    """Cluster the stored features; the fit is cached per store version."""
    if not store.records:
        raise NoDataError("cannot fit a cluster model on an empty store")
    kappa_eff = min(kappa, len(store.records))
    if kappa_eff < kappa:
        log.warning(
            "kappa=%d exceeds record count %d; clamped to %d",
            kappa,
            len(store.records),
            kappa_eff,
        )
    key = (store.version, kappa_eff, seed, scale)
    model = store._model_cache.get(key)
    if model is None:
        model = cluster.fit(store.features_array(), kappa_eff, seed=seed, scale=scale)
        store._model_cache[key] = model
    return model


def _mean_params(records: list[TrainingRecord]) -> ControlParams:
    p1 = float(np.mean([r.params.p1 for r in records]))
    p2 = float(np.mean([r.params.p2 for r in records]))
    p3_mean = float(np.mean([r.params.p3 for r in records]))
    # round half away from zero, keep population integral and >= 5
    p3 = max(5, int(math.floor(p3_mean + 0.5)))
    return ControlParams(p1=p1, p2=p2, p3=p3)


def recommendation_table(
    store: TrainingStore,
    kappa: int,
    seed: int = 0,
    scale: bool = True,
) -> tuple[cluster.ClusterModel, dict[int, ControlParams]]:
    """Fitted model plus, per cluster, the mean parameters of its top 10%
    records by score (cached per store version)."""
    if not store.records:
        raise NoDataError("cannot recommend from an empty store")
    if kappa < 1:
        raise ContractError(f"kappa must be >= 1, got {kappa}")
    model = fit_model(store, kappa, seed=seed, scale=scale)
    key = ("table", store.version, model.k, seed, scale)
    table = store._model_cache.get(key)
    if table is None:
        labels = model.classify_all(store.features_array())
        table = {}
        for c in range(model.k):
            members = [r for r, lab in zip(store.records, labels) if lab == c]
            if not members:
                # a centroid can end up without members after a refit; fall
                # back to the whole store rather than failing the run
                members = list(store.records)
            ranked = sorted(members, key=lambda r: -r.alpha)
            table[c] = _mean_params(ranked[: top_set_size(len(members))])
        store._model_cache[key] = table
    return model, table


def recommend(
    store: TrainingStore,
    kappa: int,
    beta_new: FeatureVector,
    seed: int = 0,
    scale: bool = True,
) -> tuple[ControlParams, int]:
    """Classify the new feature vector and return the mean parameters of the
    matching cluster's top 10% records by score."""
    model, table = recommendation_table(store, kappa, seed=seed, scale=scale)
    assigned = int(model.classify(beta_new.as_array()))
    return table[assigned], assigned


@dataclass(frozen=True)
class _TrainingItem:
    spec: ObjectiveSpec
    instance_seed: int
    params: ControlParams
    sigma: int
    budget: int
    run_seed: int
    item_seed: int


def _run_training_item(item: _TrainingItem) -> TrainingRecord:
    instance = make_instance(item.spec, item.instance_seed)
    beta = extract_features(
        instance, FeatureConfig(sigma=item.sigma, seed=item.item_seed)
    )
    trace = de.optimize(
        instance,
        item.params,
        de.RunConfig(budget=item.budget - item.sigma, seed=item.item_seed),
    )
    score = compute_alpha(trace)
    return TrainingRecord(
        params=item.params,
        features=beta,
        alpha=score.alpha,
        function_id=item.spec.function_id,
        dim=item.spec.dimension,
        instance_seed=item.instance_seed,
        run_seed=item.run_seed,
        sigma=item.sigma,
        timestamp=_utc_now(),
    )


def build_training_set(
    suite: list[ObjectiveSpec],
    sigma: int,
    seeds,
    budget: int,
    n_param_sets: int = 30,
    instance_seeds=(1,),
    param_ranges=DEFAULT_PARAM_RANGES,
    campaign_seed: int = 0,
    workers: int = 1,
) -> TrainingStore:
    """Off-line campaign: a fresh LHS of parameter triples per (function,
    dimension), each run on every instance and seed.

    Every run extracts features first (sigma evaluations) and optimizes with
    the remaining budget, so stored scores include the sampling cost.
    """
    if not suite:
        raise ContractError("suite must not be empty")
    if budget <= sigma:
        raise ContractError(f"budget {budget} must exceed sigma {sigma}")
    items = []
    for spec in suite:
        design_rng = substream(
            campaign_seed, "param-design", spec.function_id, spec.dimension
        )
        param_sets = lhs_params(n_param_sets, design_rng, ranges=param_ranges)
        for inst_seed in instance_seeds:
            for param_idx, params in enumerate(param_sets):
                for run_seed in seeds:
                    items.append(
                        _TrainingItem(
                            spec=spec,
                            instance_seed=inst_seed,
                            params=params,
                            sigma=sigma,
                            budget=budget,
                            run_seed=run_seed,
                            item_seed=derive_seed(
                                campaign_seed,
                                "train",
                                spec.function_id,
                                spec.dimension,
                                inst_seed,
                                param_idx,
                                run_seed,
                            ),
                        )
                    )
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_training_item, items, chunksize=8))
    else:
        records = [_run_training_item(item) for item in items]
    store = TrainingStore()
    store.append(records)
    return store


def run_predictive(
    instance,
    store: TrainingStore,
    kappa: int,
    sigma: int,
    budget: int,
    seed: int,
    scale: bool = True,
    model_seed: int = 0,
) -> tuple[de.RunTrace, PerformanceScore, TrainingRecord]:
    """One on-line use of the methodology on a new instance.

    Features are extracted from a fresh sample (sigma evaluations charged to
    the instance), parameters recommended, and the optimizer run with the
    remaining budget; the score covers the combined cost.
    """
    if budget <= sigma:
        raise ContractError(f"budget {budget} must exceed sigma {sigma}")
    beta = extract_features(instance, FeatureConfig(sigma=sigma, seed=seed))
    params, _ = recommend(store, kappa, beta, seed=model_seed, scale=scale)
    trace = de.optimize(
        instance, params, de.RunConfig(budget=budget - sigma, seed=seed)
    )
    score = compute_alpha(trace)
    record = TrainingRecord(
        params=params,
        features=beta,
        alpha=score.alpha,
        function_id=instance.spec.function_id,
        dim=instance.dimension,
        instance_seed=instance.instance_seed,
        run_seed=seed,
        sigma=sigma,
        timestamp=_utc_now(),
    )
    return trace, score, record


def append_and_retrain(
    store: TrainingStore,
    record: TrainingRecord,
    kappa: int,
    seed: int = 0,
    scale: bool = True,
) -> tuple[TrainingStore, cluster.ClusterModel]:
    """Append one record (version bump) and refit the clustering on the
    grown store."""
    store.append([record])
    model = fit_model(store, kappa, seed=seed, scale=scale)
    return store, model
