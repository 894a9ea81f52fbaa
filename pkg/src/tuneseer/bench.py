"""Deterministic, instanced suite of continuous black-box benchmark functions.

Two disjoint presets are provided: a training suite of ten functions spanning
separable unimodal, high-conditioning, strongly and weakly structured
multimodal, plateau, and asymmetric-valley landscapes, and a held-out suite of
six further functions for out-of-sample testing.  Every function shares the
box [-5, 5]^D and is defined for any dimension D >= 2.

An instance fixes (function id, dimension, instance seed) and applies an
optimum shift plus an orthogonal rotation:

    f_instance(x) = f_base(R (x - shift))

Instance seed 0 is the identity transform.  Identical (function id, D, seed)
triples reproduce bit-identical transforms.  Base formulas are documented on
each function below; all have known optimum value 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ContractError, UnknownFunctionError
from .sampling import substream

DOMAIN_BOUND = 5.0

# Fraction of the box from which instance shifts are drawn, keeping shifted
# optima away from the boundary.
SHIFT_FRACTION = 0.8

# argmax of w*sin(sqrt(|w|)); the classic Schwefel optimum location.
_SCHWEFEL_OPT = 420.968746359982025

# Positivity floor added to the held-out functions (their optimum value).
# Runs on 2-D problems can otherwise drive values to exact float zero within
# the budget, and the relative-convergence rule of the efficiency score is
# only scale-free on strictly positive values.  The floor is far below any
# numerically meaningful level, mirroring the nonzero-optimum convention of
# the established benchmark suites.
HOLDOUT_VALUE_OFFSET = 1e-300


@dataclass(frozen=True)
class SearchDomain:
    """Axis-aligned box; all suite functions share [-5, 5] per coordinate."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or not np.all(lower < upper):
            raise ContractError("domain requires lower[i] < upper[i]")

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)


def domain_for(dimension: int) -> SearchDomain:
    return SearchDomain(
        lower=np.full(dimension, -DOMAIN_BOUND),
        upper=np.full(dimension, DOMAIN_BOUND),
    )


# ---------------------------------------------------------------------------
# Base functions.  Each takes an (n, D) array and returns (n,) values.
# ---------------------------------------------------------------------------


def _sphere(z: np.ndarray) -> np.ndarray:
    """f(z) = sum z_i^2"""
    return np.sum(z * z, axis=1)


def _ellipsoid_weights(d: int) -> np.ndarray:
    return 10.0 ** (6.0 * np.arange(d) / (d - 1))


def _ellipsoid(z: np.ndarray) -> np.ndarray:
    """Separable ellipsoid, condition 1e6: f(z) = sum 10^(6(i-1)/(D-1)) z_i^2"""
    return (z * z) @ _ellipsoid_weights(z.shape[1])


@lru_cache(maxsize=None)
def _intrinsic_rotation(name: str, d: int) -> np.ndarray:
    """Fixed per-(function, D) rotation, independent of instancing."""
    return random_rotation(substream(0, "intrinsic-rotation", name, d), d)


def _rotated_ellipsoid(z: np.ndarray) -> np.ndarray:
    """Ellipsoid (condition 1e6) composed with a fixed rotation Q:
    f(z) = ellipsoid(Q z)"""
    q = _intrinsic_rotation("rotated_ellipsoid", z.shape[1])
    return _ellipsoid(z @ q.T)


def _sharp_ridge(z: np.ndarray) -> np.ndarray:
    """f(z) = z_1^2 + 100 sqrt(sum_{i>=2} z_i^2)"""
    return z[:, 0] ** 2 + 100.0 * np.sqrt(np.sum(z[:, 1:] ** 2, axis=1))


def _rastrigin(z: np.ndarray) -> np.ndarray:
    """f(z) = 10 D + sum (z_i^2 - 10 cos(2 pi z_i))"""
    d = z.shape[1]
    return 10.0 * d + np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z), axis=1)


def _griewank(z: np.ndarray) -> np.ndarray:
    """Griewank on w = 120 z (maps the box onto the classic [-600, 600]^D):
    f = 1 + sum w_i^2 / 4000 - prod cos(w_i / sqrt(i))"""
    w = 120.0 * z
    i = np.arange(1, z.shape[1] + 1)
    return (
        1.0
        + np.sum(w * w, axis=1) / 4000.0
        - np.prod(np.cos(w / np.sqrt(i)), axis=1)
    )


def _ackley(z: np.ndarray) -> np.ndarray:
    """f(z) = -20 exp(-0.2 sqrt(mean z_i^2)) - exp(mean cos(2 pi z_i)) + 20 + e"""
    quad = np.sqrt(np.mean(z * z, axis=1))
    osc = np.mean(np.cos(2.0 * np.pi * z), axis=1)
    return -20.0 * np.exp(-0.2 * quad) - np.exp(osc) + 20.0 + math.e


def _schwefel(z: np.ndarray) -> np.ndarray:
    """Schwefel sine landscape rescaled into the box with its optimum moved
    to the origin.  With w = 100 z + 420.9687... and g(w) = w sin(sqrt|w|):

        f = sum (g(420.9687...) - g(w_i)) + sum max(0, |w_i| - 500)^2 / 10

    The quadratic term penalises the region beyond the classic +-500 domain;
    the /10 weight keeps the per-coordinate term nonnegative over the whole
    range reachable through instance rotations (the larger sine peaks just
    past +-500 would otherwise dip below the origin value).
    """
    w = 100.0 * z + _SCHWEFEL_OPT
    g = w * np.sin(np.sqrt(np.abs(w)))
    g_opt = _SCHWEFEL_OPT * math.sin(math.sqrt(_SCHWEFEL_OPT))
    over = np.maximum(0.0, np.abs(w) - 500.0)
    return np.sum(g_opt - g, axis=1) + np.sum(over * over, axis=1) / 10.0


def _step(z: np.ndarray) -> np.ndarray:
    """Plateaued quadratic with a weak escape slope:

        f(z) = 0.1 * max(|z_1| / 1e4, sum 10^((i-1)/(D-1)) floor(z_i + 0.5)^2)

    The rounded quadratic produces flat plateaus; the tiny |z_1| term keeps
    the surface from being exactly level at the bottom, so runs always have
    a residual gradient (the convention of plateaued benchmark suites).
    """
    d = z.shape[1]
    s = np.floor(z + 0.5)
    weights = 10.0 ** (np.arange(d) / (d - 1))
    plateau = (s * s) @ weights
    return 0.1 * np.maximum(np.abs(z[:, 0]) / 1e4, plateau)


def _rosenbrock(z: np.ndarray) -> np.ndarray:
    """Classic Rosenbrock valley, optimum at (1, ..., 1):
    f(z) = sum_{i<D} 100 (z_{i+1} - z_i^2)^2 + (1 - z_i)^2"""
    a = z[:, :-1]
    b = z[:, 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2, axis=1)


def _bent_cigar(z: np.ndarray) -> np.ndarray:
    """f(z) = z_1^2 + 1e6 sum_{i>=2} z_i^2"""
    return z[:, 0] ** 2 + 1.0e6 * np.sum(z[:, 1:] ** 2, axis=1)


def _discus(z: np.ndarray) -> np.ndarray:
    """f(z) = 1e6 z_1^2 + sum_{i>=2} z_i^2"""
    return 1.0e6 * z[:, 0] ** 2 + np.sum(z[:, 1:] ** 2, axis=1)


def _discus_steep(z: np.ndarray) -> np.ndarray:
    """f(z) = 1e8 z_1^2 + sum_{i>=2} z_i^2"""
    return 1.0e8 * z[:, 0] ** 2 + np.sum(z[:, 1:] ** 2, axis=1)


def _tablet(z: np.ndarray) -> np.ndarray:
    """f(z) = 1e6 sum_{i<=2} z_i^2 + sum_{i>2} z_i^2"""
    return 1.0e6 * np.sum(z[:, :2] ** 2, axis=1) + np.sum(z[:, 2:] ** 2, axis=1)


def _tablet3(z: np.ndarray) -> np.ndarray:
    """f(z) = 1e6 sum_{i<=3} z_i^2 + sum_{i>3} z_i^2"""
    return 1.0e6 * np.sum(z[:, :3] ** 2, axis=1) + np.sum(z[:, 3:] ** 2, axis=1)


def _discus_abs(z: np.ndarray) -> np.ndarray:
    """Stiff quadratic axis over an absolute-value valley:
    f(z) = 1e6 z_1^2 + sum_{i>=2} |z_i|"""
    return 1.0e6 * z[:, 0] ** 2 + np.sum(np.abs(z[:, 1:]), axis=1)


def _ridge_rotated(z: np.ndarray) -> np.ndarray:
    """Sharp ridge composed with a fixed rotation: f(z) = ridge(Q z)"""
    q = _intrinsic_rotation("ridge_rotated", z.shape[1])
    return _sharp_ridge(z @ q.T)


def _rosenbrock_rotated(z: np.ndarray) -> np.ndarray:
    """Rosenbrock valley composed with a fixed rotation: f(z) = rosen(Q z)"""
    q = _intrinsic_rotation("rosenbrock_rotated", z.shape[1])
    return _rosenbrock(z @ q.T)


def _different_powers(z: np.ndarray) -> np.ndarray:
    """f(z) = sum |z_i|^(2 + 4(i-1)/(D-1))"""
    d = z.shape[1]
    exponents = 2.0 + 4.0 * np.arange(d) / (d - 1)
    return np.sum(np.abs(z) ** exponents, axis=1)


def _schaffers_f7(z: np.ndarray) -> np.ndarray:
    """With s_i = sqrt(z_i^2 + z_{i+1}^2):
    f = (mean_i sqrt(s_i) + sqrt(s_i) sin^2(50 s_i^0.2))^2"""
    s = np.sqrt(z[:, :-1] ** 2 + z[:, 1:] ** 2)
    root = np.sqrt(s)
    inner = np.mean(root + root * np.sin(50.0 * s**0.2) ** 2, axis=1)
    return inner * inner


def _conditioning(d: int, spread: float) -> np.ndarray:
    return 10.0 ** (spread * np.arange(d) / (d - 1))


def _rastrigin_rotated(z: np.ndarray) -> np.ndarray:
    """Rastrigin composed with a fixed rotation and condition-10 scaling:
    f(z) = rastrigin(diag(10^((i-1)/(2(D-1)))) Q z)"""
    d = z.shape[1]
    q = _intrinsic_rotation("rastrigin_rotated", d)
    return _rastrigin((z @ q.T) * _conditioning(d, 0.5))


def _ackley_rotated(z: np.ndarray) -> np.ndarray:
    """Ackley composed with a fixed rotation and condition-10 scaling:
    f(z) = ackley(diag(10^((i-1)/(2(D-1)))) Q z)"""
    d = z.shape[1]
    q = _intrinsic_rotation("ackley_rotated", d)
    return _ackley((z @ q.T) * _conditioning(d, 0.5))


_WEIERSTRASS_K = np.arange(21)
_WEIERSTRASS_A = 0.5**_WEIERSTRASS_K
_WEIERSTRASS_B = 2.0 * np.pi * 3.0**_WEIERSTRASS_K


def _weierstrass(z: np.ndarray) -> np.ndarray:
    """Weierstrass (a=0.5, b=3, kmax=20):
    f = sum_i sum_k a^k cos(2 pi b^k (z_i + 0.5)) - D sum_k a^k cos(pi b^k)"""
    d = z.shape[1]
    terms = _WEIERSTRASS_A * np.cos(_WEIERSTRASS_B * (z[..., None] + 0.5))
    f0 = float(np.sum(_WEIERSTRASS_A * np.cos(_WEIERSTRASS_B * 0.5)))
    return np.sum(terms, axis=(1, 2)) - d * f0


def _griewank_rosenbrock(z: np.ndarray) -> np.ndarray:
    """Expanded Griewank-of-Rosenbrock with optimum moved to the origin.
    With w = z + 1 and s_i = 100 (w_{i+1} - w_i^2)^2 + (w_i - 1)^2:

        f = 10/(D-1) * sum_{i<D} (s_i / 4000 - cos(s_i)) + 10
    """
    w = z + 1.0
    a = w[:, :-1]
    b = w[:, 1:]
    s = 100.0 * (b - a * a) ** 2 + (a - 1.0) ** 2
    d = z.shape[1]
    return 10.0 / (d - 1) * np.sum(s / 4000.0 - np.cos(s), axis=1) + 10.0


@dataclass(frozen=True)
class BenchFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    group: str
    # optimum location of the *base* function (pre-instancing); None = origin
    optimum_fn: Callable[[int], np.ndarray] | None = None

    def optimum_location(self, dimension: int) -> np.ndarray:
        if self.optimum_fn is not None:
            return self.optimum_fn(dimension)
        return np.zeros(dimension)


def _with_floor(fn: Callable[[np.ndarray], np.ndarray]):
    def wrapped(z: np.ndarray) -> np.ndarray:
        return fn(z) + HOLDOUT_VALUE_OFFSET

    wrapped.__doc__ = fn.__doc__
    return wrapped


REGISTRY: dict[str, BenchFunction] = {
    f.name: f
    for f in [
        BenchFunction("sphere", _sphere, "separable unimodal"),
        BenchFunction("ellipsoid", _ellipsoid, "separable unimodal"),
        BenchFunction("rotated_ellipsoid", _rotated_ellipsoid, "high conditioning"),
        BenchFunction("sharp_ridge", _sharp_ridge, "high conditioning"),
        BenchFunction("rastrigin", _rastrigin, "multimodal strong structure"),
        BenchFunction("griewank", _griewank, "multimodal strong structure"),
        BenchFunction("ackley", _ackley, "multimodal strong structure"),
        BenchFunction("schwefel", _schwefel, "multimodal weak structure"),
        BenchFunction("step", _step, "plateau"),
        BenchFunction("rosenbrock", _rosenbrock, "asymmetric valley", np.ones),
        BenchFunction("bent_cigar", _with_floor(_bent_cigar), "high conditioning"),
        BenchFunction("discus", _with_floor(_discus), "high conditioning"),
        BenchFunction("discus_steep", _with_floor(_discus_steep), "high conditioning"),
        BenchFunction("tablet", _with_floor(_tablet), "high conditioning"),
        BenchFunction("tablet3", _with_floor(_tablet3), "high conditioning"),
        BenchFunction("discus_abs", _with_floor(_discus_abs), "nonsmooth hybrid"),
        BenchFunction("ridge_rotated", _with_floor(_ridge_rotated), "high conditioning"),
        BenchFunction(
            "rosenbrock_rotated",
            _with_floor(_rosenbrock_rotated),
            "asymmetric valley",
            lambda d: _intrinsic_rotation("rosenbrock_rotated", d).T @ np.ones(d),
        ),
        BenchFunction("different_powers", _with_floor(_different_powers), "unimodal"),
        BenchFunction(
            "rastrigin_rotated",
            _with_floor(_rastrigin_rotated),
            "multimodal strong structure",
        ),
        BenchFunction(
            "ackley_rotated",
            _with_floor(_ackley_rotated),
            "multimodal strong structure",
        ),
        BenchFunction(
            "schaffers_f7", _with_floor(_schaffers_f7), "multimodal strong structure"
        ),
        BenchFunction(
            "weierstrass", _with_floor(_weierstrass), "multimodal weak structure"
        ),
        BenchFunction(
            "griewank_rosenbrock",
            _with_floor(_griewank_rosenbrock),
            "multimodal weak structure",
        ),
    ]
}

TRAINING_FUNCTIONS = (
    "sphere",
    "ellipsoid",
    "rotated_ellipsoid",
    "sharp_ridge",
    "rastrigin",
    "griewank",
    "ackley",
    "schwefel",
    "step",
    "rosenbrock",
)

# Held-out preset: conditioning and rotation variants of the training
# families plus a multimodal entry, in the spirit of testing on a second
# suite built from the same function classes.  Further registry functions
# (tablet3, bent_cigar, schaffers_f7, discus_abs, griewank_rosenbrock, ...)
# are available for custom campaigns.
HOLDOUT_FUNCTIONS = (
    "discus_steep",
    "tablet",
    "ridge_rotated",
    "rosenbrock_rotated",
    "different_powers",
    "weierstrass",
)

PRESET_DIMENSIONS = (2, 10, 20, 30, 40, 50)


@dataclass(frozen=True)
class ObjectiveSpec:
    """A benchmark function at a fixed dimension."""

    function_id: str
    dimension: int

    def __post_init__(self):
        if self.function_id not in REGISTRY:
            raise UnknownFunctionError(f"unknown function id {self.function_id!r}")
        if self.dimension < 2:
            raise ContractError(f"dimension must be >= 2, got {self.dimension}")

    @property
    def domain(self) -> SearchDomain:
        return domain_for(self.dimension)


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    """Orthogonal matrix from QR of a Gaussian matrix with sign-fixed
    diagonal; deterministic per rng state and uniform over the orthogonal
    group."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


@dataclass
class ObjectiveInstance:
    """One evaluable instance of a spec.

    Mutable only through ``eval_counter``; a single run owns one instance.
    """

    spec: ObjectiveSpec
    instance_seed: int
    shift: np.ndarray
    rotation: np.ndarray
    eval_counter: int = 0
    _base: BenchFunction = field(init=False, repr=False)

    def __post_init__(self):
        self._base = REGISTRY[self.spec.function_id]

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def domain(self) -> SearchDomain:
        return self.spec.domain

    @property
    def optimum_location(self) -> np.ndarray:
        """Point where the base optimum value is attained (may fall outside
        the box for rotated instances of functions whose base optimum is not
        at the origin)."""
        base_opt = self._base.optimum_location(self.dimension)
        return self.shift + self.rotation.T @ base_opt

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ContractError(
                f"expected point of dimension {self.dimension}, got shape {x.shape}"
            )
        self.eval_counter += 1
        z = self.rotation @ (x - self.shift)
        return float(self._base.fn(z[None, :])[0])

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate an (n, D) batch; charges n evaluations to the counter."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise ContractError(
                f"expected (n, {self.dimension}) batch, got shape {points.shape}"
            )
        self.eval_counter += points.shape[0]
        z = (points - self.shift) @ self.rotation.T
        return self._base.fn(z)


def make_instance(spec: ObjectiveSpec, instance_seed: int) -> ObjectiveInstance:
    """Deterministic instance; seed 0 is the identity transform."""
    if instance_seed < 0:
        raise ContractError(f"instance_seed must be >= 0, got {instance_seed}")
    d = spec.dimension
    if instance_seed == 0:
        shift = np.zeros(d)
        rotation = np.eye(d)
    else:
        rng = substream(
            instance_seed, "bench-instance", spec.function_id, spec.dimension
        )
        half_width = SHIFT_FRACTION * DOMAIN_BOUND
        shift = rng.uniform(-half_width, half_width, size=d)
        rotation = random_rotation(rng, d)
    return ObjectiveInstance(
        spec=spec, instance_seed=instance_seed, shift=shift, rotation=rotation
    )


def training_suite(dims=PRESET_DIMENSIONS) -> list[ObjectiveSpec]:
    """Training preset: ten functions spanning the landscape groups."""
    return [ObjectiveSpec(f, d) for f in TRAINING_FUNCTIONS for d in dims]


def holdout_suite(dims=PRESET_DIMENSIONS) -> list[ObjectiveSpec]:
    """Held-out preset, disjoint from the training functions."""
    return [ObjectiveSpec(f, d) for f in HOLDOUT_FUNCTIONS for d in dims]


def suite_listing(suite: list[ObjectiveSpec]) -> list[dict]:
    """JSON-ready listing of (function_id, D, domain) used for config
    validation by the campaign harness."""
    out = []
    for spec in suite:
        dom = spec.domain
        out.append(
            {
                "function_id": spec.function_id,
                "dimension": spec.dimension,
                "lower": dom.lower.tolist(),
                "upper": dom.upper.tolist(),
            }
        )
    return out
