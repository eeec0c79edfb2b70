"""Two-stage privatization of a count table, datasets and experiment harness.

The total budget ``eps_t`` is split as ``eps_1 = f * eps_t`` for the
distribution privatizer and ``eps_2 = (1 - f) * eps_t`` for the count
mechanism.  The stages only see what they are allowed to:

1. the true distribution of counts ``zeta`` is computed from the table;
2. the privatizer turns ``zeta`` into a noisy ``z`` (projected to the simplex);
3. the constructor builds ``T`` from ``z`` and ``eps_2`` alone;
4. every count is passed through ``T``;
5. a report collects the budget, errors and timings.

The unfixed baselines skip stages 2 and 3 and spend all of ``eps_t`` on the
count mechanism.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np

from ._validation import check_positive_int
from .baselines import (
    calibrate_sigma,
    default_gamma,
    discrete_gaussian_matrix,
    discrete_gaussian_mechanism,
    staircase_matrix,
    staircase_mechanism,
    truncated_geometric_matrix,
)
from .constructors import (
    LP_CAP,
    SELECTORS,
    heuristic_constructor,
    lp_fixed_point_constructor,
    unfixed_optimum_constructor,
)
from .core import CountTable, PrivacyParam, apply_mechanism, distribution_of, histogram_of, in_F
from .exceptions import CapacityError, InputError, InvariantViolation
from .metrics import all_distances, build_weight_matrix, count_error
from .privatizers import PRIVATIZERS, privatize_distribution, project_to_simplex

__all__ = [
    "CONSTRUCTORS",
    "FIXED_POINT_CONSTRUCTORS",
    "BASELINE_CONSTRUCTORS",
    "DATASETS",
    "RULE_OF_THUMB",
    "PipelineConfig",
    "PipelineReport",
    "rule_of_thumb_split",
    "construct_mechanism",
    "run_two_stage",
    "generate_synthetic",
    "bench",
    "loglog_slope",
    "ExperimentResult",
    "run_experiment",
]

FIXED_POINT_CONSTRUCTORS = ("heuristic-max", "heuristic-min", "heuristic-sandwich",
                            "heuristic-auto", "lp-fixed")
BASELINE_CONSTRUCTORS = ("truncated-geometric", "staircase", "discrete-gaussian")
CONSTRUCTORS = FIXED_POINT_CONSTRUCTORS + ("unfixed-optimum",) + BASELINE_CONSTRUCTORS
ERROR_KINDS = ("ead", "mse")
NUMERIC_MODES = ("float", "rational")
LP_METHODS = ("highs", "simplex")

# f(eps_t) = B + A exp(-C eps_t)
RULE_OF_THUMB = {"A": 0.533, "B": 0.106, "C": 2.87}

# denominators used when the rational mode rounds lam and z
_RATIONAL_LAM_DEN = 10 ** 6
_RATIONAL_Z_DEN = 10 ** 12


def rule_of_thumb_split(epsilon_total: float) -> float:
    """Fraction of the budget for the privatizer, ``0.106 + 0.533 exp(-2.87 eps_t)``."""
    if not epsilon_total > 0:
        raise InputError(f"epsilon_total must be positive, got {epsilon_total}")
    return RULE_OF_THUMB["B"] + RULE_OF_THUMB["A"] * math.exp(-RULE_OF_THUMB["C"] * epsilon_total)


@dataclass(frozen=True)
class PipelineConfig:
    """Settings of one two-stage run.

    Parameters
    ----------
    epsilon_total : float
    n : int
        Counts are top-coded to ``n - 1``.
    constructor : str
        One of :data:`CONSTRUCTORS`.  ``heuristic-auto`` tries all three
        selectors and keeps the lowest expected count error.
    split_fraction : float, optional
        ``f`` in ``(0, 1)``; the rule of thumb when omitted.
    privatizer : str
        One of :data:`countmech.privatizers.PRIVATIZERS`.
    sigma : float, optional
        Noise level for ``cyclic-gaussian``.
    error_kind : {"ead", "mse"}
    seed : int
    numeric_mode : {"float", "rational"}
        ``rational`` rounds ``lam`` down to a rational (never weakening the
        guarantee) and ``z`` to rationals, then constructs exactly.
    floor_z : bool
        Raise every entry of ``z`` to at least ``1/(10N)`` and renormalize.
    lp_method : {"highs", "simplex"}
    lp_max_n : int
        Capacity guard for ``lp-fixed``.
    """

    epsilon_total: float
    n: int
    constructor: str = "heuristic-sandwich"
    split_fraction: float | None = None
    privatizer: str = "cyclic-laplace"
    sigma: float | None = None
    error_kind: str = "ead"
    seed: int = 0
    numeric_mode: str = "float"
    floor_z: bool = False
    lp_method: str = "highs"
    lp_max_n: int = LP_CAP

    def __post_init__(self):
        if not (isinstance(self.epsilon_total, (int, float)) and self.epsilon_total > 0
                and math.isfinite(self.epsilon_total)):
            raise InputError(f"epsilon_total must be positive, got {self.epsilon_total}")
        check_positive_int(self.n, "n")
        if self.constructor not in CONSTRUCTORS:
            raise InputError(f"unknown constructor {self.constructor!r}; choose from {CONSTRUCTORS}")
        if self.split_fraction is not None and not 0 < self.split_fraction < 1:
            raise InputError(f"split fraction must lie in (0, 1), got {self.split_fraction}")
        if self.privatizer not in PRIVATIZERS:
            raise InputError(f"unknown privatizer {self.privatizer!r}; choose from {PRIVATIZERS}")
        if self.privatizer == "cyclic-gaussian" and self.sigma is None and not self.is_baseline:
            raise InputError("cyclic-gaussian requires sigma")
        if self.error_kind not in ERROR_KINDS:
            raise InputError(f"unknown error kind {self.error_kind!r}; choose from {ERROR_KINDS}")
        if self.numeric_mode not in NUMERIC_MODES:
            raise InputError(f"unknown numeric mode {self.numeric_mode!r}")
        if self.lp_method not in LP_METHODS:
            raise InputError(f"unknown LP method {self.lp_method!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InputError(f"seed must be a nonnegative integer, got {self.seed!r}")

    @property
    def is_baseline(self) -> bool:
        return self.constructor in BASELINE_CONSTRUCTORS

    @property
    def f(self) -> float:
        if self.is_baseline:
            return 0.0
        if self.split_fraction is not None:
            return float(self.split_fraction)
        return rule_of_thumb_split(self.epsilon_total)

    @property
    def epsilon_1(self) -> float:
        return self.f * self.epsilon_total

    @property
    def epsilon_2(self) -> float:
        return self.epsilon_total - self.epsilon_1


@dataclass
class PipelineReport:
    """Outcome of :func:`run_two_stage`."""

    epsilon_total: float
    epsilon_1: float
    epsilon_2: float
    f: float
    constructor: str
    selector: str | None
    privatizer: str | None
    error_kind: str
    n: int
    N: int
    seed: int
    numeric_mode: str
    lam: str
    z: list | None
    zeta: list
    expected_count_error: float
    distances: dict
    timings_ms: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        out = asdict(self)
        if not include_timings:
            out.pop("timings_ms")
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True)


def _stage_seeds(seed: int):
    """Independent seeds for the privatizer and for applying the mechanism."""
    priv, apply_ = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(priv), int(apply_.generate_state(2, np.uint64)[0])


def _rational_lam(eps: float) -> Fraction:
    lam = Fraction(math.floor(math.exp(eps) * _RATIONAL_LAM_DEN), _RATIONAL_LAM_DEN)
    if lam <= 1:
        raise InputError(f"epsilon_2={eps} is too small for the rational mode")
    return lam


def _rational_z(z) -> list:
    out = [Fraction(float(x)).limit_denominator(_RATIONAL_Z_DEN) for x in z]
    k = int(np.argmax(np.asarray(z, dtype=float)))
    out[k] += 1 - sum(out)
    if out[k] < 0:
        raise InvariantViolation("rational rounding of z produced a negative entry")
    return out


def _heuristic(z, p, selector):
    return heuristic_constructor(z, p, selector)


def construct_mechanism(z, cfg: PipelineConfig):
    """Stage 3: build ``T`` from the privatized ``z`` and ``eps_2`` only.

    Returns ``(T, selector, lam)``; ``T`` is float64 for application while
    construction ran in the configured numeric mode.
    """
    exact = cfg.numeric_mode == "rational"
    if exact:
        p = PrivacyParam.from_lambda(_rational_lam(cfg.epsilon_2))
        z_in = _rational_z(z)
    else:
        p = PrivacyParam.from_epsilon(cfg.epsilon_2)
        z_in = np.asarray(z, dtype=float)
    W = build_weight_matrix(cfg.error_kind, z_in)
    selector = None
    kind = cfg.constructor
    if kind.startswith("heuristic-"):
        selector = kind.split("-", 1)[1]
        if selector == "auto":
            best = None
            for name in SELECTORS:
                try:
                    T_try = _heuristic(z_in, p, name)
                except InvariantViolation:
                    continue
                value = count_error(W, T_try)
                if best is None or value < best[0]:
                    best = (value, T_try, name)
            if best is None:
                raise InvariantViolation("every selector failed; use the rational mode")
            _, T, selector = best
        else:
            T = _heuristic(z_in, p, selector)
    elif kind == "lp-fixed":
        if len(z_in) > cfg.lp_max_n:
            raise CapacityError(f"n={len(z_in)} exceeds the LP capacity of {cfg.lp_max_n}; "
                                "use a heuristic constructor")
        method = "simplex" if exact else cfg.lp_method
        T = lp_fixed_point_constructor(z_in, p, W, method=method, max_n=cfg.lp_max_n)
        if not exact:
            T = _repair_lp(T, z_in)
    elif kind == "unfixed-optimum":
        T = unfixed_optimum_constructor(p, W, len(z_in))
    else:
        raise InputError(f"{kind} is not a two-stage constructor")
    if kind != "unfixed-optimum" and not in_F(T, z_in, p, tol=None if exact else _lp_tol(kind)):
        raise InvariantViolation(f"{kind} produced a matrix outside F")
    lam = str(p.lam) if exact else repr(float(p.lam))
    return np.asarray(T, dtype=float), selector, lam


def _lp_tol(kind):
    # interior-point and simplex solvers stop at a feasibility tolerance near 1e-9
    return 1e-7 if kind == "lp-fixed" else None


def _repair_lp(T, z):
    """Clip solver noise and renormalize rows of a float LP solution.

    A column with ``z_j = 0`` is identically zero in ``F``: the fixed-point
    equation zeroes it on the support of ``z`` and DP propagates the zero
    down the column.  Solver residue there is removed exactly.
    """
    T = np.maximum(np.asarray(T, dtype=float), 0.0)
    T[:, np.asarray(z, dtype=float) == 0] = 0.0
    return T / T.sum(axis=1, keepdims=True)


def _baseline(table: CountTable, cfg: PipelineConfig, seed: int):
    n, eps = cfg.n, cfg.epsilon_total
    if cfg.constructor == "truncated-geometric":
        T = np.asarray(truncated_geometric_matrix(PrivacyParam.from_epsilon(eps), n), dtype=float)
        return apply_mechanism(table, T, seed), T
    if cfg.constructor == "staircase":
        gamma = default_gamma(eps)
        out = staircase_mechanism(table.counts, eps, gamma, n, seed)
        return table.with_counts(out), staircase_matrix(eps, gamma, n)
    sigma = calibrate_sigma(eps, 1.0 / (table.N + 1))
    out = discrete_gaussian_mechanism(table.counts, sigma, n, seed)
    return table.with_counts(out), discrete_gaussian_matrix(sigma, n)


def _ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


def run_two_stage(table: CountTable, cfg: PipelineConfig):
    """Privatize ``table`` end to end.

    Returns
    -------
    (CountTable, PipelineReport)
        Identical ``(table, cfg)`` give identical tables and reports apart
        from ``timings_ms``.
    """
    if table.N == 0:
        raise InputError("count table is empty")
    if table.n != cfg.n:
        table = CountTable.from_counts(table.counts, cfg.n, table.categories)
    priv_rng, apply_seed = _stage_seeds(cfg.seed)
    timings = {}
    zeta = distribution_of(histogram_of(table))
    selector = None
    if cfg.is_baseline:
        z = None
        lam = repr(math.exp(cfg.epsilon_total))
        t0 = time.perf_counter()
        out, T = _baseline(table, cfg, apply_seed)
        timings["apply_ms"] = _ms(t0)
        weights_for = zeta
    else:
        t0 = time.perf_counter()
        v = privatize_distribution(cfg.privatizer, zeta, table.N, seed=priv_rng,
                                   epsilon=cfg.epsilon_1, sigma=cfg.sigma)
        z = project_to_simplex(v)
        if cfg.floor_z:
            z = np.maximum(z, 1.0 / (10 * table.N))
            z = z / z.sum()
        timings["privatize_ms"] = _ms(t0)
        t0 = time.perf_counter()
        T, selector, lam = construct_mechanism(z, cfg)
        timings["construct_ms"] = _ms(t0)
        t0 = time.perf_counter()
        out = apply_mechanism(table, T, apply_seed)
        timings["apply_ms"] = _ms(t0)
        weights_for = z
    zhat = distribution_of(histogram_of(out))
    W = build_weight_matrix(cfg.error_kind, np.asarray(weights_for, dtype=float))
    report = PipelineReport(
        epsilon_total=cfg.epsilon_total,
        epsilon_1=cfg.epsilon_1,
        epsilon_2=cfg.epsilon_2,
        f=cfg.f,
        constructor=cfg.constructor,
        selector=selector,
        privatizer=None if cfg.is_baseline else cfg.privatizer,
        error_kind=cfg.error_kind,
        n=cfg.n,
        N=table.N,
        seed=int(cfg.seed),
        numeric_mode=cfg.numeric_mode,
        lam=lam,
        z=None if z is None else [float(x) for x in z],
        zeta=[float(x) for x in zeta],
        expected_count_error=float(count_error(W, T)),
        distances=all_distances(zeta, zhat),
        timings_ms=timings,
    )
    return out, report


# --------------------------------------------------------------------------
# synthetic data

DATASETS = ("binomial", "uniform", "left-skewed", "right-skewed", "bimodal",
            "zero-inflated", "top-inflated")


def _table(counts, n) -> CountTable:
    counts = np.asarray(counts, dtype=np.int64)
    width = len(str(len(counts)))
    cats = [f"c{i:0{width}d}" for i in range(len(counts))]
    return CountTable.from_counts(counts, n, cats)


def generate_synthetic(kind: str, params: dict | None = None, seed=None) -> CountTable:
    """Synthetic count tables.

    ``binomial`` takes ``size`` (20), ``p`` (0.5) and ``N`` (10000) with
    ``n = size + 1``.  The other kinds follow fixed recipes:

    * ``uniform``: 3000 draws on ``{0..29}``;
    * ``left-skewed`` / ``right-skewed``: 10000 draws on ``{0..69}`` with
      adjacent mass ratio ``139/140`` rising / falling;
    * ``bimodal``: 10000 draws each from Binomial(39, 0.7) and Binomial(39, 0.3);
    * ``zero-inflated``: 200 zeros followed by 9800 uniform draws on ``{0..79}``;
    * ``top-inflated``: 9900 uniform draws on ``{0..79}`` followed by 100 counts of 79.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "binomial":
        size = check_positive_int(params.pop("size", 20), "size")
        prob = float(params.pop("p", 0.5))
        N = check_positive_int(params.pop("N", 10_000), "N")
        if not 0 <= prob <= 1:
            raise InputError(f"p must lie in [0, 1], got {prob}")
        _no_extra(params)
        return _table(rng.binomial(size, prob, N), size + 1)
    _no_extra(params)
    if kind == "uniform":
        return _table(rng.integers(0, 30, 3000), 30)
    if kind in ("left-skewed", "right-skewed"):
        ratio = 139 / 140
        mass = ratio ** np.arange(70)
        if kind == "left-skewed":
            mass = mass[::-1]
        return _table(rng.choice(70, 10_000, p=mass / mass.sum()), 70)
    if kind == "bimodal":
        return _table(np.concatenate([rng.binomial(39, 0.7, 10_000), rng.binomial(39, 0.3, 10_000)]), 40)
    if kind == "zero-inflated":
        return _table(np.concatenate([np.zeros(200, dtype=np.int64), rng.integers(0, 80, 9_800)]), 80)
    if kind == "top-inflated":
        return _table(np.concatenate([rng.integers(0, 80, 9_900), np.full(100, 79)]), 80)
    raise InputError(f"unknown dataset {kind!r}; choose from {DATASETS}")


def _no_extra(params):
    if params:
        raise InputError(f"unexpected dataset parameters: {sorted(params)}")


# --------------------------------------------------------------------------
# runtime benchmark


def _timed_construction(kind: str, n: int, epsilon_total: float, seed: int, N: int) -> float:
    table = generate_synthetic("binomial", {"size": n - 1, "N": N}, seed)
    cfg = PipelineConfig(epsilon_total, n, kind, seed=seed)
    if cfg.is_baseline:
        start = time.perf_counter()
        _baseline(table, cfg, seed)
        return _ms(start)
    priv_rng, _ = _stage_seeds(seed)
    zeta = distribution_of(histogram_of(table))
    z = project_to_simplex(privatize_distribution(cfg.privatizer, zeta, table.N, seed=priv_rng,
                                                  epsilon=cfg.epsilon_1, sigma=cfg.sigma))
    start = time.perf_counter()
    construct_mechanism(z, cfg)
    return _ms(start)


def bench(constructors, n_values, epsilon_total: float = 1.0, seed: int = 0, N: int = 10_000) -> list:
    """Time one construction per ``(constructor, n)``.

    Data are binomial draws with size ``n - 1``.  For the two-stage
    constructors only stage 3 is timed; for the sampling baselines the
    mechanism application is.  A warm-up run per constructor is discarded.

    Returns
    -------
    list of dict
        Rows with keys ``constructor``, ``n``, ``wall_ms``.
    """
    rows = []
    n_values = [check_positive_int(int(n), "n") for n in n_values]
    for kind in constructors:
        if kind not in CONSTRUCTORS:
            raise InputError(f"unknown constructor {kind!r}")
        if n_values:
            _timed_construction(kind, n_values[0], epsilon_total, seed, N)
        for n in n_values:
            rows.append({"constructor": kind, "n": n,
                         "wall_ms": _timed_construction(kind, n, epsilon_total, seed, N)})
    return rows


def loglog_slope(n_values, times) -> float:
    """Least-squares slope of ``log(time)`` against ``log(n)``."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.log(np.asarray(times, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


# --------------------------------------------------------------------------
# replicated experiments


@dataclass
class ExperimentResult:
    """Per-constructor metric arrays over replicates."""

    constructors: tuple
    replicates: int
    metrics: dict

    def median(self, constructor: str, metric: str) -> float:
        return float(np.median(self.metrics[constructor][metric]))

    def summary(self) -> dict:
        return {c: {m: float(np.median(v)) for m, v in self.metrics[c].items()}
                for c in self.constructors}

    def to_rows(self) -> list:
        rows = []
        for c in self.constructors:
            vals = self.metrics[c]
            for r in range(self.replicates):
                rows.append({"constructor": c, "replicate": r,
                             **{m: float(vals[m][r]) for m in vals}})
        return rows


def replicate_seed(seed: int, replicate: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(replicate)]).generate_state(2, np.uint64)[0])


def run_experiment(table: CountTable, constructors, epsilon_total: float, replicates: int = 100,
                   seed: int = 0, **config) -> ExperimentResult:
    """Repeat :func:`run_two_stage` for each constructor.

    Within a replicate all constructors share one seed, hence one privatized
    ``z``, so their errors are paired.
    """
    replicates = check_positive_int(replicates, "replicates")
    constructors = tuple(constructors)
    metrics = {c: {"wasserstein1": [], "ks": [], "tv": [], "count_error": []} for c in constructors}
    for r in range(replicates):
        rs = replicate_seed(seed, r)
        for c in constructors:
            cfg = PipelineConfig(epsilon_total, table.n, c, seed=rs, **config)
            _, rep = run_two_stage(table, cfg)
            for m in ("wasserstein1", "ks", "tv"):
                metrics[c][m].append(rep.distances[m])
            metrics[c]["count_error"].append(rep.expected_count_error)
    arrays = {c: {m: np.asarray(v) for m, v in d.items()} for c, d in metrics.items()}
    return ExperimentResult(constructors, replicates, arrays)


def config_with(cfg: PipelineConfig, **changes) -> PipelineConfig:
    return replace(cfg, **changes)
