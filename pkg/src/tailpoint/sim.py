"""Monte Carlo MSE studies and parameter sweeps.

Replication seeds
-----------------
Replication ``k`` of cell ``(nu, n)`` draws its sample from
``numpy.random.default_rng(seed)`` (PCG64) with::

    seed = SeedSequence([base_seed, round(nu * 10**6), n, k]).generate_state(1, uint64)[0]

so every cell, and every replication within it, can be rerun on its own.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .delimit import report
from .dist import DistributionSpec, FAMILIES, kurtosis, make_bundle, studentt
from .kde import amise_bandwidth, sample_delimiting_points, true_roughness

__all__ = [
    "MseCell",
    "MseStudyConfig",
    "SWEEP_COLUMNS",
    "SimResult",
    "SimulationError",
    "SweepSpec",
    "Target",
    "mse_rows_to_csv",
    "preset",
    "PRESETS",
    "replication_seed",
    "rows_to_csv",
    "run_mse_studies",
    "run_mse_study",
    "run_sweep",
    "scatter_families",
    "thread_count",
]


class SimulationError(RuntimeError):
    """An estimator failed inside a replication."""


class Target(str, enum.Enum):
    PINF = "pinf"
    PMCONV = "pmconv"


@dataclass(frozen=True)
class MseStudyConfig:
    nu_values: tuple[float, ...] = (1.0, 5.0, 100.0)
    n_values: tuple[int, ...] = (100, 500, 2000)
    replications: int = 1000
    base_seed: int = 0
    target: Target = Target.PINF

    def __post_init__(self):
        object.__setattr__(self, "nu_values", tuple(float(v) for v in self.nu_values))
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "target", Target(self.target))
        if not self.nu_values or not self.n_values:
            raise ValueError("nu_values and n_values must be nonempty")
        if any(not (math.isfinite(v) and v > 0) for v in self.nu_values):
            raise ValueError(f"degrees of freedom must be > 0, got {self.nu_values}")
        if any(v < 2 for v in self.n_values):
            raise ValueError(f"sample sizes must be >= 2, got {self.n_values}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed}")


@dataclass(frozen=True)
class MseCell:
    nu: float
    n: int
    true_point: float
    mse: float
    seeds: tuple[int, ...] = field(repr=False)
    estimates: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SimResult:
    config: MseStudyConfig
    cells: tuple[MseCell, ...]

    def cell(self, nu: float, n: int) -> MseCell:
        for c in self.cells:
            if c.nu == float(nu) and c.n == int(n):
                return c
        raise KeyError((nu, n))

    def table(self) -> np.ndarray:
        """MSE values as an array indexed ``[n_index, nu_index]``."""
        cfg = self.config
        return np.array([[self.cell(nu, n).mse for nu in cfg.nu_values] for n in cfg.n_values])

    def rows(self) -> list[dict]:
        cfg = self.config
        return [
            {
                "target": cfg.target.value,
                "nu": c.nu,
                "n": c.n,
                "N": cfg.replications,
                "mse": c.mse,
                "base_seed": cfg.base_seed,
            }
            for c in self.cells
        ]


def replication_seed(base_seed: int, nu: float, n: int, k: int) -> int:
    ss = np.random.SeedSequence([int(base_seed), int(round(nu * 10**6)), int(n), int(k)])
    return int(ss.generate_state(1, np.uint64)[0])


def true_point(target: Target, nu: float) -> float:
    if Target(target) is Target.PINF:
        return math.sqrt(nu / (nu + 2))
    return math.sqrt(3 * nu / (nu + 2))


@lru_cache(maxsize=None)
def _roughness(nu: float) -> tuple[float, float]:
    """``R(f''')`` and ``R(f'''')`` of the standard Student-t."""
    bundle = make_bundle(studentt(nu))
    return true_roughness(bundle, 3), true_roughness(bundle, 4)


def _run_cell(args):
    base_seed, nu, n, replications = args
    r3, r4 = _roughness(nu)
    h1 = amise_bandwidth(1, n, r3)
    h2 = amise_bandwidth(2, n, r4)
    bundle = make_bundle(studentt(nu))
    seeds = []
    est = np.empty((replications, 2))
    for k in range(replications):
        seed = replication_seed(base_seed, nu, n, k)
        seeds.append(seed)
        data = bundle.sample(n, seed)
        try:
            pts = sample_delimiting_points(data, 0.0, "right", h1, h2)
        except Exception as exc:
            raise SimulationError(f"replication failed at nu={nu:g}, n={n}, k={k}: {exc}") from exc
        est[k] = pts.pinf_n, pts.pmconv_n
    return tuple(seeds), est


def thread_count() -> int:
    """Worker count from ``TAILPOINT_THREADS`` (default 1)."""
    raw = os.environ.get("TAILPOINT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TAILPOINT_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"TAILPOINT_THREADS must be a positive integer, got {raw!r}")
    return value


def run_mse_studies(config: MseStudyConfig, workers: int | None = None) -> dict[Target, SimResult]:
    """MSE of both sample points, computed from the same replications.

    Each replication yields the sample inflection point and the sample point
    of maximum convexity, so both tables come out of one pass. The result for
    each target is identical to :func:`run_mse_study` with that target.
    """
    workers = thread_count() if workers is None else workers
    jobs = [
        (config.base_seed, nu, n, config.replications)
        for n in config.n_values
        for nu in config.nu_values
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_cell, jobs))
    else:
        outputs = [_run_cell(job) for job in jobs]

    results = {}
    for t_index, target in enumerate(Target):
        cells = []
        for (_, nu, n, _), (seeds, est) in zip(jobs, outputs):
            truth = true_point(target, nu)
            column = est[:, t_index].copy()
            sq = 0.0
            for value in column:  # replication-index order
                sq += (value - truth) ** 2
            cells.append(MseCell(nu, n, truth, sq / column.size, seeds, column))
        cfg = MseStudyConfig(
            config.nu_values, config.n_values, config.replications, config.base_seed, target
        )
        results[target] = SimResult(cfg, tuple(cells))
    return results


def run_mse_study(config: MseStudyConfig, workers: int | None = None) -> SimResult:
    """Monte Carlo MSE of the sample point chosen by ``config.target``."""
    return run_mse_studies(config, workers)[config.target]


MSE_COLUMNS = ("target", "nu", "n", "N", "mse", "base_seed")


def mse_rows_to_csv(results) -> str:
    rows = []
    for res in results:
        rows.extend(res.rows())
    return rows_to_csv(rows, MSE_COLUMNS)


# ---------------------------------------------------------------- sweeps

SWEEP_COLUMNS = (
    "param_value",
    "pinf_r",
    "pmconv_r",
    "pmcurv_r",
    "cdf_pinf_r",
    "cdf_pmconv_r",
    "cdf_pmcurv_r",
    "q05",
    "q95",
    "kurtosis",
)
ALL_OUTPUTS = frozenset(SWEEP_COLUMNS[1:])


@dataclass(frozen=True)
class SweepSpec:
    """A family with one (or two) swept parameters and the columns to record.

    ``fixed`` holds the remaining parameters. With ``param2``/``grid2`` set,
    the sweep covers the product grid and rows carry a ``param2_value``.
    """

    family: str
    param: str
    grid: tuple[float, ...]
    fixed: dict = field(default_factory=dict)
    outputs: frozenset = ALL_OUTPUTS
    param2: str | None = None
    grid2: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        names = FAMILIES[self.family][0]
        for name in filter(None, (self.param, self.param2)):
            if name not in names:
                raise ValueError(f"{self.family} has no parameter {name!r}; accepted: {list(names)}")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        for g in filter(None, (self.grid, self.grid2)):
            if len(g) < 1 or any(b <= a for a, b in zip(g[:-1], g[1:])):
                raise ValueError("sweep grids must be nonempty and strictly increasing")
        unknown = set(self.outputs) - ALL_OUTPUTS
        if unknown:
            raise ValueError(f"unknown sweep outputs {sorted(unknown)}")

    @property
    def columns(self) -> tuple[str, ...]:
        head = ("param_value", "param2_value") if self.param2 else ("param_value",)
        return head + tuple(c for c in SWEEP_COLUMNS[1:] if c in self.outputs) + ("status",)

    def points(self):
        if self.param2 is None:
            for v in self.grid:
                yield {self.param: v}
        else:
            for v in self.grid:
                for w in self.grid2:
                    yield {self.param: v, self.param2: w}


def _linear(lo, hi, steps):
    return tuple(np.linspace(lo, hi, steps).tolist())


def _log(lo, hi, steps):
    return tuple(np.geomspace(lo, hi, steps).tolist())


PRESETS: dict[str, SweepSpec] = {
    "lognormal-sigma": SweepSpec("lognormal", "sigma", _linear(0.1, 2.0, 40), {"mu": 0.0}),
    "studentt-nu": SweepSpec("studentt", "nu", _linear(1.0, 20.0, 40)),
    "gaussian-sigma": SweepSpec("gaussian", "sigma", _log(0.1, 100.0, 40), {"mu": 0.0}),
    "exponential-lambda": SweepSpec("exponential", "rate", _linear(0.1, 5.0, 40)),
    "skewt-grid": SweepSpec(
        "skewt", "nu", _linear(1.0, 20.0, 20), {}, ALL_OUTPUTS, "s", _linear(-10.0, 10.0, 11)
    ),
}


def preset(name: str) -> SweepSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def _sweep_row(spec: SweepSpec, values: dict) -> dict:
    row = {"param_value": values[spec.param]}
    if spec.param2:
        row["param2_value"] = values[spec.param2]
    try:
        names = FAMILIES[spec.family][0]
        defaults = FAMILIES[spec.family][1]
        params = {**{k: v for k, v in defaults.items() if v is not None}, **spec.fixed, **values}
        dist = DistributionSpec(spec.family, tuple(params[k] for k in names))
        rep = report(dist)
        right = rep.right
        full = {
            "pinf_r": right.pinf,
            "pmconv_r": right.pmconv,
            "pmcurv_r": right.pmcurv,
            "cdf_pinf_r": right.cdf_at["pinf"],
            "cdf_pmconv_r": right.cdf_at["pmconv"],
            "cdf_pmcurv_r": right.cdf_at["pmcurv"],
        }
        if {"q05", "q95"} & spec.outputs:
            bundle = make_bundle(dist)
            full["q05"], full["q95"] = bundle.quantile(0.05), bundle.quantile(0.95)
        full["kurtosis"] = kurtosis(dist)
        row.update({k: full.get(k) for k in spec.outputs})
        row["status"] = "ok"
    except Exception as exc:  # a bad grid point fails its row, not the sweep
        row.update({k: None for k in spec.outputs})
        row["status"] = f"failed: {exc}"
    return row


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """One row per grid point, in grid order."""
    workers = thread_count() if workers is None else workers
    points = list(spec.points())
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_row, [spec] * len(points), points))
    return [_sweep_row(spec, p) for p in points]


SCATTER_SPECS = (
    ("gaussian", "gaussian(mu=0,sigma=1)"),
    ("cauchy", "cauchy()"),
    ("studentt-2", "studentt(nu=2)"),
    ("studentt-3", "studentt(nu=3)"),
    ("studentt-5", "studentt(nu=5)"),
    ("studentt-10", "studentt(nu=10)"),
    ("studentt-30", "studentt(nu=30)"),
    ("lognormal-0.25", "lognormal(mu=0,sigma=0.25)"),
    ("lognormal-0.5", "lognormal(mu=0,sigma=0.5)"),
    ("lognormal-1", "lognormal(mu=0,sigma=1)"),
    ("exponential-1", "exponential(rate=1)"),
    ("skewt-3-10", "skewt(nu=3,s=10)"),
    ("skewt-5-2", "skewt(nu=5,s=2)"),
)
SCATTER_COLUMNS = ("label", "dist", "cdf_pmcurv_r", "cdf_pmconv_r", "cdf_pinf_r")


def scatter_families() -> list[dict]:
    """Right-tail cdf values of PMCurv, PMConv and PInf across a fixed family set."""
    from .dist import parse_spec

    rows = []
    for label, text in SCATTER_SPECS:
        spec = parse_spec(text)
        cdf = report(spec).right.cdf_at
        rows.append(
            {
                "label": label,
                "dist": str(spec),
                "cdf_pmcurv_r": cdf["pmcurv"],
                "cdf_pmconv_r": cdf["pmconv"],
                "cdf_pinf_r": cdf["pinf"],
            }
        )
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def rows_to_csv(rows, columns) -> str:
    """CSV text with a header row; None becomes an empty field."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()
