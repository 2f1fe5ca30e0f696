"""Monte-Carlo experiment runners: infidelity histograms and MUB/SSQST ratios.

Every record gets its own random stream, seeded from the master seed and the
record index, so output is identical regardless of how many worker processes
are used or in which order they finish.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache

import numpy as np

from .bases import MeasurementScheme, scheme_by_name
from .estimate import MleOptions, mle_reconstruct
from .metrics import fit_power_law, infidelity, ratio_with_error, summarize
from .simulate import normalize_model, sample_counts
from .states import NAMED_STATES, RngStream, derive_seed, named_state

log = logging.getLogger(__name__)

EXPERIMENTS = ("histogram", "ratio")
DEFAULT_HISTOGRAM_N = 18_000
DEFAULT_RATIO_GRID = (1_000, 3_000, 10_000, 30_000, 100_000)
HISTOGRAM_CLASSES = ("haar-separable", "haar-entangled")
CSV_COLUMNS = ("experiment", "scheme", "state", "n_total", "trial", "seed",
               "infidelity", "loglik", "iterations", "converged")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "ratio"
    state: str = "maximally-mixed"
    schemes: list[str] = field(default_factory=lambda: ["SSQST", "MUB"])
    visibility: float = 0.93
    n_total: list[int] | None = None
    trials: int = 30
    num_states: int = 3000
    model: str = "multinomial-exact"
    seed: int = 0
    out: str | None = None
    baseline: str = "truth"
    purity: float = 1.0
    tolerance: float = 1e-10
    max_iterations: int = 100_000
    jobs: int = 1

    def __post_init__(self):
        if self.n_total is None:
            self.n_total = [DEFAULT_HISTOGRAM_N] if self.experiment == "histogram" else list(DEFAULT_RATIO_GRID)
        self.n_total = [int(n) for n in self.n_total]
        self.schemes = [s.upper() for s in self.schemes]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.num_states < 1:
            raise ConfigError("num_states must be at least 1")
        if not self.n_total or any(n <= 0 for n in self.n_total):
            raise ConfigError("all N_total values must be positive")
        if not 0.0 < self.visibility <= 1.0:
            raise ConfigError("visibility must lie in (0, 1]")
        if not set(self.schemes) <= {"MUB", "SSQST"} or not self.schemes:
            raise ConfigError("schemes must be a non-empty subset of {MUB, SSQST}")
        if self.experiment == "ratio" and set(self.schemes) != {"MUB", "SSQST"}:
            raise ConfigError("the ratio experiment needs both MUB and SSQST")
        if self.experiment == "ratio" and self.state not in NAMED_STATES[:3] and not _is_label(self.state):
            raise ConfigError(f"ratio experiment needs a fixed state, got {self.state!r}")
        if self.baseline not in ("truth", "pooled"):
            raise ConfigError("baseline must be 'truth' or 'pooled'")
        if not 0.25 <= self.purity <= 1.0:
            raise ConfigError("purity must lie in [0.25, 1]")
        try:
            self.model = normalize_model(self.model)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self


def _is_label(name: str) -> bool:
    return len(name) == 2 and all(c in "HVDARL" for c in name)


@dataclass
class ExperimentRecord:
    experiment: str
    scheme: str
    state: str
    n_total: int
    trial: int
    seed: int
    infidelity: float
    loglik: float
    iterations: int
    converged: bool


@lru_cache(maxsize=None)
def _scheme(name: str, visibility: float) -> MeasurementScheme:
    return scheme_by_name(name, visibility)


def _run_task(task: dict) -> tuple[ExperimentRecord, np.ndarray, np.ndarray]:
    rng = RngStream(task["seed"])
    scheme = _scheme(task["scheme"], task["visibility"])
    rho = named_state(task["state"], rng, task["purity"])
    data = sample_counts(rho, scheme, task["n_total"], task["model"], rng)
    opts = MleOptions(tolerance=task["tolerance"], max_iterations=task["max_iterations"])
    res = mle_reconstruct(data, scheme, opts)
    rec = ExperimentRecord(
        task["experiment"], scheme.name, task["state"], task["n_total"], task["trial"], task["seed"],
        infidelity(rho, res.rho_hat), res.log_likelihood, res.iterations, res.converged,
    )
    return rec, data.counts, res.rho_hat


def _execute(tasks: list[dict], jobs: int) -> list[tuple]:
    if jobs <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _task(cfg: ExperimentConfig, index: int, **kw) -> dict:
    t = dict(experiment=cfg.experiment, visibility=cfg.visibility, model=cfg.model, purity=cfg.purity,
             tolerance=cfg.tolerance, max_iterations=cfg.max_iterations, seed=derive_seed(cfg.seed, index))
    t.update(kw)
    return t


def run_histogram(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Reconstruct Haar-random separable and maximally entangled states.

    For each class, ``num_states`` random pure states are drawn, simulated
    with ``n_total[0]`` copies under every configured scheme (SSQST by
    default) and reconstructed by MLE; infidelity is taken against the true
    state.
    """
    cfg.validate()
    if cfg.experiment != "histogram":
        raise ConfigError("run_histogram needs experiment='histogram'")
    tasks = []
    for state in HISTOGRAM_CLASSES:
        for scheme in cfg.schemes:
            for i in range(cfg.num_states):
                tasks.append(_task(cfg, len(tasks), scheme=scheme, state=state, n_total=cfg.n_total[0], trial=i))
    return [rec for rec, *_ in _execute(tasks, cfg.jobs)]


def run_ratio(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Infidelity of MUB and SSQST tomography versus total copies.

    With ``baseline='pooled'`` each scheme's estimates are compared with the
    MLE of all of that scheme's counts pooled together instead of the true
    state.
    """
    cfg.validate()
    if cfg.experiment != "ratio":
        raise ConfigError("run_ratio needs experiment='ratio'")
    tasks = []
    for n in cfg.n_total:
        for trial in range(cfg.trials):
            for scheme in cfg.schemes:
                tasks.append(_task(cfg, len(tasks), scheme=scheme, state=cfg.state, n_total=n, trial=trial))
    results = _execute(tasks, cfg.jobs)
    if cfg.baseline == "truth":
        return [rec for rec, *_ in results]

    opts = MleOptions(tolerance=cfg.tolerance, max_iterations=cfg.max_iterations)
    for scheme_name in cfg.schemes:
        scheme = _scheme(scheme_name, cfg.visibility)
        pooled = sum(c for rec, c, _ in results if rec.scheme == scheme.name)
        reference = mle_reconstruct(pooled, scheme, opts).rho_hat
        for rec, _, est in results:
            if rec.scheme == scheme.name:
                rec.infidelity = infidelity(reference, est)
    return [rec for rec, *_ in results]


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    return run_histogram(cfg) if cfg.experiment == "histogram" else run_ratio(cfg)


def records_to_csv(records: list[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.experiment, r.scheme, r.state, r.n_total, r.trial, r.seed,
                    repr(float(r.infidelity)), repr(float(r.loglik)), r.iterations, str(r.converged).lower()])
    return buf.getvalue()


def histogram_summary(records: list[ExperimentRecord]) -> dict:
    out = {}
    for cls in HISTOGRAM_CLASSES:
        for scheme in sorted({r.scheme for r in records}):
            vals = [r.infidelity for r in records if r.state == cls and r.scheme == scheme]
            if vals:
                out[f"{scheme}/{cls}"] = summarize(vals).as_dict()
    return {"experiment": "histogram", "classes": out}


def ratio_summary(records: list[ExperimentRecord], numerator: str = "SSQST", denominator: str = "MUB") -> dict:
    """Per-N statistics per scheme, SSQST/MUB ratios of mean infidelity and slopes."""
    ns = sorted({r.n_total for r in records})
    per_n = []
    means = {numerator: [], denominator: []}
    for n in ns:
        entry = {"n_total": n}
        stats = {}
        for scheme in (numerator, denominator):
            vals = [r.infidelity for r in records if r.n_total == n and r.scheme == scheme]
            stats[scheme] = summarize(vals)
            entry[scheme] = stats[scheme].as_dict()
            means[scheme].append(stats[scheme].mean)
        ratio, err = ratio_with_error(stats[numerator], stats[denominator])
        entry["ratio"] = ratio
        entry["ratio_stderr"] = err
        per_n.append(entry)
    ratios = np.array([e["ratio"] for e in per_n])
    errs = np.array([e["ratio_stderr"] for e in per_n])
    summary = {
        "experiment": "ratio",
        "state": records[0].state if records else None,
        "per_n": per_n,
        "mean_ratio": float(ratios.mean()),
        "mean_ratio_stderr": float(np.sqrt(np.sum(errs**2)) / len(errs)),
        "slopes": {},
    }
    if len(ns) >= 2:
        for scheme, m in means.items():
            if all(v > 0 for v in m):
                summary["slopes"][scheme] = fit_power_law(ns, m)
    return summary


def summarize_records(records: list[ExperimentRecord]) -> dict:
    if records and records[0].experiment == "histogram":
        return histogram_summary(records)
    return ratio_summary(records)


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
