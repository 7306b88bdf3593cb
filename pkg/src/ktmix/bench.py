"""Benchmark harness: next-value prediction against the inertial baseline.

One experiment draws a series of length n+1, predicts x_{n+1} from the first
n values, and scores the absolute error against the inertial guess x_n.  A
report aggregates many seeded experiments per sample length, exactly like the
classic archiver-backed tables this protocol reproduces.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .alphabet import DataError, Sequence
from .coding import CodeMeasure, ExternalCompressor
from .density import DyadicPartition, MixtureDensity
from .measures import KTMixture
from .processes import ProcessSpec, SINE_PERIOD, generate

PREDICTION_MODES = ("density-mean", "cell-mean", "cell-argmax")

# Mean errors reported for an archiver-backed run of the same protocol;
# recorded in reports for comparison, never used as a gate (that backend is
# not bit-reproducible).
ARCHIVER_REFERENCE = {
    ("sine", 1000): (0.37, 0.41),
    ("sine", 2000): (0.37, 0.46),
    ("sine", 3000): (0.34, 0.45),
    ("four-mixture", 2000): (1.43, 2.2),
    ("four-mixture", 5000): (2.97, 4.27),
    ("four-mixture", 10000): (3.07, 3.4),
}


@dataclass
class PredictorConfig:
    """How the next value is estimated from the mapped history.

    ``density-mean``: mean of the level-mixture conditional density.
    ``cell-mean`` / ``cell-argmax``: quantize at the single level ``levels``
    and take the conditional cell distribution's mean midpoint or the modal
    cell's midpoint.
    """

    backend: str = "mix"            # "mix" | "code"
    mode: str = "cell-argmax"
    levels: int = 8
    max_order: int | None = 8
    compressor: str | None = None
    pad: float = 1e-3               # relative margin of the affine map into [0, 1)

    def __post_init__(self):
        if self.mode not in PREDICTION_MODES:
            raise DataError(f"unknown prediction mode {self.mode!r}")
        if self.backend not in ("mix", "code"):
            raise DataError(f"unknown backend {self.backend!r}")
        if self.backend == "code" and not self.compressor:
            raise DataError("code backend needs a compressor command")

    def describe(self) -> dict[str, Any]:
        return {
            "backend": self.backend,
            "mode": self.mode,
            "levels": self.levels,
            "max_order": self.max_order,
            "compressor": self.compressor,
        }

    def _measure(self):
        if self.backend == "code":
            return CodeMeasure(ExternalCompressor(self.compressor))
        return KTMixture(max_order=self.max_order)

    def measure_factory(self):
        if self.backend == "code":
            comp = ExternalCompressor(self.compressor)
            return lambda level: CodeMeasure(comp)
        return lambda level: KTMixture(max_order=self.max_order)


def inertial_predict(series) -> float:
    """Baseline: the next value is the last observed one."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise DataError("cannot predict from an empty series")
    return float(series[-1])


def predict_next(history, config: PredictorConfig) -> float:
    """Map the history affinely into [0, 1), predict there, map back."""
    history = np.asarray(history, dtype=float)
    if history.size == 0:
        raise DataError("cannot predict from an empty series")
    lo, hi = float(history.min()), float(history.max())
    span = hi - lo
    if span == 0.0:
        span = 1.0  # degenerate history: center it in a unit window
        lo = history[0] - 0.5
    pad = config.pad * span
    scale = span + 2 * pad
    mapped = (history - lo + pad) / scale
    part = DyadicPartition(0.0, 1.0)
    if config.mode == "density-mean":
        est = MixtureDensity(part, levels=config.levels,
                             measure_factory=config.measure_factory())
        out = est.predict_mean(mapped)
    else:
        seq = part.sequence(mapped, config.levels)
        dist = config._measure().cond_dist(seq)
        mids = part.midpoints(config.levels)
        if config.mode == "cell-argmax":
            out = float(mids[int(np.argmax(dist))])
        else:
            out = float(dist @ mids)
    return out * scale + lo - pad


@dataclass
class RunResult:
    n: int
    run: int
    predicted: float
    actual: float
    error: float
    inertial_error: float


@dataclass
class BenchRow:
    runs: int
    n: int
    mean_suggested: float
    mean_inertial: float
    reference_suggested: float | None = None
    reference_inertial: float | None = None


@dataclass
class BenchmarkReport:
    process: dict[str, Any]
    predictor: dict[str, Any]
    seed: int | None
    rows: list[BenchRow] = field(default_factory=list)
    run_log: list[RunResult] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "process": self.process,
            "predictor": self.predictor,
            "seed": self.seed,
            "rows": [vars(r) for r in self.rows],
            "runs": [vars(r) for r in self.run_log],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        out = ["runs,n,mean_suggested,mean_inertial,reference_suggested,reference_inertial"]
        for r in self.rows:
            ref_s = "" if r.reference_suggested is None else f"{r.reference_suggested}"
            ref_i = "" if r.reference_inertial is None else f"{r.reference_inertial}"
            out.append(f"{r.runs},{r.n},{r.mean_suggested:.6g},{r.mean_inertial:.6g},{ref_s},{ref_i}")
        return "\n".join(out) + "\n"

    def runs_csv(self) -> str:
        out = ["n,run,predicted,actual,abs_error,inertial_error"]
        for r in self.run_log:
            out.append(
                f"{r.n},{r.run},{r.predicted:.10g},{r.actual:.10g},"
                f"{r.error:.10g},{r.inertial_error:.10g}"
            )
        return "\n".join(out) + "\n"

    def to_markdown(self) -> str:
        head = "| runs | n | suggested | inertial | ref. suggested | ref. inertial |"
        sep = "|---|---|---|---|---|---|"
        lines = [head, sep]
        for r in self.rows:
            ref_s = "-" if r.reference_suggested is None else f"{r.reference_suggested}"
            ref_i = "-" if r.reference_inertial is None else f"{r.reference_inertial}"
            lines.append(
                f"| {r.runs} | {r.n} | {r.mean_suggested:.4f} | {r.mean_inertial:.4f} "
                f"| {ref_s} | {ref_i} |"
            )
        return "\n".join(lines) + "\n"


def _series_for_run(spec: ProcessSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Length-n float series for one experiment.

    Deterministic kinds are varied across runs by a random window offset
    (a phase shift for the sine process, a starting point for csv data);
    stochastic kinds vary through the per-run generator state.
    """
    if spec.kind == "sine":
        phase = spec.params.get("phase")
        if phase is None:
            phase = int(rng.integers(0, SINE_PERIOD))
        return generate(ProcessSpec("sine", {"phase": phase}), n, rng)
    if spec.kind == "csv":
        from .processes import ingest_csv

        series = spec.params.get("_series")
        if series is None:
            series = ingest_csv(spec.params["path"], spec.params.get("column"))
            spec.params["_series"] = series
        if len(series) < n:
            raise DataError(f"csv series has {len(series)} values, need {n}")
        start = int(rng.integers(0, len(series) - n + 1))
        return series[start : start + n].copy()
    out = generate(spec, n, rng)
    if isinstance(out, Sequence):
        return out.data.astype(float)
    return out


def _one_run(args) -> RunResult:
    spec, config, n, run_idx, child_seed = args
    rng = np.random.default_rng(child_seed)
    series = _series_for_run(spec, n + 1, rng)
    history, actual = series[:n], float(series[n])
    predicted = predict_next(history, config)
    return RunResult(
        n=n,
        run=run_idx,
        predicted=predicted,
        actual=actual,
        error=abs(predicted - actual),
        inertial_error=abs(inertial_predict(history) - actual),
    )


def run_benchmark(spec: ProcessSpec, config: PredictorConfig, runs: int,
                  n, seed: int | None = None, workers: int = 1) -> BenchmarkReport:
    """Run ``runs`` seeded experiments for each sample length in ``n``."""
    lengths = [int(n)] if isinstance(n, (int, np.integer)) else [int(v) for v in n]
    if runs < 1 or any(v < 1 for v in lengths):
        raise DataError("runs and n must be positive")
    report = BenchmarkReport(spec.describe(), config.describe(), seed)
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(runs * len(lengths))
    jobs = []
    for li, length in enumerate(lengths):
        for r in range(runs):
            jobs.append((spec, config, length, r, children[li * runs + r]))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_run, jobs))
    else:
        results = [_one_run(j) for j in jobs]
    # assembly is keyed by (n, run), independent of completion order
    results.sort(key=lambda r: (r.n, r.run))
    report.run_log = results
    for length in lengths:
        rows = [r for r in results if r.n == length]
        ref = ARCHIVER_REFERENCE.get((spec.kind, length))
        report.rows.append(BenchRow(
            runs=runs,
            n=length,
            mean_suggested=float(np.mean([r.error for r in rows])),
            mean_inertial=float(np.mean([r.inertial_error for r in rows])),
            reference_suggested=ref[0] if ref else None,
            reference_inertial=ref[1] if ref else None,
        ))
    return report
