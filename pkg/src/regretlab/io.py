"""CSV emission and re-ingestion for regret curves and slope summaries.

Schemas are fixed so files diff cleanly and round-trip exactly:

* regret CSV: ``suite_id, algorithm, dim, noise_std, replicate, eval_index,
  sr, asr, rsr`` -- one row per (run setup, replicate, checkpoint), sorted by
  (algorithm, replicate, eval_index).  The ``algorithm`` column holds the
  unique per-entry id (two ES entries in one suite stay distinguishable).
* slope summary CSV: ``algorithm, regret_kind, aggregation, slope,
  residual_rms, window_lo, window_hi``.

Floats are serialized with 17 significant digits, which round-trips IEEE
doubles bit-exactly; recomputing slopes from an emitted regret CSV therefore
reproduces the original summary byte-for-byte.
"""

from __future__ import annotations

import csv
import io as _io
from contextlib import contextmanager

import numpy as np

from .regret import RegretSeries
from .harness import AGGREGATIONS, REGRET_KINDS, ReplicateResult, aggregate_runs

__all__ = [
    "REGRET_COLUMNS",
    "SLOPE_COLUMNS",
    "write_regret_csv",
    "write_slope_summary",
    "read_regret_csv",
    "slope_summary_rows",
    "slope_summary_from_csv",
]

REGRET_COLUMNS = (
    "suite_id",
    "algorithm",
    "dim",
    "noise_std",
    "replicate",
    "eval_index",
    "sr",
    "asr",
    "rsr",
)
SLOPE_COLUMNS = (
    "algorithm",
    "regret_kind",
    "aggregation",
    "slope",
    "residual_rms",
    "window_lo",
    "window_hi",
)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


@contextmanager
def _as_writable(sink):
    if hasattr(sink, "write"):
        yield sink
    else:
        try:
            handle = open(sink, "w", newline="")
        except OSError as exc:
            raise OSError(f"cannot write {sink}: {exc}") from exc
        try:
            yield handle
        finally:
            handle.close()


def write_regret_csv(results, sink) -> None:
    """Emit per-replicate checkpointed regrets for a list of run results."""
    with _as_writable(sink) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REGRET_COLUMNS)
        for result in sorted(results, key=lambda r: r.spec.spec_id):
            spec = result.spec
            for rep in result.replicates:
                sr = rep.series["SR"].values
                asr = rep.series["ASR"].values
                rsr = rep.series["RSR"].values
                for i, n in enumerate(rep.checkpoints):
                    writer.writerow(
                        [
                            spec.suite_id,
                            spec.spec_id,
                            spec.dim,
                            _fmt(spec.noise_std),
                            rep.replicate,
                            int(n),
                            _fmt(sr[i]),
                            _fmt(asr[i]),
                            _fmt(rsr[i]),
                        ]
                    )


def slope_summary_rows(results):
    """Slope-summary rows (one per regret kind and aggregation) for run results."""
    rows = []
    for result in sorted(results, key=lambda r: r.spec.spec_id):
        for kind in REGRET_KINDS:
            for agg in AGGREGATIONS:
                est = result.slopes[(kind, agg)]
                rows.append(
                    (
                        result.spec.spec_id,
                        kind,
                        agg,
                        est.slope,
                        est.residual_rms,
                        est.window[0],
                        est.window[1],
                    )
                )
    return rows


def write_slope_summary(results, sink) -> None:
    """Emit the slope summary table for a list of run results."""
    write_slope_rows(slope_summary_rows(results), sink)


def read_regret_csv(source):
    """Parse a regret CSV back into ``{algorithm id: [ReplicateResult, ...]}``.

    Values round-trip bit-exactly thanks to the 17-significant-digit
    serialization.
    """
    if hasattr(source, "read"):
        fh = source
        rows = list(csv.reader(fh))
    else:
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != REGRET_COLUMNS:
        raise ValueError(f"bad regret CSV header: {rows[0] if rows else 'empty file'}")
    data: dict = {}
    for row in rows[1:]:
        _suite, alg, _dim, _noise, rep, n, sr, asr, rsr = row
        data.setdefault(alg, {}).setdefault(int(rep), []).append(
            (int(n), float(sr), float(asr), float(rsr))
        )
    out: dict = {}
    for alg, reps in data.items():
        rep_results = []
        for rep_idx in sorted(reps):
            entries = sorted(reps[rep_idx])
            cps = np.array([e[0] for e in entries], dtype=np.int64)
            series = {
                "SR": RegretSeries("SR", cps, [e[1] for e in entries]),
                "ASR": RegretSeries("ASR", cps, [e[2] for e in entries]),
                "RSR": RegretSeries("RSR", cps, [e[3] for e in entries]),
            }
            rep_results.append(ReplicateResult(replicate=rep_idx, checkpoints=cps, series=series))
        out[alg] = rep_results
    return out


def slope_summary_from_csv(source, window_fraction: float = 0.01):
    """Recompute slope-summary rows from an emitted regret CSV.

    The fit window is (round(budget * window_fraction), budget) with the
    budget taken as each entry's largest checkpoint, matching the harness
    default.
    """
    data = read_regret_csv(source)
    rows = []
    for alg in sorted(data):
        reps = data[alg]
        budget = int(reps[0].checkpoints[-1])
        window = (max(1, int(round(budget * window_fraction))), budget)
        _aggregates, slopes = aggregate_runs(reps, window)
        for kind in REGRET_KINDS:
            for agg in AGGREGATIONS:
                est = slopes[(kind, agg)]
                rows.append((alg, kind, agg, est.slope, est.residual_rms, est.window[0], est.window[1]))
    return rows


def write_slope_rows(rows, sink) -> None:
    """Write precomputed slope rows with the standard header."""
    with _as_writable(sink) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SLOPE_COLUMNS)
        for alg, kind, agg, slope, rms, lo, hi in rows:
            writer.writerow([alg, kind, agg, _fmt(slope), _fmt(rms), int(lo), int(hi)])


def render_rows(rows) -> str:
    buf = _io.StringIO()
    write_slope_rows(rows, buf)
    return buf.getvalue()
