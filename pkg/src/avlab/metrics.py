"""Episode traces, evaluation metrics, and trace export.

Attacked steps are the schedule-active steps: they are the positives for
detector recall and the support of the per-step energy / tracking-error
averages. A row's state, belief, and reference columns describe the pose
*after* that step's transition; `k` is the 0-based transition index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from avlab.errors import TraceFormatError, UndefinedMetricError

CSV_COLUMNS = (
    "k",
    "x",
    "y",
    "theta",
    "x_ref",
    "y_ref",
    "theta_ref",
    "bx",
    "by",
    "btheta",
    "v_cmd",
    "phi_cmd",
    "v_d",
    "phi_d",
    "attack_active",
    "range",
    "bearing",
    "r1",
    "r2",
    "r3",
    "chi2",
    "threshold",
    "detected",
    "j_t",
    "j_e",
    "j_s",
    "reward",
)

_INT_COLUMNS = {"k", "attack_active", "detected"}


@dataclass(frozen=True)
class TraceRecord:
    k: int
    x: float
    y: float
    theta: float
    x_ref: float
    y_ref: float
    theta_ref: float
    bx: float
    by: float
    btheta: float
    v_cmd: float
    phi_cmd: float
    v_d: float
    phi_d: float
    attack_active: int
    range: float
    bearing: float
    r1: float
    r2: float
    r3: float
    chi2: float
    threshold: float
    detected: int
    j_t: float
    j_e: float
    j_s: float
    reward: float


assert tuple(f.name for f in fields(TraceRecord)) == CSV_COLUMNS


@dataclass
class EpisodeTrace:
    """Contiguous per-step records of one episode."""

    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        expected = self.records[-1].k + 1 if self.records else 0
        if record.k != expected:
            raise ValueError(f"trace records must be contiguous in k: got {record.k}, expected {expected}")
        if record.detected != int(record.chi2 > record.threshold):
            raise ValueError("detected flag inconsistent with score/threshold")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


@dataclass(frozen=True)
class EvalReport:
    """Aggregate attack metrics over a set of evaluation episodes."""

    recall: float
    energy: float
    tracking_error: float
    episodes: int
    seeds: tuple[int, ...]


def _as_traces(traces) -> list[EpisodeTrace]:
    if isinstance(traces, EpisodeTrace):
        return [traces]
    return list(traces)


def _attacked_records(traces) -> list[TraceRecord]:
    return [r for t in _as_traces(traces) for r in t if r.attack_active]


def recall(traces: EpisodeTrace | Iterable[EpisodeTrace]) -> float:
    """Detected fraction of schedule-active steps: TP / (TP + FN)."""
    attacked = _attacked_records(traces)
    if not attacked:
        raise UndefinedMetricError("recall is undefined without attacked steps")
    return sum(r.detected for r in attacked) / len(attacked)


def mean_energy(traces: EpisodeTrace | Iterable[EpisodeTrace]) -> float:
    """Mean injected-signal energy cost per attacked step."""
    attacked = _attacked_records(traces)
    if not attacked:
        raise UndefinedMetricError("energy is undefined without attacked steps")
    return float(np.mean([r.j_e for r in attacked]))


def mean_tracking_error(traces: EpisodeTrace | Iterable[EpisodeTrace]) -> float:
    """Mean tracking cost per attacked step."""
    attacked = _attacked_records(traces)
    if not attacked:
        raise UndefinedMetricError("tracking error is undefined without attacked steps")
    return float(np.mean([r.j_t for r in attacked]))


def build_report(
    traces: Sequence[EpisodeTrace], seeds: Sequence[int]
) -> EvalReport:
    return EvalReport(
        recall=recall(traces),
        energy=mean_energy(traces),
        tracking_error=mean_tracking_error(traces),
        episodes=len(traces),
        seeds=tuple(int(s) for s in seeds),
    )


def _format_value(name: str, value) -> str:
    if name in _INT_COLUMNS:
        return str(int(value))
    return format(float(value), ".17g")


def export_trace(trace: EpisodeTrace, path) -> None:
    """Write the trace as CSV; floats carry 17 significant digits (lossless round trip)."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in trace:
                writer.writerow(_format_value(c, getattr(rec, c)) for c in CSV_COLUMNS)
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def import_trace(path) -> EpisodeTrace:
    """Read a trace CSV produced by export_trace; rejects malformed rows."""
    trace = EpisodeTrace()
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise TraceFormatError("empty trace file: missing header", row=0) from None
            if tuple(header) != CSV_COLUMNS:
                raise TraceFormatError(f"unexpected header {header[:4]}...", row=0)
            for i, row in enumerate(reader, start=1):
                if len(row) != len(CSV_COLUMNS):
                    raise TraceFormatError(
                        f"row {i}: expected {len(CSV_COLUMNS)} fields, got {len(row)}", row=i
                    )
                try:
                    values = {
                        c: (int(v) if c in _INT_COLUMNS else float(v))
                        for c, v in zip(CSV_COLUMNS, row)
                    }
                except ValueError as exc:
                    raise TraceFormatError(f"row {i}: {exc}", row=i) from None
                trace.append(TraceRecord(**values))
    except OSError as exc:
        raise OSError(f"cannot read trace from {path}: {exc}") from exc
    return trace


def attack_spans(trace: EpisodeTrace) -> list[tuple[int, int]]:
    """Half-open [start, end) runs of consecutive schedule-active steps."""
    spans = []
    start = None
    for rec in trace:
        if rec.attack_active and start is None:
            start = rec.k
        elif not rec.attack_active and start is not None:
            spans.append((start, rec.k))
            start = None
    if start is not None:
        spans.append((start, trace.records[-1].k + 1))
    return spans


def export_plot(trace: EpisodeTrace, path) -> None:
    """Two-panel SVG: detector score vs threshold with shaded attack windows,
    and the true / reference / estimated trajectories."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_det, ax_traj) = plt.subplots(1, 2, figsize=(12, 5))
    ks = trace.column("k")
    ax_det.plot(ks, trace.column("chi2"), color="tab:blue", lw=0.9, label="score")
    ax_det.plot(ks, trace.column("threshold"), color="tab:orange", lw=1.2, label="threshold")
    for start, end in attack_spans(trace):
        ax_det.axvspan(start, end, color="red", alpha=0.15, lw=0)
    ax_det.set_xlabel("step")
    ax_det.set_ylabel("detector score")
    ax_det.set_title("detector operation (shaded: attack windows)")
    ax_det.legend(loc="upper right")

    ax_traj.plot(trace.column("x_ref"), trace.column("y_ref"), "k--", lw=1.0, label="reference")
    ax_traj.plot(trace.column("x"), trace.column("y"), color="tab:blue", lw=1.2, label="true")
    ax_traj.plot(trace.column("bx"), trace.column("by"), color="tab:green", lw=0.9, label="estimate")
    ax_traj.set_xlabel("x [m]")
    ax_traj.set_ylabel("y [m]")
    ax_traj.set_aspect("equal", adjustable="datalim")
    ax_traj.set_title("trajectories")
    ax_traj.legend(loc="best")

    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    finally:
        plt.close(fig)
