"""
Trajectory Log Exporter

Writes trajectory logs as CSV and JSON together with a metrics summary,
reads JSON logs back and writes mode-comparison reports.
"""

import csv
import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from core.errors import OutputError
from core.metrics import metrics
from models import ComparisonReport, MARGIN_KEYS, Metrics, StepRecord, TrajectoryLog, WrapEvent
from utils.logger import get_logger

LOS_FIELDS = ("rho", "eps", "beta", "rho_dot", "rho_eps_dot", "rho_beta_dot")
ATTITUDE_FIELDS = ("phi", "theta", "psi", "w1", "w2", "w3")
U_P_FIELDS = ("u_rho", "u_eps", "u_beta")
U_A_FIELDS = ("u_phi", "u_theta", "u_psi")

# Column order is part of the file format; append, never reorder.
CSV_COLUMNS = (
    ("t",)
    + LOS_FIELDS
    + ATTITUDE_FIELDS
    + tuple(f"xd_{name}" for name in LOS_FIELDS)
    + tuple(f"xd_{name}" for name in ATTITUDE_FIELDS)
    + U_P_FIELDS
    + U_A_FIELDS
    + tuple(f"margin_{key}" for key in MARGIN_KEYS)
    + ("qp_status_p", "qp_iter_p", "qp_status_a", "qp_iter_a", "wrap_event")
)

SUPPORTED_FORMATS = ("csv", "json")


def _floats(values: Iterable) -> List[float]:
    return [float(v) for v in values]


def _wrap_cell(events: Sequence[WrapEvent]) -> str:
    return ";".join(f"{e.channel}:{e.branch}" for e in events)


def record_to_row(record: StepRecord) -> List[Any]:
    """One CSV row in CSV_COLUMNS order."""
    return (
        [float(record.t)]
        + _floats(record.x_p) + _floats(record.x_a)
        + _floats(record.x_dp) + _floats(record.x_da)
        + _floats(record.u_p) + _floats(record.u_a)
        + [float(record.margins.get(key, math.nan)) for key in MARGIN_KEYS]
        + [record.qp_status_p, record.qp_iter_p, record.qp_status_a, record.qp_iter_a,
           _wrap_cell(record.wrap_events)]
    )


def record_to_dict(record: StepRecord) -> Dict[str, Any]:
    return {
        "t": float(record.t),
        "x_p": _floats(record.x_p),
        "x_a": _floats(record.x_a),
        "x_dp": _floats(record.x_dp),
        "x_da": _floats(record.x_da),
        "u_p": _floats(record.u_p),
        "u_a": _floats(record.u_a),
        "lvlh": _floats(record.lvlh),
        "lvlh_d": _floats(record.lvlh_d),
        "target_att": _floats(record.target_att),
        "margins": {key: float(value) for key, value in record.margins.items()},
        "qp_status_p": record.qp_status_p,
        "qp_iter_p": int(record.qp_iter_p),
        "qp_status_a": record.qp_status_a,
        "qp_iter_a": int(record.qp_iter_a),
        "wrap_events": [asdict(event) for event in record.wrap_events],
    }


def record_from_dict(data: Dict[str, Any]) -> StepRecord:
    arrays = {key: np.array(data[key], dtype=float)
              for key in ("x_p", "x_a", "x_dp", "x_da", "u_p", "u_a", "lvlh", "lvlh_d", "target_att")}
    return StepRecord(
        t=float(data["t"]),
        margins={key: float(value) for key, value in data.get("margins", {}).items()},
        qp_status_p=data.get("qp_status_p", "optimal"),
        qp_iter_p=int(data.get("qp_iter_p", 0)),
        qp_status_a=data.get("qp_status_a", "optimal"),
        qp_iter_a=int(data.get("qp_iter_a", 0)),
        wrap_events=[WrapEvent(**event) for event in data.get("wrap_events", [])],
        **arrays,
    )


def metrics_to_dict(summary: Metrics) -> Dict[str, Any]:
    return asdict(summary)


class LogExporter:
    """Writes the files of one run into its output directory."""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.logger = get_logger(__name__)

    def _prepare(self) -> None:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(f"Cannot create output directory {self.out_dir}: {e}") from e

    def write_csv(self, log: TrajectoryLog, name: str = "trajectory.csv") -> Path:
        """Write the log as CSV; an empty log gives a header-only file."""
        self._prepare()
        path = self.out_dir / name
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(CSV_COLUMNS)
                for record in log.records:
                    writer.writerow(record_to_row(record))
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
        self.logger.debug(f"Wrote {len(log)} rows to {path}")
        return path

    def write_json(self, log: TrajectoryLog, name: str = "trajectory.json") -> Path:
        """Write the log and its header fields as JSON."""
        self._prepare()
        path = self.out_dir / name
        document = {
            "scenario_key": log.scenario_key,
            "mode": log.mode,
            "seed": log.seed,
            "Ts": log.Ts,
            "records": [record_to_dict(record) for record in log.records],
        }
        self._dump(document, path)
        return path

    def write_metrics(self, log: TrajectoryLog, summary: Optional[Metrics],
                      name: str = "metrics.json") -> Path:
        """Write the metrics summary next to the log."""
        self._prepare()
        path = self.out_dir / name
        document = {
            "scenario_key": log.scenario_key,
            "mode": log.mode,
            "seed": log.seed,
            "records": len(log),
            "metrics": metrics_to_dict(summary) if summary is not None else None,
        }
        self._dump(document, path)
        return path

    def write_report(self, report: ComparisonReport, name: str = "comparison.json") -> List[Path]:
        """Write a comparison report as JSON and as a CSV table."""
        self._prepare()
        json_path = self.out_dir / name
        document = asdict(report)
        document["per_seed_mean_abs_error"] = {
            mode: {str(seed): values for seed, values in seeds.items()}
            for mode, seeds in report.per_seed_mean_abs_error.items()
        }
        self._dump(document, json_path)

        csv_path = json_path.with_suffix(".csv")
        try:
            with open(csv_path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(["metric", "channel", f"mean_{report.mode_a}", f"mean_{report.mode_b}", "delta",
                                 "winner"])
                for row in report.rows:
                    writer.writerow([row.metric, row.channel, row.mean_a, row.mean_b, row.delta, row.winner])
        except OSError as e:
            raise OutputError(f"Cannot write {csv_path}: {e}") from e
        return [json_path, csv_path]

    def _dump(self, document: Dict[str, Any], path: Path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(document, f, indent=2)
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e


def emit(log: TrajectoryLog, out_dir: Union[str, Path], formats: Sequence[str] = SUPPORTED_FORMATS,
         summary: Optional[Metrics] = None) -> List[Path]:
    """Write a trajectory log and its metrics summary.

    Args:
        log: Trajectory log
        out_dir: Output directory, created if missing
        formats: Any of "csv" and "json"
        summary: Metrics to store; computed from the log when omitted and the log is not empty

    Returns:
        Paths of the written files

    Raises:
        ValueError: an unknown format was requested
        OutputError: a file could not be written
    """
    unknown = [fmt for fmt in formats if fmt not in SUPPORTED_FORMATS]
    if unknown:
        raise ValueError(f"Unsupported output formats: {unknown}")

    exporter = LogExporter(out_dir)
    paths = []
    if "csv" in formats:
        paths.append(exporter.write_csv(log))
    if "json" in formats:
        paths.append(exporter.write_json(log))
    if summary is None and len(log) > 0:
        summary = metrics(log)
    paths.append(exporter.write_metrics(log, summary))
    exporter.logger.info(f"Exported {len(log)} records to {exporter.out_dir}")
    return paths


def read_log_json(path: Union[str, Path]) -> TrajectoryLog:
    """Read a JSON log written by emit."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise OutputError(f"Cannot read trajectory log {path}: {e}") from e
    return TrajectoryLog(
        scenario_key=document.get("scenario_key", ""),
        mode=document.get("mode", "sampling"),
        seed=int(document.get("seed", 0)),
        Ts=float(document.get("Ts", 0.1)),
        records=[record_from_dict(record) for record in document.get("records", [])],
    )
