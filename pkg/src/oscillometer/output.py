"""Run reports and their on-disk form (CSV + JSON)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import OscillometerError

SCHEMA_VERSION = 1
CSV_COLUMNS = ("experiment", "pair", "N", "p", "scale", "quantity", "value")


def record(experiment: str, pair: str | None, N: int | None, quantity: str, value: float,
           p: float | None = None, scale: float | None = None) -> dict[str, Any]:
    return {"experiment": experiment, "pair": pair, "N": N, "p": p, "scale": scale,
            "quantity": quantity, "value": value}


def _none_first(v):
    return (v is not None, v if v is not None else 0)


def sort_key(rec: dict[str, Any]):
    return (rec["experiment"], _none_first(rec["N"]), _none_first(rec["p"]), _none_first(rec["scale"]),
            rec["pair"] or "", rec["quantity"])


@dataclass
class RunReport:
    config: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    profiles: list[dict[str, Any]] = field(default_factory=list)
    version: str = ""
    seed: int = 0
    wall_time: float = 0.0
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "version": self.version,
            "seed": self.seed,
            "config": self.config,
            "records": self.records,
            "profiles": self.profiles,
            "meta": {"wall_time": self.wall_time},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise OscillometerError(f"unsupported report schema_version {d.get('schema_version')!r}")
        return cls(config=d["config"], records=d["records"], profiles=d["profiles"], version=d["version"],
                   seed=d["seed"], wall_time=d["meta"]["wall_time"], schema_version=d["schema_version"])

    def value(self, experiment: str, quantity: str, **match) -> float:
        """Look up one record; raises KeyError if absent or ambiguous."""
        hits = [r for r in self.records if r["experiment"] == experiment and r["quantity"] == quantity
                and all(r.get(k) == v for k, v in match.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} records match {experiment}/{quantity} {match}")
        return hits[0]["value"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def records_csv(records: list[dict[str, Any]]) -> str:
    rows = [[r[c] for c in CSV_COLUMNS] for r in sorted(records, key=sort_key)]
    return _csv_text(CSV_COLUMNS, rows)


def profile_csv(profile: dict[str, Any]) -> str:
    return _csv_text(("r", "osc"), zip(profile["r"], profile["osc"]))


def report_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OscillometerError(f"cannot write {path}: {exc.strerror}") from None
    return path


def emit(report: RunReport, directory: str | Path) -> list[Path]:
    """Write results.csv, report.json and one two-column CSV per profile."""
    d = Path(directory)
    files = [_write(d / "results.csv", records_csv(report.records)),
             _write(d / "report.json", report_json(report))]
    for prof in report.profiles:
        files.append(_write(d / "profiles" / f"{prof['name']}.csv", profile_csv(prof)))
    return files


def load_report(path: str | Path) -> RunReport:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OscillometerError(f"cannot read {path}: {exc.strerror}") from None
    return RunReport.from_dict(json.loads(text))
