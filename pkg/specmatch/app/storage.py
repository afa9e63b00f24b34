"""Plain-text dumps, sweep CSV output and experiment config loading"""
import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

import numpy as np
from pydantic import ValidationError

from app.exceptions import ConfigError, IoError
from app.schemas import (
    CorrelatedPair,
    ExperimentConfig,
    Permutation,
    SweepSummary,
    TrialRecord,
)

PathLike = Union[str, Path]

CSV_FIELDS = [
    "method",
    "rounder",
    "n",
    "p",
    "noise",
    "sigma_emp",
    "eta",
    "rep",
    "seed",
    "overlap",
    "min_true",
    "max_off",
    "margin",
    "diag_rel_err",
    "separated",
    "runtime_ms",
    "summary",
]

PAIR_FILES = ("a.txt", "b.txt", "truth.txt", "meta.json")


def write_matrix(path: PathLike, m) -> None:
    """Dump a square matrix: first line n, then n rows of 17-significant-digit entries"""
    m = np.asarray(m, dtype=np.float64)
    lines = [str(m.shape[0])]
    lines.extend(" ".join(f"{v:.17g}" for v in row) for row in m)
    _write_text(path, "\n".join(lines) + "\n")


def read_matrix(path: PathLike) -> np.ndarray:
    """Parse a matrix dump written by write_matrix"""
    lines = [line for line in _read_text(path).splitlines() if line.strip()]
    try:
        n = int(lines[0])
        rows = [[float(tok) for tok in line.split()] for line in lines[1:]]
    except (IndexError, ValueError) as exc:
        raise IoError(f"{path}: malformed matrix dump ({exc})") from exc
    if n < 1 or len(rows) != n or any(len(row) != n for row in rows):
        raise IoError(f"{path}: expected {n} rows of {n} entries")
    return np.array(rows, dtype=np.float64)


def write_permutation(path: PathLike, perm: Permutation) -> None:
    """One target index per line"""
    _write_text(path, "".join(f"{int(t)}\n" for t in perm.targets))


def read_permutation(path: PathLike) -> Permutation:
    try:
        targets = [int(line) for line in _read_text(path).split()]
        return Permutation(targets=targets)
    except (ValueError, ValidationError) as exc:
        raise IoError(f"{path}: not a permutation ({exc})") from exc


def write_pair(directory: PathLike, pair: CorrelatedPair) -> List[Path]:
    """Dump a generated instance as a.txt, b.txt, truth.txt and meta.json"""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {directory}: {exc}") from exc
    paths = [directory / name for name in PAIR_FILES]
    write_matrix(paths[0], pair.a)
    write_matrix(paths[1], pair.b)
    write_permutation(paths[2], pair.truth)
    meta = pair.model_dump(exclude={"a", "b", "truth"})
    _write_text(paths[3], json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return paths


def read_pair(directory: PathLike) -> CorrelatedPair:
    directory = Path(directory)
    a = read_matrix(directory / "a.txt")
    b = read_matrix(directory / "b.txt")
    truth = read_permutation(directory / "truth.txt")
    try:
        meta = json.loads(_read_text(directory / "meta.json"))
        return CorrelatedPair(a=a, b=b, truth=truth, **meta)
    except (ValueError, TypeError, ValidationError) as exc:
        raise IoError(f"{directory}: inconsistent pair dump ({exc})") from exc


def format_value(value: Any) -> str:
    """CSV cell text: repr for floats, lowercase booleans, blank for missing"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trial_row(record: TrialRecord) -> Dict[str, str]:
    row = {key: format_value(val) for key, val in record.model_dump().items()}
    row["summary"] = "0"
    return row


def summary_row(summary: SweepSummary) -> Dict[str, str]:
    row = {key: "" for key in CSV_FIELDS}
    for key in ("method", "rounder", "n", "p", "noise", "sigma_emp", "eta"):
        row[key] = format_value(getattr(summary, key))
    row["rep"] = "-1"
    row["overlap"] = format_value(summary.mean_overlap)
    row["min_true"] = format_value(summary.std_overlap)
    row["summary"] = "1"
    return row


def write_sweep_csv(path: PathLike, records: Iterable[TrialRecord], summaries: Iterable[SweepSummary]) -> None:
    """Trial rows in the given order followed by summary rows"""
    try:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_FIELDS, lineterminator="\n")
            writer.writeheader()
            for record in records:
                writer.writerow(trial_row(record))
            for summary in summaries:
                writer.writerow(summary_row(summary))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_plot_data(directory: PathLike, summaries: Iterable[SweepSummary]) -> List[Path]:
    """One `<method>_<rounder>.dat` file per curve with rows `noise mean_overlap`"""
    directory = Path(directory)
    curves: Dict[str, List[str]] = {}
    for summary in summaries:
        name = f"{summary.method}_{summary.rounder}.dat"
        curves.setdefault(name, []).append(f"{summary.noise!r} {summary.mean_overlap!r}\n")
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {directory}: {exc}") from exc
    written = []
    for name in sorted(curves):
        _write_text(directory / name, "".join(curves[name]))
        written.append(directory / name)
    return written


def _parse_scalar(text: str) -> Any:
    try:
        return json.loads(text)
    except ValueError:
        if "," in text:
            return [_parse_scalar(part.strip()) for part in text.split(",") if part.strip()]
        return text


def parse_config_text(text: str) -> Dict[str, Any]:
    """JSON object, or flat `key=value` lines with # comments"""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except ValueError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return data

    data: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in data:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        data[key] = _parse_scalar(value)
    return data


def load_config(path: PathLike) -> ExperimentConfig:
    """Read and validate an experiment config file"""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    data = parse_config_text(text)
    # a lone value on a list key is a one-element list
    for key in ("noise_grid", "methods", "rounders"):
        if key in data and not isinstance(data[key], list):
            data[key] = [data[key]]
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def _write_text(path: PathLike, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
