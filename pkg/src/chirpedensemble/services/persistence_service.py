import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from chirpedensemble.core.propagator import Trajectory
from chirpedensemble.database.connection import create_tables, session_scope
from chirpedensemble.database.models import SweepRecordRow
from chirpedensemble.exceptions import ArgumentError
from chirpedensemble.schemas.lemma_schemas import LemmaDiagnostics
from chirpedensemble.schemas.record_schemas import (
    FidelityCurve,
    PopulationCurves,
    RunResult,
    SweepRecord,
)

logger = logging.getLogger(__name__)

CURVE_COLUMNS_TAIL = ["eps1", "eps2", "s", "fid", "log10_one_minus_fid", "distance", "norm_drift"]
RECORD_COLUMNS_TAIL = ["delta_choice", "eps1", "eps2", "fidelity", "distance", "norm_drift", "degraded"]
SQLITE_FILENAME = "records.db"


def _alpha_columns(m: int) -> List[str]:
    return [f"alpha_{i}" for i in range(1, m + 1)]


def _alpha_dim(items: Sequence) -> int:
    return len(items[0].alpha) if items else 1


def _format_float(value: float) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: List[str], rows: Iterable[List]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Wrote {path}")
    return path


def write_curves_csv(curves: Sequence[FidelityCurve], path: Path) -> Path:
    """One row per stored sample: run_id, alpha..., eps1, eps2, s, fid, log10(1 - fid), distance, norm_drift."""
    header = ["run_id", *_alpha_columns(_alpha_dim(curves)), *CURVE_COLUMNS_TAIL]

    def rows():
        for curve in curves:
            prefix = [curve.run_id, *map(_format_float, curve.alpha)]
            scales = [_format_float(curve.eps1), _format_float(curve.eps2)]
            for values in zip(curve.s, curve.fid, curve.log10_one_minus_fid, curve.distance, curve.norm_drift):
                yield prefix + scales + [_format_float(v) for v in values]

    return _write_csv(path, header, rows())


def _delta_cell(choice) -> str:
    return _format_float(choice) if isinstance(choice, (int, float)) else json.dumps(choice)


def write_records_csv(records: Sequence[SweepRecord], path: Path) -> Path:
    """Final-time summaries; wall time stays out so the file is reproducible."""
    header = ["run_id", *_alpha_columns(_alpha_dim(records)), *RECORD_COLUMNS_TAIL]
    rows = (
        [
            r.run_id,
            *map(_format_float, r.alpha),
            _delta_cell(r.delta_choice),
            _format_float(r.eps1),
            _format_float(r.eps2),
            _format_float(r.fidelity),
            _format_float(r.distance),
            _format_float(r.norm_drift),
            str(r.degraded).lower(),
        ]
        for r in records
    )
    return _write_csv(path, header, rows)


def write_populations_csv(populations: Sequence[PopulationCurves], path: Path) -> Path:
    n = len(populations[0].populations) if populations else 0
    header = [
        "run_id",
        *_alpha_columns(_alpha_dim(populations)),
        "eps1",
        "eps2",
        "s",
        *[f"pop_{j}" for j in range(1, n + 1)],
    ]

    def rows():
        for item in populations:
            prefix = [item.run_id, *map(_format_float, item.alpha)]
            prefix += [_format_float(item.eps1), _format_float(item.eps2)]
            for i, s in enumerate(item.s):
                yield prefix + [_format_float(s)] + [_format_float(level[i]) for level in item.populations]

    return _write_csv(path, header, rows())


def write_lemma_csv(rows: Sequence[LemmaDiagnostics], path: Path) -> Path:
    flat = [row.as_row() for row in rows]
    header = list(flat[0].keys()) if flat else list(LemmaDiagnostics.model_fields)
    return _write_csv(
        path,
        header,
        ([("" if d.get(k) is None else _format_float(d[k])) for k in header] for d in flat),
    )


def _write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def store_records(records: Sequence[SweepRecord], database_url: str) -> int:
    """Inserts the records through SQLAlchemy; returns the number of rows written."""
    create_tables(database_url)
    with session_scope(database_url) as session:
        session.add_all(
            SweepRecordRow(
                run_id=r.run_id,
                kind=r.kind,
                alpha=r.alpha,
                delta_choice=r.delta_choice,
                eps1=r.eps1,
                eps2=r.eps2,
                fidelity=r.fidelity,
                distance=r.distance,
                norm_drift=r.norm_drift,
                degraded=r.degraded,
                wall_time=r.wall_time,
            )
            for r in records
        )
    logger.info(f"Stored {len(records)} record(s) in {database_url}")
    return len(records)


def persist(
    result: RunResult,
    out_dir: Union[str, Path],
    formats: Sequence[str] = ("csv",),
    database_url: Optional[str] = None,
) -> List[Path]:
    """Writes a run's records, curves and fit in every requested format.

    Args:
        result: Output of a harness run.
        out_dir: Target directory (created if missing).
        formats: Any of "csv", "json", "sqlite".
        database_url: SQLAlchemy URL for "sqlite"; defaults to a records.db file in out_dir.

    Returns:
        Paths of the files written.
    """
    out = Path(out_dir)
    unknown = [f for f in formats if f not in ("csv", "json", "sqlite")]
    if unknown:
        raise ArgumentError(f"Unknown output format(s) {unknown}.")
    written: List[Path] = []
    if "csv" in formats:
        written.append(write_records_csv(result.records, out / "records.csv"))
        if result.curves or result.kind in ("sweep", "simulate", "scaling"):
            written.append(write_curves_csv(result.curves, out / "curves.csv"))
        if result.populations:
            written.append(write_populations_csv(result.populations, out / "populations.csv"))
        if result.fit is not None:
            written.append(
                _write_csv(
                    out / "fit.csv",
                    ["slope", "intercept", "residual", "reliable"],
                    [[
                        _format_float(result.fit.slope),
                        _format_float(result.fit.intercept),
                        _format_float(result.fit.residual),
                        str(result.fit.reliable).lower(),
                    ]],
                )
            )
    if "json" in formats:
        written.append(_write_json(out / "records.json", {
            "kind": result.kind,
            "records": [r.model_dump() for r in result.records],
            "fit": None if result.fit is None else result.fit.model_dump(),
            "conditions": [c.model_dump() for c in result.conditions],
        }))
        if result.curves:
            written.append(_write_json(out / "curves.json", [c.model_dump() for c in result.curves]))
        if result.populations:
            written.append(
                _write_json(out / "populations.json", [p.model_dump() for p in result.populations])
            )
    if "sqlite" in formats:
        url = database_url or f"sqlite:///{(out / SQLITE_FILENAME).resolve()}"
        out.mkdir(parents=True, exist_ok=True)
        store_records(result.records, url)
        written.append(out / SQLITE_FILENAME if database_url is None else Path(url.split("///", 1)[-1]))
    return written


def persist_lemmas(
    rows: Sequence[LemmaDiagnostics], out_dir: Union[str, Path], formats: Sequence[str] = ("csv",)
) -> List[Path]:
    out = Path(out_dir)
    written: List[Path] = []
    if "csv" in formats:
        written.append(write_lemma_csv(rows, out / "lemmas.csv"))
    if "json" in formats:
        written.append(_write_json(out / "lemmas.json", [row.model_dump() for row in rows]))
    return written


def trajectory_to_csv(traj: Trajectory, path: Union[str, Path]) -> Path:
    """s, re_1, im_1, ..., re_n, im_n, norm for every stored sample."""
    n = traj.states.shape[1]
    header = ["s"]
    for j in range(1, n + 1):
        header += [f"re_{j}", f"im_{j}"]
    header.append("norm")
    norms = traj.norms()

    def rows():
        for s, state, norm in zip(traj.slow_times, traj.states, norms):
            row = [_format_float(s)]
            for amplitude in state:
                row += [_format_float(amplitude.real), _format_float(amplitude.imag)]
            row.append(_format_float(norm))
            yield row

    return _write_csv(Path(path), header, rows())
