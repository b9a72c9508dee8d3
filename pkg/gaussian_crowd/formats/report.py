"""
CSV export of report tables, plus reading exported benchmark reports back.

Numbers are formatted without locale: integers as digits, floats with six fixed
decimals and a period separator.
"""

import csv
import io
from enum import Enum
from pathlib import Path
from typing import List, Protocol, Union

from gaussian_crowd.errors import AssetError, FormatError, MissingAssetError
from gaussian_crowd.constants import ERROR_MISSING_ASSET
from gaussian_crowd.logger_config import get_crowd_logger
from gaussian_crowd.types import (
    BENCH_COLUMNS,
    BenchReport,
    BenchTable,
    CellStatus,
    StageTimings,
)

logger = get_crowd_logger(__name__)

FLOAT_FORMAT = ".6f"


class TabularReport(Protocol):
    def table_header(self) -> List[str]: ...

    def table_rows(self) -> List[list]: ...


def format_cell(value) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def report_to_csv(report: TabularReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(report.table_header())
    for row in report.table_rows():
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def export_report(report: TabularReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(report_to_csv(report))
    except OSError as e:
        raise AssetError(f"cannot write report {path}: {e}") from e
    logger.info(f"Exported report to {path}", extra={"path": str(path), "event_type": "report_exported"})
    return path


def load_bench_report(path: Union[str, Path]) -> BenchTable:
    """Read a CSV written by export_report(BenchTable) back into a table"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise MissingAssetError(ERROR_MISSING_ASSET.format(path), str(path)) from e
    except OSError as e:
        raise AssetError(f"cannot read report {path}: {e}") from e

    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames != BENCH_COLUMNS:
        raise FormatError(f"{path}: not a benchmark report (columns {reader.fieldnames})")
    table = BenchTable()
    for line, row in enumerate(reader, start=2):
        try:
            table.reports.append(
                BenchReport(
                    scenario=row["scenario"],
                    gaussian_count=int(row["gaussian_count"]),
                    instance_count=int(row["instance_count"]),
                    motion=row["motion"] == "on",
                    status=CellStatus(row["status"]),
                    skip_reason=row["skip_reason"],
                    stages=StageTimings(
                        update_ms=float(row["update_ms"]),
                        gather_ms=float(row["gather_ms"]),
                        sort_ms=float(row["sort_ms"]),
                        rasterize_ms=float(row["rasterize_ms"]),
                    ),
                    total_ms=float(row["total_ms"]),
                    fps=float(row["fps"]),
                    total_splats=int(row["total_splats"]),
                    surviving_splats=int(row["surviving_splats"]),
                )
            )
        except ValueError as e:
            raise FormatError(f"{path}:{line}: {e}") from e
    return table
