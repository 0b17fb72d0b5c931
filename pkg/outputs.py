import logging
from pathlib import Path
from typing import Dict, Iterable, List

import pandas as pd

from errors import OutputError
from schemas import RunSummary

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"


def _part_path(dest: Path) -> Path:
    return dest.with_name(dest.name + ".part")


def _save_text_atomic(dest: Path, text: str) -> None:
    """Write to a .part sibling, then rename over dest so readers never see half a file."""
    tmp = _part_path(dest)
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        tmp.replace(dest)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise OutputError(f"Cannot write {dest}: {exc}") from exc
    logger.debug(f"Wrote {dest}")


def write_table(frame: pd.DataFrame, dest: Path) -> Path:
    _save_text_atomic(dest, frame.to_csv(index=False, lineterminator="\n"))
    return dest


def write_tables(tables: Dict[str, pd.DataFrame], directory: Path) -> List[Path]:
    return [write_table(frame, directory / name) for name, frame in sorted(tables.items())]


def write_summary(summary: RunSummary, directory: Path) -> Path:
    dest = directory / SUMMARY_FILE
    _save_text_atomic(dest, summary.model_dump_json(indent=2) + "\n")
    return dest


def write_outputs(summary: RunSummary, tables: Dict[str, pd.DataFrame], directory: Path,
                  formats: Iterable[str]) -> List[Path]:
    formats = set(formats)
    written: List[Path] = []
    if "csv" in formats:
        written.extend(write_tables(tables, directory))
    if "json-summary" in formats:
        written.append(write_summary(summary, directory))
    logger.info(f"Wrote {len(written)} file(s) to {directory}")
    return written
