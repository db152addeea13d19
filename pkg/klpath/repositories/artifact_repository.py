"""csv, json and manifest artifacts of a run"""
import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

from pydantic import BaseModel

from klpath import __version__
from klpath.domain.constants import MANIFEST_NAME, PATH_CSV_HEADER, SAMPLE_CSV_HEADER
from klpath.domain.enums import ReportKind
from klpath.domain.errors import InputFormatError
from klpath.domain.messages import Messages

logger = logging.getLogger(__name__)


def _exact(value: Any) -> str:
    """floats as their shortest round-tripping decimal"""
    return repr(float(value)) if isinstance(value, float) else str(value)


def file_digest(path: Path) -> str:
    """sha256 of a file's bytes"""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class ArtifactRepository:
    """repository for the files a subcommand writes into its output directory"""

    def __init__(self, out_dir: str) -> None:
        self.out_dir = Path(out_dir)
        self._written: List[Path] = []

    @property
    def written(self) -> List[Path]:
        """files written so far, in write order"""
        return list(self._written)

    def resolve(self, name: str) -> Path:
        """absolute names stay put, relative ones land in the output directory"""
        path = Path(name)
        return path if path.is_absolute() or path.parent != Path(".") else self.out_dir / path

    def _record(self, path: Path) -> Path:
        self._written.append(path)
        logger.info(f"wrote {path}")
        return path

    def _write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_exact(value) for value in row])
        return self._record(path)

    def write_path_csv(self, name: str, rows: Iterable[Tuple[int, Any, float, float]]) -> Path:
        """knot rows j,t,re,im"""
        return self._write_csv(name, PATH_CSV_HEADER, rows)

    def write_sample_csv(self, name: str, rows: Iterable[Tuple[int, Any, float, float]]) -> Path:
        """limit series rows seed,t,re,im"""
        return self._write_csv(name, SAMPLE_CSV_HEADER, rows)

    def write_table_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self._write_csv(name, header, rows)

    def write_report(self, name: str, report: BaseModel) -> Path:
        """pydantic report as sorted, indented json"""
        path = self.resolve(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return self._record(path)

    def write_manifest(self, subcommand: str, config: Dict[str, Any], wall_time: float) -> Path:
        """
        manifest.json: config echo, tool version, wall time and output hashes

        args:
            subcommand: name of the command that ran
            config: json-ready config echo
            wall_time: elapsed seconds

        returns:
            path of the manifest
        """
        outputs = {str(path): file_digest(path) for path in self._written}
        manifest = {
            "subcommand": subcommand,
            "version": __version__,
            "config": config,
            "wall_time": wall_time,
            "outputs": outputs,
        }
        path = self.out_dir / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"manifest {path} lists {len(outputs)} outputs")
        return path


def read_path_csv(path: str) -> List[Tuple[float, float]]:
    """
    (re, im) points of a path csv

    raises:
        InputFormatError: missing file, wrong header, no rows or unparsable values
    """
    source = Path(path)
    if not source.is_file():
        raise InputFormatError(Messages.get("IO", "missing", path=path))
    with open(source, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise InputFormatError(Messages.get("IO", "empty", path=path))
        if tuple(header) != PATH_CSV_HEADER:
            raise InputFormatError(
                Messages.get("IO", "header", path=path, header=",".join(header), expected=",".join(PATH_CSV_HEADER))
            )
        try:
            points = [(float(row[2]), float(row[3])) for row in reader if row]
        except (IndexError, ValueError) as exc:
            raise InputFormatError(f"{path}: {exc}") from exc
    if not points:
        raise InputFormatError(Messages.get("IO", "empty", path=path))
    return points


def read_report(path: str) -> Tuple[ReportKind, Dict[str, Any]]:
    """
    load a report json and tell which kind it is

    raises:
        InputFormatError: missing file, invalid json or an unknown report kind
    """
    source = Path(path)
    if not source.is_file():
        raise InputFormatError(Messages.get("IO", "missing", path=path))
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputFormatError(Messages.get("IO", "unknown", path=path))
    try:
        return ReportKind(data.get("kind")), data
    except ValueError as exc:
        raise InputFormatError(Messages.get("IO", "unknown", path=path)) from exc


def detect_input(path: str) -> ReportKind:
    """path csv or report json, by extension"""
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return ReportKind.PATH
    if suffix == ".json":
        return read_report(path)[0]
    raise InputFormatError(Messages.get("IO", "unknown", path=path))
