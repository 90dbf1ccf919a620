"""Tweet records and their JSONL / CSV file formats."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

FIELDS = ("tweet_id", "author_id", "author_verified", "retweeted_author_id", "retweeted_verified",
          "lang", "text", "urls", "bot_score", "timestamp")


class IngestFormatError(ValueError):
    """Too many malformed lines, or an unknown format."""


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    author_id: str
    author_verified: bool
    lang: str | None
    text: str
    urls: tuple = ()
    retweeted_author_id: str | None = None
    # verified flag of the retweeted account, when the source carries it
    retweeted_verified: bool | None = None
    bot_score: float | None = None
    timestamp: float = 0.0

    def __post_init__(self):
        if self.bot_score is not None and not 0.0 <= self.bot_score <= 1.0:
            raise ValueError(f"bot_score {self.bot_score} outside [0, 1]")

    @property
    def is_retweet(self) -> bool:
        return self.retweeted_author_id is not None

    def to_json(self) -> str:
        d = {k: getattr(self, k) for k in FIELDS}
        d["urls"] = list(self.urls)
        return json.dumps(d, ensure_ascii=False)


@dataclass
class IngestReport:
    path: str
    lines: int = 0
    records: int = 0
    skipped: int = 0
    errors: list = field(default_factory=list)


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("true", "1", "yes", "t"):
        return True
    if s in ("false", "0", "no", "f", ""):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _opt_bool(v):
    return None if v is None or v == "" else _as_bool(v)


def _opt_str(v):
    return None if v is None or v == "" else str(v)


def _opt_float(v):
    return None if v is None or v == "" else float(v)


def record_from_mapping(d: dict) -> TweetRecord:
    urls = d.get("urls") or ()
    if isinstance(urls, str):
        urls = urls.split()
    return TweetRecord(
        tweet_id=str(d["tweet_id"]),
        author_id=str(d["author_id"]),
        author_verified=_as_bool(d.get("author_verified", False)),
        lang=_opt_str(d.get("lang")),
        text=str(d.get("text") or ""),
        urls=tuple(str(u) for u in urls),
        retweeted_author_id=_opt_str(d.get("retweeted_author_id")),
        retweeted_verified=_opt_bool(d.get("retweeted_verified")),
        bot_score=_opt_float(d.get("bot_score")),
        timestamp=float(d.get("timestamp") or 0.0),
    )


def ingest_tweets(path, format: str = "jsonl") -> tuple[list[TweetRecord], IngestReport]:
    """Parse a tweet file, skipping malformed lines.

    CSV files need a header row; ``urls`` is whitespace separated there.
    More than half of the lines being malformed aborts with
    :class:`IngestFormatError`.
    """
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise IngestFormatError(f"unknown format {format!r}")
    report = IngestReport(str(path))
    records: list[TweetRecord] = []
    with open(path, encoding="utf-8", newline="") as fh:
        if format == "jsonl":
            rows = ((n, line) for n, line in enumerate(fh, 1) if line.strip())
            parse = lambda line: record_from_mapping(json.loads(line))  # noqa: E731
        else:
            reader = csv.DictReader(fh)
            rows = ((reader.line_num, row) for row in reader)
            parse = record_from_mapping
        for lineno, raw in rows:
            report.lines += 1
            try:
                records.append(parse(raw))
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                report.skipped += 1
                report.errors.append(f"line {lineno}: {exc}")
    report.records = len(records)
    if report.lines and report.skipped * 2 > report.lines:
        raise IngestFormatError(f"{path}: {report.skipped} of {report.lines} lines are malformed")
    if report.skipped:
        log.warning("%s: skipped %d malformed lines", path, report.skipped)
    return records, report


def write_records(path, records, format: str = "jsonl") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if format == "jsonl":
            for r in records:
                fh.write(r.to_json() + "\n")
        elif format == "csv":
            w = csv.DictWriter(fh, fieldnames=FIELDS, lineterminator="\n")
            w.writeheader()
            for r in records:
                d = {k: getattr(r, k) for k in FIELDS}
                d["urls"] = " ".join(r.urls)
                w.writerow({k: "" if d[k] is None else d[k] for k in FIELDS})
        else:
            raise IngestFormatError(f"unknown format {format!r}")
