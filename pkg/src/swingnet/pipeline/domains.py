"""URL expansion, registrable-domain extraction and reputation tagging."""
from __future__ import annotations

import csv
import enum
from pathlib import Path
from urllib.parse import urlsplit

import tldextract

#: marker returned by :func:`extract_domain` for URLs that cannot be parsed
UNPARSABLE = "<unparsable>"

# offline extractor backed by the public-suffix snapshot bundled with tldextract
_extract = tldextract.TLDExtract(suffix_list_urls=(), cache_dir=None)


class ReputationTag(str, enum.Enum):
    T = "T"      # trustworthy news
    N = "N"      # non-trustworthy news
    P = "P"      # platform
    S = "S"      # satire
    UNC = "UNC"  # not covered by the tag table

    def __str__(self):
        return self.value


TAG_ORDER = (ReputationTag.T, ReputationTag.N, ReputationTag.P, ReputationTag.S, ReputationTag.UNC)


def extract_domain(url: str, expansion_table: dict[str, str] | None = None) -> str:
    """Registrable domain of ``url`` after optional short-link expansion.

    >>> extract_domain("https://www.nytimes.com/2020/11/01/us/politics.html")
    'nytimes.com'
    """
    if expansion_table and url in expansion_table:
        url = expansion_table[url]
    try:
        parts = urlsplit(url.strip())
        host = parts.hostname
    except (ValueError, AttributeError):
        return UNPARSABLE
    if parts.scheme.lower() not in ("http", "https") or not host:
        return UNPARSABLE
    ext = _extract(host.lower())
    if not ext.suffix or not ext.domain:
        return UNPARSABLE
    return f"{ext.domain}.{ext.suffix}"


def tag_domain(domain: str, tag_table: dict[str, ReputationTag]) -> ReputationTag:
    return tag_table.get(domain, ReputationTag.UNC)


class DomainTagger:
    """Bundles the expansion and tag tables; caches per-URL results."""

    def __init__(self, tag_table: dict | None = None, expansion_table: dict | None = None):
        self.tag_table = {k.lower(): ReputationTag(v) for k, v in (tag_table or {}).items()}
        self.expansion_table = dict(expansion_table or {})
        self._cache: dict[str, tuple[str, ReputationTag | None]] = {}

    def __call__(self, url: str) -> tuple[str, ReputationTag | None]:
        """``(domain, tag)``; tag is ``None`` for unparsable URLs."""
        hit = self._cache.get(url)
        if hit is None:
            domain = extract_domain(url, self.expansion_table)
            tag = None if domain == UNPARSABLE else tag_domain(domain, self.tag_table)
            hit = self._cache[url] = (domain, tag)
        return hit


def read_tag_table(path) -> dict[str, ReputationTag]:
    """Read a ``domain,tag`` CSV (header optional)."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "domain":
                continue
            out[row[0].strip().lower()] = ReputationTag(row[1].strip().upper())
    return out


def read_expansion_table(path) -> dict[str, str]:
    """Read a ``short_url,long_url`` CSV (header optional)."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "short_url":
                continue
            out[row[0].strip()] = row[1].strip()
    return out


def write_table(path, header: tuple, rows) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
