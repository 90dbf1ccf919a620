"""Keyword association of tweets with U.S. states, and the language filter."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

SWING = "swing"
SAFE = "safe"


class _Ambiguous:
    def __repr__(self):
        return "AMBIGUOUS"


#: returned by :func:`associate_state` when two or more distinct states match
AMBIGUOUS = _Ambiguous()


@dataclass(frozen=True)
class StateConfig:
    states: tuple  # ((name, kind), ...)
    candidates: tuple = ("trump", "biden")

    def __post_init__(self):
        seen = set()
        for name, kind in self.states:
            if kind not in (SWING, SAFE):
                raise ValueError(f"state {name!r}: kind must be 'swing' or 'safe'")
            key = name.casefold()
            if key in seen:
                raise ValueError(f"duplicate state name {name!r}")
            seen.add(key)

    @cached_property
    def kinds(self) -> dict[str, str]:
        return dict(self.states)

    @cached_property
    def _pattern(self) -> re.Pattern:
        # longest names first so multi-word names win over any shorter overlap
        names = sorted((n for n, _ in self.states), key=len, reverse=True)
        alts = [r"\s+".join(map(re.escape, n.split())) for n in names]
        return re.compile(r"\b(" + "|".join(alts) + r")\b", re.IGNORECASE)

    @cached_property
    def _canonical(self) -> dict[str, str]:
        return {" ".join(n.casefold().split()): n for n, _ in self.states}

    def matches(self, text: str) -> list[str]:
        """Distinct configured states mentioned in ``text``, in order of appearance."""
        found = (self._canonical[" ".join(m.group(0).casefold().split())]
                 for m in self._pattern.finditer(text or ""))
        return list(dict.fromkeys(found))


DEFAULT_STATES = StateConfig((
    ("Arizona", SWING), ("Florida", SWING), ("Michigan", SWING), ("Pennsylvania", SWING),
    ("New Jersey", SAFE), ("Indiana", SAFE), ("Washington", SAFE), ("Louisiana", SAFE),
))


def associate_state(text: str, cfg: StateConfig = DEFAULT_STATES):
    """Return ``(state, kind)``, ``None`` (no state) or :data:`AMBIGUOUS`.

    Matching is whole-word and case-insensitive; multi-word names match as a
    phrase with any whitespace between words.
    """
    found = cfg.matches(text)
    if not found:
        return None
    if len(found) > 1:
        return AMBIGUOUS
    return found[0], cfg.kinds[found[0]]


def filter_language(rec) -> bool:
    """Keep records whose language tag has primary subtag ``en``."""
    lang = getattr(rec, "lang", rec)
    if not lang:
        return False
    return str(lang).replace("_", "-").split("-")[0].strip().lower() == "en"
