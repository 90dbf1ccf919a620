"""Decile-based bot / human classification of accounts."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np


class BotClass(str, enum.Enum):
    HUMAN = "human"
    BOT = "bot"
    UNCLASSIFIED = "unclassified"

    def __str__(self):
        return self.value


class TooFewScoresError(ValueError):
    pass


@dataclass(frozen=True)
class BotClassification:
    classes: dict
    human_cut: float
    bot_cut: float
    scored: int

    def __getitem__(self, account) -> BotClass:
        return self.classes.get(account, BotClass.UNCLASSIFIED)

    def __contains__(self, account) -> bool:
        return account in self.classes

    def count(self, cls: BotClass) -> int:
        return sum(1 for c in self.classes.values() if c is cls)


def classify_bots(scores: Mapping[Hashable, float | None],
                  thresholds: tuple[float, float] | None = None) -> BotClassification:
    """Label accounts in the first score decile human and in the last decile bot.

    With ``n`` scored accounts and ``h = n // 10``, an account is human when at
    most ``h`` accounts score less than or equal to it, and bot when at most
    ``h`` accounts score greater than or equal to it. A tie group straddling a
    cut point therefore lands entirely in the unclassified middle. Fixed
    ``thresholds=(lo, hi)`` replace the deciles: human iff ``score <= lo``,
    bot iff ``score >= hi``. Accounts without a score are unclassified.
    """
    scored = {a: float(s) for a, s in scores.items() if s is not None}
    classes = {a: BotClass.UNCLASSIFIED for a, s in scores.items() if s is None}
    if thresholds is not None:
        lo, hi = thresholds
        if not 0 <= lo < hi <= 1:
            raise ValueError("thresholds must satisfy 0 <= lo < hi <= 1")
        for a, s in scored.items():
            classes[a] = BotClass.HUMAN if s <= lo else BotClass.BOT if s >= hi else BotClass.UNCLASSIFIED
        return BotClassification(classes, float(lo), float(hi), len(scored))

    n = len(scored)
    if n < 10:
        raise TooFewScoresError(f"need at least 10 scored accounts for deciles, got {n}")
    h = n // 10
    values = np.sort(np.fromiter(scored.values(), dtype=float, count=n))
    human_cut, bot_cut = float(values[h - 1]), float(values[n - h])
    for a, s in scored.items():
        at_or_below = int(np.searchsorted(values, s, side="right"))
        at_or_above = n - int(np.searchsorted(values, s, side="left"))
        if at_or_below <= h:
            classes[a] = BotClass.HUMAN
        elif at_or_above <= h:
            classes[a] = BotClass.BOT
        else:
            classes[a] = BotClass.UNCLASSIFIED
    return BotClassification(classes, human_cut, bot_cut, n)
