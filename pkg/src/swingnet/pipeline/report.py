"""Report tables: traffic per state, reputation mix per state kind, bot activity.

All breakdowns count URL *occurrences* by default (a URL shared in five
tweets counts five times); ``url_counting="distinct"`` counts each distinct
URL string once per cell instead. URLs that cannot be parsed are left out of
every URL count and reported in the diagnostics.
"""
from __future__ import annotations

import csv
import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field

from .bots import BotClass
from .domains import TAG_ORDER, ReputationTag
from .states import AMBIGUOUS, DEFAULT_STATES, SAFE, SWING, StateConfig, associate_state

KINDS = (SWING, SAFE)
LINK_TYPES = ("all", "T", "N")
SCOPES = ("both", SWING, SAFE)


def pct(num: float, den: float) -> float:
    return 100.0 * num / den if den else 0.0


def fmt(x: float) -> str:
    return f"{x:.2f}"


@dataclass(frozen=True)
class StateRow:
    state: str
    kind: str
    tweets: int
    urls: int


@dataclass(frozen=True)
class KindRow:
    kind: str
    users: int
    tweets: int
    urls: int
    tags: dict  # tag value -> URL count

    @property
    def t_pct(self) -> float:
        return pct(self.tags.get("T", 0), self.urls)

    @property
    def n_pct(self) -> float:
        return pct(self.tags.get("N", 0), self.urls)


@dataclass(frozen=True)
class BotRow:
    label: str
    users: int
    tweets: int
    urls: int


@dataclass(frozen=True)
class BotActivity:
    human: BotRow
    bot: BotRow

    @classmethod
    def from_counts(cls, human_users, bot_users, human_tweets, bot_tweets, human_urls=0, bot_urls=0):
        return cls(BotRow("human", human_users, human_tweets, human_urls),
                   BotRow("bot", bot_users, bot_tweets, bot_urls))

    @property
    def bot_user_share(self) -> float:
        return pct(self.bot.users, self.bot.users + self.human.users)

    @property
    def bot_tweet_share(self) -> float:
        return pct(self.bot.tweets, self.bot.tweets + self.human.tweets)

    @property
    def bot_url_share(self) -> float:
        return pct(self.bot.urls, self.bot.urls + self.human.urls)


@dataclass(frozen=True)
class LinkShareRow:
    """URLs posted by classified accounts, split by state kind and bot class."""

    link_type: str
    counts: dict  # (kind, bot class value) -> URL count

    def _n(self, kind=None, cls=None) -> int:
        return sum(v for (k, c), v in self.counts.items()
                   if (kind is None or k == kind) and (cls is None or c == cls))

    @property
    def urls(self) -> int:
        return self._n()

    @property
    def swing_pct(self) -> float:
        return pct(self._n(SWING), self.urls)

    @property
    def safe_pct(self) -> float:
        return pct(self._n(SAFE), self.urls)

    def bot_pct(self, scope: str = "both") -> float:
        kind = None if scope == "both" else scope
        return pct(self._n(kind, "bot"), self._n(kind))

    def human_pct(self, scope: str = "both") -> float:
        kind = None if scope == "both" else scope
        return pct(self._n(kind, "human"), self._n(kind))


@dataclass
class ReportTables:
    states: list
    kinds: list
    bots: BotActivity
    link_shares: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def total_tweets(self) -> int:
        return sum(k.tweets for k in self.kinds)

    def tweet_share(self, kind: str) -> float:
        return pct(sum(k.tweets for k in self.kinds if k.kind == kind), self.total_tweets)

    def kind(self, kind: str) -> KindRow:
        return next(k for k in self.kinds if k.kind == kind)

    def link_share(self, link_type: str) -> LinkShareRow:
        return next(r for r in self.link_shares if r.link_type == link_type)

    def to_dict(self) -> dict:
        r2 = lambda x: round(x, 2)  # noqa: E731
        return {
            "table_states": [asdict(s) for s in self.states],
            "table_kinds": [
                {"kind": k.kind, "users": k.users, "tweets": k.tweets, "urls": k.urls,
                 "tag_counts": {t.value: k.tags.get(t.value, 0) for t in TAG_ORDER},
                 "T_pct": r2(k.t_pct), "N_pct": r2(k.n_pct), "tweet_share_pct": r2(self.tweet_share(k.kind))}
                for k in self.kinds
            ],
            "table_bots": {
                "human": asdict(self.bots.human), "bot": asdict(self.bots.bot),
                "bot_user_share_pct": r2(self.bots.bot_user_share),
                "bot_tweet_share_pct": r2(self.bots.bot_tweet_share),
                "bot_url_share_pct": r2(self.bots.bot_url_share),
            },
            "table_link_shares": [
                {"link_type": r.link_type, "urls": r.urls, "swing_pct": r2(r.swing_pct), "safe_pct": r2(r.safe_pct),
                 **{f"{scope}_{c}_pct": r2(r.bot_pct(scope) if c == "bot" else r.human_pct(scope))
                    for scope in SCOPES for c in ("bot", "human")}}
                for r in self.link_shares
            ],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render_text(self) -> str:
        out = []
        out.append("Tweets and URLs by state")
        out.append(f"{'State':<14}{'Kind':<7}{'Tweets':>10}{'URLs':>10}")
        for s in self.states:
            out.append(f"{s.state:<14}{s.kind:<7}{s.tweets:>10}{s.urls:>10}")
        out.append(f"{'Total':<21}{sum(s.tweets for s in self.states):>10}{sum(s.urls for s in self.states):>10}")
        out.append("")
        out.append("Accounts, tweets and URL reputation by state kind")
        out.append(f"{'Kind':<7}{'Users':>9}{'Tweets':>10}{'Share%':>9}{'URLs':>9}{'T%':>8}{'N%':>8}")
        for k in self.kinds:
            out.append(f"{k.kind:<7}{k.users:>9}{k.tweets:>10}{fmt(self.tweet_share(k.kind)):>9}"
                       f"{k.urls:>9}{fmt(k.t_pct):>8}{fmt(k.n_pct):>8}")
        out.append("")
        out.append("Classified accounts")
        out.append(f"{'Label':<7}{'Users':>9}{'Tweets':>10}{'URLs':>9}")
        for row in (self.bots.human, self.bots.bot):
            out.append(f"{row.label:<7}{row.users:>9}{row.tweets:>10}{row.urls:>9}")
        out.append(f"bot share: users {fmt(self.bots.bot_user_share)}%  tweets {fmt(self.bots.bot_tweet_share)}%"
                   f"  URLs {fmt(self.bots.bot_url_share)}%")
        out.append("")
        out.append("Links shared by classified accounts")
        head = f"{'Link type':<10}{'URLs':>8}{'swing':>8}{'safe':>8}"
        for scope in SCOPES:
            head += f"{scope + ':bot':>12}{'human':>8}"
        out.append(head)
        for r in self.link_shares:
            line = f"{r.link_type:<10}{r.urls:>8}{fmt(r.swing_pct):>8}{fmt(r.safe_pct):>8}"
            for scope in SCOPES:
                line += f"{fmt(r.bot_pct(scope)):>12}{fmt(r.human_pct(scope)):>8}"
            out.append(line)
        return "\n".join(out) + "\n"


class _UrlTally:
    def __init__(self, distinct: bool):
        self.distinct = distinct
        self._n: Counter = Counter()
        self._sets: dict = defaultdict(set)

    def add(self, cell, url):
        if self.distinct:
            self._sets[cell].add(url)
        else:
            self._n[cell] += 1

    def __getitem__(self, cell) -> int:
        return len(self._sets.get(cell, ())) if self.distinct else self._n[cell]

    def cells(self):
        return self._sets.keys() if self.distinct else self._n.keys()


def report(records, tagger, bot_classes, cfg: StateConfig = DEFAULT_STATES,
           url_counting: str = "occurrence") -> ReportTables:
    """Compute the report tables for state-associated records.

    ``tagger`` maps a URL to ``(domain, tag)`` (see
    :class:`~swingnet.pipeline.domains.DomainTagger`); ``bot_classes`` maps an
    account to its :class:`BotClass` (missing accounts are unclassified).
    """
    if url_counting not in ("occurrence", "distinct"):
        raise ValueError("url_counting must be 'occurrence' or 'distinct'")
    urls = _UrlTally(url_counting == "distinct")
    state_tweets: Counter = Counter()
    kind_tweets: Counter = Counter()
    kind_users: dict = defaultdict(set)
    cls_users: dict = defaultdict(set)
    cls_tweets: Counter = Counter()
    unparsable = 0

    def cls_of(account) -> str:
        c = bot_classes[account] if account in bot_classes else BotClass.UNCLASSIFIED
        return BotClass(c).value

    for r in records:
        match = associate_state(r.text, cfg)
        if match is None or match is AMBIGUOUS:
            raise ValueError(f"record {r.tweet_id} is not associated with exactly one state")
        state, kind = match
        state_tweets[state] += 1
        kind_tweets[kind] += 1
        kind_users[kind].add(r.author_id)
        c = cls_of(r.author_id)
        if c != "unclassified":
            cls_users[c].add(r.author_id)
            cls_tweets[c] += 1
        for u in r.urls:
            _, tag = tagger(u)
            if tag is None:
                unparsable += 1
                continue
            t = ReputationTag(tag).value
            urls.add(("state", state), u)
            urls.add(("kind", kind), u)
            urls.add(("kind_tag", kind, t), u)
            if c != "unclassified":
                urls.add(("cls", c), u)
                urls.add(("link", "all", kind, c), u)
                if t in ("T", "N"):
                    urls.add(("link", t, kind, c), u)

    states = [StateRow(name, kind, state_tweets[name], urls[("state", name)]) for name, kind in cfg.states]
    kinds = [KindRow(k, len(kind_users[k]), kind_tweets[k], urls[("kind", k)],
                     {t.value: urls[("kind_tag", k, t.value)] for t in TAG_ORDER}) for k in KINDS]
    bots = BotActivity(
        BotRow("human", len(cls_users["human"]), cls_tweets["human"], urls[("cls", "human")]),
        BotRow("bot", len(cls_users["bot"]), cls_tweets["bot"], urls[("cls", "bot")]),
    )
    link_shares = [LinkShareRow(lt, {(k, c): urls[("link", lt, k, c)] for k in KINDS for c in ("bot", "human")})
                   for lt in LINK_TYPES]
    diagnostics = {"records": sum(state_tweets.values()), "unparsable_urls": unparsable,
                   "url_counting": url_counting}
    return ReportTables(states, kinds, bots, link_shares, diagnostics)


def url_category_counts(records, tagger) -> dict[str, int]:
    """URL occurrences per reputation tag (unparsable URLs skipped)."""
    counts = Counter()
    for r in records:
        for u in r.urls:
            _, tag = tagger(u)
            if tag is not None:
                counts[ReputationTag(tag).value] += 1
    return {t.value: counts[t.value] for t in TAG_ORDER}


def write_figure_csv(path, stages: dict[str, dict[str, int]]) -> None:
    """``stage,category,count`` rows for the URL-classification bar chart."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("stage", "category", "count"))
        for stage, counts in stages.items():
            for t in TAG_ORDER:
                w.writerow((stage, t.value, counts.get(t.value, 0)))
