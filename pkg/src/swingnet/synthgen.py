"""Synthetic data with planted ground truth.

Two generators live here: a planted-partition bipartite graph, and a full
tweet-record scenario (camps of verified and unverified accounts, state
mentions, URL reputations and bot scores) written in the formats the
pipeline reads.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bigraph import BipartiteGraph
from .pipeline.states import DEFAULT_STATES, SAFE, SWING


@dataclass(frozen=True)
class PlantedBipartiteSpec:
    blocks: tuple  # ((top_size, bottom_size), ...)
    p_in: float
    p_out: float
    rng_seed: int = 0

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("at least one block is required")
        for t, b in self.blocks:
            if t < 1 or b < 1:
                raise ValueError(f"degenerate block size ({t}, {b})")
        if not (0 <= self.p_in <= 1 and 0 <= self.p_out <= 1):
            raise ValueError("probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class PlantedBipartite:
    graph: BipartiteGraph
    top_block: np.ndarray
    bottom_block: np.ndarray
    top_degrees: np.ndarray
    bottom_degrees: np.ndarray


def gen_planted_bipartite(spec: PlantedBipartiteSpec) -> PlantedBipartite:
    """Link every (top, bottom) pair independently, ``p_in`` inside a block, ``p_out`` across."""
    rng = np.random.default_rng(spec.rng_seed)
    top_block = np.repeat(np.arange(len(spec.blocks)), [t for t, _ in spec.blocks])
    bottom_block = np.repeat(np.arange(len(spec.blocks)), [b for _, b in spec.blocks])
    same = top_block[:, None] == bottom_block[None, :]
    prob = np.where(same, spec.p_in, spec.p_out)
    adj = rng.random(prob.shape) < prob
    g = BipartiteGraph(len(top_block), len(bottom_block), np.argwhere(adj))
    return PlantedBipartite(g, top_block, bottom_block,
                            adj.sum(axis=1).astype(np.int64), adj.sum(axis=0).astype(np.int64))


# -- tweet-record scenario ------------------------------------------------------

TAGS = ("T", "N", "P", "S", "UNC")

# invented outlets under real public suffixes; P entries are real platforms
DOMAIN_POOLS = {
    "T": ("civicledger.org", "trustedherald.com", "metrogazette.co.uk", "dailyrecordwire.com", "harborpost.net"),
    "N": ("patriotbuzz.net", "truthblaze.info", "freedomalarm.co", "realnewsnow.us", "eaglesignal.biz"),
    "P": ("twitter.com", "youtube.com", "reddit.com", "facebook.com"),
    "S": ("onionlike.com", "satirepress.org"),
    "UNC": ("localvoices.blog", "randomsite.xyz", "mynewsletter.substack.com", "opinionhub.net",
            "cityforum.org.au"),
}
SHORTENER = "https://bit.ly/"

_SUBJECTS = ("Trump", "Biden", "Trump and Biden", "the Biden campaign", "the Trump team", "Voters")
_VERBS = ("rally in", "ads flood", "turnout surges in", "poll tightens in", "early ballots counted in",
          "debate watch party in")


@dataclass(frozen=True)
class Camp:
    name: str
    verified: int
    political: bool
    tweet_share: float  # share of the state-associated tweets written by this camp


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of a synthetic tweet corpus.

    Shares refer to the state-associated English tweets (the "complete"
    dataset); distractor tweets are drawn on top of those, as a share of
    ``n_tweets``.
    """

    n_tweets: int = 100_000
    swing_share: float = 0.88
    url_rate: float = 0.55
    reputation_mix: dict = field(default_factory=lambda: {
        "swing": {"T": 0.2984, "N": 0.2347, "P": 0.25, "S": 0.01, "UNC": 0.2069},
        "safe": {"T": 0.5087, "N": 0.1833, "P": 0.15, "S": 0.01, "UNC": 0.1480},
    })
    bot_share: float = 0.10
    human_share: float = 0.10
    activity: dict = field(default_factory=lambda: {"human": 1.0, "middle": 1.0, "bot": 2.0})
    n_link_bot_share: float = 0.7369
    camps: tuple = (Camp("Rep", 60, True, 0.50), Camp("Rep-Dem-Journ", 40, True, 0.33),
                    Camp("Sports", 30, False, 0.17))
    # default keeps about 16 tweets per account whatever the corpus size
    unverified_users: int | None = None
    favorites: tuple = (3, 8)
    retweet_rate: float = 0.6
    cross_camp_rate: float = 0.05
    non_english_rate: float = 0.03
    ambiguous_rate: float = 0.02
    no_state_rate: float = 0.01
    shortener_rate: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        unit = {"swing_share": self.swing_share, "url_rate": self.url_rate, "bot_share": self.bot_share,
                "human_share": self.human_share, "n_link_bot_share": self.n_link_bot_share,
                "retweet_rate": self.retweet_rate, "cross_camp_rate": self.cross_camp_rate,
                "non_english_rate": self.non_english_rate, "ambiguous_rate": self.ambiguous_rate,
                "no_state_rate": self.no_state_rate, "shortener_rate": self.shortener_rate}
        for name, v in unit.items():
            if not 0 <= v <= 1:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.bot_share + self.human_share > 1:
            raise ValueError("bot_share + human_share exceeds 1")
        if self.non_english_rate + self.ambiguous_rate + self.no_state_rate >= 1:
            raise ValueError("distractor rates leave no room for state tweets")
        for kind in ("swing", "safe"):
            mix = self.reputation_mix.get(kind)
            if mix is None or set(mix) != set(TAGS):
                raise ValueError(f"reputation mix for {kind!r} must cover {TAGS}")
            if any(v < 0 for v in mix.values()) or abs(sum(mix.values()) - 1) > 1e-9:
                raise ValueError(f"reputation mix for {kind!r} must be non-negative and sum to 1")
        if not self.camps:
            raise ValueError("at least one camp is required")
        if any(c.verified < 1 or c.tweet_share < 0 for c in self.camps):
            raise ValueError("camps need at least one verified account and a non-negative share")
        if abs(sum(c.tweet_share for c in self.camps) - 1) > 1e-9:
            raise ValueError("camp tweet shares must sum to 1")
        if self.unverified_users is None:
            object.__setattr__(self, "unverified_users", max(300, round(0.06 * self.n_tweets)))
        if self.n_tweets < 1 or self.unverified_users < len(self.camps):
            raise ValueError("too few tweets or users")
        lo, hi = self.favorites
        if not 1 <= lo <= hi:
            raise ValueError("favorites must be (lo, hi) with 1 <= lo <= hi")
        if min(self.activity.values()) <= 0:
            raise ValueError("activity multipliers must be positive")

    @property
    def noise_share(self) -> float:
        return sum(c.tweet_share for c in self.camps if not c.political)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["camps"] = [asdict(c) for c in self.camps]
        return d


def _quota(n: int, share: float) -> int:
    return int(round(n * share))


def _pick(rng, cumulative) -> int:
    """Index drawn with probabilities given by their cumulative sums."""
    k = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return min(k, len(cumulative) - 1)


def _bot_score(rng, cls: str) -> float:
    if cls == "human":
        return round(float(rng.uniform(0.0, 0.04)), 4)
    if cls == "bot":
        return round(float(rng.uniform(0.45, 1.0)), 4)
    return round(float(rng.uniform(0.041, 0.449)), 4)


def gen_synthetic_dataset(spec: ScenarioSpec, out_dir) -> dict:
    """Write a synthetic corpus and its tables to ``out_dir``; return the sidecar.

    Files: ``tweets.jsonl``, ``truth.json`` (sidecar), ``tags.csv``,
    ``expansion.csv`` and ``label_map.csv``. Every account writes at least
    one tweet and every unverified account retweets its own camp at least
    once, so the planted camps are fully visible to the pipeline.

    The label map assigns community ids by decreasing camp size, which is
    how Louvain numbers the communities it finds.
    """
    from .pipeline.domains import write_table
    from .pipeline.records import TweetRecord, write_records

    rng = np.random.default_rng(spec.rng_seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # accounts: verified per camp, unverified split by camp tweet share
    users = []  # dicts: id, camp, verified, cls, score
    camp_verified: list[list[str]] = []
    n_unv = [_quota(spec.unverified_users, c.tweet_share) for c in spec.camps]
    for ci, camp in enumerate(spec.camps):
        members = [(f"v{ci}_{k:04d}", True) for k in range(camp.verified)]
        members += [(f"u{ci}_{k:05d}", False) for k in range(n_unv[ci])]
        n = len(members)
        n_h, n_b = _quota(n, spec.human_share), _quota(n, spec.bot_share)
        classes = ["human"] * n_h + ["bot"] * n_b + ["middle"] * (n - n_h - n_b)
        rng.shuffle(classes)
        for (uid, ver), cls in zip(members, classes):
            users.append({"id": uid, "camp": ci, "verified": ver, "cls": cls, "score": _bot_score(rng, cls)})
        camp_verified.append([uid for uid, ver in members if ver])
    by_id = {u["id"]: u for u in users}
    camp_class_members = {(ci, cls): [u["id"] for u in users if u["camp"] == ci and u["cls"] == cls]
                          for ci in range(len(spec.camps)) for cls in ("human", "middle", "bot")}

    favorites = {}
    lo, hi = spec.favorites
    for u in users:
        if u["verified"]:
            continue
        pool = camp_verified[u["camp"]]
        k = min(len(pool), int(rng.integers(lo, hi + 1)))
        favorites[u["id"]] = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]

    states = {"swing": [s for s, k in DEFAULT_STATES.states if k == SWING],
              "safe": [s for s, k in DEFAULT_STATES.states if k == SAFE]}
    records = []
    expansion = {}
    truth_counts = {
        "complete": 0, "kind_tweets": {"swing": 0, "safe": 0}, "camp_tweets": [0] * len(spec.camps),
        "kind_tags": {"swing": dict.fromkeys(TAGS, 0), "safe": dict.fromkeys(TAGS, 0)},
        "political_kind_tweets": {"swing": 0, "safe": 0},
        "political_kind_tags": {"swing": dict.fromkeys(TAGS, 0), "safe": dict.fromkeys(TAGS, 0)},
        "political_link_class": {t: dict.fromkeys(("human", "middle", "bot"), 0) for t in TAGS},
        "distractors": {"non_english": 0, "ambiguous": 0, "no_state": 0},
        "retweets": 0, "cross_camp_retweets": 0,
    }

    def state_text(kind):
        state = states[kind][int(rng.integers(len(states[kind])))]
        subj = _SUBJECTS[int(rng.integers(len(_SUBJECTS)))]
        verb = _VERBS[int(rng.integers(len(_VERBS)))]
        return f"{subj} {verb} {state} #Election2020"

    def make_url(tag):
        pool = DOMAIN_POOLS[tag]
        dom = pool[int(rng.integers(len(pool)))]
        host = f"www.{dom}" if rng.random() < 0.5 else dom
        url = f"https://{host}/story/{int(rng.integers(1_000_000)):06d}"
        if rng.random() < spec.shortener_rate:
            short = SHORTENER + f"{len(expansion):07x}"
            expansion[short] = url
            return short
        return url

    def retweet_target(uid):
        u = by_id[uid]
        if u["verified"]:
            return None
        if rng.random() < spec.cross_camp_rate and len(spec.camps) > 1:
            other = [c for c in range(len(spec.camps)) if c != u["camp"]]
            pool = camp_verified[other[int(rng.integers(len(other)))]]
            truth_counts["cross_camp_retweets"] += 1
            return pool[int(rng.integers(len(pool)))]
        fav = favorites[uid]
        return fav[int(rng.integers(len(fav)))]

    def emit(uid, text, urls=(), rt=None, lang="en"):
        tid = f"t{len(records):07d}"
        u = by_id[uid]
        records.append(TweetRecord(
            tweet_id=tid, author_id=uid, author_verified=u["verified"], lang=lang, text=text, urls=tuple(urls),
            retweeted_author_id=rt, retweeted_verified=None if rt is None else True,
            bot_score=u["score"], timestamp=float(1_600_000_000 + len(records))))
        if rt is not None:
            truth_counts["retweets"] += 1

    def emit_state_tweet(uid, kind, tag, rt):
        camp = spec.camps[by_id[uid]["camp"]]
        urls = () if tag is None else (make_url(tag),)
        emit(uid, state_text(kind), urls, rt)
        truth_counts["complete"] += 1
        truth_counts["kind_tweets"][kind] += 1
        truth_counts["camp_tweets"][by_id[uid]["camp"]] += 1
        if camp.political:
            truth_counts["political_kind_tweets"][kind] += 1
        if tag is not None:
            truth_counts["kind_tags"][kind][tag] += 1
            if camp.political:
                truth_counts["political_kind_tags"][kind][tag] += 1
                truth_counts["political_link_class"][tag][by_id[uid]["cls"]] += 1

    kinds = ("swing", "safe")
    kind_p = (spec.swing_share, 1 - spec.swing_share)

    def draw_kind():
        return kinds[0] if rng.random() < kind_p[0] else kinds[1]

    # first pass: one URL-free tweet per account; unverified accounts retweet
    # their own camp, cycling so every verified account is retweeted
    for ci in range(len(spec.camps)):
        pool = camp_verified[ci]
        unv = [u["id"] for u in users if u["camp"] == ci and not u["verified"]]
        for k, uid in enumerate(unv):
            target = pool[k % len(pool)]
            if target not in favorites[uid]:
                favorites[uid].append(target)
            emit_state_tweet(uid, draw_kind(), None, target)
        for uid in pool:
            emit_state_tweet(uid, draw_kind(), None, None)

    n_distract = {"non_english": _quota(spec.n_tweets, spec.non_english_rate),
                  "ambiguous": _quota(spec.n_tweets, spec.ambiguous_rate),
                  "no_state": _quota(spec.n_tweets, spec.no_state_rate)}
    n_state = spec.n_tweets - sum(n_distract.values()) - len(records)
    if n_state < 0:
        raise ValueError("n_tweets too small for one tweet per account plus distractors")

    camp_p = np.array([c.tweet_share for c in spec.camps])
    act = spec.activity
    cls_names = ("human", "middle", "bot")

    def class_weights(ci):
        w = np.array([act[c] * len(camp_class_members[(ci, c)]) for c in cls_names], dtype=float)
        return w / w.sum()

    camp_cls_w = [class_weights(ci) for ci in range(len(spec.camps))]
    # N links: same middle share, bot : human split fixed to n_link_bot_share
    camp_cls_w_n = []
    for w in camp_cls_w:
        rest = w[0] + w[2]
        wn = np.array([rest * (1 - spec.n_link_bot_share), w[1], rest * spec.n_link_bot_share])
        camp_cls_w_n.append(wn)

    camp_cum = np.cumsum(camp_p)
    tag_cum = {k: np.cumsum([spec.reputation_mix[k][t] for t in TAGS]) for k in kinds}
    cls_cum = [np.cumsum(w) for w in camp_cls_w]
    cls_cum_n = [np.cumsum(w) for w in camp_cls_w_n]
    for _ in range(n_state):
        ci = _pick(rng, camp_cum)
        kind = draw_kind()
        tag = None
        if rng.random() < spec.url_rate:
            tag = TAGS[_pick(rng, tag_cum[kind])]
        cls = cls_names[_pick(rng, cls_cum_n[ci] if tag == "N" else cls_cum[ci])]
        members = camp_class_members[(ci, cls)]
        if not members:
            members = [u["id"] for u in users if u["camp"] == ci]
        uid = members[int(rng.integers(len(members)))]
        rt = retweet_target(uid) if rng.random() < spec.retweet_rate else None
        emit_state_tweet(uid, kind, tag, rt)

    all_ids = [u["id"] for u in users]
    for name, n in n_distract.items():
        for _ in range(n):
            uid = all_ids[int(rng.integers(len(all_ids)))]
            if name == "non_english":
                emit(uid, state_text(draw_kind()), lang=("es", "pt", "fr")[int(rng.integers(3))])
            elif name == "ambiguous":
                a, b = rng.choice(len(DEFAULT_STATES.states), size=2, replace=False)
                emit(uid, f"Trump vs Biden: {DEFAULT_STATES.states[a][0]} and {DEFAULT_STATES.states[b][0]}")
            else:
                emit(uid, "Election night coverage starts now #Election2020")
            truth_counts["distractors"][name] += 1

    order = rng.permutation(len(records))
    records = [records[i] for i in order]
    write_records(out_dir / "tweets.jsonl", records)

    tag_rows = [(d, t) for t in ("T", "N", "P", "S") for d in DOMAIN_POOLS[t]]
    write_table(out_dir / "tags.csv", ("domain", "tag"), tag_rows)
    write_table(out_dir / "expansion.csv", ("short_url", "long_url"), sorted(expansion.items()))
    by_size = sorted(range(len(spec.camps)), key=lambda c: (-(spec.camps[c].verified), c))
    write_table(out_dir / "label_map.csv", ("community_id", "label", "political_flag"),
                [(rank, spec.camps[c].name, "true" if spec.camps[c].political else "false")
                 for rank, c in enumerate(by_size)])

    truth = {"spec": spec.to_dict(), "counts": truth_counts, "targets": scenario_targets(truth_counts),
             "users": [[u["id"], spec.camps[u["camp"]].name, u["verified"], u["cls"], u["score"]] for u in users],
             "files": {"tweets": "tweets.jsonl", "tags": "tags.csv", "expansion": "expansion.csv",
                       "label_map": "label_map.csv"}}
    with open(out_dir / "truth.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(truth, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return truth


def scenario_targets(counts: dict) -> dict:
    """Realised planted percentages, comparable with the report tables."""
    def pct(a, b):
        return 100.0 * a / b if b else 0.0
    pk = counts["political_kind_tweets"]
    tags = counts["political_kind_tags"]
    nlc = counts["political_link_class"]["N"]
    kept = sum(pk.values())
    return {
        "swing_share_pct": pct(pk["swing"], kept),
        "swing_T_pct": pct(tags["swing"]["T"], sum(tags["swing"].values())),
        "swing_N_pct": pct(tags["swing"]["N"], sum(tags["swing"].values())),
        "safe_T_pct": pct(tags["safe"]["T"], sum(tags["safe"].values())),
        "safe_N_pct": pct(tags["safe"]["N"], sum(tags["safe"].values())),
        "N_bot_share_pct": pct(nlc["bot"], nlc["bot"] + nlc["human"]),
        "noise_discard_pct": pct(counts["complete"] - kept, counts["complete"]),
    }
