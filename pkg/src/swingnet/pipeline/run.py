"""End-to-end pipeline as a chain of stages that communicate through files.

Every stage reads the files written by the previous ones from ``out_dir``
and writes its own, so each step can be inspected or re-run on its own:

=========================  ==================================================
``01_complete.jsonl``      English records naming exactly one state
``02_bipartite.tsv``       verified<TAB>unverified retweet incidence
``02_retweets.tsv``        retweeter<TAB>retweeted<TAB>count
``03_bicm.json``           BiCM solution for the bipartite degrees
``04_projection.tsv``      validated projection on verified accounts
``05_communities.tsv``     Louvain community of each verified account
``06_labels.tsv``          propagated label of every account
``07_validated.jsonl``     records by accounts with a political label
``08_bot_classes.tsv``     account<TAB>class for scored accounts
``report.json/.txt``       report tables
``fig_url_categories.csv`` URL tags in the complete and validated datasets
=========================  ==================================================
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

from ..bicm import SolverConfig, load_solution, save_solution, solve_bicm
from ..bigraph import (degrees, read_bipartite_edgelist, read_weighted_edgelist, write_bipartite_edgelist,
                       write_weighted_edgelist)
from ..community import (PropagationConfig, louvain, propagate_labels, read_assignment,
                         write_assignment)
from ..projval import read_projection, validate_projection, write_projection
from .bots import classify_bots
from .domains import DomainTagger, read_expansion_table, read_tag_table
from .networks import build_networks, filter_validated, read_label_map, seeds_from_communities
from .records import ingest_tweets, write_records
from .report import report, url_category_counts, write_figure_csv
from .states import AMBIGUOUS, DEFAULT_STATES, StateConfig, associate_state, filter_language

log = logging.getLogger(__name__)

COMPLETE = "01_complete.jsonl"
BIPARTITE = "02_bipartite.tsv"
RETWEETS = "02_retweets.tsv"
BICM = "03_bicm.json"
PROJECTION = "04_projection.tsv"
COMMUNITIES = "05_communities.tsv"
LABELS = "06_labels.tsv"
VALIDATED = "07_validated.jsonl"
BOT_CLASSES = "08_bot_classes.tsv"


class PipelineError(RuntimeError):
    """A stage cannot proceed on its input (e.g. nothing validated)."""


@dataclass(frozen=True)
class PipelineConfig:
    fdr_level: float = 0.05
    tolerance: float = 1e-8
    resolution: float = 1.0
    rng_seed: int = 0
    threads: int = 1
    political_labels: tuple | None = None
    bot_thresholds: tuple | None = None
    input_format: str = "jsonl"
    label_map: str | None = None
    tag_table: str | None = None
    expansion_table: str | None = None
    url_counting: str = "occurrence"
    max_sweeps: int = 100
    states: StateConfig = DEFAULT_STATES

    def __post_init__(self):
        if not 0 < self.fdr_level < 1:
            raise ValueError(f"fdr level {self.fdr_level} outside (0, 1)")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.bot_thresholds is not None:
            lo, hi = self.bot_thresholds
            if not 0 <= lo < hi <= 1:
                raise ValueError("bot thresholds must satisfy 0 <= lo < hi <= 1")

    def echo(self) -> dict:
        d = asdict(self)
        d["states"] = [list(s) for s in self.states.states]
        return d


def _tsv_rows(path):
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            yield line.split("\t")


def stage_prepare(input_path, out_dir, cfg: PipelineConfig) -> dict:
    records, ing = ingest_tweets(input_path, cfg.input_format)
    kept, non_en, none, ambiguous = [], 0, 0, 0
    per_state_mentions = {name: 0 for name, _ in cfg.states.states}
    for r in records:
        if not filter_language(r):
            non_en += 1
            continue
        for name in cfg.states.matches(r.text):
            per_state_mentions[name] += 1
        m = associate_state(r.text, cfg.states)
        if m is None:
            none += 1
        elif m is AMBIGUOUS:
            ambiguous += 1
        else:
            kept.append(r)
    write_records(Path(out_dir) / COMPLETE, kept)
    return {"lines": ing.lines, "records": ing.records, "malformed": ing.skipped, "non_english": non_en,
            "no_state": none, "ambiguous": ambiguous, "complete": len(kept),
            "state_mentions": per_state_mentions}


def stage_networks(out_dir) -> dict:
    out_dir = Path(out_dir)
    records, _ = ingest_tweets(out_dir / COMPLETE)
    nets = build_networks(records)
    write_bipartite_edgelist(out_dir / BIPARTITE, nets.bipartite, nets.verified, nets.unverified)
    write_weighted_edgelist(out_dir / RETWEETS, nets.retweets, nets.users)
    return {"verified": len(nets.verified), "unverified": len(nets.unverified),
            "bipartite_edges": nets.bipartite.n_edges, "retweet_nodes": nets.retweets.node_count,
            "retweet_edges": nets.retweets.n_edges, "self_retweets": nets.self_retweets}


def stage_solve(out_dir, cfg: PipelineConfig) -> dict:
    out_dir = Path(out_dir)
    g, _, _ = read_bipartite_edgelist(out_dir / BIPARTITE)
    sol = solve_bicm(degrees(g), SolverConfig(tolerance=cfg.tolerance))
    save_solution(out_dir / BICM, sol)
    return {"residual": sol.residual, "iterations": sol.iterations}


def stage_validate(out_dir, cfg: PipelineConfig) -> dict:
    out_dir = Path(out_dir)
    g, top, _ = read_bipartite_edgelist(out_dir / BIPARTITE)
    sol = load_solution(out_dir / BICM)
    proj = validate_projection(g, sol, cfg.fdr_level, threads=cfg.threads)
    write_projection(out_dir / PROJECTION, proj, top.ids)
    return {"tested_pairs": proj.tested, "validated_edges": len(proj.edges), "bh_threshold": proj.bh_threshold}


def stage_communities(out_dir, cfg: PipelineConfig) -> dict:
    out_dir = Path(out_dir)
    _, top, _ = read_bipartite_edgelist(out_dir / BIPARTITE)
    proj = read_projection(out_dir / PROJECTION, top.ids)
    if not proj.edges:
        raise PipelineError("validated projection has no edges; no communities to detect")
    comm = louvain(proj.to_graph(), cfg.resolution, cfg.rng_seed)
    write_assignment(out_dir / COMMUNITIES, comm, top.ids)
    sizes = sorted((len(m) for m in comm.communities().values()), reverse=True)
    return {"communities": len(sizes), "largest": sizes[:5]}


def _political_labels(cfg: PipelineConfig, label_map, seeds) -> set:
    if cfg.political_labels is not None:
        return set(cfg.political_labels)
    if label_map is not None:
        return set(label_map.political)
    return set(seeds.values())


def stage_propagate(out_dir, cfg: PipelineConfig) -> dict:
    out_dir = Path(out_dir)
    communities = read_assignment(out_dir / COMMUNITIES)
    label_map = read_label_map(cfg.label_map) if cfg.label_map else None
    seeds = seeds_from_communities(communities, label_map)
    rt, users = read_weighted_edgelist(out_dir / RETWEETS, directed=True)
    seed_idx = {users[u]: lab for u, lab in seeds.items() if u in users}
    labels = propagate_labels(rt, seed_idx, PropagationConfig(max_sweeps=cfg.max_sweeps, rng_seed=cfg.rng_seed))
    write_assignment(out_dir / LABELS, labels, users.ids)
    return {"seeds": len(seed_idx), "labeled": len(labels) - len(labels.unlabeled),
            "unlabeled": len(labels.unlabeled), "sweeps": labels.sweeps, "converged": labels.converged}


def stage_filter(out_dir, cfg: PipelineConfig) -> dict:
    out_dir = Path(out_dir)
    records, _ = ingest_tweets(out_dir / COMPLETE)
    labels = read_assignment(out_dir / LABELS)
    communities = read_assignment(out_dir / COMMUNITIES)
    label_map = read_label_map(cfg.label_map) if cfg.label_map else None
    political = _political_labels(cfg, label_map, seeds_from_communities(communities, label_map))
    kept, rep = filter_validated(records, labels, political)
    write_records(out_dir / VALIDATED, kept)
    d = asdict(rep)
    d["political_labels"] = sorted(political)
    d["discarded_share_pct"] = round(100.0 * (1 - rep.kept / len(records)), 4) if records else 0.0
    return d


def author_scores(records) -> dict:
    scores: dict = {}
    for r in records:
        if scores.get(r.author_id) is None:
            scores[r.author_id] = r.bot_score
    return scores


def make_tagger(cfg: PipelineConfig) -> DomainTagger:
    tags = read_tag_table(cfg.tag_table) if cfg.tag_table else {}
    expansion = read_expansion_table(cfg.expansion_table) if cfg.expansion_table else {}
    return DomainTagger(tags, expansion)


def stage_report(out_dir, cfg: PipelineConfig, validated_path=None, complete_path=None):
    out_dir = Path(out_dir)
    validated, _ = ingest_tweets(validated_path or out_dir / VALIDATED)
    classes = classify_bots(author_scores(validated), cfg.bot_thresholds)
    with open(out_dir / BOT_CLASSES, "w", encoding="utf-8", newline="\n") as fh:
        for acc in sorted(classes.classes):
            fh.write(f"{acc}\t{classes.classes[acc].value}\n")
    tagger = make_tagger(cfg)
    tables = report(validated, tagger, classes, cfg.states, cfg.url_counting)
    tables.diagnostics["bot_cut_points"] = [classes.human_cut, classes.bot_cut]
    tables.diagnostics["scored_accounts"] = classes.scored
    (out_dir / "report.json").write_text(tables.to_json(), encoding="utf-8")
    (out_dir / "report.txt").write_text(tables.render_text(), encoding="utf-8")
    stages = {}
    complete_path = complete_path or (out_dir / COMPLETE if (out_dir / COMPLETE).exists() else None)
    if complete_path is not None:
        complete, _ = ingest_tweets(complete_path)
        stages["complete"] = url_category_counts(complete, tagger)
    stages["validated"] = url_category_counts(validated, tagger)
    write_figure_csv(out_dir / "fig_url_categories.csv", stages)
    return tables


def run_pipeline(input_path, out_dir, cfg: PipelineConfig | None = None):
    """Run every stage in order. Returns ``(ReportTables, per-stage diagnostics)``."""
    cfg = cfg or PipelineConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    diag = {}
    diag["prepare"] = stage_prepare(input_path, out_dir, cfg)
    diag["networks"] = stage_networks(out_dir)
    diag["solve"] = stage_solve(out_dir, cfg)
    diag["validate"] = stage_validate(out_dir, cfg)
    diag["communities"] = stage_communities(out_dir, cfg)
    diag["propagate"] = stage_propagate(out_dir, cfg)
    diag["filter"] = stage_filter(out_dir, cfg)
    tables = stage_report(out_dir, cfg)
    tables.diagnostics["stages"] = diag
    (out_dir / "report.json").write_text(tables.to_json(), encoding="utf-8")
    (out_dir / "stages.json").write_text(json.dumps(diag, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return tables, diag
